// coxsplit: command-line front end for the data-splitting experiments.
//
//   coxsplit power-table   effective powers by quadrature (reference grid by default)
//   coxsplit simulate      split/exact p-values and averaged e-values per dataset
//   coxsplit calibrate     p -> e calibration table (and e -> p with --e)
//   coxsplit ecdf          distribution function of exact p-values
//   coxsplit plot          SVG from a CSV written by `simulate`
//
// Exit status: 0 success, 1 validation error, 2 numerical or I/O failure.

#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "coxsplit/coxsplit.hpp"

namespace {

using namespace coxsplit;

struct SimFlags {
  std::string config_path;
  std::optional<int> m, r, datasets, splits;
  std::optional<double> p, delta, sigma0;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "flat key = value config file");
    app->add_option("--m", m, "number of populations");
    app->add_option("--r", r, "sample size per population");
    app->add_option("--p", p, "first-portion fraction");
    app->add_option("--delta", delta, "standardized signal mu*sqrt(r)/sigma0");
    app->add_option("--sigma0", sigma0, "known common standard deviation");
    app->add_option("--datasets", datasets, "number of datasets");
    app->add_option("--splits", splits, "random splits per dataset");
    app->add_option("--seed", seed, "master RNG seed");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = read_config_file(config_path, cfg);
    if (m) cfg.m = *m;
    if (r) cfg.r = *r;
    if (p) cfg.split_fraction = *p;
    if (delta) cfg.delta = *delta;
    if (sigma0) cfg.sigma0 = *sigma0;
    if (datasets) cfg.n_datasets = *datasets;
    if (splits) cfg.n_splits = *splits;
    if (seed) cfg.seed = *seed;
    cfg.validate();
    return cfg;
  }
};

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text_file(out_path, text);
  }
}

PlotDomain parse_domain(const std::string& s) { return s == "e" ? PlotDomain::e : PlotDomain::p; }

int run_power_table(const std::vector<double>& alphas, const std::vector<int>& ms,
                    const std::vector<double>& deltas, const std::vector<double>& ps,
                    const std::string& format, const std::string& out_path) {
  std::vector<PowerTableEntry> table;
  if (alphas.empty() && ms.empty() && deltas.empty() && ps.empty()) {
    table = reference_power_grid();
  } else {
    const std::vector<double> a = alphas.empty() ? std::vector<double>{0.1, 0.01} : alphas;
    const std::vector<int> m = ms.empty() ? std::vector<int>{2, 10} : ms;
    const std::vector<double> d = deltas.empty() ? std::vector<double>{1, 2, 4} : deltas;
    const std::vector<double> p = ps.empty() ? std::vector<double>{0.2, 0.4, 0.6} : ps;
    table = power_table(a, m, d, p);
  }
  std::ostringstream out;
  if (format == "json") {
    auto arr = nlohmann::json::array();
    for (const auto& e : table) {
      arr.push_back({{"alpha", e.query.alpha},
                     {"m", e.query.m},
                     {"delta", e.query.delta},
                     {"procedure", e.procedure == Procedure::exact ? "exact" : "split"},
                     {"split_fraction", e.procedure == Procedure::exact
                                            ? nlohmann::json(nullptr)
                                            : nlohmann::json(e.query.split_fraction)},
                     {"value", e.value},
                     {"display", format_power(e.value)}});
    }
    out << arr.dump(2) << '\n';
  } else {
    out << "alpha,m,delta,procedure,split_fraction,value,display\n";
    for (const auto& e : table) {
      const bool exact = e.procedure == Procedure::exact;
      out << format_double(e.query.alpha) << ',' << e.query.m << ','
          << format_double(e.query.delta) << ',' << (exact ? "exact" : "split") << ','
          << (exact ? std::string{} : format_double(e.query.split_fraction)) << ','
          << format_double(e.value) << ',' << format_power(e.value) << '\n';
    }
  }
  emit(out.str(), out_path);
  return 0;
}

int run_simulate(const SimFlags& flags, const std::string& format, const std::string& out_path,
                 const std::string& svg_path, const std::string& domain, bool show_vs,
                 bool full_splits, unsigned threads) {
  const ExperimentConfig cfg = flags.resolve();
  const ExperimentResult result = run_experiment(cfg, {threads, full_splits});
  RunManifest manifest;
  manifest.config = cfg;
  manifest.timestamp = utc_timestamp();

  const PlotDomain dom = parse_domain(domain);
  if (!svg_path.empty()) {
    FigureData fig = result.figure;
    fig.figure_id = match_figure(cfg, dom);
    emit_svg(fig, svg_path, {dom, show_vs});
    manifest.output_paths.push_back(svg_path);
  }

  if (format == "json") {
    if (!out_path.empty()) manifest.output_paths.insert(manifest.output_paths.begin(), out_path);
    emit(experiment_json(result, manifest).dump(2) + "\n", out_path);
    return 0;
  }
  std::ostringstream csv;
  write_csv(result.figure, csv);
  if (out_path.empty()) {
    std::cout << csv.str();
    return 0;
  }
  const std::string manifest_path = out_path + ".manifest.json";
  manifest.output_paths.insert(manifest.output_paths.begin(), {out_path, manifest_path});
  write_text_file(out_path, csv.str());
  nlohmann::json mj = to_json(manifest);
  if (full_splits) mj["splits"] = experiment_json(result, manifest)["splits"];
  write_text_file(manifest_path, mj.dump(2) + "\n");
  return 0;
}

int run_calibrate(const std::vector<double>& ps_in, const std::vector<double>& es,
                  const std::vector<double>& epsilons, bool show_vs, const std::string& format,
                  const std::string& out_path) {
  const std::vector<double> ps =
      ps_in.empty() && es.empty() ? std::vector<double>{1, 0.1, 0.05, 0.01, 0.005, 0.001, 1e-6}
                                  : ps_in;
  std::vector<CalibratorKind> eps_kinds;
  for (double e : epsilons) eps_kinds.push_back(CalibratorKind::epsilon(e));

  std::ostringstream out;
  if (format == "json") {
    nlohmann::json j;
    j["p_to_e"] = nlohmann::json::array();
    for (double p : ps) {
      nlohmann::json row{{"p", p},
                         {"one_over_p", 1.0 / p},
                         {"shafer", calibrate(p, CalibratorKind::shafer())}};
      const auto jeff = jeffreys_anchor(p);
      row["jeffreys"] = jeff ? nlohmann::json(*jeff) : nlohmann::json(nullptr);
      for (const auto& k : eps_kinds) row[k.name()] = calibrate(p, k);
      if (show_vs) {
        row["vs_bound"] = calibrate(p, CalibratorKind::vs_bound());
        row["vs_bound_note"] = kVsBoundNote;
      }
      j["p_to_e"].push_back(row);
    }
    j["e_to_p"] = nlohmann::json::array();
    for (double e : es) {
      j["e_to_p"].push_back({{"e", e},
                             {"reciprocal_p", e_to_p(e)},
                             {"shafer_inverse", shafer_inverse(e)},
                             {"verdict", to_string(jeffreys_verdict(e))}});
    }
    out << j.dump(2) << '\n';
  } else {
    if (!ps.empty()) {
      out << "p,one_over_p,shafer,jeffreys";
      for (const auto& k : eps_kinds) out << ',' << k.name();
      if (show_vs) out << ",vs_bound";
      out << '\n';
      for (double p : ps) {
        const auto jeff = jeffreys_anchor(p);
        out << format_double(p) << ',' << format_double(1.0 / p) << ','
            << format_double(calibrate(p, CalibratorKind::shafer())) << ','
            << (jeff ? format_double(*jeff) : std::string{});
        for (const auto& k : eps_kinds) out << ',' << format_double(calibrate(p, k));
        if (show_vs) out << ',' << format_double(calibrate(p, CalibratorKind::vs_bound()));
        out << '\n';
      }
      if (show_vs) out << "# " << kVsBoundNote << '\n';
    }
    if (!es.empty()) {
      out << "e,reciprocal_p,shafer_inverse,verdict\n";
      for (double e : es) {
        out << format_double(e) << ',' << format_double(e_to_p(e)) << ','
            << format_double(shafer_inverse(e)) << ',' << to_string(jeffreys_verdict(e)) << '\n';
      }
    }
  }
  emit(out.str(), out_path);
  return 0;
}

int run_ecdf(const SimFlags& flags, int reps, std::vector<double> grid, const std::string& format,
             const std::string& out_path, unsigned threads) {
  const ExperimentConfig cfg = flags.resolve();
  if (grid.empty()) grid = {0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0};
  const auto ecdf = pvalue_ecdf(cfg, reps, grid, threads);
  std::ostringstream out;
  const auto power_at = [&](double alpha) -> std::optional<double> {
    if (!(alpha > 0.0 && alpha < 1.0)) return std::nullopt;
    return exact_power({cfg.m, cfg.delta, 0.5, alpha});
  };
  if (format == "json") {
    auto arr = nlohmann::json::array();
    for (const auto& [alpha, f] : ecdf) {
      const auto pw = power_at(alpha);
      arr.push_back({{"alpha", alpha},
                     {"F", f},
                     {"exact_effective_power", pw ? nlohmann::json(*pw) : nlohmann::json(nullptr)}});
    }
    nlohmann::json j{{"config", to_json(cfg)}, {"n_reps", reps}, {"ecdf", arr}};
    out << j.dump(2) << '\n';
  } else {
    out << "alpha,F,exact_effective_power\n";
    for (const auto& [alpha, f] : ecdf) {
      const auto pw = power_at(alpha);
      out << format_double(alpha) << ',' << format_double(f) << ','
          << (pw ? format_double(*pw) : std::string{}) << '\n';
    }
  }
  emit(out.str(), out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hypothesis testing by data splitting: p-values, e-values, calibration"};
  app.require_subcommand(1);

  // power-table
  auto* power = app.add_subcommand("power-table", "effective powers of split and exact procedures");
  std::vector<double> alphas, deltas, ps;
  std::vector<int> ms;
  std::string format = "csv";
  std::string out_path;
  power->add_option("--alpha", alphas, "significance levels");
  power->add_option("--m", ms, "numbers of populations");
  power->add_option("--delta", deltas, "standardized signals");
  power->add_option("--p", ps, "first-portion fractions");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run the split / exact / e-value experiment");
  SimFlags sim;
  sim.add_to(simulate);
  std::string svg_path, domain = "p";
  bool show_vs = false, full_splits = false;
  unsigned threads = 1;
  simulate->add_option("--svg", svg_path, "also write an SVG plot");
  simulate->add_option("--domain", domain, "plot domain")->check(CLI::IsMember({"p", "e"}));
  simulate->add_flag("--show-vs", show_vs, "include the VS bound (not a valid e-value)");
  simulate->add_flag("--full-splits", full_splits, "dump every split outcome");
  simulate->add_option("--threads", threads, "worker threads");

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "p-to-e calibration table");
  std::vector<double> cal_ps, cal_es, epsilons;
  cal->add_option("--p", cal_ps, "p-values to calibrate");
  cal->add_option("--e", cal_es, "e-values to convert back and classify");
  cal->add_option("--epsilon", epsilons, "also apply epsilon * p^(epsilon-1)");
  cal->add_flag("--show-vs", show_vs, "include the VS bound (not a valid e-value)");

  // ecdf
  auto* ecdf = app.add_subcommand("ecdf", "distribution function of exact p-values");
  SimFlags ecdf_flags;
  ecdf_flags.add_to(ecdf);
  int reps = 10000;
  std::vector<double> grid;
  ecdf->add_option("--reps", reps, "number of simulated datasets");
  ecdf->add_option("--grid", grid, "significance levels at which to evaluate F");
  ecdf->add_option("--threads", threads, "worker threads");

  // plot
  auto* plot = app.add_subcommand("plot", "render an SVG from a simulate CSV");
  std::string in_path;
  plot->add_option("--in", in_path, "CSV written by simulate")->required();
  plot->add_option("--svg", svg_path, "output SVG")->required();
  plot->add_option("--domain", domain, "plot domain")->check(CLI::IsMember({"p", "e"}));
  plot->add_flag("--show-vs", show_vs, "include the VS bound (not a valid e-value)");

  for (auto* sub : {power, simulate, cal, ecdf}) {
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", out_path, "output file (default stdout)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*power) return run_power_table(alphas, ms, deltas, ps, format, out_path);
    if (*simulate) {
      return run_simulate(sim, format, out_path, svg_path, domain, show_vs, full_splits, threads);
    }
    if (*cal) return run_calibrate(cal_ps, cal_es, epsilons, show_vs, format, out_path);
    if (*ecdf) return run_ecdf(ecdf_flags, reps, grid, format, out_path, threads);
    if (*plot) {
      emit_svg(read_csv(in_path), svg_path, {parse_domain(domain), show_vs});
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
