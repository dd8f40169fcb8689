// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance                 run all criteria
//   acceptance --criterion N   run criterion N only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "coxsplit/coxsplit.hpp"
#include "oracles.hpp"
#include "reference_tables.hpp"

namespace {

using namespace coxsplit;
using Clock = std::chrono::steady_clock;

struct Check {
  bool ok = true;
  std::vector<std::string> notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back("  fail: " + what);
    }
  }
  void info(const std::string& what) { notes.push_back("  " + what); }
};

std::string num(double x, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1. Effective-power grid against the reference values, at displayed precision.
Check power_grid() {
  Check c;
  const auto t0 = Clock::now();
  const auto grid = reference_power_grid();
  const double elapsed = seconds_since(t0);
  int matched = 0;
  for (const auto& cell : reference::power_cells()) {
    const bool exact = cell.split_fraction == 0.0;
    double value = NAN;
    for (const auto& e : grid) {
      if (e.query.alpha == cell.alpha && e.query.m == cell.m && e.query.delta == cell.delta &&
          (exact ? e.procedure == Procedure::exact
                 : e.procedure == Procedure::split && e.query.split_fraction == cell.split_fraction)) {
        value = e.value;
      }
    }
    const bool ok = reference::matches_printed(value, cell.printed);
    matched += ok;
    c.expect(ok, "alpha=" + num(cell.alpha) + " m=" + std::to_string(cell.m) + " delta=" +
                     num(cell.delta) + " column=" + (exact ? std::string("exact") : num(cell.split_fraction)) +
                     ": computed " + num(value, 4) + " (" + format_power(value) + "), reference " +
                     cell.printed);
  }
  c.info(std::to_string(matched) + "/56 cells match, " + num(elapsed, 3) + " s");
  c.expect(elapsed < 5.0, "runtime " + num(elapsed) + " s >= 5 s");
  return c;
}

// 2. Calibration table at displayed precision.
Check calibration_table() {
  Check c;
  const auto t0 = Clock::now();
  for (const auto& row : reference::calibration_rows()) {
    const double s = calibrate(row.p, CalibratorKind::shafer());
    const double vs = calibrate(row.p, CalibratorKind::vs_bound());
    c.expect(reference::matches_printed(s, row.shafer),
             "S(" + num(row.p) + ") = " + num(s) + ", reference " + row.shafer);
    c.expect(reference::matches_printed(vs, row.vs),
             "VS(" + num(row.p) + ") = " + num(vs) + ", reference " + row.vs);
  }
  const double elapsed = seconds_since(t0);
  c.info("14 entries checked, " + num(elapsed, 3) + " s");
  c.expect(elapsed < 1.0, "runtime " + num(elapsed) + " s");
  return c;
}

// 3. ECDF of exact p-values at m=2, delta=2 over 10^4 datasets.
Check exact_pvalue_ecdf() {
  Check c;
  const auto t0 = Clock::now();
  ExperimentConfig cfg;
  cfg.m = 2;
  cfg.delta = 2.0;
  const std::vector<double> grid{0.1, 0.01};
  const auto F = pvalue_ecdf(cfg, 10'000, grid);
  const double elapsed = seconds_since(t0);
  const double f10 = F[0].second;
  const double f01 = F[1].second;
  c.info("F(0.1) = " + num(f10) + ", F(0.01) = " + num(f01) + ", " + num(elapsed, 3) + " s");
  c.expect(std::abs(f10 - 0.670) <= 0.015, "F(0.1) outside 0.670 +- 0.015");
  c.expect(std::abs(f01 - 0.297) <= 0.015, "F(0.01) outside 0.297 +- 0.015");
  c.expect(f10 > 0.64, "F(0.1) does not exceed 0.64");
  c.expect(f01 > 0.28, "F(0.01) does not exceed 0.28");
  c.expect(elapsed < 30.0, "runtime " + num(elapsed) + " s >= 30 s");
  return c;
}

// 4. Null calibration at delta=0 for m in {2, 10}.
Check null_calibration() {
  Check c;
  const auto t0 = Clock::now();
  for (int m : {2, 10}) {
    ExperimentConfig cfg;
    cfg.m = m;
    cfg.delta = 0.0;
    std::vector<double> exact_ps, split_ps, es;
    exact_ps.reserve(10'000);
    split_ps.reserve(10'000);
    es.reserve(100'000);
    for (std::uint64_t d = 0; d < 100'000; ++d) {
      const Dataset data = generate_dataset(cfg, d);
      const SplitOutcome o = evaluate_split(data, random_split(cfg, d, 0), cfg);
      es.push_back(*o.e_value);
      if (d < 10'000) {
        exact_ps.push_back(exact_pvalue(data, cfg));
        split_ps.push_back(o.p_value);
      }
    }
    const double ks_exact = oracle::ks_uniform_statistic(exact_ps);
    const double ks_split = oracle::ks_uniform_statistic(split_ps);
    const auto e = oracle::mean_se(es);
    const std::string tag = "m=" + std::to_string(m) + ": ";
    c.info(tag + "KS exact " + num(ks_exact, 4) + ", KS split " + num(ks_split, 4) + ", mean e " +
           num(e.mean, 5) + " (se " + num(e.se, 3) + ")");
    c.expect(ks_exact < 0.02, tag + "KS of exact p-values >= 0.02");
    c.expect(ks_split < 0.02, tag + "KS of data-split p-values >= 0.02");
    c.expect(std::abs(e.mean - 1.0) <= 0.05, tag + "mean e-value outside 1.00 +- 0.05");
  }
  const double elapsed = seconds_since(t0);
  c.info(num(elapsed, 3) + " s");
  c.expect(elapsed < 60.0, "runtime " + num(elapsed) + " s >= 60 s");
  return c;
}

// Average e-value over K splits of one dataset; run rho uses split indices
// rho*K .. rho*K + K - 1, so runs are independent.
double k_split_average(const Dataset& data, const ExperimentConfig& cfg, int k, int rho) {
  double sum = 0.0;
  for (int s = 0; s < k; ++s) {
    const auto idx = static_cast<std::uint64_t>(rho) * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(s);
    sum += *evaluate_split(data, random_split(cfg, 0, idx), cfg).e_value;
  }
  return sum / k;
}

// 5. Derandomization: spread of the K-split average shrinks like 1/sqrt(K).
Check derandomization() {
  Check c;
  ExperimentConfig cfg;
  cfg.m = 2;
  cfg.delta = 2.0;
  const Dataset data = generate_dataset(cfg, 0);
  constexpr int kRuns = 200;
  std::vector<double> sds;
  for (int k : {10, 100, 1000}) {
    std::vector<double> avgs;
    for (int rho = 0; rho < kRuns; ++rho) avgs.push_back(k_split_average(data, cfg, k, rho));
    sds.push_back(oracle::mean_se(avgs).sd);
  }
  c.info("sd at K=10/100/1000: " + num(sds[0]) + " / " + num(sds[1]) + " / " + num(sds[2]));
  for (std::size_t i = 0; i + 1 < sds.size(); ++i) {
    const double ratio = sds[i] / sds[i + 1];
    c.info("ratio " + num(ratio, 4));
    c.expect(ratio >= 2.5 && ratio <= 4.0, "sd ratio " + num(ratio) + " outside [2.5, 4]");
  }

  ExperimentConfig tiny;
  tiny.m = 2;
  tiny.r = 5;
  tiny.split_fraction = 0.4;
  tiny.delta = 2.0;
  const Dataset small = generate_dataset(tiny, 0);
  const double full = enumerate_all_splits(small, tiny);
  std::vector<double> es;
  es.reserve(100'000);
  for (std::uint64_t s = 0; s < 100'000; ++s) es.push_back(*evaluate_split(small, random_split(tiny, 0, s), tiny).e_value);
  const auto mc = oracle::mean_se(es);
  c.info("r=5: enumeration " + num(full, 8) + ", Monte Carlo " + num(mc.mean, 8) + " (se " + num(mc.se, 3) + ")");
  c.expect(std::abs(mc.mean - full) <= 3.0 * mc.se, "Monte Carlo average more than 3 se from enumeration");
  return c;
}

// 6. Identities.
Check identities() {
  Check c;
  double worst_null = 0.0;
  for (int m = 1; m <= 10; ++m) {
    for (double alpha : {0.1, 0.01}) {
      worst_null = std::max(worst_null, std::abs(exact_power({m, 0.0, 0.5, alpha}) - alpha / m));
      for (double p : {0.2, 0.4, 0.6}) {
        worst_null = std::max(worst_null, std::abs(split_power({m, 0.0, p, alpha}) - alpha / m));
      }
    }
  }
  c.info("max |power(delta=0) - alpha/m| = " + num(worst_null, 3));
  c.expect(worst_null <= 1e-9, "null power identity");

  // p = u^2 removes the singularity of S at 0.
  const double integral = integrate(
      [](double u) { return u == 0.0 ? 0.0 : calibrate(u * u, CalibratorKind::shafer()) * 2.0 * u; },
      {0.0, 1.0, 1e-12});
  c.info("integral of S over (0,1) = " + num(integral, 15));
  c.expect(std::abs(integral - 1.0) <= 1e-9, "integral of S");

  double worst_round = 0.0;
  for (double lp = -12.0; lp <= 0.0; lp += 0.01) {
    const double p = std::pow(10.0, lp);
    worst_round = std::max(worst_round, std::abs(shafer_inverse(calibrate(p, CalibratorKind::shafer())) - p));
  }
  c.info("max Shafer round-trip error = " + num(worst_round, 3));
  c.expect(worst_round <= 1e-12, "Shafer round trip");

  std::vector<double> eps;
  for (int i = 1; i <= 999; ++i) eps.push_back(i / 1000.0);
  bool dominated = true;
  for (double lp = -12.0; lp < 0.0; lp += 0.05) dominated = dominated && vs_is_supremum(std::pow(10.0, lp), eps);
  c.expect(dominated, "VS bound dominance on the 999-point epsilon grid");
  return c;
}

// 7. Structural checks on figure data and plots.
Check structure() {
  Check c;
  struct Setup {
    int m;
    double delta;
    PlotDomain domain;
  };
  const Setup setups[] = {{2, 1, PlotDomain::p},  {2, 4, PlotDomain::p},  {2, 2, PlotDomain::p},
                          {10, 2, PlotDomain::p}, {10, 4, PlotDomain::p}, {2, 2, PlotDomain::e},
                          {10, 6, PlotDomain::p}, {10, 6, PlotDomain::e}};
  const auto count = [](const std::string& s, const std::string& needle) {
    int n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
  };
  for (const auto& setup : setups) {
    ExperimentConfig cfg;
    cfg.m = setup.m;
    cfg.delta = setup.delta;
    const std::string tag = "m=" + std::to_string(setup.m) + " delta=" + num(setup.delta) +
                            (setup.domain == PlotDomain::p ? " p: " : " e: ");
    c.expect(match_figure(cfg, setup.domain).has_value(), tag + "no figure mapping");
    const auto result = run_experiment(cfg);
    c.expect(result.figure.records.size() == 10u, tag + "dataset count");
    for (const auto& r : result.figure.records) {
      const auto& b = r.box;
      c.expect(b.min <= b.whisker_low && b.whisker_low <= b.q1 && b.q1 <= b.median && b.median <= b.q3 &&
                   b.q3 <= b.whisker_high && b.whisker_high <= b.max,
               tag + "boxplot ordering, dataset " + std::to_string(r.dataset_index));
      c.expect(r.vs_of_exact_p >= 1.0, tag + "VS bound below 1");
      c.expect(r.sinv_of_avg_e > 0.0 && r.sinv_of_avg_e <= 1.0, tag + "S^-1 of average e outside (0, 1]");
    }
    const std::string svg = render_svg(result.figure, {setup.domain, false});
    const std::string svg_vs = render_svg(result.figure, {setup.domain, true});
    if (setup.domain == PlotDomain::p) {
      c.expect(count(svg, "class=\"box\"") == 10, tag + "box count");
      c.expect(count(svg, "class=\"series\"") == 2, tag + "series count");
    } else {
      c.expect(count(svg, "class=\"box\"") == 0, tag + "box count");
      c.expect(count(svg, "class=\"series\"") == 2, tag + "series count");
      c.expect(count(svg_vs, "class=\"series\"") == 3, tag + "series count with VS");
    }

    std::ostringstream a, b, t;
    write_csv(result.figure, a);
    write_csv(run_experiment(cfg).figure, b);
    write_csv(run_experiment(cfg, {3, false}).figure, t);
    c.expect(a.str() == b.str(), tag + "repeat run differs");
    c.expect(a.str() == t.str(), tag + "threaded run differs");
    ExperimentConfig other = cfg;
    other.seed = cfg.seed + 1;
    std::ostringstream o;
    write_csv(run_experiment(other).figure, o);
    c.expect(a.str() != o.str(), tag + "different seed gives identical output");
  }
  c.info("8 figure setups checked");
  return c;
}

const std::vector<std::pair<std::string, std::function<Check()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Check()>>> list = {
      {"effective-power grid", power_grid},
      {"calibration table", calibration_table},
      {"exact p-value ECDF", exact_pvalue_ecdf},
      {"null calibration", null_calibration},
      {"derandomization", derandomization},
      {"identities", identities},
      {"structure and determinism", structure},
  };
  return list;
}

bool run_one(std::size_t n) {
  const auto& [name, fn] = criteria()[n - 1];
  Check c;
  try {
    c = fn();
  } catch (const std::exception& e) {
    c.ok = false;
    c.notes.push_back(std::string("  exception: ") + e.what());
  }
  std::printf("%s criterion %zu: %s\n", c.ok ? "PASS" : "FAIL", n, name.c_str());
  for (const auto& note : c.notes) std::printf("%s\n", note.c_str());
  std::fflush(stdout);
  return c.ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> which;
  if (argc == 3 && std::string(argv[1]) == "--criterion") {
    const long n = std::strtol(argv[2], nullptr, 10);
    if (n < 1 || n > static_cast<long>(criteria().size())) {
      std::fprintf(stderr, "criterion must be 1..%zu\n", criteria().size());
      return 2;
    }
    which.push_back(static_cast<std::size_t>(n));
  } else if (argc == 1) {
    for (std::size_t n = 1; n <= criteria().size(); ++n) which.push_back(n);
  } else {
    std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
    return 2;
  }
  bool all = true;
  for (std::size_t n : which) all = run_one(n) && all;
  return all ? 0 : 1;
}
