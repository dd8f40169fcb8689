#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <cfloat>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "coxsplit/boxplot.hpp"
#include "coxsplit/calibration.hpp"
#include "coxsplit/errors.hpp"
#include "coxsplit/rng.hpp"
#include "coxsplit/simulation.hpp"

namespace coxsplit {

inline constexpr const char* kSoftwareVersion = "1.0.0";

enum class FigureId { F1 = 1, F2, F3, F4, F5, F6, F7, F8 };
enum class PlotDomain { p, e };

/// The standard figure layout a configuration corresponds to, if any. F8 is the
/// p-value distribution function and is produced by pvalue_ecdf.
inline std::optional<FigureId> match_figure(const ExperimentConfig& cfg, PlotDomain domain) {
  const auto is = [&](int m, double delta) { return cfg.m == m && cfg.delta == delta; };
  if (domain == PlotDomain::e) {
    if (is(2, 2)) return FigureId::F5;
    if (is(10, 6)) return FigureId::F7;
    return std::nullopt;
  }
  if (is(2, 1)) return FigureId::F1;
  if (is(2, 4)) return FigureId::F2;
  if (is(2, 2)) return FigureId::F3;
  if (is(10, 2) || is(10, 4)) return FigureId::F4;
  if (is(10, 6)) return FigureId::F6;
  return std::nullopt;
}

// One row of figure data: the split p-values of a dataset summarized as a
// boxplot, alongside the exact p-value and the split-averaged e-value in both
// domains.
struct DatasetRecord {
  int dataset_index = 0;
  BoxplotSummary box;
  double exact_p = 0.0;
  double avg_e = 0.0;
  double shafer_e_of_exact_p = 0.0;
  double vs_of_exact_p = 0.0;  // not a valid e-value
  double sinv_of_avg_e = 0.0;
  bool saturated = false;
};

struct FigureData {
  std::optional<FigureId> figure_id;
  std::vector<DatasetRecord> records;
};

struct RunManifest {
  ExperimentConfig config;
  std::string generator_name{kGeneratorName};
  std::string software_version{kSoftwareVersion};
  std::string timestamp;
  std::vector<std::string> output_paths;
};

struct RunOptions {
  unsigned threads = 1;
  bool keep_splits = false;
};

struct ExperimentResult {
  FigureData figure;
  // Per dataset, every split outcome; filled only with RunOptions::keep_splits.
  std::vector<std::vector<SplitOutcome>> splits;
};

namespace detail {

// Runs body(i) for i in [0, n). Each index is processed exactly once, so the
// result is the same for any thread count.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// Calibrators are defined on (0, 1]; an exact p-value that underflowed to 0
// is mapped to the smallest normal double.
inline double calibrable(double p) { return std::clamp(p, DBL_MIN, 1.0); }

}  // namespace detail

inline DatasetRecord summarize_dataset(int dataset_index, std::span<const SplitOutcome> outcomes,
                                       double exact_p) {
  if (outcomes.empty()) throw ValidationError("summarize_dataset: no split outcomes");
  std::vector<double> ps;
  std::vector<double> es;
  ps.reserve(outcomes.size());
  es.reserve(outcomes.size());
  DatasetRecord rec;
  rec.dataset_index = dataset_index;
  for (const auto& o : outcomes) {
    ps.push_back(o.p_value);
    es.push_back(o.e_value.value_or(evalue(o.a, o.b, o.sigma).value));
    rec.saturated = rec.saturated || o.saturated;
  }
  rec.box = boxplot_summary(ps);
  rec.exact_p = exact_p;
  rec.avg_e = average_evalues(es);
  rec.shafer_e_of_exact_p = calibrate(detail::calibrable(exact_p), CalibratorKind::shafer());
  rec.vs_of_exact_p = calibrate(detail::calibrable(exact_p), CalibratorKind::vs_bound());
  rec.sinv_of_avg_e = shafer_inverse(rec.avg_e);
  return rec;
}

/// For every dataset: n_splits random splits, each giving a data-split p-value
/// and an e-value from the same split; plus the exact p-value and the derived
/// calibrated quantities.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.n_datasets);
  ExperimentResult result;
  result.figure.figure_id = match_figure(cfg, PlotDomain::p);
  result.figure.records.resize(n);
  if (opts.keep_splits) result.splits.resize(n);

  detail::parallel_for(n, opts.threads, [&](std::size_t d) {
    const Dataset data = generate_dataset(cfg, d);
    std::vector<SplitOutcome> outcomes;
    outcomes.reserve(static_cast<std::size_t>(cfg.n_splits));
    for (int s = 0; s < cfg.n_splits; ++s) {
      outcomes.push_back(evaluate_split(data, random_split(cfg, d, static_cast<std::uint64_t>(s)), cfg));
    }
    result.figure.records[d] = summarize_dataset(static_cast<int>(d), outcomes, exact_pvalue(data, cfg));
    if (opts.keep_splits) result.splits[d] = std::move(outcomes);
  });
  return result;
}

/// Empirical distribution function of exact p-values over n_reps fresh
/// datasets (indices 0 .. n_reps-1 of cfg's seed), evaluated on grid.
inline std::vector<std::pair<double, double>> pvalue_ecdf(const ExperimentConfig& cfg, int n_reps,
                                                          std::span<const double> grid,
                                                          unsigned threads = 1) {
  cfg.validate();
  if (n_reps < 1) throw ValidationError("pvalue_ecdf: n_reps must be >= 1");
  std::vector<double> ps(static_cast<std::size_t>(n_reps));
  detail::parallel_for(ps.size(), threads,
                       [&](std::size_t i) { ps[i] = exact_pvalue(generate_dataset(cfg, i), cfg); });
  std::sort(ps.begin(), ps.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double alpha : grid) {
    const auto below = std::upper_bound(ps.begin(), ps.end(), alpha) - ps.begin();
    out.emplace_back(alpha, static_cast<double>(below) / n_reps);
  }
  return out;
}

}  // namespace coxsplit
