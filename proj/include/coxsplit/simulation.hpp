#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coxsplit/errors.hpp"
#include "coxsplit/numeric.hpp"
#include "coxsplit/rng.hpp"

namespace coxsplit {

inline constexpr std::uint64_t kDefaultSeed = 20201012;

// One Cox experiment: m normal samples of size r, one of which has mean
// mu = delta * sigma0 / sqrt(r); each sample is split into a first portion of
// size split_fraction * r and a second portion holding the rest.
struct ExperimentConfig {
  int m = 2;
  int r = 100;
  double split_fraction = 0.4;
  double delta = 1.0;
  double sigma0 = 1.0;
  int n_datasets = 10;
  int n_splits = 100;
  std::uint64_t seed = kDefaultSeed;

  double mu() const { return delta * sigma0 / std::sqrt(static_cast<double>(r)); }

  int first_portion_size() const {
    return static_cast<int>(std::lround(split_fraction * r));
  }

  // Standard deviation of a second-portion mean.
  double second_portion_sigma() const {
    return sigma0 / std::sqrt((1.0 - split_fraction) * r);
  }

  void validate() const {
    if (m < 1) throw ValidationError("config: m must be >= 1");
    if (r < 2) throw ValidationError("config: r must be >= 2");
    if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
      throw ValidationError("config: split_fraction must lie in (0, 1)");
    }
    if (!std::isfinite(delta) || delta < 0.0) {
      throw ValidationError("config: delta must be finite and >= 0");
    }
    if (!std::isfinite(sigma0) || !(sigma0 > 0.0)) {
      throw ValidationError("config: sigma0 must be positive");
    }
    if (n_datasets < 1) throw ValidationError("config: n_datasets must be >= 1");
    if (n_splits < 1) throw ValidationError("config: n_splits must be >= 1");
    const double first = split_fraction * r;
    if (std::abs(first - std::round(first)) > 1e-9) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "config: split_fraction * r = %g is not a whole number; both "
                    "portions of each sample must have integer size",
                    first);
      throw ValidationError(buf);
    }
    if (first_portion_size() < 1 || first_portion_size() > r - 1) {
      throw ValidationError("config: both portions of each sample must be nonempty");
    }
  }
};

// m samples of r observations, row-major.
struct Dataset {
  int m = 0;
  int r = 0;
  std::vector<double> values;
  int true_mean_index = 0;

  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * r, static_cast<std::size_t>(r)};
  }
  std::span<double> row(int i) {
    return {values.data() + static_cast<std::size_t>(i) * r, static_cast<std::size_t>(r)};
  }
};

// Sorted first-portion indices for each population, each of size k.
struct SplitAssignment {
  int m = 0;
  int k = 0;
  std::vector<int> indices;

  std::span<const int> first_portion(int i) const {
    return {indices.data() + static_cast<std::size_t>(i) * k, static_cast<std::size_t>(k)};
  }
};

struct SplitOutcome {
  int selected = 0;
  double a = 0.0;      // largest first-portion mean
  double b = 0.0;      // second-portion mean of the selected population
  double sigma = 0.0;  // standard deviation of b under the null
  double p_value = 0.5;
  std::optional<double> e_value;
  bool saturated = false;
};

struct EValue {
  double value = 1.0;
  bool saturated = false;
};

inline constexpr double kMaxEValueExponent = 700.0;

/// Likelihood ratio of N(a, sigma^2) against N(0, sigma^2) at b:
/// exp(ab/sigma^2 - a^2/(2 sigma^2)). Exponents above 700 are clamped and
/// flagged.
inline EValue evalue(double a, double b, double sigma) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw DomainError("evalue: a and b must be finite");
  if (!std::isfinite(sigma) || !(sigma > 0.0)) throw DomainError("evalue: sigma must be positive");
  const double exponent = a * (b - 0.5 * a) / (sigma * sigma);
  if (exponent > kMaxEValueExponent) return {std::exp(kMaxEValueExponent), true};
  return {std::exp(exponent), false};
}

/// Arithmetic mean; the mean of e-values is an e-value.
inline double average_evalues(std::span<const double> evalues) {
  if (evalues.empty()) throw ValidationError("average_evalues: empty list");
  double sum = 0.0;
  for (double e : evalues) {
    if (!(e >= 0.0)) throw ValidationError("average_evalues: e-values must be nonnegative");
    sum += e;
  }
  return sum / static_cast<double>(evalues.size());
}

inline Dataset generate_dataset(const ExperimentConfig& cfg, std::uint64_t dataset_index) {
  cfg.validate();
  Engine eng = make_engine(cfg.seed, StreamKind::dataset, dataset_index, 0);
  Dataset d;
  d.m = cfg.m;
  d.r = cfg.r;
  d.true_mean_index = static_cast<int>(uniform_below(eng, static_cast<std::uint64_t>(cfg.m)));
  d.values.resize(static_cast<std::size_t>(cfg.m) * cfg.r);
  const double mu = cfg.mu();
  for (int i = 0; i < cfg.m; ++i) {
    const double mean = i == d.true_mean_index ? mu : 0.0;
    for (double& x : d.row(i)) x = mean + cfg.sigma0 * standard_normal(eng);
  }
  return d;
}

/// Independent uniformly random first portions, one per population, from the
/// (seed, dataset_index, split_index) substream.
inline SplitAssignment random_split(const ExperimentConfig& cfg, std::uint64_t dataset_index,
                                    std::uint64_t split_index) {
  cfg.validate();
  Engine eng = make_engine(cfg.seed, StreamKind::split, dataset_index, split_index);
  SplitAssignment s;
  s.m = cfg.m;
  s.k = cfg.first_portion_size();
  s.indices.reserve(static_cast<std::size_t>(s.m) * s.k);
  std::vector<int> perm(static_cast<std::size_t>(cfg.r));
  for (int i = 0; i < cfg.m; ++i) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int j = 0; j < s.k; ++j) {
      const auto pick = j + static_cast<int>(uniform_below(eng, static_cast<std::uint64_t>(cfg.r - j)));
      std::swap(perm[j], perm[pick]);
    }
    std::sort(perm.begin(), perm.begin() + s.k);
    s.indices.insert(s.indices.end(), perm.begin(), perm.begin() + s.k);
  }
  return s;
}

/// Selects the population with the largest first-portion mean (smallest index
/// on ties) and tests its second-portion mean: p = Phi(-b / sigma).
/// The e-value is left empty; see evaluate_split.
inline SplitOutcome data_split_pvalue(const Dataset& dataset, const SplitAssignment& split,
                                      const ExperimentConfig& cfg) {
  cfg.validate();
  if (dataset.m != cfg.m || dataset.r != cfg.r ||
      dataset.values.size() != static_cast<std::size_t>(cfg.m) * cfg.r) {
    throw ValidationError("data_split_pvalue: dataset shape does not match config");
  }
  if (split.m != cfg.m || split.k != cfg.first_portion_size()) {
    throw ValidationError("data_split_pvalue: split shape does not match config");
  }
  const int k = split.k;
  const int rest = cfg.r - k;
  SplitOutcome out;
  double best_first = -HUGE_VAL;
  double best_second = 0.0;
  for (int i = 0; i < cfg.m; ++i) {
    const auto row = dataset.row(i);
    double first = 0.0;
    for (int j : split.first_portion(i)) first += row[static_cast<std::size_t>(j)];
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    const double first_mean = first / k;
    if (first_mean > best_first) {
      best_first = first_mean;
      best_second = (total - first) / rest;
      out.selected = i;
    }
  }
  out.a = best_first;
  out.b = best_second;
  out.sigma = cfg.second_portion_sigma();
  out.p_value = normal_cdf(-out.b / out.sigma);
  return out;
}

/// data_split_pvalue plus the likelihood-ratio e-value from the same split.
inline SplitOutcome evaluate_split(const Dataset& dataset, const SplitAssignment& split,
                                   const ExperimentConfig& cfg) {
  SplitOutcome out = data_split_pvalue(dataset, split, cfg);
  const EValue e = evalue(out.a, out.b, out.sigma);
  out.e_value = e.value;
  out.saturated = e.saturated;
  return out;
}

/// Exact p-value from full samples: with c the largest sample mean and
/// z = c sqrt(r) / sigma0, returns 1 - (1 - Phi(-z))^m.
inline double exact_pvalue(const Dataset& dataset, const ExperimentConfig& cfg) {
  cfg.validate();
  if (dataset.m != cfg.m || dataset.r != cfg.r) {
    throw ValidationError("exact_pvalue: dataset shape does not match config");
  }
  double c = -HUGE_VAL;
  for (int i = 0; i < cfg.m; ++i) {
    const auto row = dataset.row(i);
    c = std::max(c, std::accumulate(row.begin(), row.end(), 0.0) / cfg.r);
  }
  const double z = c * std::sqrt(static_cast<double>(cfg.r)) / cfg.sigma0;
  const double single = normal_cdf(-z);
  return -std::expm1(cfg.m * std::log1p(-single));
}

inline double binomial_coefficient(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

inline constexpr double kDefaultEnumerationBudget = 1e6;

/// Average e-value over every combination of per-population splits, which
/// removes all split randomness. Only feasible for tiny samples (m = 2,
/// r = 5 gives 10 * 10 = 100 combinations).
inline double enumerate_all_splits(const Dataset& dataset, const ExperimentConfig& cfg,
                                   double budget = kDefaultEnumerationBudget) {
  cfg.validate();
  if (dataset.m != cfg.m || dataset.r != cfg.r) {
    throw ValidationError("enumerate_all_splits: dataset shape does not match config");
  }
  const int k = cfg.first_portion_size();
  const double per_sample = binomial_coefficient(cfg.r, k);
  const double total = std::pow(per_sample, cfg.m);
  if (!(total <= budget)) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "enumerate_all_splits: C(%d,%d)^%d = %.3g split combinations exceed the "
                  "budget of %.3g",
                  cfg.r, k, cfg.m, total, budget);
    throw InfeasibleError(buf, total);
  }

  // First- and second-portion means of every k-subset, per population.
  std::vector<std::vector<std::pair<double, double>>> means(static_cast<std::size_t>(cfg.m));
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < cfg.m; ++i) {
    const auto row = dataset.row(i);
    const double row_total = std::accumulate(row.begin(), row.end(), 0.0);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      double first = 0.0;
      for (int j : idx) first += row[static_cast<std::size_t>(j)];
      means[static_cast<std::size_t>(i)].emplace_back(first / k, (row_total - first) / (cfg.r - k));
      int pos = k - 1;
      while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == cfg.r - k + pos) --pos;
      if (pos < 0) break;
      ++idx[static_cast<std::size_t>(pos)];
      for (int q = pos + 1; q < k; ++q) idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
    }
  }

  const double sigma = cfg.second_portion_sigma();
  const std::size_t per = means.front().size();
  std::vector<std::size_t> odometer(static_cast<std::size_t>(cfg.m), 0);
  double sum = 0.0;
  std::size_t count = 0;
  while (true) {
    double a = -HUGE_VAL;
    double b = 0.0;
    for (int i = 0; i < cfg.m; ++i) {
      const auto& [first, second] = means[static_cast<std::size_t>(i)][odometer[static_cast<std::size_t>(i)]];
      if (first > a) {
        a = first;
        b = second;
      }
    }
    sum += evalue(a, b, sigma).value;
    ++count;
    int pos = cfg.m - 1;
    while (pos >= 0 && ++odometer[static_cast<std::size_t>(pos)] == per) {
      odometer[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return sum / static_cast<double>(count);
}

}  // namespace coxsplit
