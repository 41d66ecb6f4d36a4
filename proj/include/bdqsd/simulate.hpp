#pragma once

// Exact (Gillespie) simulation of the birth-and-death process.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bdqsd/model.hpp"

namespace bdqsd {

struct SimConfig {
  /// Rates come straight from the family, so the spec need not pass
  /// RateModel validation (pure-death sanity runs, for instance).
  ModelSpec model;
  std::optional<std::int64_t> n0;  ///< nullopt: draw the start from `start_law`
  std::vector<double> start_law;   ///< indexed by n, used when n0 is empty
  std::int64_t replicas = 1000;
  double t_max = 0.0;
  std::vector<double> checkpoints;  ///< sorted, <= t_max
  std::uint64_t master_seed = 1;
  int threads = 1;
  /// Survival-slope fit window: checkpoints >= fit_start with at least
  /// fit_min_survivors replicas alive.
  double fit_start = 0.0;
  std::int64_t fit_min_survivors = 500;
  int bootstrap = 200;
};

struct SurvivalRow {
  double t = 0.0;
  std::int64_t alive = 0;
  double fraction = 0.0;
  double se = 0.0;
};

struct SimEstimate {
  std::vector<double> extinction_times;  ///< t_max when censored
  std::vector<std::uint8_t> censored;
  std::vector<std::int64_t> start_states;
  std::vector<SurvivalRow> survival;
  /// states[c][r]: state of replica r at checkpoint c (0 once extinct).
  std::vector<std::vector<std::int64_t>> states;
  /// conditioned_hist[c][n]: surviving replicas in state n at checkpoint c.
  std::vector<std::vector<std::int64_t>> conditioned_hist;
  double rho0_hat = 0.0;
  double rho0_ci_lo = 0.0;
  double rho0_ci_hi = 0.0;
  double fit_t_lo = 0.0;
  double fit_t_hi = 0.0;
  double fit_r2 = 0.0;
  std::int64_t fit_points = 0;
  std::uint64_t events = 0;
};

std::uint64_t splitmix64(std::uint64_t x);
/// Seed of replica `index` under `master_seed`.
std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t index);

SimEstimate run_ssa(const SimConfig& config);

struct TvEstimate {
  double tv = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::int64_t survivors = 0;
};

/// TV between the survivors' empirical law at checkpoint index `c` and nu,
/// with a replica-bootstrap percentile interval.  Throws InsufficientSurvivors
/// below `min_survivors`.
TvEstimate conditioned_tv(const SimEstimate& estimate, std::size_t c, std::span<const double> nu,
                          std::uint64_t seed, int resamples = 200,
                          std::int64_t min_survivors = 200);

/// Kolmogorov-Smirnov distance of the sample to Exp(rate).
double ks_exponential(std::span<const double> sample, double rate);
/// 1% critical value of the one-sample KS statistic (asymptotic).
double ks_critical_1pct(std::size_t n);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace bdqsd
