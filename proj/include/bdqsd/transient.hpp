#pragma once

// Transient law of the chain on {0, ..., N} (0 absorbing, births from N
// suppressed) by uniformization.

#include <cstdint>
#include <span>
#include <vector>

#include "bdqsd/model.hpp"

namespace bdqsd {

struct TransientLaw {
  double t = 0.0;
  std::vector<double> law;        ///< P(X_t = n), slot 0 = P(T0 <= t)
  std::vector<double> conditioned;  ///< law / survival on [1, N], slot 0 = 0
  double survival = 0.0;
};

struct TransientOptions {
  std::int64_t step_cap = 50'000'000;
  double poisson_tail = 1e-14;
};

/// max_n (lambda_n + mu_n) + 1.
double uniformization_rate(const CoefficientTable& table);
/// Number of kernel powers needed at time t (the step-cap criterion).
std::int64_t uniformization_steps(double rate, double t);

/// Laws at each of `times` (any order) from `initial` (size N+1, slot 0
/// allowed).  Rates are indexed by n in [1, N].  One uniformized pass.
std::vector<TransientLaw> transient_laws(std::span<const double> lambda,
                                         std::span<const double> mu,
                                         std::span<const double> initial,
                                         std::span<const double> times,
                                         TransientOptions options = {});

std::vector<TransientLaw> transient_laws(const CoefficientTable& table,
                                         std::span<const double> initial,
                                         std::span<const double> times,
                                         TransientOptions options = {});

TransientLaw transient_conditioned_law(const CoefficientTable& table, std::int64_t n0,
                                       double t, TransientOptions options = {});

}  // namespace bdqsd
