#pragma once

// Quasi-stationary distribution, Gaussian comparator, total variation and
// mean extinction times.  Arrays are indexed by n with slot 0 reserved
// (zero for distributions on [1, N], the absorbed mass where noted).

#include <cstdint>
#include <span>
#include <vector>

#include "bdqsd/model.hpp"
#include "bdqsd/spectral.hpp"

namespace bdqsd {

struct QsdResult {
  std::vector<double> nu;
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> gaussian;
  double Z_K = 0.0;             ///< finite normalizer of the comparator
  double Z_K_asymptotic = 0.0;  ///< sqrt(2 pi K) sigma
  double tv_gauss = 0.0;
  double t0_spectral = 0.0;
  double t0_summed = 0.0;
  double t0_linear = 0.0;
  /// nu-average of sum_{m<=n} (1/(lambda_m mu_m)) sum_{i>m} pi_i, the
  /// alternative index placement, kept only to report how far it is off.
  double t0_display_variant = 0.0;
  bool display_variant_agrees = false;
  std::vector<double> alpha;
};

/// nu_n = pi_n phi_n / sum, from log pi and phi on [1, N].
std::vector<double> qsd_weights(std::span<const double> log_pi, std::span<const double> phi);

/// nu and its moments only.
QsdResult qsd_from_phi(const SpectralSolution& solution, const CoefficientTable& table);

struct GaussianComparator {
  std::vector<double> gaussian;
  double Z_K = 0.0;
  double Z_K_asymptotic = 0.0;
};

/// exp(-(n - n*)^2 / (2 K s^2)) / Z on [1, N] with s = sigma_scale * sigma.
GaussianComparator gaussian_comparator(const Landmarks& landmarks, double K, std::int64_t N,
                                       double sigma_scale = 1.0);

/// 1/2 sum |p - q|; the shorter array is zero-padded unless `pad` is false.
double tv_distance(std::span<const double> p, std::span<const double> q, bool pad = true);

/// E_n[T0] = sum_{m<=n} (1/(mu_m pi_m)) sum_{i>=m} pi_i, n in [1, N].
std::vector<double> hitting_times_summed(const CoefficientTable& table);
std::vector<double> hitting_times_display_variant(const CoefficientTable& table);

/// sum_n nu_n E_n[T0].
double extinction_time_summed(const QsdResult& qsd, const CoefficientTable& table);

/// Mean absorption times from the generator equation with unit source,
/// t_0 = 0 and t_{N+1} = t_N.  Rates indexed by n in [1, N].
std::vector<double> hitting_times_linear(std::span<const double> lambda,
                                         std::span<const double> mu);
std::vector<double> extinction_time_linear(const CoefficientTable& table);

/// alpha_n = u0_n / u0_{n*} for n <= n*, 1 beyond.
std::vector<double> alpha_weights(const CoefficientTable& table, const Landmarks& landmarks);

/// Everything above for one solved model.
QsdResult analyze_qsd(const SpectralSolution& solution, const CoefficientTable& table,
                      const Landmarks& landmarks);

}  // namespace bdqsd
