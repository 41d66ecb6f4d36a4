#include "bdqsd/qsd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bdqsd/errors.hpp"
#include "bdqsd/numeric.hpp"

namespace bdqsd {

std::vector<double> qsd_weights(std::span<const double> log_pi, std::span<const double> phi) {
  if (log_pi.size() != phi.size() && log_pi.size() + 1 != phi.size()) {
    throw LengthMismatch("qsd_weights: log_pi and phi must cover the same states");
  }
  const std::size_t N = log_pi.size() - 1;
  std::vector<double> lw(N + 1, kNegInf);
  for (std::size_t n = 1; n <= N; ++n) lw[n] = log_pi[n] + std::log(phi[n]);
  const double logZ = log_sum_exp(lw);
  std::vector<double> nu(N + 1, 0.0);
  for (std::size_t n = 1; n <= N; ++n) nu[n] = std::exp(lw[n] - logZ);
  return nu;
}

QsdResult qsd_from_phi(const SpectralSolution& sol, const CoefficientTable& t) {
  std::vector<double> log_pi(static_cast<std::size_t>(t.N() + 1), 0.0);
  for (std::int64_t n = 1; n <= t.N(); ++n) log_pi[n] = t.log_pi(n);
  QsdResult r;
  r.nu = qsd_weights(log_pi, sol.phi);
  for (std::size_t n = 1; n < r.nu.size(); ++n) r.mean += r.nu[n] * static_cast<double>(n);
  for (std::size_t n = 1; n < r.nu.size(); ++n) {
    const double d = static_cast<double>(n) - r.mean;
    r.variance += r.nu[n] * d * d;
  }
  return r;
}

GaussianComparator gaussian_comparator(const Landmarks& lm, double K, std::int64_t N,
                                       double sigma_scale) {
  const double s = sigma_scale * lm.sigma;
  const double var = K * s * s;
  GaussianComparator g;
  g.gaussian.assign(static_cast<std::size_t>(N + 1), 0.0);
  for (std::int64_t n = 1; n <= N; ++n) {
    const double d = static_cast<double>(n - lm.n_star);
    g.gaussian[n] = std::exp(-d * d / (2.0 * var));
    g.Z_K += g.gaussian[n];
  }
  for (auto& v : g.gaussian) v /= g.Z_K;
  g.Z_K_asymptotic = std::sqrt(2.0 * std::numbers::pi * K) * s;
  return g;
}

double tv_distance(std::span<const double> p, std::span<const double> q, bool pad) {
  if (!pad && p.size() != q.size()) throw LengthMismatch("tv_distance: sizes differ");
  const std::size_t n = std::max(p.size(), q.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    s += std::abs(a - b);
  }
  return 0.5 * s;
}

std::vector<double> hitting_times_summed(const CoefficientTable& t) {
  std::vector<double> E(static_cast<std::size_t>(t.N() + 1), 0.0);
  double acc = 0.0;
  for (std::int64_t m = 1; m <= t.N(); ++m) {
    acc += std::exp(t.log_tail(m - 1) - t.log_pi(m)) / t.mu(m);
    E[m] = acc;
  }
  return E;
}

std::vector<double> hitting_times_display_variant(const CoefficientTable& t) {
  std::vector<double> E(static_cast<std::size_t>(t.N() + 1), 0.0);
  double acc = 0.0;
  for (std::int64_t m = 1; m <= t.N(); ++m) {
    acc += std::exp(t.log_tail(m)) / (t.lambda(m) * t.mu(m));
    E[m] = acc;
  }
  return E;
}

double extinction_time_summed(const QsdResult& qsd, const CoefficientTable& t) {
  const auto E = hitting_times_summed(t);
  double s = 0.0;
  for (std::size_t n = 1; n < qsd.nu.size() && n < E.size(); ++n) s += qsd.nu[n] * E[n];
  return s;
}

std::vector<double> hitting_times_linear(std::span<const double> lambda,
                                         std::span<const double> mu) {
  if (lambda.size() != mu.size() || lambda.size() < 2) {
    throw LengthMismatch("hitting_times_linear: lambda and mu must both cover [1, N]");
  }
  const std::size_t N = lambda.size() - 1;
  // d_n = t_n - t_{n-1} satisfies mu_n d_n = 1 + lambda_n d_{n+1}, d_{N+1} = 0.
  std::vector<double> d(N + 2, 0.0);
  for (std::size_t n = N; n >= 1; --n) d[n] = (1.0 + lambda[n] * d[n + 1]) / mu[n];
  std::vector<double> t(N + 1, 0.0);
  for (std::size_t n = 1; n <= N; ++n) t[n] = t[n - 1] + d[n];
  return t;
}

std::vector<double> extinction_time_linear(const CoefficientTable& t) {
  std::vector<double> lambda(static_cast<std::size_t>(t.N() + 1), 0.0), mu(lambda.size(), 0.0);
  for (std::int64_t n = 1; n <= t.N(); ++n) {
    lambda[n] = t.lambda(n);
    mu[n] = t.mu(n);
  }
  return hitting_times_linear(lambda, mu);
}

std::vector<double> alpha_weights(const CoefficientTable& t, const Landmarks& lm) {
  std::vector<double> a(static_cast<std::size_t>(t.N() + 1), 0.0);
  const double top = t.u0(lm.n_star);
  for (std::int64_t n = 1; n <= t.N(); ++n) a[n] = n < lm.n_star ? t.u0(n) / top : 1.0;
  return a;
}

QsdResult analyze_qsd(const SpectralSolution& sol, const CoefficientTable& t,
                      const Landmarks& lm) {
  QsdResult r = qsd_from_phi(sol, t);
  auto g = gaussian_comparator(lm, t.model().K(), t.N());
  r.gaussian = std::move(g.gaussian);
  r.Z_K = g.Z_K;
  r.Z_K_asymptotic = g.Z_K_asymptotic;
  r.tv_gauss = tv_distance(r.nu, r.gaussian);
  r.t0_spectral = 1.0 / sol.rho0;
  r.t0_summed = extinction_time_summed(r, t);
  const auto lin = extinction_time_linear(t);
  const auto alt = hitting_times_display_variant(t);
  for (std::size_t n = 1; n < r.nu.size(); ++n) {
    r.t0_linear += r.nu[n] * lin[n];
    r.t0_display_variant += r.nu[n] * alt[n];
  }
  r.display_variant_agrees = std::abs(r.t0_display_variant / r.t0_linear - 1.0) <= 1e-6;
  r.alpha = alpha_weights(t, lm);
  return r;
}

}  // namespace bdqsd
