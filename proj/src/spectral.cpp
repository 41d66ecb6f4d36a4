#include "bdqsd/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>

#include "bdqsd/errors.hpp"
#include "bdqsd/numeric.hpp"

namespace bdqsd {

std::vector<double> solve_recursion(std::span<const double> alpha, std::span<const double> beta,
                                    std::span<const double> h, double w_q, double w_q1,
                                    std::int64_t q, std::int64_t n_max) {
  if (q < 0 || n_max < q + 1) throw IndexOutOfRange("solve_recursion needs 0 <= q < n_max");
  const auto top = static_cast<std::size_t>(n_max);
  if (alpha.size() <= top || beta.size() <= top || h.size() <= top) {
    throw IndexOutOfRange("solve_recursion: coefficient arrays must cover [q, n_max]");
  }
  for (std::int64_t n = q; n <= n_max; ++n) {
    if (!(alpha[n] > 0.0) || !(beta[n] > 0.0)) {
      throw NonPositiveCoefficient(fmt::format("alpha/beta must be positive (n = {})", n));
    }
  }
  std::vector<double> w(top + 1, 0.0);
  w[q] = w_q;
  w[q + 1] = w_q1;
  // w_{n+1} - w_n = A_{n+1} Theta_{n+1,q};  A_{n+1} - A_n = h_n / (alpha_n Theta_{n+1,q}).
  double log_theta = std::log(beta[q] / alpha[q]);  // Theta_{q+1,q}
  double A = (w_q1 - w_q) / std::exp(log_theta);
  for (std::int64_t n = q + 1; n < n_max; ++n) {
    log_theta += std::log(beta[n] / alpha[n]);
    const double theta = std::exp(log_theta);
    A += h[n] / (alpha[n] * theta);
    w[n + 1] = w[n] + A * theta;
  }
  return w;
}

namespace {

void require_nstar(const CoefficientTable& table, std::int64_t n_star) {
  if (n_star < 2 || n_star + 1 > table.N()) {
    throw InvalidModel(fmt::format(
        "matching needs 2 <= n* < N (n* = {}, N = {}); increase K", n_star, table.N()));
  }
}

struct DeltaBranch {
  std::vector<double> delta;
  std::vector<double> step;
};

// Exact forward substitution of the lower branch:
//   delta_{j+1} - delta_j = -rho s_j / (lambda_j u_j u_{j+1}),
//   s_j = sum_{p<=j} (pi_p / pi_j) u_p^2 (1 + delta_p).
// With `linear` the (1 + delta_p) factors are dropped, which gives rho times
// the derivative at rho = 0.
DeltaBranch delta_branch(const CoefficientTable& t, std::int64_t n_star, double rho,
                         bool linear = false) {
  DeltaBranch out;
  const auto size = static_cast<std::size_t>(n_star + 1);
  out.delta.assign(size, 0.0);
  out.step.assign(size, 0.0);
  double s = 1.0;
  for (std::int64_t j = 1; j < n_star; ++j) {
    const double u = t.u0(j), u_next = t.u0(j + 1);
    out.step[j] = -rho * s / (t.lambda(j) * u * u_next);
    out.delta[j + 1] = out.delta[j] + out.step[j];
    s = s * (t.mu(j + 1) / t.lambda(j)) + u_next * u_next * (linear ? 1.0 : 1.0 + out.delta[j + 1]);
  }
  return out;
}

struct WBranch {
  std::vector<double> w;
  std::vector<double> step;
};

// Upper branch: w = rho W0 + rho A w, with
//   w_{j+1} - w_j = rho R_j / lambda_j,   R_j = sum_{p>j} (pi_p / pi_j)(1 + w_p),
// iterated to a fixed point.  Beyond N, w_p is frozen at w_N.
WBranch w_branch(const CoefficientTable& t, std::int64_t n_star, double rho) {
  const std::int64_t N = t.N();
  const std::int64_t start = n_star - 1;
  const auto size = static_cast<std::size_t>(N + 1);
  WBranch out;
  out.w.assign(size, 0.0);
  out.step.assign(size, 0.0);
  const double tail_ratio_N = std::exp(t.log_tail(N) - t.log_pi(N));
  std::vector<double> R(size, 0.0);
  for (int iter = 0; iter < 200; ++iter) {
    R[N] = tail_ratio_N * (1.0 + out.w[N]);
    for (std::int64_t j = N - 1; j >= start; --j) {
      R[j] = t.lambda(j) / t.mu(j + 1) * (1.0 + out.w[j + 1] + R[j + 1]);
    }
    double change = 0.0, scale = 1.0;
    double w = 0.0;
    for (std::int64_t j = start; j < N; ++j) {
      out.step[j] = rho * R[j] / t.lambda(j);
      w += out.step[j];
      change = std::max(change, std::abs(w - out.w[j + 1]));
      scale = std::max(scale, std::abs(w));
      out.w[j + 1] = w;
    }
    if (change <= 4.0 * std::numeric_limits<double>::epsilon() * scale) return out;
  }
  throw ConvergenceFailure("upper-branch fixed point did not converge");
}

double f_from_branches(const CoefficientTable& t, std::int64_t n, const DeltaBranch& d,
                       const WBranch& w) {
  // f = u_{n-1}(1+delta_{n-1})(1+w_n) - u_n(1+delta_n), with w_{n-1} = 0,
  // regrouped so that no O(1) - O(1) difference is formed.
  const double lower = 1.0 + d.delta[n - 1];
  return -t.inv_flux(n - 1) * lower - t.u0(n) * d.step[n - 1] + t.u0(n - 1) * lower * w.w[n];
}

}  // namespace

MatchingKernels matching_kernels(const CoefficientTable& t, const Landmarks& lm) {
  const std::int64_t n = lm.n_star;
  require_nstar(t, n);
  MatchingKernels k;
  k.n_star = n;
  k.Delta0 = delta_branch(t, n, 1.0, true).delta;
  // d w / d rho at 0: R_j reduces to the plain tail ratio.
  k.W0.assign(static_cast<std::size_t>(t.N() + 1), 0.0);
  for (std::int64_t j = n - 1; j < t.N(); ++j) {
    k.W0[j + 1] = k.W0[j] + std::exp(t.log_tail(j) - t.log_pi(j)) / t.lambda(j);
  }
  k.delta_cap = 1.0 / (3.0 * std::abs(k.Delta0[n]));
  k.w_cap = 1.0 / (3.0 * k.W0[t.N()]);
  k.D_K = t.u0(n) * (k.W0[n] + k.Delta0[n - 1] - k.Delta0[n]);
  k.eta_K = 10.0 / 3.0 * t.inv_flux(n - 1) / k.D_K;
  return k;
}

std::vector<double> delta_of_rho(const CoefficientTable& table, const Landmarks& lm,
                                 double rho) {
  const auto k = matching_kernels(table, lm);
  if (!(std::abs(rho) < k.delta_cap)) {
    throw RhoOutOfRange(fmt::format("|rho| = {} exceeds the delta cap {}", rho, k.delta_cap));
  }
  return delta_branch(table, lm.n_star, rho).delta;
}

std::vector<double> w_of_rho(const CoefficientTable& table, const Landmarks& lm, double rho) {
  const auto k = matching_kernels(table, lm);
  if (!(std::abs(rho) < k.w_cap)) {
    throw RhoOutOfRange(fmt::format("|rho| = {} exceeds the w cap {}", rho, k.w_cap));
  }
  return w_branch(table, lm.n_star, rho).w;
}

namespace {

MatchingState state_with_kernels(const CoefficientTable& t, const MatchingKernels& k, double rho) {
  if (!(std::abs(rho) < std::min(k.delta_cap, k.w_cap))) {
    throw RhoOutOfRange(fmt::format("|rho| = {} outside the admissible interval (caps {}, {})",
                                    rho, k.delta_cap, k.w_cap));
  }
  auto d = delta_branch(t, k.n_star, rho);
  auto w = w_branch(t, k.n_star, rho);
  MatchingState s;
  s.rho = rho;
  s.n_star = k.n_star;
  s.f_value = f_from_branches(t, k.n_star, d, w);
  s.delta = std::move(d.delta);
  s.delta_step = std::move(d.step);
  s.w = std::move(w.w);
  s.w_step = std::move(w.step);
  s.Delta0 = k.Delta0;
  s.W0 = k.W0;
  return s;
}

}  // namespace

double linear_log_root(const CoefficientTable& t, const MatchingKernels& k) {
  // f(rho) = -inv_flux + rho (u_{n*-1} W0_{n*} - u_{n*} (Delta0_{n*} - Delta0_{n*-1})) + O(rho^2)
  const std::int64_t n = k.n_star;
  const double slope = t.u0(n - 1) * k.W0[n] - t.u0(n) * (k.Delta0[n] - k.Delta0[n - 1]);
  return -std::log(t.lambda(n - 1)) - t.log_pi(n - 1) - std::log(slope);
}

MatchingState matching_state(const CoefficientTable& table, const Landmarks& lm, double rho) {
  return state_with_kernels(table, matching_kernels(table, lm), rho);
}

double matching_f(const CoefficientTable& table, const Landmarks& lm, double rho) {
  return matching_state(table, lm, rho).f_value;
}

std::pair<double, MatchingState> find_rho0(const CoefficientTable& table, const Landmarks& lm) {
  const auto k = matching_kernels(table, lm);
  auto f = [&](double rho) {
    auto d = delta_branch(table, k.n_star, rho);
    auto w = w_branch(table, k.n_star, rho);
    return f_from_branches(table, k.n_star, d, w);
  };
  const double cap = 0.999 * std::min(k.delta_cap, k.w_cap);
  if (!(k.eta_K >= std::numeric_limits<double>::min())) {
    // rho0 underflows; branches are linear in rho to working precision there.
    const double log_root = linear_log_root(table, k);
    return {std::exp(log_root), state_with_kernels(table, k, std::exp(log_root))};
  }
  double lo = 0.0;
  double hi = std::min(k.eta_K, cap);
  double f_hi = f(hi);
  for (int i = 0; f_hi <= 0.0 && i < 8; ++i) {
    if (hi >= cap) break;
    hi = std::min(2.0 * hi, cap);
    f_hi = f(hi);
  }
  if (!(f_hi > 0.0)) {
    throw NoSignChange(fmt::format("matching function has no sign change on [0, {}]", hi));
  }
  double f_lo = f(lo);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm > 0.0) {
      hi = mid, f_hi = fm;
    } else {
      lo = mid, f_lo = fm;
    }
  }
  const double root = std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
  return {root, state_with_kernels(table, k, root)};
}

SpectralSolution assemble_phi(const MatchingState& s, const CoefficientTable& t) {
  const std::int64_t N = t.N();
  const std::int64_t ns = s.n_star;
  SpectralSolution sol;
  sol.rho0 = s.rho;
  sol.log_rho0 = std::log(s.rho);
  sol.n_star = ns;
  sol.phi.assign(static_cast<std::size_t>(N + 1), 0.0);
  sol.dphi.assign(static_cast<std::size_t>(N), 0.0);
  sol.delta_step = s.delta_step;
  const double top = t.u0(ns) * (1.0 + s.delta[ns]);
  sol.b = top / (1.0 + s.w[ns]);
  for (std::int64_t n = 1; n <= ns; ++n) sol.phi[n] = t.u0(n) * (1.0 + s.delta[n]);
  for (std::int64_t n = ns + 1; n <= N; ++n) sol.phi[n] = sol.b * (1.0 + s.w[n]);
  for (std::int64_t n = 1; n < N; ++n) {
    sol.dphi[n] = n < ns ? t.inv_flux(n) * (1.0 + s.delta[n]) + t.u0(n + 1) * s.delta_step[n]
                         : sol.b * s.w_step[n];
  }
  const double lower = t.u0(ns - 1) * (1.0 + s.delta[ns - 1]);
  const double upper = sol.b * (1.0 + s.w[ns - 1]);
  sol.matching_mismatch = std::abs(lower - upper) / lower;
  return sol;
}

std::vector<double> eigen_residuals(const CoefficientTable& t, std::span<const double> u,
                                    double rho) {
  const std::int64_t N = t.N();
  if (u.size() < static_cast<std::size_t>(N + 1)) throw LengthMismatch("u must cover [1, N]");
  std::vector<double> r(static_cast<std::size_t>(N), 0.0);
  for (std::int64_t n = 1; n < N; ++n) {
    const double below = n >= 2 ? u[n - 1] : 0.0;
    r[n] = t.lambda(n) * (u[n + 1] - u[n]) - t.mu(n) * (u[n] - below) + rho * u[n];
  }
  return r;
}

double residual(const SpectralSolution& sol, const CoefficientTable& t) {
  const std::int64_t N = t.N();
  const std::int64_t ns = sol.n_star;
  double worst = 0.0;
  for (std::int64_t n = 1; n < N; ++n) {
    double r;
    if (n < ns) {
      // lambda_n (u_{n+1}-u_n) = mu_n (u_n-u_{n-1}) = 1/pi_n
      const double D = sol.delta_step[n];
      const double D_prev = n >= 2 ? sol.delta_step[n - 1] : 0.0;
      r = D_prev * std::exp(-t.log_pi(n)) + t.lambda(n) * t.u0(n + 1) * D -
          t.mu(n) * t.u0(n) * D_prev + sol.rho0 * sol.phi[n];
    } else {
      r = t.lambda(n) * sol.dphi[n] - t.mu(n) * sol.dphi[n - 1] + sol.rho0 * sol.phi[n];
    }
    worst = std::max(worst, std::abs(r) / (sol.rho0 * sol.phi[n]));
  }
  return worst;
}

// --- tridiagonal oracle -----------------------------------------------------

std::int64_t sturm_count(std::span<const double> diag, std::span<const double> off, double x) {
  const std::size_t n = diag.size();
  double emax = 0.0;
  for (double e : off) emax = std::max(emax, e * e);
  const double pivmin = std::max(std::numeric_limits<double>::min(),
                                 emax * std::numeric_limits<double>::epsilon() *
                                     std::numeric_limits<double>::epsilon());
  std::int64_t count = 0;
  double q = diag[0] - x;
  if (std::abs(q) < pivmin) q = -pivmin;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < n; ++i) {
    q = diag[i] - x - off[i - 1] * off[i - 1] / q;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

namespace {

// LU with partial pivoting of a general tridiagonal matrix, reused across
// inverse-iteration solves.
class TridiagLU {
 public:
  TridiagLU(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
            double tiny)
      : dl_(std::move(sub)), d_(std::move(diag)), du_(std::move(sup)) {
    const std::size_t n = d_.size();
    du2_.assign(n > 2 ? n - 2 : 0, 0.0);
    swapped_.assign(n, false);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d_[i]) >= std::abs(dl_[i])) {
        if (d_[i] == 0.0) d_[i] = tiny;
        const double fact = dl_[i] / d_[i];
        dl_[i] = fact;
        d_[i + 1] -= fact * du_[i];
      } else {
        const double fact = d_[i] / dl_[i];
        d_[i] = dl_[i];
        dl_[i] = fact;
        const double temp = du_[i];
        du_[i] = d_[i + 1];
        d_[i + 1] = temp - fact * d_[i + 1];
        if (i + 2 < n) {
          du2_[i] = du_[i + 1];
          du_[i + 1] = -fact * du_[i + 1];
        }
        swapped_[i] = true;
      }
    }
    if (d_[n - 1] == 0.0) d_[n - 1] = tiny;
  }

  void solve(std::vector<double>& b) const {
    const std::size_t n = d_.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!swapped_[i]) {
        b[i + 1] -= dl_[i] * b[i];
      } else {
        const double temp = b[i];
        b[i] = b[i + 1];
        b[i + 1] = temp - dl_[i] * b[i];
      }
    }
    b[n - 1] /= d_[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
    for (std::size_t i = n >= 3 ? n - 3 : 0; n >= 3; --i) {
      b[i] = (b[i] - du_[i] * b[i + 1] - du2_[i] * b[i + 2]) / d_[i];
      if (i == 0) break;
    }
  }

 private:
  std::vector<double> dl_, d_, du_, du2_;
  std::vector<bool> swapped_;
};

}  // namespace

TridiagEigen tridiag_top_eigs(std::span<const double> lambda, std::span<const double> mu, int k) {
  if (lambda.size() != mu.size() || lambda.size() < 2) {
    throw LengthMismatch("tridiag_top_eigs: lambda and mu must both cover [1, N]");
  }
  const std::size_t N = lambda.size() - 1;
  if (k < 1 || k > 4 || static_cast<std::size_t>(k) > N) {
    throw IndexOutOfRange("tridiag_top_eigs: need 1 <= k <= min(4, N)");
  }
  std::vector<double> diag(N), off(N > 0 ? N - 1 : 0);
  for (std::size_t i = 0; i < N; ++i) diag[i] = -(lambda[i + 1] + mu[i + 1]);
  for (std::size_t i = 0; i + 1 < N; ++i) off[i] = std::sqrt(lambda[i + 1] * mu[i + 2]);

  TridiagEigen out;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < N; ++i) {
    const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < N ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
    out.norm = std::max(out.norm, std::abs(diag[i]) + r);
  }
  const double tol = 1e-14 * out.norm;
  for (int i = 0; i < k; ++i) {
    // ascending index of the i-th largest eigenvalue
    const auto target = static_cast<std::int64_t>(N) - 1 - i;
    double a = lo - tol, b = hi + tol;
    for (int it = 0; it < 400; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      (sturm_count(diag, off, mid) <= target ? a : b) = mid;
    }
    out.eigenvalues.push_back(0.5 * (a + b));
  }
  out.rho0_trusted = -out.eigenvalues[0] >= 1e3 * out.norm * std::ldexp(1.0, -52);

  // Inverse iteration on the generator itself (phi-coordinates).
  const double shift = out.eigenvalues[0];
  std::vector<double> sub(N > 0 ? N - 1 : 0), dg(N), sup(N > 0 ? N - 1 : 0);
  for (std::size_t i = 0; i < N; ++i) dg[i] = -(lambda[i + 1] + mu[i + 1]) - shift;
  for (std::size_t i = 0; i + 1 < N; ++i) {
    sup[i] = lambda[i + 1];
    sub[i] = mu[i + 2];
  }
  const TridiagLU lu(std::move(sub), std::move(dg), std::move(sup),
                     out.norm * std::numeric_limits<double>::epsilon());
  std::vector<double> x(N, 1.0);
  bool converged = false;
  for (int it = 0; it < 200 && !converged; ++it) {
    std::vector<double> y = x;
    lu.solve(y);
    const double scale = y[0];
    double change = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] /= scale;
      change = std::max(change, std::abs(y[i] - x[i]) / std::max(std::abs(y[i]), 1e-300));
    }
    x = std::move(y);
    converged = change < 1e-14 && it > 0;
  }
  if (!converged) throw ConvergenceFailure("inverse iteration did not converge in 200 steps");
  out.phi.assign(N + 1, 0.0);
  std::copy(x.begin(), x.end(), out.phi.begin() + 1);
  return out;
}

TridiagEigen tridiag_top_eigs(const CoefficientTable& t, int k) {
  const std::int64_t N = t.N();
  if (N > 100'000) throw IndexOutOfRange("tridiag oracle limited to N <= 1e5");
  // The killed state N+1 of the finite matrix distorts phi near N; pad the
  // chain to 2N so that the boundary sits where pi is negligible.
  const std::int64_t M = 2 * N;
  const RateModel& model = t.model();
  std::vector<double> lambda(static_cast<std::size_t>(M + 1), 0.0), mu(lambda.size(), 0.0);
  for (std::int64_t n = 1; n <= M; ++n) {
    lambda[n] = model.lambda(n);
    mu[n] = model.mu(n);
  }
  auto out = tridiag_top_eigs(lambda, mu, k);
  out.phi.resize(static_cast<std::size_t>(N + 1));
  return out;
}

// --- Poincare gap bound -----------------------------------------------------

double gap_bound_finite(std::span<const double> log_pi, std::span<const double> lambda,
                        std::span<const double> phi, double log_mass_beyond, double tail_weight) {
  const std::size_t N = log_pi.size() - 1;
  if (lambda.size() < N + 1 || phi.size() < N + 2) {
    throw LengthMismatch("gap bound: lambda must cover [1, N] and phi [1, N+1]");
  }
  std::vector<double> log_w(N + 1), log_P(N + 1), log_S(N + 1);
  double acc = kNegInf;
  for (std::size_t n = 1; n <= N; ++n) {
    acc = log_add(acc, log_pi[n] + 2.0 * std::log(phi[n]));
    log_P[n] = acc;
    log_w[n] = -log_pi[n] - std::log(lambda[n]) - std::log(phi[n]) - std::log(phi[n + 1]);
  }
  acc = log_mass_beyond;
  for (std::size_t n = N; n >= 1; --n) {
    log_S[n] = acc;  // sum over q > n
    acc = log_add(acc, log_pi[n] + 2.0 * std::log(phi[n]));
  }
  // suffix sums of the second-kind terms
  std::vector<double> suffix(N + 2, 0.0);
  suffix[N + 1] = tail_weight;
  for (std::size_t n = N; n >= 1; --n) suffix[n] = suffix[n + 1] + std::exp(log_S[n] + log_w[n]);
  double best = std::numeric_limits<double>::infinity();
  double prefix = 0.0;
  for (std::size_t m = 1; m <= N; ++m) {
    prefix += std::exp(log_P[m] + log_w[m]);
    best = std::min(best, prefix + suffix[m + 1]);
  }
  return 1.0 / best;
}

double gap_lower_bound(const SpectralSolution& sol, const CoefficientTable& t) {
  const std::int64_t N = t.N();
  std::vector<double> log_pi(static_cast<std::size_t>(N + 1), 0.0), lambda(log_pi.size(), 0.0);
  std::vector<double> phi(static_cast<std::size_t>(N + 2), 0.0);
  for (std::int64_t n = 1; n <= N; ++n) {
    log_pi[n] = t.log_pi(n);
    lambda[n] = t.lambda(n);
    phi[n] = sol.phi[n];
  }
  phi[N + 1] = phi[N];
  const double beyond = t.log_tail(N) + 2.0 * std::log(phi[N]);
  return gap_bound_finite(log_pi, lambda, phi, beyond, descent_series(t.model(), N + 1));
}

AsymptoticRho0 asymptotic_rho0(const Landmarks& lm, const RateModel& model) {
  const double K = model.K();
  const double ratio = model.birth(1.0 / K) / model.death(1.0 / K);
  const double prefactor = std::sqrt(ratio) - 1.0 / std::sqrt(ratio);
  AsymptoticRho0 out;
  out.log_value = std::log(prefactor) + 0.5 * std::log(K * lm.h_second) +
                  std::log(lm.x_star * model.birth(lm.x_star)) -
                  0.5 * std::log(2.0 * std::numbers::pi) - K * lm.c;
  out.value = std::exp(out.log_value);
  return out;
}

std::vector<double> explicit_approximation(const CoefficientTable& t, std::int64_t n_star) {
  std::vector<double> V(static_cast<std::size_t>(t.N() + 1), 0.0);
  for (std::int64_t n = 1; n <= t.N(); ++n) V[n] = t.u0(std::min(n, n_star));
  return V;
}

SpectralSolution solve_spectral(const CoefficientTable& table, const Landmarks& lm,
                                SpectralOptions options) {
  auto [rho0, state] = find_rho0(table, lm);
  SpectralSolution sol = assemble_phi(state, table);
  const auto kernels = matching_kernels(table, lm);
  sol.D_K = kernels.D_K;
  sol.eta_K = kernels.eta_K;
  if (rho0 >= std::numeric_limits<double>::min()) {
    sol.residual = residual(sol, table);
  } else {
    sol.log_rho0 = linear_log_root(table, kernels);
    sol.residual = std::numeric_limits<double>::quiet_NaN();
  }
  sol.gap_lb = gap_lower_bound(sol, table);
  const auto asym = asymptotic_rho0(lm, table.model());
  sol.rho0_asymptotic = asym.value;
  sol.log_rho0_asymptotic = asym.log_value;
  sol.V = explicit_approximation(table, lm.n_star);
  if (options.oracle) {
    const auto eig = tridiag_top_eigs(table, 2);
    sol.rho1 = -eig.eigenvalues[1];
  }
  return sol;
}

}  // namespace bdqsd
