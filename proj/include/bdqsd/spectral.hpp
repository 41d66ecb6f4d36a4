#pragma once

// Extinction eigenvalue rho0 and eigenvector phi of the killed generator
//   (L u)_n = lambda_n u_{n+1} + mu_n u_{n-1} 1{n>=2} - (lambda_n + mu_n) u_n
// by matching a perturbed u0 branch (n <= n*) with a near-constant branch
// (n >= n* - 1), plus an independent tridiagonal eigensolver and the
// Poincare lower bound on the spectral gap.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bdqsd/model.hpp"

namespace bdqsd {

/// Solves alpha_n w_{n+1} + beta_n w_{n-1} - (alpha_n + beta_n) w_n = h_n for
/// q+1 <= n <= n_max-1 from seeds w_q, w_{q+1}.  Arrays are indexed by n and
/// must cover [q, n_max]; the result has size n_max + 1 with w[q..n_max] set.
std::vector<double> solve_recursion(std::span<const double> alpha,
                                    std::span<const double> beta,
                                    std::span<const double> h, double w_q,
                                    double w_q1, std::int64_t q,
                                    std::int64_t n_max);

/// rho-independent pieces of the matching construction.
struct MatchingKernels {
  std::int64_t n_star = 0;
  std::vector<double> Delta0;  ///< d delta / d rho at 0, n in [1, n*]
  std::vector<double> W0;      ///< d w / d rho at 0, n in [n*-1, N]
  double delta_cap = 0.0;      ///< 1 / (3 |Delta0_{n*}|)
  double w_cap = 0.0;          ///< 1 / (3 sup W0)
  double D_K = 0.0;
  double eta_K = 0.0;
};

MatchingKernels matching_kernels(const CoefficientTable& table,
                                 const Landmarks& landmarks);

struct MatchingState {
  double rho = 0.0;
  std::vector<double> delta;       ///< n in [1, n*]
  std::vector<double> delta_step;  ///< delta_{n+1} - delta_n, n in [1, n*-1]
  std::vector<double> w;           ///< n in [n*-1, N]
  std::vector<double> w_step;      ///< w_{n+1} - w_n, n in [n*-1, N-1]
  double f_value = 0.0;
  std::vector<double> Delta0;
  std::vector<double> W0;
  std::int64_t n_star = 0;
};

std::vector<double> delta_of_rho(const CoefficientTable& table,
                                 const Landmarks& landmarks, double rho);
std::vector<double> w_of_rho(const CoefficientTable& table,
                             const Landmarks& landmarks, double rho);
double matching_f(const CoefficientTable& table, const Landmarks& landmarks,
                  double rho);
MatchingState matching_state(const CoefficientTable& table,
                             const Landmarks& landmarks, double rho);

/// ln of the root of the matching function linearized at rho = 0.  Used
/// when rho0 is below the smallest normal double.
double linear_log_root(const CoefficientTable& table, const MatchingKernels& kernels);

/// Smallest positive root of the matching function, by bisection.
std::pair<double, MatchingState> find_rho0(const CoefficientTable& table,
                                           const Landmarks& landmarks);

struct SpectralSolution {
  double rho0 = 0.0;  ///< may underflow to 0 for large K; log_rho0 stays exact
  double log_rho0 = 0.0;
  std::vector<double> phi;   ///< n in [1, N], phi_1 = 1
  std::vector<double> dphi;  ///< phi_{n+1} - phi_n, n in [1, N-1]
  std::vector<double> delta_step;  ///< lower-branch delta increments, n in [1, n*-1]
  double b = 0.0;
  std::optional<double> rho1;
  double gap_lb = 0.0;
  double residual = 0.0;  ///< NaN when rho0 underflows
  double rho0_asymptotic = 0.0;
  double log_rho0_asymptotic = 0.0;
  std::vector<double> V;  ///< n in [1, N]
  double D_K = 0.0;
  double eta_K = 0.0;
  double matching_mismatch = 0.0;
  std::int64_t n_star = 0;
};

SpectralSolution assemble_phi(const MatchingState& state,
                              const CoefficientTable& table);

/// Per-n residual lambda_n (u_{n+1}-u_n) - mu_n (u_n - u_{n-1}) + rho u_n,
/// n in [1, N-1], with u_0 = 0.  Computed from the values of u.
std::vector<double> eigen_residuals(const CoefficientTable& table,
                                    std::span<const double> u, double rho);

/// max_n |residual_n| / (rho0 phi_n).  Below n* the u0 part of the
/// equation is cancelled analytically, leaving only O(rho) terms.
double residual(const SpectralSolution& solution, const CoefficientTable& table);

struct TridiagEigen {
  std::vector<double> eigenvalues;  ///< k largest, descending
  std::vector<double> phi;          ///< top eigenvector in phi-coordinates, phi_1 = 1
  double norm = 0.0;                ///< infinity norm of the symmetric matrix
  bool rho0_trusted = false;        ///< -eigenvalues[0] >= 1e3 * norm * 2^-52
};

/// Top-k eigenpairs of the generator restricted to states 1..N with the
/// given rates (arrays indexed by n; lambda[N] is a killing rate).
TridiagEigen tridiag_top_eigs(std::span<const double> lambda,
                              std::span<const double> mu, int k);
/// Oracle for the table's model on states 1..2N; phi is returned on [1, N].
TridiagEigen tridiag_top_eigs(const CoefficientTable& table, int k);

/// Number of eigenvalues of the symmetric tridiagonal (diag, offdiag)
/// strictly below x.
std::int64_t sturm_count(std::span<const double> diag,
                         std::span<const double> offdiag, double x);

/// Poincare bound for a finite chain.  Arrays indexed by n in [1, N];
/// phi must also hold phi[N+1].  `log_mass_beyond` is ln sum_{q>N} pi_q phi_q^2
/// and `tail_weight` is added to every second sum.
double gap_bound_finite(std::span<const double> log_pi,
                        std::span<const double> lambda,
                        std::span<const double> phi,
                        double log_mass_beyond = -std::numeric_limits<double>::infinity(),
                        double tail_weight = 0.0);

double gap_lower_bound(const SpectralSolution& solution,
                       const CoefficientTable& table);

struct AsymptoticRho0 {
  double log_value = 0.0;
  double value = 0.0;
};

AsymptoticRho0 asymptotic_rho0(const Landmarks& landmarks, const RateModel& model);

/// V_n = u0_n for n <= n*, u0_{n*} beyond.
std::vector<double> explicit_approximation(const CoefficientTable& table,
                                           std::int64_t n_star);

struct SpectralOptions {
  bool oracle = false;
};

/// Full pipeline: matching root, eigenvector, gap bound, diagnostics and,
/// optionally, the tridiagonal oracle for rho1.
SpectralSolution solve_spectral(const CoefficientTable& table,
                                const Landmarks& landmarks,
                                SpectralOptions options = {});

}  // namespace bdqsd
