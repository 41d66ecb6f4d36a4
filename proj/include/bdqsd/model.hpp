#pragma once

// Density-dependent birth-and-death rates with carrying capacity K:
//   lambda_n = n * birth(n / K),   mu_n = n * death(n / K).

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace bdqsd {

/// birth(x) = lam, death(x) = mu + x.
struct LogisticParams {
  double lam = 0.0;
  double mu = 0.0;
};

/// birth(x) = a, death(x) = b + cc * x^p.
struct PowerDeathParams {
  double a = 0.0;
  double b = 0.0;
  double cc = 0.0;
  double p = 1.0;
};

using RateFamily = std::variant<LogisticParams, PowerDeathParams>;

/// Unvalidated model description, as read from a config file.
struct ModelSpec {
  RateFamily family;
  double K = 0.0;
};

std::string family_name(const RateFamily& family);

// Pointwise evaluation of the scaled rate functions; defined for any
// parameter values so that invalid specs can still be inspected.
double birth_fn(const RateFamily& f, double x);
double death_fn(const RateFamily& f, double x);
double birth_fn_prime(const RateFamily& f, double x);
double death_fn_prime(const RateFamily& f, double x);
/// h(x) = log(death(x) / birth(x)) and its second derivative.
double log_ratio(const RateFamily& f, double x);
double log_ratio_second(const RateFamily& f, double x);

/// A validated rate model.  Construction enforces positive parameters and
/// birth(0) > death(0) > 0.
class RateModel {
 public:
  explicit RateModel(ModelSpec spec);

  static RateModel logistic(double lam, double mu, double K);
  static RateModel power_death(double a, double b, double cc, double p,
                               double K);

  double birth(double x) const { return birth_fn(spec_.family, x); }
  double death(double x) const { return death_fn(spec_.family, x); }
  double birth_prime(double x) const { return birth_fn_prime(spec_.family, x); }
  double death_prime(double x) const { return death_fn_prime(spec_.family, x); }
  double h(double x) const { return log_ratio(spec_.family, x); }

  double lambda(std::int64_t n) const {
    return static_cast<double>(n) * birth(static_cast<double>(n) / spec_.K);
  }
  double mu(std::int64_t n) const {
    return static_cast<double>(n) * death(static_cast<double>(n) / spec_.K);
  }

  double K() const { return spec_.K; }
  const ModelSpec& spec() const { return spec_; }

 private:
  ModelSpec spec_;
};

/// Structural constants of a model.  The x-valued fields are K-free; the
/// integer fields and a_rate belong to the model's K.
struct Landmarks {
  double x_star = 0.0;
  double x_2star = 0.0;
  double theta = 0.0;
  double x_3star = 0.0;
  std::int64_t n_star = 0;
  std::int64_t n_2star = 0;
  std::int64_t n_3star = 0;
  double h_second = 0.0;
  double sigma = 0.0;
  double c = 0.0;
  double a_rate = 0.0;
  double x_max = 0.0;
};

/// Unique root of birth(x) = death(x).  Throws NoCrossing.
double find_equilibrium(const RateModel& model);

Landmarks compute_landmarks(const RateModel& model);

/// H(x) = int_{x*}^{x} h(s) ds by quadrature.
double H_integral(const RateModel& model, double x_star, double x);

/// Integral of dx / (x death(x)) over [x_star / 2, inf).
double cv_integral(const RateModel& model, double x_star);

/// sum_{j >= n_from} (sum_{p > j} pi_p) / (lambda_j pi_j), including the
/// slowly decaying tail beyond the explicit range.
double descent_series(const RateModel& model, std::int64_t n_from);

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  std::string witness;
  double at = 0.0;
  double value = 0.0;
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  bool all_passed() const;
  const AssumptionCheck* find(const std::string& name) const;
};

ValidationReport validate_assumptions(const ModelSpec& spec, int grid_points);

struct TableOptions {
  std::int64_t hard_cap = 10'000'000;
  double rel_cutoff = 1e-30;
  /// Lower bound on N on top of the default rule (0 = none).
  std::int64_t min_N = 0;
};

/// Log-space tables of pi_n, u0_n, tail sums and rates over n in [1, N].
/// Vectors are indexed by n directly (slot 0 unused unless noted).
class CoefficientTable {
 public:
  CoefficientTable(const RateModel& model, const Landmarks& landmarks,
                   TableOptions options = {});

  std::int64_t N() const { return N_; }
  const RateModel& model() const { return model_; }

  double log_pi(std::int64_t n) const { return log_pi_[idx(n, 1, N_)]; }
  double u0(std::int64_t n) const { return u0_[idx(n, 1, N_)]; }
  /// ln sum_{p > n} pi_p, n in [0, N]; includes the geometric bound past N.
  double log_tail(std::int64_t n) const { return log_tail_[idx(n, 0, N_)]; }
  double log_pi_sum() const { return log_tail_[0]; }
  double lambda(std::int64_t n) const { return lambda_[idx(n, 1, N_ + 1)]; }
  double mu(std::int64_t n) const { return mu_[idx(n, 1, N_ + 1)]; }
  /// 1 / (lambda_n pi_n) = u0_{n+1} - u0_n.
  double inv_flux(std::int64_t n) const;
  /// sum_{j=1}^{n-1} ln(mu_j / lambda_j).
  double log_mu_over_lambda_prefix(std::int64_t n) const {
    return log_ml_prefix_[idx(n, 1, N_)];
  }
  double max_log_pi() const { return max_log_pi_; }

 private:
  static std::size_t idx(std::int64_t n, std::int64_t lo, std::int64_t hi);

  RateModel model_;
  std::int64_t N_ = 0;
  std::vector<double> log_pi_;
  std::vector<double> u0_;
  std::vector<double> log_tail_;
  std::vector<double> lambda_;
  std::vector<double> mu_;
  std::vector<double> log_ml_prefix_;
  double max_log_pi_ = 0.0;
};

CoefficientTable build_table(const RateModel& model, const Landmarks& landmarks,
                             TableOptions options = {});

/// ln Lambda_{n,m} = sum_{j=m}^{n-1} ln(mu_j / lambda_j), 1 <= m <= n <= N.
double log_Lambda(const CoefficientTable& table, std::int64_t n, std::int64_t m);

}  // namespace bdqsd
