#include "bdqsd/model.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <optional>

#include "bdqsd/errors.hpp"
#include "bdqsd/numeric.hpp"

namespace bdqsd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// x^e for x >= 0 with the conventions 0^0 = 1 and 0^negative = inf.
double pow0(double x, double e) {
  if (e == 0.0) return 1.0;
  if (x == 0.0) return e > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::pow(x, e);
}

// Boundary of a predicate that holds on [0, x_b] and fails beyond.
template <class Pred>
double bisect_boundary(Pred holds, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (holds(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Largest integer n >= 0 with holds(n / K), starting from floor(x K).
template <class Pred>
std::int64_t integer_boundary(Pred holds, double x, double K) {
  auto n = static_cast<std::int64_t>(std::floor(x * K));
  while (holds(static_cast<double>(n + 1) / K)) ++n;
  while (n > 0 && !holds(static_cast<double>(n) / K)) --n;
  return n;
}

double find_x2star(const RateModel& m, double x_star) {
  auto holds = [&](double x) { return 2.0 * m.birth(x) >= m.death(x); };
  double hi = std::max(2.0 * x_star, 1.0);
  for (int i = 0; holds(hi); ++i) {
    if (i > 1100) throw NoCrossing("birth/death ratio never falls below 1/2");
    hi *= 2.0;
  }
  return bisect_boundary(holds, x_star, hi);
}

}  // namespace

std::string family_name(const RateFamily& family) {
  return std::visit(overloaded{[](const LogisticParams&) { return std::string("logistic"); },
                               [](const PowerDeathParams&) { return std::string("power_death"); }},
                    family);
}

double birth_fn(const RateFamily& f, double /*x*/) {
  return std::visit(overloaded{[](const LogisticParams& p) { return p.lam; },
                               [](const PowerDeathParams& p) { return p.a; }},
                    f);
}

double death_fn(const RateFamily& f, double x) {
  return std::visit(overloaded{[&](const LogisticParams& p) { return p.mu + x; },
                               [&](const PowerDeathParams& p) { return p.b + p.cc * pow0(x, p.p); }},
                    f);
}

double birth_fn_prime(const RateFamily&, double) { return 0.0; }

double death_fn_prime(const RateFamily& f, double x) {
  return std::visit(
      overloaded{[](const LogisticParams&) { return 1.0; },
                 [&](const PowerDeathParams& p) { return p.cc * p.p * pow0(x, p.p - 1.0); }},
      f);
}

double log_ratio(const RateFamily& f, double x) {
  return std::log(death_fn(f, x) / birth_fn(f, x));
}

double log_ratio_second(const RateFamily& f, double x) {
  return std::visit(
      overloaded{[&](const LogisticParams& p) { return -1.0 / ((p.mu + x) * (p.mu + x)); },
                 [&](const PowerDeathParams& p) {
                   const double d = p.b + p.cc * pow0(x, p.p);
                   const double d1 = p.cc * p.p * pow0(x, p.p - 1.0);
                   const double d2 =
                       p.p == 1.0 ? 0.0 : p.cc * p.p * (p.p - 1.0) * pow0(x, p.p - 2.0);
                   return d2 / d - (d1 / d) * (d1 / d);
                 }},
      f);
}

RateModel::RateModel(ModelSpec spec) : spec_(std::move(spec)) {
  if (!(spec_.K > 1.0) || !std::isfinite(spec_.K)) {
    throw InvalidModel(fmt::format("carrying capacity K must exceed 1 (got {})", spec_.K));
  }
  std::visit(overloaded{[](const LogisticParams& p) {
                          if (!(p.lam > 0.0) || !(p.mu > 0.0) || !std::isfinite(p.lam) ||
                              !std::isfinite(p.mu)) {
                            throw InvalidModel("logistic: lam and mu must be positive");
                          }
                        },
                        [](const PowerDeathParams& p) {
                          if (!(p.a > 0.0) || !(p.b > 0.0) || !(p.cc > 0.0) || !(p.p >= 1.0) ||
                              !std::isfinite(p.a) || !std::isfinite(p.b) ||
                              !std::isfinite(p.cc) || !std::isfinite(p.p)) {
                            throw InvalidModel(
                                "power_death: a, b, cc must be positive and p >= 1");
                          }
                        }},
             spec_.family);
  if (!(birth(0.0) > death(0.0))) {
    throw InvalidModel(fmt::format("need birth(0) > death(0) > 0 (got {} vs {})", birth(0.0),
                                   death(0.0)));
  }
}

RateModel RateModel::logistic(double lam, double mu, double K) {
  return RateModel(ModelSpec{LogisticParams{lam, mu}, K});
}

RateModel RateModel::power_death(double a, double b, double cc, double p, double K) {
  return RateModel(ModelSpec{PowerDeathParams{a, b, cc, p}, K});
}

double find_equilibrium(const RateModel& model) {
  auto above = [&](double x) { return model.birth(x) >= model.death(x); };
  double hi = 1.0;
  for (int i = 0; above(hi); ++i) {
    if (i > 1100) throw NoCrossing("birth(x) never falls below death(x)");
    hi *= 2.0;
  }
  return bisect_boundary(above, 0.0, hi);
}

double H_integral(const RateModel& model, double x_star, double x) {
  return integrate([&](double s) { return model.h(s); }, x_star, x, 1e-12);
}

double cv_integral(const RateModel& model, double x_star) {
  return integrate_to_infinity([&](double x) { return 1.0 / (x * model.death(x)); },
                               0.5 * x_star, 1e-12);
}

double descent_series(const RateModel& model, std::int64_t n_from) {
  n_from = std::max<std::int64_t>(n_from, 1);
  const std::int64_t j_last = std::max<std::int64_t>(8 * n_from, n_from + 1000);
  const std::int64_t j_seed = j_last + 400;
  // r_j = sum_{p>j} pi_p / pi_j = q_j (1 + r_{j+1}),  q_j = lambda_j / mu_{j+1}.
  double q = model.lambda(j_seed) / model.mu(j_seed + 1);
  double r = q / (1.0 - q);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(j_last - n_from + 1));
  for (std::int64_t j = j_seed - 1; j >= n_from; --j) {
    r = model.lambda(j) / model.mu(j + 1) * (1.0 + r);
    if (j <= j_last) terms.push_back(r / model.lambda(j));
  }
  double sum = 0.0;
  // Smallest terms first.
  for (double t : terms) sum += t;
  const double x_tail = (static_cast<double>(j_last) + 0.5) / model.K();
  sum += integrate_to_infinity(
      [&](double x) { return 1.0 / (x * (model.death(x) - model.birth(x))); }, x_tail, 1e-14);
  return sum;
}

Landmarks compute_landmarks(const RateModel& model) {
  Landmarks lm;
  const double K = model.K();
  lm.x_star = find_equilibrium(model);
  lm.x_2star = find_x2star(model, lm.x_star);
  lm.x_max = 10.0 * lm.x_2star;
  lm.theta = 0.5 * (model.death(0.0) / model.birth(0.0) + 1.0);
  auto below_theta = [&](double x) { return model.death(x) <= lm.theta * model.birth(x); };
  lm.x_3star = bisect_boundary(below_theta, 0.0, lm.x_star);

  lm.n_star = integer_boundary([&](double x) { return model.birth(x) >= model.death(x); },
                               lm.x_star, K);
  lm.n_2star = integer_boundary(
      [&](double x) { return 2.0 * model.birth(x) >= model.death(x); }, lm.x_2star, K);
  lm.n_3star = integer_boundary(below_theta, lm.x_3star, K);

  const double xs = lm.x_star;
  lm.h_second = model.death_prime(xs) / model.death(xs) - model.birth_prime(xs) / model.birth(xs);
  lm.sigma = 1.0 / std::sqrt(lm.h_second);
  lm.c = integrate([&](double x) { return -model.h(x); }, 0.0, xs, 1e-12);
  lm.a_rate = 1.0 / descent_series(model, lm.n_2star);
  return lm;
}

// --- assumption validation -------------------------------------------------

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const AssumptionCheck& c) { return c.passed; });
}

const AssumptionCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ValidationReport validate_assumptions(const ModelSpec& spec, int grid_points) {
  if (grid_points < 100) throw ConfigError("grid_points must be at least 100");
  const RateFamily& f = spec.family;
  ValidationReport report;
  auto add = [&](std::string name, bool ok, std::string witness, double at, double value) {
    report.checks.push_back({std::move(name), ok, std::move(witness), at, value});
  };

  // (infini): ratio decreasing to ~0 along a geometric grid.
  {
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    double x = 1.0, ratio = 0.0;
    for (int k = 0; k <= 80; ++k, x *= 2.0) {
      ratio = birth_fn(f, x) / death_fn(f, x);
      if (!(ratio <= prev)) decreasing = false;
      prev = ratio;
    }
    x /= 2.0;
    const bool ok = decreasing && ratio < 1e-6 && ratio >= 0.0;
    add("infini", ok, fmt::format("birth/death = {:.3e} at x = {:.3e}", ratio, x), x, ratio);
  }

  const double b0 = birth_fn(f, 0.0), d0 = death_fn(f, 0.0);
  const bool coeff_ok = b0 > d0 && d0 > 0.0;
  add("coeff", coeff_ok, fmt::format("birth(0) = {}, death(0) = {}", b0, d0), 0.0, b0 - d0);

  static const char* const kDependent[] = {"eq:xstar", "cv-int",  "eq:generic", "pierre",
                                           "log-monotone", "seconde", "eq:pimu"};
  std::optional<RateModel> model;
  if (coeff_ok) {
    try {
      model.emplace(spec);
    } catch (const InvalidModel& e) {
      add("params", false, e.what(), 0.0, 0.0);
    }
  }
  if (!model) {
    for (const char* name : kDependent) add(name, false, "not evaluated: (coeff) failed", 0.0, 0.0);
    return report;
  }

  double x_star = 0.0, x_max = 0.0;
  try {
    x_star = find_equilibrium(*model);
    x_max = 10.0 * find_x2star(*model, x_star);
  } catch (const NoCrossing& e) {
    for (const char* name : kDependent) add(name, false, e.what(), 0.0, 0.0);
    return report;
  }

  std::vector<double> grid(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) grid[i] = x_max * i / (grid_points - 1);
  std::vector<double> geo;
  for (double x = x_max; x < x_max * 1e12; x *= 1.5) geo.push_back(x);

  // (eq:xstar): exactly one sign change of birth - death on the grid.
  {
    int changes = 0;
    double prev = b0 - d0;
    for (double x : grid) {
      const double g = birth_fn(f, x) - death_fn(f, x);
      if ((g < 0.0) != (prev < 0.0)) ++changes;
      prev = g;
    }
    add("eq:xstar", changes == 1,
        fmt::format("{} sign change(s) on [0, {:.6g}]; x* = {:.15g}", changes, x_max, x_star),
        x_star, static_cast<double>(changes));
  }

  {
    const double diff = birth_fn_prime(f, x_star) - death_fn_prime(f, x_star);
    add("eq:generic", std::abs(diff) > 1e-12,
        fmt::format("birth'(x*) - death'(x*) = {:.6g}", diff), x_star, diff);
  }

  {
    auto inv = [&](double x) { return 1.0 / (x * death_fn(f, x)); };
    auto partial = [&](double upper_u) {
      return integrate([&](double u) {
        const double x = 0.5 * x_star * std::exp(u);
        return inv(x) * x;
      }, 0.0, upper_u, 1e-13);
    };
    const double i20 = partial(20.0), i40 = partial(40.0);
    const bool ok = std::isfinite(i40) && (i40 - i20) <= 1e-6 * i20;
    add("cv-int", ok,
        fmt::format("int_(x*/2)^(x*/2 e^20) = {:.12g}, increment to e^40 = {:.3e}", i20,
                    i40 - i20),
        0.5 * x_star, i40);
  }

  {
    double sup = 0.0, at = 0.0;
    bool finite = true;
    for (const auto* g : {&grid, &geo}) {
      for (double x : *g) {
        const double v = death_fn_prime(f, x) / death_fn(f, x);
        if (!std::isfinite(v)) finite = false;
        if (v > sup) sup = v, at = x;
      }
    }
    const double tail = death_fn_prime(f, geo.back()) / death_fn(f, geo.back());
    add("pierre", finite && tail <= sup,
        fmt::format("sup death'/death = {:.6g} at x = {:.6g}", sup, at), at, sup);
  }

  {
    bool ok = true;
    double at = 0.0;
    double prev = log_ratio(f, 0.0);
    for (const auto* g : {&grid, &geo}) {
      for (double x : *g) {
        const double v = log_ratio(f, x);
        if (v < prev) ok = false, at = x;
        prev = v;
      }
    }
    ok = ok && log_ratio(f, geo.back()) > log_ratio(f, 0.0);
    add("log-monotone", ok, ok ? "log(death/birth) non-decreasing on grid"
                               : fmt::format("decrease at x = {:.6g}", at),
        at, prev);
  }

  {
    double sup = 0.0, at = 0.0;
    bool finite = true;
    std::vector<double> tail_vals;
    for (const auto* g : {&grid, &geo}) {
      for (double x : *g) {
        const double v = (1.0 + x * x) * std::abs(log_ratio_second(f, x));
        if (!std::isfinite(v)) finite = false, at = x;
        if (v > sup) sup = v, at = x;
        if (g == &geo) tail_vals.push_back(v);
      }
    }
    const std::size_t k = tail_vals.size();
    const bool settled = k >= 2 && tail_vals[k - 1] <= 1.01 * tail_vals[k - 2] + 1e-300;
    add("seconde", finite && settled,
        fmt::format("sup (1+x^2)|H'''| = {:.6g} at x = {:.6g}", sup, at), at, sup);
  }

  {
    try {
      const Landmarks lm = compute_landmarks(*model);
      const CoefficientTable table(*model, lm);
      const double cutoff = std::log(1e-12);
      std::int64_t first_below = -1;
      bool decreasing = true;
      double prev = std::numeric_limits<double>::infinity();
      for (std::int64_t n = 1; n <= table.N(); ++n) {
        const double v =
            table.log_pi(n) + 2.0 * std::log(table.mu(n)) - table.max_log_pi();
        if (first_below < 0 && v < cutoff) first_below = n;
        if (n > lm.n_2star) {
          if (v > prev) decreasing = false;
        }
        prev = v;
      }
      add("eq:pimu", first_below > 0 && decreasing,
          first_below > 0
              ? fmt::format("pi_n mu_n^2 / max pi < 1e-12 from n = {} (N = {})", first_below,
                            table.N())
              : fmt::format("pi_n mu_n^2 / max pi stays above 1e-12 up to N = {}", table.N()),
          static_cast<double>(first_below), prev);
    } catch (const Error& e) {
      add("eq:pimu", false, e.what(), 0.0, 0.0);
    }
  }
  return report;
}

// --- coefficient table -----------------------------------------------------

std::size_t CoefficientTable::idx(std::int64_t n, std::int64_t lo, std::int64_t hi) {
  if (n < lo || n > hi) {
    throw IndexOutOfRange(fmt::format("index {} outside [{}, {}]", n, lo, hi));
  }
  return static_cast<std::size_t>(n);
}

CoefficientTable::CoefficientTable(const RateModel& model, const Landmarks& lm,
                                   TableOptions options)
    : model_(model) {
  const double K = model.K();
  const auto min_extra = std::max<std::int64_t>(40, static_cast<std::int64_t>(std::ceil(10.0 * std::sqrt(K))));
  const std::int64_t n_min = std::max(lm.n_2star + min_extra, options.min_N);
  const double log_cut = std::log(options.rel_cutoff);

  log_pi_.assign(2, 0.0);
  lambda_.assign(2, 0.0);
  mu_.assign(2, 0.0);
  lambda_[1] = model.lambda(1);
  mu_[1] = model.mu(1);
  log_pi_[1] = -std::log(mu_[1]);
  max_log_pi_ = log_pi_[1];
  std::int64_t n = 1;
  while (n < n_min || log_pi_[n] - max_log_pi_ >= log_cut) {
    if (n >= options.hard_cap) {
      throw TruncationFailure(fmt::format("truncation level would exceed cap {}", options.hard_cap));
    }
    const double mu_next = model.mu(n + 1);
    const double next = log_pi_[n] + std::log(lambda_[n]) - std::log(mu_next);
    ++n;
    log_pi_.push_back(next);
    mu_.push_back(mu_next);
    lambda_.push_back(model.lambda(n));
    max_log_pi_ = std::max(max_log_pi_, next);
  }
  N_ = n;
  lambda_.push_back(model.lambda(N_ + 1));
  mu_.push_back(model.mu(N_ + 1));

  const auto size = static_cast<std::size_t>(N_ + 1);
  u0_.assign(size, 0.0);
  log_ml_prefix_.assign(size, 0.0);
  u0_[1] = 1.0;
  for (std::int64_t k = 1; k < N_; ++k) {
    u0_[k + 1] = u0_[k] + std::exp(-log_pi_[k] - std::log(lambda_[k]));
    log_ml_prefix_[k + 1] = log_ml_prefix_[k] + std::log(mu_[k] / lambda_[k]);
  }

  // Past N, pi_{p+1}/pi_p = lambda_p/mu_{p+1} is decreasing, so the tail is
  // bounded by a geometric series with the ratio at N.
  const double q = lambda_[N_] / mu_[N_ + 1];
  if (!(q < 1.0)) {
    throw TruncationFailure("pi is not decaying at the truncation level");
  }
  log_tail_.assign(size, kNegInf);
  log_tail_[N_] = log_pi_[N_] + std::log(q / (1.0 - q));
  for (std::int64_t k = N_ - 1; k >= 0; --k) {
    log_tail_[k] = log_add(log_pi_[k + 1], log_tail_[k + 1]);
  }
}

double CoefficientTable::inv_flux(std::int64_t n) const {
  return std::exp(-log_pi(n) - std::log(lambda(n)));
}

CoefficientTable build_table(const RateModel& model, const Landmarks& landmarks,
                             TableOptions options) {
  return CoefficientTable(model, landmarks, options);
}

double log_Lambda(const CoefficientTable& table, std::int64_t n, std::int64_t m) {
  if (m < 1 || n < m || n > table.N()) {
    throw IndexOutOfRange(fmt::format("log_Lambda needs 1 <= m <= n <= N (m={}, n={}, N={})", m,
                                      n, table.N()));
  }
  return table.log_mu_over_lambda_prefix(n) - table.log_mu_over_lambda_prefix(m);
}

}  // namespace bdqsd
