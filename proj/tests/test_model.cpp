#include <cmath>
#include <numbers>
#include <vector>

#include "bdqsd/errors.hpp"
#include "bdqsd/model.hpp"
#include "doctest.h"

using namespace bdqsd;

namespace {

// H(x) - H(1) for the logistic {2, 1} model, h(s) = log((1 + s) / 2).
double logistic_H(double x) {
  auto F = [](double s) { return (1.0 + s) * std::log(1.0 + s) - (1.0 + s) - s * std::log(2.0); };
  return F(x) - F(1.0);
}

}  // namespace

TEST_CASE("equilibrium") {
  CHECK(find_equilibrium(RateModel::logistic(2, 1, 10)) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(find_equilibrium(RateModel::logistic(1.5, 0.5, 10)) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(find_equilibrium(RateModel::power_death(2, 1, 1, 2, 10)) ==
        doctest::Approx(1.0).epsilon(1e-13));
  auto m = RateModel::logistic(3.7, 1.2, 10);
  const double x = find_equilibrium(m);
  CHECK(std::abs(m.birth(x) - m.death(x)) <= 1e-13 * m.birth(x));
}

TEST_CASE("construction rejects invalid models") {
  CHECK_THROWS_AS(RateModel::logistic(1, 2, 10), InvalidModel);
  CHECK_THROWS_AS(RateModel::logistic(2, 1, 1.0), InvalidModel);
  CHECK_THROWS_AS(RateModel::logistic(2, -1, 10), InvalidModel);
  CHECK_THROWS_AS(RateModel::power_death(2, 1, 1, 0.5, 10), InvalidModel);
  CHECK_THROWS_AS(RateModel::power_death(2, 1, 0, 2, 10), InvalidModel);
}

TEST_CASE("landmarks of the logistic model") {
  const auto lm = compute_landmarks(RateModel::logistic(2, 1, 100));
  CHECK(lm.x_star == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(lm.x_2star == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(lm.theta == doctest::Approx(0.75));
  CHECK(lm.x_3star == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(lm.c == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-12));
  CHECK(lm.h_second == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(lm.sigma == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(lm.n_star == 100);
  CHECK(lm.n_2star == 300);
  CHECK(lm.n_3star == 50);
}

TEST_CASE("landmarks of a power-death model") {
  const auto lm = compute_landmarks(RateModel::power_death(2, 1, 1, 2, 50));
  CHECK(lm.x_star == doctest::Approx(1.0).epsilon(1e-12));
  // 2 = 2 (1 + x^2) -> x** = sqrt(3);  (1 + x^2)/2 = 3/4 -> x*** = 1/sqrt(2)
  CHECK(lm.x_2star == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  CHECK(lm.x_3star == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  // int_0^1 log(2 / (1 + x^2)) dx = 2 - pi/2
  CHECK(lm.c == doctest::Approx(2.0 - std::numbers::pi / 2.0).epsilon(1e-12));
  CHECK(lm.h_second == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("landmark ordering and positivity") {
  for (const auto& m : {RateModel::logistic(2, 1, 37), RateModel::logistic(5, 0.3, 120),
                        RateModel::power_death(3, 1, 2, 1.5, 80),
                        RateModel::power_death(1.2, 1, 0.5, 3, 200)}) {
    const auto lm = compute_landmarks(m);
    CHECK(0.0 < lm.x_3star);
    CHECK(lm.x_3star < lm.x_star);
    CHECK(lm.x_star < lm.x_2star);
    CHECK(lm.n_3star <= lm.n_star);
    CHECK(lm.n_star <= lm.n_2star);
    CHECK(lm.h_second > 0.0);
    CHECK(lm.c > 0.0);
    CHECK(lm.a_rate > 0.0);
    const double I = cv_integral(m, lm.x_star);
    CHECK(lm.a_rate >= 1.0 / ((lm.x_2star + 1.0) * I));
  }
}

TEST_CASE("H integral against its closed form") {
  const auto m = RateModel::logistic(2, 1, 10);
  for (double x : {0.0, 0.25, 1.0, 2.5, 4.0}) {
    CHECK(H_integral(m, 1.0, x) == doctest::Approx(logistic_H(x)).epsilon(1e-11));
  }
}

TEST_CASE("assumption checks") {
  SUBCASE("logistic passes") {
    const auto r = validate_assumptions({LogisticParams{2, 1}, 50}, 1000);
    CHECK(r.all_passed());
    CHECK(r.checks.size() == 9);
  }
  SUBCASE("power death passes") {
    CHECK(validate_assumptions({PowerDeathParams{2, 1, 1, 2}, 50}, 1000).all_passed());
  }
  SUBCASE("inverted coefficients fail at the origin check") {
    const auto r = validate_assumptions({LogisticParams{1, 2}, 50}, 1000);
    CHECK_FALSE(r.all_passed());
    REQUIRE(r.find("coeff") != nullptr);
    CHECK_FALSE(r.find("coeff")->passed);
    CHECK(r.find("infini")->passed);
  }
  SUBCASE("grid too coarse") {
    CHECK_THROWS_AS(validate_assumptions({LogisticParams{2, 1}, 50}, 99), ConfigError);
  }
}

TEST_CASE("coefficient table values") {
  const auto m = RateModel::logistic(2, 1, 10);
  const auto t = build_table(m, compute_landmarks(m));
  CHECK(std::exp(t.log_pi(1)) == doctest::Approx(1.0 / 1.1).epsilon(1e-15));
  CHECK(std::exp(t.log_pi(2)) == doctest::Approx(2.0 / (1.1 * 2.4)).epsilon(1e-15));
  CHECK(t.u0(1) == 1.0);
  CHECK(t.lambda(1) == 2.0);
  CHECK(t.mu(2) == doctest::Approx(2.4));
  CHECK(log_Lambda(t, 2, 1) == doctest::Approx(std::log(1.1 / 2.0)).epsilon(1e-15));
  CHECK(log_Lambda(t, 7, 7) == 0.0);
  CHECK_THROWS_AS(t.log_pi(0), IndexOutOfRange);
  CHECK_THROWS_AS(t.u0(t.N() + 1), IndexOutOfRange);
  CHECK_THROWS_AS(log_Lambda(t, 2, 3), IndexOutOfRange);
  CHECK_THROWS_AS(t.lambda(t.N() + 2), IndexOutOfRange);
}

TEST_CASE("coefficient table invariants") {
  for (double K : {10.0, 55.0, 300.0}) {
    for (const auto& m : {RateModel::logistic(2, 1, K), RateModel::power_death(2, 1, 1, 2, K)}) {
      const auto lm = compute_landmarks(m);
      const auto t = build_table(m, lm);
      CAPTURE(K);
      CHECK(t.N() >= lm.n_2star + 40);
      CHECK(t.log_pi(t.N()) - t.max_log_pi() < std::log(1e-30));
      // detailed balance, re-derived from the product definition
      double log_prod = -std::log(m.mu(1));
      for (std::int64_t n = 1; n < t.N(); ++n) {
        const double lhs = std::exp(t.log_pi(n) + std::log(t.lambda(n)) - t.max_log_pi());
        const double rhs = std::exp(t.log_pi(n + 1) + std::log(t.mu(n + 1)) - t.max_log_pi());
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        log_prod += std::log(m.lambda(n)) - std::log(m.mu(n + 1));
        CHECK(t.log_pi(n + 1) == doctest::Approx(log_prod).epsilon(1e-12));
      }
      for (std::int64_t n = 1; n < t.N(); ++n) {
        CHECK(t.inv_flux(n) > 0.0);
        CHECK(t.u0(n + 1) >= t.u0(n));
        CHECK(t.log_tail(n) <= t.log_tail(n - 1));
      }
      // u0 bound below the equilibrium
      double umax = 0.0;
      for (std::int64_t n = 1; n <= lm.n_star; ++n) umax = std::max(umax, t.u0(n));
      const double bound = 1.0 + 1.0 / (1.0 - lm.theta) +
                           static_cast<double>(lm.n_star - lm.n_3star + 1) *
                               std::pow(lm.theta, static_cast<double>(lm.n_3star));
      CHECK(umax <= bound);
    }
  }
}

TEST_CASE("tail sums match brute force") {
  const auto m = RateModel::logistic(2, 1, 20);
  const auto t = build_table(m, compute_landmarks(m));
  // brute-force sum of pi well past N
  std::vector<double> lp(5 * t.N() + 1, 0.0);
  lp[1] = -std::log(m.mu(1));
  for (std::int64_t n = 1; n < 5 * t.N(); ++n) {
    lp[n + 1] = lp[n] + std::log(m.lambda(n)) - std::log(m.mu(n + 1));
  }
  for (std::int64_t n : {std::int64_t{0}, std::int64_t{5}, std::int64_t{20}, std::int64_t{40}}) {
    double s = 0.0;
    for (std::int64_t p = n + 1; p < 5 * t.N(); ++p) s += std::exp(lp[p] - lp[n + 1]);
    CHECK(t.log_tail(n) == doctest::Approx(lp[n + 1] + std::log(s)).epsilon(1e-12));
  }
  // the tail past N is bounded above by the geometric correction
  double beyond = 0.0;
  for (std::int64_t p = t.N() + 1; p < 5 * t.N(); ++p) beyond += std::exp(lp[p] - lp[t.N()]);
  CHECK(std::exp(t.log_tail(t.N()) - t.log_pi(t.N())) >= beyond * (1.0 - 1e-12));
}

TEST_CASE("log Lambda follows the trapezoidal asymptotic") {
  const double K = 100.0;
  const auto m = RateModel::logistic(2, 1, K);
  const auto t = build_table(m, compute_landmarks(m));
  auto h = [](double x) { return std::log((1.0 + x) / 2.0); };
  auto expected = [&](std::int64_t n, std::int64_t mm) {
    const double xn = n / K, xm = mm / K;
    return K * (logistic_H(xn) - logistic_H(xm)) - 0.5 * (h(xn) - h(xm));
  };
  CHECK(std::abs(log_Lambda(t, 150, 50) - expected(150, 50)) <= 2.0 / K);
  for (auto [n, mm] : {std::pair<std::int64_t, std::int64_t>{3, 1}, {100, 2}, {250, 120}, {290, 10}}) {
    CAPTURE(n);
    CAPTURE(mm);
    CHECK(std::abs(log_Lambda(t, n, mm) - expected(n, mm)) <= 2.0 / K);
  }
}

TEST_CASE("truncation cap") {
  const auto m = RateModel::logistic(2, 1, 1000);
  TableOptions opt;
  opt.hard_cap = 500;
  CHECK_THROWS_AS(build_table(m, compute_landmarks(m), opt), TruncationFailure);
}

TEST_CASE("u0 at the equilibrium approaches its limit at rate 1/K") {
  double prev = 0.0;
  for (double K : {50.0, 100.0, 200.0, 400.0, 800.0}) {
    const auto m = RateModel::logistic(2, 1, K);
    const auto lm = compute_landmarks(m);
    const auto t = build_table(m, lm);
    const double limit = 2.0;  // 1 / (1 - mu / lam)
    const double scaled = std::abs(t.u0(lm.n_star) - limit) * K;
    CAPTURE(K);
    CHECK(scaled < 10.0);
    if (prev > 0.0) CHECK(scaled < 2.0 * prev);
    prev = scaled;
  }
}
