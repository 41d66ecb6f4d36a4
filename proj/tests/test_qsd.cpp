#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "bdqsd/errors.hpp"
#include "bdqsd/model.hpp"
#include "bdqsd/qsd.hpp"
#include "bdqsd/spectral.hpp"
#include "bdqsd/transient.hpp"
#include "doctest.h"

using namespace bdqsd;

namespace {

struct Solved {
  RateModel model;
  Landmarks lm;
  CoefficientTable table;
  SpectralSolution sol;
  QsdResult qsd;
  explicit Solved(double K)
      : model(RateModel::logistic(2, 1, K)),
        lm(compute_landmarks(model)),
        table(build_table(model, lm)),
        sol(solve_spectral(table, lm)),
        qsd(analyze_qsd(sol, table, lm)) {}
};

}  // namespace

TEST_CASE("quasi-stationary distribution") {
  SUBCASE("normalized, centred near the equilibrium") {
    Solved s(100);
    double total = 0.0;
    for (double v : s.qsd.nu) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.qsd.nu[0] == 0.0);
    CHECK(std::abs(s.qsd.mean - static_cast<double>(s.lm.n_star)) <= 0.5 * std::sqrt(100.0));
  }
  SUBCASE("two states against a dense left eigenvector") {
    const std::vector<double> lambda = {0, 1.5, 0}, mu = {0, 0.7, 2.0};
    const auto e = tridiag_top_eigs(lambda, mu, 1);
    const std::vector<double> log_pi = {0.0, -std::log(0.7), std::log(1.5 / (0.7 * 2.0))};
    const auto nu = qsd_weights(log_pi, e.phi);
    Eigen::Matrix2d L;
    L << -(1.5 + 0.7), 1.5, 2.0, -2.0;
    Eigen::EigenSolver<Eigen::Matrix2d> es(L.transpose());
    const int top = es.eigenvalues()[0].real() > es.eigenvalues()[1].real() ? 0 : 1;
    Eigen::Vector2d v = es.eigenvectors().col(top).real();
    v /= v.sum();
    CHECK(nu[1] == doctest::Approx(v[0]).epsilon(1e-12));
    CHECK(nu[2] == doctest::Approx(v[1]).epsilon(1e-12));
    CHECK(-e.eigenvalues[0] == doctest::Approx(-es.eigenvalues()[top].real()).epsilon(1e-12));
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(qsd_weights(std::vector<double>(5, 0.0), std::vector<double>(3, 1.0)),
                    LengthMismatch);
  }
}

TEST_CASE("Gaussian comparator") {
  for (double K : {50.0, 100.0, 200.0, 400.0, 800.0}) {
    CAPTURE(K);
    const auto m = RateModel::logistic(2, 1, K);
    const auto lm = compute_landmarks(m);
    const auto t = build_table(m, lm);
    const auto g = gaussian_comparator(lm, K, t.N());
    double total = 0.0;
    for (double v : g.gaussian) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
    for (std::int64_t j = 1; j < lm.n_star; ++j) {
      CHECK(g.gaussian[lm.n_star + j] == doctest::Approx(g.gaussian[lm.n_star - j]).epsilon(1e-14));
    }
    CHECK(lm.sigma == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(std::abs(g.Z_K - g.Z_K_asymptotic) <= 1.0);
    CHECK(g.Z_K_asymptotic == doctest::Approx(std::sqrt(2.0 * std::numbers::pi * K) * lm.sigma));
  }
}

TEST_CASE("total variation") {
  const std::vector<double> p = {0.0, 0.2, 0.3, 0.5};
  CHECK(tv_distance(p, p) == 0.0);
  const std::vector<double> q = {0.0, 0.0, 0.0, 0.0, 0.4, 0.6};
  CHECK(tv_distance(p, q) == doctest::Approx(1.0));
  const std::vector<double> r = {0.0, 0.5, 0.5};
  CHECK(tv_distance(p, r) == doctest::Approx(0.5));
  CHECK_THROWS_AS(tv_distance(p, q, false), LengthMismatch);
}

TEST_CASE("mean extinction times") {
  SUBCASE("single state") {
    const auto t = hitting_times_linear(std::vector<double>{0, 0}, std::vector<double>{0, 1});
    CHECK(t[1] == doctest::Approx(1.0));
  }
  SUBCASE("two states by hand") {
    const double l1 = 1.3, m1 = 0.4, m2 = 2.5;
    const auto t = hitting_times_linear(std::vector<double>{0, l1, 0.8},
                                        std::vector<double>{0, m1, m2});
    const double t1 = (1.0 + l1 / m2) / m1;
    CHECK(t[1] == doctest::Approx(t1).epsilon(1e-14));
    CHECK(t[2] == doctest::Approx(t1 + 1.0 / m2).epsilon(1e-14));
  }
  SUBCASE("summed formula against the linear solve") {
    const auto m = RateModel::logistic(2, 1, 20);
    const auto lm = compute_landmarks(m);
    const auto tab = build_table(m, lm);
    const auto a = hitting_times_summed(tab);
    const auto b = extinction_time_linear(tab);
    // the two differ only through the closure at N, felt in the last few states
    for (std::int64_t n = 1; n <= lm.n_2star; ++n) CHECK(a[n] == doctest::Approx(b[n]).epsilon(1e-9));
    for (std::int64_t n = 2; n <= tab.N(); ++n) CHECK(b[n] >= b[n - 1]);
  }
  SUBCASE("nu-averaged time is the inverse eigenvalue") {
    for (double K : {20.0, 50.0, 100.0}) {
      CAPTURE(K);
      Solved s(K);
      CHECK(s.qsd.t0_summed * s.sol.rho0 == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(s.qsd.t0_linear * s.sol.rho0 == doctest::Approx(1.0).epsilon(1e-8));
      CHECK(s.qsd.t0_spectral == doctest::Approx(s.qsd.t0_summed).epsilon(1e-8));
      CHECK(s.qsd.t0_linear == doctest::Approx(s.qsd.t0_summed).epsilon(1e-8));
      CHECK_FALSE(s.qsd.display_variant_agrees);
    }
  }
}

TEST_CASE("mixture weights") {
  Solved s(100);
  const auto& a = s.qsd.alpha;
  CHECK(a[s.lm.n_star] == 1.0);
  CHECK(a[1] == doctest::Approx(1.0 / s.table.u0(s.lm.n_star)).epsilon(1e-15));
  for (std::int64_t n = 1; n < s.table.N(); ++n) {
    CHECK(a[n] > 0.0);
    CHECK(a[n] <= 1.0);
    CHECK(a[n + 1] >= a[n]);
  }
  for (double K : {50.0, 100.0, 200.0, 400.0, 800.0}) {
    const auto m = RateModel::logistic(2, 1, K);
    const auto lm = compute_landmarks(m);
    const auto t = build_table(m, lm);
    const auto al = alpha_weights(t, lm);
    const double q = t.mu(1) / t.lambda(1);
    for (int n = 1; n <= 10; ++n) {
      CAPTURE(K);
      CAPTURE(n);
      CHECK(std::abs(al[n] - (1.0 - std::pow(q, n))) * K <= 10.0);
    }
  }
}

TEST_CASE("transient law") {
  Solved s(15);
  const auto& t = s.table;
  const std::size_t size = static_cast<std::size_t>(t.N() + 1);

  SUBCASE("identity at t = 0") {
    const auto r = transient_conditioned_law(t, 7, 0.0);
    CHECK(r.survival == 1.0);
    CHECK(r.law[7] == 1.0);
    CHECK(r.conditioned[7] == 1.0);
  }
  SUBCASE("survival is non-increasing") {
    std::vector<double> init(size, 0.0);
    init[3] = 1.0;
    std::vector<double> times;
    for (int i = 0; i <= 40; ++i) times.push_back(0.25 * i * i);
    const auto laws = transient_laws(t, init, times);
    for (std::size_t i = 1; i < laws.size(); ++i) CHECK(laws[i].survival <= laws[i - 1].survival);
    for (const auto& l : laws) {
      double total = 0.0;
      for (double v : l.law) total += v;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("starting from nu") {
    const double times[] = {1.0, 5.0, 25.0};
    const auto laws = transient_laws(t, s.qsd.nu, times);
    for (const auto& l : laws) {
      CHECK(std::abs(l.survival - std::exp(-s.sol.rho0 * l.t)) <= 1e-8);
      CHECK(tv_distance(l.conditioned, s.qsd.nu) <= 1e-8);
    }
  }
  SUBCASE("three states against a dense exponential") {
    const std::vector<double> lambda = {0, 0.9, 1.7, 2.0}, mu = {0, 0.6, 1.1, 0.8};
    Eigen::Matrix3d L = Eigen::Matrix3d::Zero();
    for (int i = 0; i < 3; ++i) {
      L(i, i) = -((i < 2 ? lambda[i + 1] : 0.0) + mu[i + 1]);
      if (i < 2) L(i, i + 1) = lambda[i + 1];
      if (i > 0) L(i, i - 1) = mu[i + 1];
    }
    Eigen::EigenSolver<Eigen::Matrix3d> es(L);
    const Eigen::Matrix3cd V = es.eigenvectors();
    const Eigen::Matrix3cd Vinv = V.inverse();
    const std::vector<double> init = {0, 0, 1, 0};
    const double times[] = {0.3, 2.0, 7.5};
    const auto laws = transient_laws(lambda, mu, init, times);
    for (const auto& l : laws) {
      Eigen::Vector3cd ex = (es.eigenvalues() * l.t).array().exp();
      const Eigen::Matrix3d P = (V * ex.asDiagonal() * Vinv).real();
      double alive = 0.0;
      for (int j = 0; j < 3; ++j) {
        CHECK(l.law[j + 1] == doctest::Approx(P(1, j)).epsilon(1e-11));
        alive += P(1, j);
      }
      CHECK(l.survival == doctest::Approx(alive).epsilon(1e-11));
      CHECK(l.law[0] == doctest::Approx(1.0 - alive).epsilon(1e-11));
    }
  }
  SUBCASE("conditioned law settles on nu") {
    std::vector<double> init(size, 0.0);
    init[s.lm.n_star] = 1.0;
    std::vector<double> times;
    for (int i = 0; i <= 400; ++i) times.push_back(0.25 * i);
    const auto laws = transient_laws(t, init, times);
    std::size_t first = laws.size();
    for (std::size_t i = laws.size(); i-- > 0;) {
      if (tv_distance(laws[i].conditioned, s.qsd.nu) > 0.01) break;
      first = i;
    }
    REQUIRE(first < laws.size() / 2);
    const double tv1 = tv_distance(laws[first].conditioned, s.qsd.nu);
    const double tv2 = tv_distance(laws[2 * first].conditioned, s.qsd.nu);
    CHECK(tv2 < tv1);
  }
  SUBCASE("step cap") {
    CHECK_THROWS_AS(transient_conditioned_law(t, 5, 1e9), TimeTooLarge);
    CHECK(uniformization_steps(uniformization_rate(t), 1.0) > uniformization_rate(t));
    CHECK_THROWS_AS(transient_conditioned_law(t, 0, 1.0), IndexOutOfRange);
  }
}
