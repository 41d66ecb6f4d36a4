#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <utility>

namespace bdqsd {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow; -inf is the additive identity.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

double log_sum_exp(std::span<const double> xs);

// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12, int max_depth = 50);

// Integral over [a, +inf) for integrands decaying at least like 1/x^(1+eps),
// via x = a * e^u.  Requires a > 0.
double integrate_to_infinity(const std::function<double(double)>& f, double a,
                             double tol = 1e-12);

}  // namespace bdqsd
