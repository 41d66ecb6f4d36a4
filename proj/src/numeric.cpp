#include "bdqsd/numeric.hpp"

#include <algorithm>

namespace bdqsd {

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return kNegInf;
  const double m = *std::max_element(xs.begin(), xs.end());
  if (m == kNegInf || !std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double fa,
                    double b, double fb, double m, double fm, double whole,
                    double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_depth) {
  if (a == b) return 0.0;
  // Split into a few panels first so narrow features are not skipped.
  constexpr int kPanels = 16;
  const double h = (b - a) / kPanels;
  double total = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double lo = a + i * h;
    const double hi = (i + 1 == kPanels) ? b : lo + h;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo), fhi = f(hi), fmid = f(mid);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += simpson_step(f, lo, flo, hi, fhi, mid, fmid, whole, tol / kPanels,
                          max_depth);
  }
  return total;
}

double integrate_to_infinity(const std::function<double(double)>& f, double a,
                             double tol) {
  auto g = [&](double u) {
    const double x = a * std::exp(u);
    return f(x) * x;
  };
  double total = 0.0;
  double lo = 0.0;
  double width = 1.0;
  while (lo < 700.0) {
    const double hi = std::min(lo + width, 700.0);
    const double piece = integrate(g, lo, hi, tol * 0.1);
    total += piece;
    if (std::abs(piece) < tol * 0.01 && lo > 0.0) break;
    lo = hi;
    width *= 2.0;
  }
  return total;
}

}  // namespace bdqsd
