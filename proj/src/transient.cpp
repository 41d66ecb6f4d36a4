#include "bdqsd/transient.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "bdqsd/errors.hpp"

namespace bdqsd {

namespace {

std::int64_t poisson_bound(double m) {
  return static_cast<std::int64_t>(std::ceil(m + 12.0 * std::sqrt(m) + 40.0));
}

}  // namespace

double uniformization_rate(const CoefficientTable& t) {
  double Lu = 0.0;
  for (std::int64_t n = 1; n <= t.N(); ++n) Lu = std::max(Lu, t.lambda(n) + t.mu(n));
  return Lu + 1.0;
}

std::int64_t uniformization_steps(double rate, double t) { return poisson_bound(rate * t); }

std::vector<TransientLaw> transient_laws(std::span<const double> lambda,
                                         std::span<const double> mu,
                                         std::span<const double> initial,
                                         std::span<const double> times,
                                         TransientOptions options) {
  if (lambda.size() != mu.size() || lambda.size() < 2 || initial.size() != lambda.size()) {
    throw LengthMismatch("transient_laws: rates and initial law must cover [0, N]");
  }
  const std::size_t N = lambda.size() - 1;
  double Lu = 0.0;
  for (std::size_t n = 1; n <= N; ++n) Lu = std::max(Lu, lambda[n] + mu[n]);
  Lu += 1.0;

  const std::size_t T = times.size();
  std::vector<double> m(T);
  std::int64_t k_last = 0;
  for (std::size_t i = 0; i < T; ++i) {
    if (!(times[i] >= 0.0)) throw RhoOutOfRange("transient_laws: times must be >= 0");
    m[i] = Lu * times[i];
    const auto kb = poisson_bound(m[i]);
    if (kb > options.step_cap) {
      throw TimeTooLarge(fmt::format("t = {} needs ~{} uniformization steps (cap {})", times[i],
                                     kb, options.step_cap));
    }
    k_last = std::max(k_last, kb);
  }

  // jump kernel P = I + L / Lu
  std::vector<double> up(N + 1, 0.0), down(N + 1, 0.0), stay(N + 1, 1.0);
  for (std::size_t n = 1; n <= N; ++n) {
    up[n] = n < N ? lambda[n] / Lu : 0.0;
    down[n] = mu[n] / Lu;
    stay[n] = 1.0 - up[n] - down[n];
  }

  // Poisson weights by ratio recurrences, normalized over the window
  // [first, last]; lgamma is never needed, so large means lose no mass.
  std::vector<std::int64_t> first(T, 0), last(T, 0);
  std::vector<double> weight(T, 1.0), norm(T, 1.0);
  for (std::size_t i = 0; i < T; ++i) {
    if (m[i] == 0.0) continue;
    const auto mode = static_cast<std::int64_t>(std::floor(m[i]));
    last[i] = poisson_bound(m[i]);
    double w = 1.0, total = 1.0;
    std::int64_t k = mode;
    while (k > 0) {
      const double next = w * static_cast<double>(k) / m[i];
      if (next < 1e-35) break;  // e^-80 relative to the mode
      w = next;
      --k;
      total += w;
    }
    first[i] = k;
    weight[i] = w;
    double w_up = 1.0;
    for (std::int64_t j = mode; j < last[i]; ++j) {
      w_up *= m[i] / static_cast<double>(j + 1);
      total += w_up;
    }
    norm[i] = total;
  }

  std::vector<std::vector<double>> acc(T, std::vector<double>(N + 1, 0.0));
  std::vector<double> cumulative(T, 0.0);
  std::vector<bool> active(T, true);
  std::vector<double> v(initial.begin(), initial.end()), next(N + 1);
  std::size_t remaining = T;
  for (std::int64_t k = 0; remaining > 0 && k <= k_last; ++k) {
    for (std::size_t i = 0; i < T; ++i) {
      if (!active[i] || k < first[i]) continue;
      const double w = weight[i] / norm[i];
      auto& a = acc[i];
      for (std::size_t n = 0; n <= N; ++n) a[n] += w * v[n];
      cumulative[i] += w;
      weight[i] *= m[i] / static_cast<double>(k + 1);
      if (k >= last[i] || cumulative[i] >= 1.0 - options.poisson_tail) {
        active[i] = false;
        --remaining;
      }
    }
    if (remaining == 0) break;
    next[0] = v[0] + down[1] * v[1];
    for (std::size_t n = 1; n <= N; ++n) {
      double s = stay[n] * v[n];
      if (n >= 2) s += up[n - 1] * v[n - 1];
      if (n < N) s += down[n + 1] * v[n + 1];
      next[n] = s;
    }
    v.swap(next);
  }

  std::vector<TransientLaw> out(T);
  for (std::size_t i = 0; i < T; ++i) {
    auto& r = out[i];
    r.t = times[i];
    r.law = std::move(acc[i]);
    for (std::size_t n = 1; n <= N; ++n) r.survival += r.law[n];
    r.conditioned.assign(N + 1, 0.0);
    if (r.survival > 0.0) {
      for (std::size_t n = 1; n <= N; ++n) r.conditioned[n] = r.law[n] / r.survival;
    }
  }
  return out;
}

std::vector<TransientLaw> transient_laws(const CoefficientTable& t,
                                         std::span<const double> initial,
                                         std::span<const double> times,
                                         TransientOptions options) {
  if (t.N() > 50'000) throw IndexOutOfRange("transient solver limited to N <= 5e4");
  std::vector<double> lambda(static_cast<std::size_t>(t.N() + 1), 0.0), mu(lambda.size(), 0.0);
  for (std::int64_t n = 1; n <= t.N(); ++n) {
    lambda[n] = t.lambda(n);
    mu[n] = t.mu(n);
  }
  return transient_laws(lambda, mu, initial, times, options);
}

TransientLaw transient_conditioned_law(const CoefficientTable& t, std::int64_t n0, double time,
                                       TransientOptions options) {
  if (n0 < 1 || n0 > t.N()) throw IndexOutOfRange("n0 must lie in [1, N]");
  std::vector<double> init(static_cast<std::size_t>(t.N() + 1), 0.0);
  init[n0] = 1.0;
  const double times[] = {time};
  return std::move(transient_laws(t, init, times, options).front());
}

}  // namespace bdqsd
