#include "bdqsd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <random>
#include <thread>

#include "bdqsd/errors.hpp"
#include "bdqsd/qsd.hpp"

namespace bdqsd {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct Replica {
  double extinction = 0.0;
  bool censored = false;
  std::int64_t start = 0;
  std::uint64_t events = 0;
};

Replica simulate_one(const SimConfig& cfg, const std::vector<double>& start_cdf,
                     std::uint64_t index, std::span<std::int64_t> at_checkpoint) {
  std::mt19937_64 rng(replica_seed(cfg.master_seed, index));
  const auto& fam = cfg.model.family;
  const double K = cfg.model.K;
  std::int64_t n;
  if (cfg.n0) {
    n = *cfg.n0;
  } else {
    const double u = uniform01(rng) * start_cdf.back();
    n = std::upper_bound(start_cdf.begin(), start_cdf.end(), u) - start_cdf.begin();
    n = std::clamp<std::int64_t>(n, 1, static_cast<std::int64_t>(start_cdf.size()) - 1);
  }
  Replica r;
  r.start = n;
  const auto& cps = cfg.checkpoints;
  std::size_t c = 0;
  double t = 0.0;
  while (true) {
    const double x = static_cast<double>(n) / K;
    const double lam = static_cast<double>(n) * birth_fn(fam, x);
    const double mu = static_cast<double>(n) * death_fn(fam, x);
    const double total = lam + mu;
    const double t_next = t - std::log(1.0 - uniform01(rng)) / total;
    while (c < cps.size() && cps[c] < t_next) at_checkpoint[c++] = n;
    if (t_next > cfg.t_max) {
      r.extinction = cfg.t_max;
      r.censored = true;
      break;
    }
    t = t_next;
    ++r.events;
    n += uniform01(rng) * total < lam ? 1 : -1;
    if (n == 0) {
      r.extinction = t;
      break;
    }
  }
  while (c < cps.size()) at_checkpoint[c++] = 0;
  return r;
}

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

}  // namespace

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw LengthMismatch("fit_line needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n, my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

SimEstimate run_ssa(const SimConfig& cfg) {
  if (cfg.replicas < 1) throw ConfigError("replicas must be >= 1");
  if (!(cfg.t_max > 0.0)) throw ConfigError("t_max must be positive");
  if (!std::is_sorted(cfg.checkpoints.begin(), cfg.checkpoints.end()) ||
      (!cfg.checkpoints.empty() && cfg.checkpoints.back() > cfg.t_max)) {
    throw ConfigError("checkpoints must be sorted and <= t_max");
  }
  std::vector<double> cdf;
  if (!cfg.n0) {
    if (cfg.start_law.size() < 2) throw ConfigError("a start law is required when n0 is unset");
    cdf.resize(cfg.start_law.size());
    cdf[0] = 0.0;
    for (std::size_t n = 1; n < cdf.size(); ++n) cdf[n] = cdf[n - 1] + cfg.start_law[n];
  } else if (*cfg.n0 < 1) {
    throw ConfigError("n0 must be >= 1");
  }

  const auto R = static_cast<std::size_t>(cfg.replicas);
  const std::size_t C = cfg.checkpoints.size();
  // replica-major scratch, transposed afterwards
  std::vector<std::int64_t> grid(R * C, 0);
  std::vector<Replica> reps(R);
  const std::size_t workers =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::max(cfg.threads, 1)), 1, R);
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      reps[r] = simulate_one(cfg, cdf, r, std::span(grid).subspan(r * C, C));
    }
  };
  if (workers == 1) {
    work(0, R);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, R * w / workers, R * (w + 1) / workers);
    for (auto& th : pool) th.join();
  }

  SimEstimate est;
  est.extinction_times.resize(R);
  est.censored.resize(R);
  est.start_states.resize(R);
  for (std::size_t r = 0; r < R; ++r) {
    est.extinction_times[r] = reps[r].extinction;
    est.censored[r] = reps[r].censored ? 1 : 0;
    est.start_states[r] = reps[r].start;
    est.events += reps[r].events;
  }
  est.states.assign(C, std::vector<std::int64_t>(R, 0));
  est.conditioned_hist.resize(C);
  for (std::size_t c = 0; c < C; ++c) {
    std::int64_t top = 0;
    for (std::size_t r = 0; r < R; ++r) {
      est.states[c][r] = grid[r * C + c];
      top = std::max(top, est.states[c][r]);
    }
    auto& h = est.conditioned_hist[c];
    h.assign(static_cast<std::size_t>(top + 1), 0);
    SurvivalRow row;
    row.t = cfg.checkpoints[c];
    for (std::size_t r = 0; r < R; ++r) {
      if (est.states[c][r] > 0) {
        ++h[est.states[c][r]];
        ++row.alive;
      }
    }
    row.fraction = static_cast<double>(row.alive) / static_cast<double>(R);
    row.se = std::sqrt(row.fraction * (1.0 - row.fraction) / static_cast<double>(R));
    est.survival.push_back(row);
  }

  // survival-slope fit
  std::vector<std::size_t> window;
  for (std::size_t c = 0; c < C; ++c) {
    if (cfg.checkpoints[c] >= cfg.fit_start && est.survival[c].alive >= cfg.fit_min_survivors) {
      window.push_back(c);
    }
  }
  est.fit_points = static_cast<std::int64_t>(window.size());
  if (window.size() >= 3) {
    std::vector<double> x, y;
    for (auto c : window) {
      x.push_back(cfg.checkpoints[c]);
      y.push_back(-std::log(est.survival[c].fraction));
    }
    const auto fit = fit_line(x, y);
    est.rho0_hat = fit.slope;
    est.fit_r2 = fit.r2;
    est.fit_t_lo = x.front();
    est.fit_t_hi = x.back();

    std::mt19937_64 rng(splitmix64(cfg.master_seed ^ 0xb007b007b007b007ULL));
    std::vector<double> slopes;
    std::vector<std::int64_t> alive(window.size());
    for (int b = 0; b < cfg.bootstrap; ++b) {
      std::fill(alive.begin(), alive.end(), 0);
      for (std::size_t i = 0; i < R; ++i) {
        const auto r = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(R));
        for (std::size_t k = 0; k < window.size(); ++k) alive[k] += est.states[window[k]][r] > 0;
      }
      bool ok = true;
      for (std::size_t k = 0; k < window.size(); ++k) {
        if (alive[k] == 0) ok = false;
        y[k] = -std::log(static_cast<double>(alive[k]) / static_cast<double>(R));
      }
      if (ok) slopes.push_back(fit_line(x, y).slope);
    }
    if (!slopes.empty()) {
      est.rho0_ci_lo = quantile(slopes, 0.025);
      est.rho0_ci_hi = quantile(slopes, 0.975);
    }
  } else {
    est.rho0_hat = est.rho0_ci_lo = est.rho0_ci_hi = std::nan("");
  }
  return est;
}

TvEstimate conditioned_tv(const SimEstimate& est, std::size_t c, std::span<const double> nu,
                          std::uint64_t seed, int resamples, std::int64_t min_survivors) {
  if (c >= est.states.size()) throw IndexOutOfRange("checkpoint index out of range");
  std::vector<std::int64_t> alive;
  std::int64_t top = static_cast<std::int64_t>(nu.size()) - 1;
  for (auto s : est.states[c]) {
    if (s > 0) {
      alive.push_back(s);
      top = std::max(top, s);
    }
  }
  TvEstimate out;
  out.survivors = static_cast<std::int64_t>(alive.size());
  if (out.survivors < min_survivors) {
    throw InsufficientSurvivors(
        fmt::format("{} survivors at checkpoint {} (need {})", out.survivors, c, min_survivors));
  }
  const double S = static_cast<double>(alive.size());
  std::vector<double> p(static_cast<std::size_t>(top + 1), 0.0);
  for (auto s : alive) p[s] += 1.0 / S;
  out.tv = tv_distance(p, nu);
  std::mt19937_64 rng(splitmix64(seed ^ (0x7f4a7c15ULL + c)));
  std::vector<double> tvs;
  for (int b = 0; b < resamples; ++b) {
    std::fill(p.begin(), p.end(), 0.0);
    for (std::size_t i = 0; i < alive.size(); ++i) {
      p[alive[static_cast<std::size_t>(uniform01(rng) * S)]] += 1.0 / S;
    }
    tvs.push_back(tv_distance(p, nu));
  }
  if (!tvs.empty()) {
    out.ci_lo = quantile(tvs, 0.025);
    out.ci_hi = quantile(tvs, 0.975);
  }
  return out;
}

double ks_exponential(std::span<const double> sample, double rate) {
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double F = -std::expm1(-rate * s[i]);
    d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  return d;
}

double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

}  // namespace bdqsd
