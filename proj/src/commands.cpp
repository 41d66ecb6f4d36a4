#include "bdqsd/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <map>
#include <openssl/evp.h>
#include <ostream>
#include <sstream>
#include <thread>

#include "bdqsd/errors.hpp"
#include "bdqsd/qsd.hpp"
#include "bdqsd/simulate.hpp"
#include "bdqsd/spectral.hpp"
#include "bdqsd/transient.hpp"

namespace bdqsd {

using json = nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", x);
}

std::string git_blob_sha1(const std::string& content) {
  const std::string data = fmt::format("blob {}", content.size()) + std::string(1, '\0') + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1) {
    throw Error("SHA-1 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

// --- config ------------------------------------------------------------------

namespace {

using OptionCheck = std::function<bool(const json&)>;

bool is_int_at_least(const json& v, std::int64_t lo) {
  return v.is_number_integer() && v.get<std::int64_t>() >= lo;
}

const std::map<std::string, OptionCheck>& option_schema() {
  static const std::map<std::string, OptionCheck> schema = {
      {"grid_points", [](const json& v) { return is_int_at_least(v, 100); }},
      {"oracle", [](const json& v) { return v.is_boolean(); }},
      {"replicas", [](const json& v) { return is_int_at_least(v, 1); }},
      {"n0", [](const json& v) { return is_int_at_least(v, 1) || v == "qsd" || v == "nstar"; }},
      {"t_max", [](const json& v) { return v.is_number() && v.get<double>() > 0.0; }},
      {"horizon", [](const json& v) { return v.is_number() && v.get<double>() > 0.0; }},
      {"checkpoints", [](const json& v) { return is_int_at_least(v, 2); }},
      {"fit_start", [](const json& v) { return v.is_number() && v.get<double>() >= 0.0; }},
      {"fit_min_survivors", [](const json& v) { return is_int_at_least(v, 1); }},
      {"yaglom_n0",
       [](const json& v) {
         if (!v.is_array() || v.empty()) return false;
         return std::all_of(v.begin(), v.end(),
                            [](const json& e) { return is_int_at_least(e, 1) || e == "nstar"; });
       }},
      {"t_min", [](const json& v) { return v.is_number() && v.get<double>() > 0.0; }},
      {"t_points", [](const json& v) { return is_int_at_least(v, 2); }},
  };
  return schema;
}

double number_value(const json& j, const std::string& what) {
  if (!j.is_number()) throw ConfigError(fmt::format("'{}' must be a number", what));
  return j.get<double>();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("malformed JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "family" && key != "params" && key != "K" && key != "options") {
      throw ConfigError(fmt::format("unknown key '{}'", key));
    }
  }
  for (const char* key : {"family", "params", "K"}) {
    if (!doc.contains(key)) throw ConfigError(fmt::format("missing key '{}'", key));
  }
  if (!doc["family"].is_string()) throw ConfigError("'family' must be a string");
  const auto& params = doc["params"];
  if (!params.is_object()) throw ConfigError("'params' must be an object");

  auto take = [&](std::initializer_list<const char*> names) {
    for (const auto& [key, _] : params.items()) {
      if (std::none_of(names.begin(), names.end(), [&](const char* n) { return key == n; })) {
        throw ConfigError(fmt::format("unknown parameter '{}'", key));
      }
    }
    std::vector<double> out;
    for (const char* n : names) {
      if (!params.contains(n)) throw ConfigError(fmt::format("missing parameter '{}'", n));
      out.push_back(number_value(params[n], fmt::format("params.{}", n)));
    }
    return out;
  };

  RunConfig cfg;
  const auto family = doc["family"].get<std::string>();
  if (family == "logistic") {
    const auto v = take({"lam", "mu"});
    cfg.spec.family = LogisticParams{v[0], v[1]};
  } else if (family == "power_death") {
    const auto v = take({"a", "b", "cc", "p"});
    cfg.spec.family = PowerDeathParams{v[0], v[1], v[2], v[3]};
  } else {
    throw ConfigError(fmt::format("unknown family '{}'", family));
  }

  const auto& K = doc["K"];
  if (K.is_array()) {
    if (K.empty()) throw ConfigError("'K' list is empty");
    for (const auto& k : K) cfg.K_list.push_back(number_value(k, "K"));
    cfg.K_is_list = true;
  } else {
    cfg.K_list.push_back(number_value(K, "K"));
  }
  cfg.spec.K = cfg.K_list.front();

  if (doc.contains("options")) {
    const auto& opts = doc["options"];
    if (!opts.is_object()) throw ConfigError("'options' must be an object");
    const auto& schema = option_schema();
    for (const auto& [key, value] : opts.items()) {
      auto it = schema.find(key);
      if (it == schema.end()) throw ConfigError(fmt::format("unknown option '{}'", key));
      if (!it->second(value)) throw ConfigError(fmt::format("invalid value for option '{}'", key));
    }
    cfg.options = opts;
  }
  cfg.input_sha1 = git_blob_sha1(text);
  return cfg;
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["family"] = family_name(cfg.spec.family);
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LogisticParams>) {
          j["params"] = {{"lam", p.lam}, {"mu", p.mu}};
        } else {
          j["params"] = {{"a", p.a}, {"b", p.b}, {"cc", p.cc}, {"p", p.p}};
        }
      },
      cfg.spec.family);
  if (cfg.K_is_list) {
    j["K"] = cfg.K_list;
  } else {
    j["K"] = cfg.K_list.front();
  }
  j["options"] = cfg.options;
  return j;
}

// --- shared helpers ------------------------------------------------------------

namespace {

template <typename T>
T option_or(const RunConfig& cfg, const std::string& key, T fallback) {
  if (cfg.options.contains(key)) return cfg.options[key].get<T>();
  return fallback;
}

void require_scalar_K(const RunConfig& cfg) {
  if (cfg.K_is_list) throw ConfigError("this command takes a single K");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << text;
}

json envelope(const std::string& command, const RunConfig& cfg, const RunOptions& opt) {
  json j;
  j["command"] = command;
  j["config"] = config_to_json(cfg);
  j["input_sha1"] = cfg.input_sha1;
  j["seed"] = opt.seed;
  return j;
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string row;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) row += ',';
    row += c;
    first = false;
  }
  return row + '\n';
}

std::string f(double x) { return format_double(x); }

struct Solved {
  RateModel model;
  Landmarks lm;
  CoefficientTable table;
  SpectralSolution sol;
};

Solved solve(const ModelSpec& spec, bool oracle) {
  RateModel model(spec);
  Landmarks lm = compute_landmarks(model);
  CoefficientTable table = build_table(model, lm);
  SpectralSolution sol = solve_spectral(table, lm, {oracle});
  return {std::move(model), lm, std::move(table), std::move(sol)};
}

}  // namespace

// --- validate ------------------------------------------------------------------

int cmd_validate(const RunConfig& cfg, const RunOptions& opt, std::ostream& log) {
  require_scalar_K(cfg);
  const int grid = option_or<int>(cfg, "grid_points", 2000);
  const auto report = validate_assumptions(cfg.spec, grid);
  json j = envelope("validate", cfg, opt);
  j["grid_points"] = grid;
  j["all_passed"] = report.all_passed();
  j["checks"] = json::array();
  for (const auto& c : report.checks) {
    j["checks"].push_back(
        {{"name", c.name}, {"passed", c.passed}, {"witness", c.witness}, {"at", c.at}, {"value", c.value}});
    log << fmt::format("{:<14} {}  {}\n", c.name, c.passed ? "ok  " : "FAIL", c.witness);
  }
  write_text(opt.out_dir / "report.json", j.dump(2) + "\n");
  return report.all_passed() ? 0 : 1;
}

// --- analyze -------------------------------------------------------------------

int cmd_analyze(const RunConfig& cfg, const RunOptions& opt, std::ostream& log) {
  require_scalar_K(cfg);
  const bool oracle = opt.oracle || option_or<bool>(cfg, "oracle", false);
  const auto s = solve(cfg.spec, oracle);
  const auto q = analyze_qsd(s.sol, s.table, s.lm);

  json j = envelope("analyze", cfg, opt);
  j["N"] = s.table.N();
  j["n_star"] = s.lm.n_star;
  j["landmarks"] = {{"x_star", s.lm.x_star},   {"x_2star", s.lm.x_2star}, {"theta", s.lm.theta},
                    {"x_3star", s.lm.x_3star}, {"n_2star", s.lm.n_2star}, {"n_3star", s.lm.n_3star},
                    {"h_second", s.lm.h_second}, {"sigma", s.lm.sigma},   {"c", s.lm.c},
                    {"a_rate", s.lm.a_rate}};
  j["rho0"] = s.sol.rho0;
  j["log_rho0"] = s.sol.log_rho0;
  j["rho0_asymptotic"] = s.sol.rho0_asymptotic;
  j["log_rho0_asymptotic"] = s.sol.log_rho0_asymptotic;
  if (s.sol.rho1) j["rho1"] = *s.sol.rho1;
  if (oracle) {
    const auto eig = tridiag_top_eigs(s.table, 1);
    j["rho0_oracle"] = -eig.eigenvalues[0];
    j["rho0_oracle_rel_diff"] = std::abs(s.sol.rho0 / -eig.eigenvalues[0] - 1.0);
    j["rho0_oracle_trusted"] = eig.rho0_trusted;
  }
  j["gap_lb"] = s.sol.gap_lb;
  j["residual"] = s.sol.residual;
  j["matching_mismatch"] = s.sol.matching_mismatch;
  j["tv_gauss"] = q.tv_gauss;
  j["qsd_mean"] = q.mean;
  j["qsd_variance"] = q.variance;
  j["Z_K"] = q.Z_K;
  j["Z_K_asymptotic"] = q.Z_K_asymptotic;
  j["t0_spectral"] = q.t0_spectral;
  j["log_t0_spectral"] = -s.sol.log_rho0;
  j["t0_summed"] = q.t0_summed;
  j["t0_linear"] = q.t0_linear;
  j["t0_display_variant"] = q.t0_display_variant;
  j["display_variant_agrees"] = q.display_variant_agrees;
  j["D_K"] = s.sol.D_K;
  j["eta_K"] = s.sol.eta_K;
  write_text(opt.out_dir / "analysis.json", j.dump(2) + "\n");

  std::string csv = "n,pi,u0,phi,V,nu,gaussian,alpha\n";
  for (std::int64_t n = 1; n <= s.table.N(); ++n) {
    csv += csv_row({std::to_string(n), f(std::exp(s.table.log_pi(n))), f(s.table.u0(n)),
                    f(s.sol.phi[n]), f(s.sol.V[n]), f(q.nu[n]), f(q.gaussian[n]), f(q.alpha[n])});
  }
  write_text(opt.out_dir / "qsd.csv", csv);
  log << fmt::format("rho0 = {:.10g} (asymptotic {:.10g}), gap_lb = {:.6g}, tv_gauss = {:.6g}\n",
                     s.sol.rho0, s.sol.rho0_asymptotic, s.sol.gap_lb, q.tv_gauss);
  return 0;
}

// --- sweep ---------------------------------------------------------------------

int cmd_sweep(const RunConfig& cfg, const RunOptions& opt, std::ostream& log) {
  const bool oracle = opt.oracle || option_or<bool>(cfg, "oracle", false);
  const std::size_t rows = cfg.K_list.size();
  std::vector<std::string> lines(rows);
  std::vector<char> failed(rows, 0);
  auto one = [&](std::size_t i) {
    ModelSpec spec = cfg.spec;
    spec.K = cfg.K_list[i];
    try {
      const auto s = solve(spec, oracle);
      const auto q = analyze_qsd(s.sol, s.table, s.lm);
      const double K = spec.K;
      const double limit = 1.0 / (1.0 - s.model.death(0.0) / s.model.birth(0.0));
      lines[i] = csv_row(
          {f(K), std::to_string(s.table.N()), std::to_string(s.lm.n_star), f(s.sol.rho0),
           f(s.sol.log_rho0), f(s.sol.rho0_asymptotic), f(s.sol.log_rho0_asymptotic),
           s.sol.rho1 ? f(*s.sol.rho1) : "", f(s.sol.gap_lb), f(s.sol.residual), f(q.tv_gauss),
           f(q.t0_spectral), f(q.t0_summed), f(q.t0_linear), f(s.sol.D_K), f(s.sol.eta_K),
           f(std::exp(s.sol.log_rho0 - s.sol.log_rho0_asymptotic)), f(q.tv_gauss * std::sqrt(K)),
           f(s.sol.gap_lb * std::log(K)), f((s.table.u0(s.lm.n_star) - limit) * K),
           f(s.table.log_pi_sum() - (s.lm.c * K + 0.5 * std::log(K))), ""});
    } catch (const Error& e) {
      std::string msg = e.what();
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      lines[i] = fmt::format("{}{}{}\n", f(cfg.K_list[i]), std::string(21, ','), msg);
      failed[i] = 1;
    }
  };
  const auto workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(opt.threads, 1)), 1, rows);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < rows; i += workers) one(i);
    });
  }
  for (auto& th : pool) th.join();

  std::string csv =
      "K,N,n_star,rho0,log_rho0,rho0_asymptotic,log_rho0_asymptotic,rho1,gap_lb,residual,"
      "tv_gauss,t0_spectral,t0_summed,t0_linear,D_K,eta_K,rho0_over_asymptotic,tv_gauss_sqrtK,"
      "gap_lb_logK,u0_nstar_err_K,log_pi_sum_resid,error\n";
  for (const auto& l : lines) csv += l;
  const auto failures = std::count(failed.begin(), failed.end(), 1);
  write_text(opt.out_dir / "sweep.csv", csv);
  log << fmt::format("{} rows, {} failed\n", rows, failures);
  return failures == static_cast<std::ptrdiff_t>(rows) ? 1 : 0;
}

// --- simulate ------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg, const RunOptions& opt, std::ostream& log) {
  require_scalar_K(cfg);
  const auto s = solve(cfg.spec, false);
  const auto q = qsd_from_phi(s.sol, s.table);

  SimConfig sc;
  sc.model = cfg.spec;
  const json n0 = cfg.options.value("n0", json("qsd"));
  if (n0 == "qsd") {
    sc.start_law = q.nu;
  } else if (n0 == "nstar") {
    sc.n0 = s.lm.n_star;
  } else {
    sc.n0 = n0.get<std::int64_t>();
  }
  sc.replicas = option_or<std::int64_t>(cfg, "replicas", 2000);
  sc.t_max = option_or<double>(cfg, "t_max", 20.0 / s.sol.rho0_asymptotic);
  const double horizon = std::min(sc.t_max, option_or<double>(cfg, "horizon", 3.0 / s.sol.rho0_asymptotic));
  const int points = option_or<int>(cfg, "checkpoints", 300);
  for (int i = 0; i < points; ++i) sc.checkpoints.push_back(horizon * i / (points - 1));
  sc.master_seed = opt.seed;
  sc.threads = opt.threads;
  sc.fit_start = option_or<double>(cfg, "fit_start", 5.0 / s.sol.gap_lb);
  sc.fit_min_survivors = option_or<std::int64_t>(cfg, "fit_min_survivors", 500);

  const auto est = run_ssa(sc);

  const double R = static_cast<double>(sc.replicas);
  double mean = 0.0, var = 0.0;
  std::int64_t censored = 0;
  for (std::size_t r = 0; r < est.extinction_times.size(); ++r) {
    mean += est.extinction_times[r];
    censored += est.censored[r];
  }
  mean /= R;
  for (double x : est.extinction_times) var += (x - mean) * (x - mean);
  const double se = sc.replicas > 1 ? std::sqrt(var / (R - 1.0) / R) : 0.0;
  const double ks = ks_exponential(est.extinction_times, s.sol.rho0);

  std::string csv = "t,alive,fraction,se,tv_to_nu,tv_ci_lo,tv_ci_hi\n";
  int tv_rows = 0;
  for (std::size_t c = 0; c < est.survival.size(); ++c) {
    const auto& row = est.survival[c];
    std::string tv = ",,";
    try {
      const auto t = conditioned_tv(est, c, q.nu, opt.seed);
      tv = fmt::format("{},{},{}", f(t.tv), f(t.ci_lo), f(t.ci_hi));
      ++tv_rows;
    } catch (const InsufficientSurvivors&) {
    }
    csv += fmt::format("{},{},{},{},{}\n", f(row.t), row.alive, f(row.fraction), f(row.se), tv);
  }
  write_text(opt.out_dir / "sim.csv", csv);

  json j = envelope("simulate", cfg, opt);
  j["resolved"] = {{"n0", sc.n0 ? json(*sc.n0) : json("qsd")},
                   {"replicas", sc.replicas},
                   {"t_max", sc.t_max},
                   {"horizon", horizon},
                   {"checkpoints", points},
                   {"fit_start", sc.fit_start},
                   {"fit_min_survivors", sc.fit_min_survivors}};
  j["rho0"] = s.sol.rho0;
  j["rho0_hat"] = est.rho0_hat;
  j["rho0_ci"] = {est.rho0_ci_lo, est.rho0_ci_hi};
  j["rho0_covered"] = est.rho0_ci_lo <= s.sol.rho0 && s.sol.rho0 <= est.rho0_ci_hi;
  j["fit_window"] = {est.fit_t_lo, est.fit_t_hi};
  j["fit_points"] = est.fit_points;
  j["fit_r2"] = est.fit_r2;
  j["mean_extinction_time"] = mean;
  j["mean_extinction_se"] = se;
  j["mean_z_vs_inverse_rho0"] = se > 0.0 ? (mean - 1.0 / s.sol.rho0) / se : 0.0;
  j["ks_statistic"] = ks;
  j["ks_critical_1pct"] = ks_critical_1pct(est.extinction_times.size());
  j["ks_pass"] = ks < ks_critical_1pct(est.extinction_times.size());
  j["censored"] = censored;
  j["events"] = est.events;
  write_text(opt.out_dir / "sim.json", j.dump(2) + "\n");

  log << fmt::format("rho0_hat = {:.6g} [{:.6g}, {:.6g}], rho0 = {:.6g}; mean T0 = {:.6g} +- {:.3g}\n",
                     est.rho0_hat, est.rho0_ci_lo, est.rho0_ci_hi, s.sol.rho0, mean, se);
  if (tv_rows == 0) {
    log << "insufficient survivors at every checkpoint\n";
    return 1;
  }
  return 0;
}

// --- yaglom --------------------------------------------------------------------

int cmd_yaglom(const RunConfig& cfg, const RunOptions& opt, std::ostream& log) {
  require_scalar_K(cfg);
  const auto s = solve(cfg.spec, false);
  const auto q = qsd_from_phi(s.sol, s.table);
  const auto alpha = alpha_weights(s.table, s.lm);

  std::vector<std::int64_t> starts;
  const json n0s = cfg.options.value("yaglom_n0", json::array({1, "nstar"}));
  for (const auto& e : n0s) {
    const std::int64_t n = e == "nstar" ? s.lm.n_star : e.get<std::int64_t>();
    if (n > s.table.N()) throw ConfigError(fmt::format("n0 = {} exceeds N = {}", n, s.table.N()));
    starts.push_back(n);
  }
  const double t_min = option_or<double>(cfg, "t_min", 0.01);
  const double t_max = option_or<double>(cfg, "t_max", 10.0 / s.sol.rho0);
  const int points = option_or<int>(cfg, "t_points", 120);

  TransientOptions topts;
  const double rate = uniformization_rate(s.table);
  std::vector<double> times = {0.0};
  bool truncated = false;
  for (int i = 0; i < points; ++i) {
    const double t = t_min * std::pow(t_max / t_min, static_cast<double>(i) / (points - 1));
    if (uniformization_steps(rate, t) > topts.step_cap) {
      truncated = true;
      break;
    }
    times.push_back(t);
  }

  std::string csv = "t,n0,tv_to_nu,tv_to_mixture,survival\n";
  json windows = json::array();
  for (const auto n0 : starts) {
    std::vector<double> init(static_cast<std::size_t>(s.table.N() + 1), 0.0);
    init[n0] = 1.0;
    const auto laws = transient_laws(s.table, init, times, topts);
    std::vector<double> mix(init.size(), 0.0);
    mix[0] = 1.0 - alpha[n0];
    for (std::int64_t n = 1; n <= s.table.N(); ++n) mix[n] = alpha[n0] * q.nu[n];

    std::vector<double> tv_nu, tv_mix;
    for (const auto& law : laws) {
      tv_nu.push_back(tv_distance(law.conditioned, q.nu));
      tv_mix.push_back(tv_distance(law.law, mix));
      csv += fmt::format("{},{},{},{},{}\n", f(law.t), n0, f(tv_nu.back()), f(tv_mix.back()),
                         f(law.survival));
    }
    // longest run of grid times with tv_to_mixture < 0.02
    double best_lo = 0.0, best_hi = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (!(tv_mix[i] < 0.02)) continue;
      std::size_t k = i;
      while (k + 1 < times.size() && tv_mix[k + 1] < 0.02) ++k;
      if (times[k] / std::max(times[i], 1e-300) > best_hi / std::max(best_lo, 1e-300) || best_hi == 0.0) {
        best_lo = times[i];
        best_hi = times[k];
      }
      i = k;
    }
    double settle = std::nan("");
    for (std::size_t i = times.size(); i-- > 0;) {
      if (!(tv_nu[i] < 0.01)) break;
      settle = times[i];
    }
    double min_mix = *std::min_element(tv_mix.begin(), tv_mix.end());
    windows.push_back({{"n0", n0},
                       {"alpha", alpha[n0]},
                       {"tv_to_nu_below_0.01_from", settle},
                       {"mixture_min_tv", min_mix},
                       {"mixture_window", {best_lo, best_hi}}});
  }
  write_text(opt.out_dir / "yaglom.csv", csv);
  json j = envelope("yaglom", cfg, opt);
  j["rho0"] = s.sol.rho0;
  j["n_star"] = s.lm.n_star;
  j["truncated"] = truncated;
  j["t_last"] = times.back();
  j["starts"] = windows;
  write_text(opt.out_dir / "yaglom.json", j.dump(2) + "\n");
  if (truncated) log << "time grid truncated at the uniformization step cap\n";
  return 0;
}

// --- dispatch ------------------------------------------------------------------

int run_command(const std::string& command, const std::filesystem::path& config_path,
                const RunOptions& options, std::ostream& log) {
  static const std::map<std::string, int (*)(const RunConfig&, const RunOptions&, std::ostream&)>
      table = {{"validate", cmd_validate},
               {"analyze", cmd_analyze},
               {"sweep", cmd_sweep},
               {"simulate", cmd_simulate},
               {"yaglom", cmd_yaglom}};
  auto it = table.find(command);
  if (it == table.end()) {
    log << "unknown command " << command << "\n";
    return 2;
  }
  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot read {}", config_path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    const auto cfg = parse_config(buf.str());
    return it->second(cfg, options, log);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bdqsd
