// ptembed command-line front end.
//
//   ptembed <command> --config <path.json> --out <path> [--seed <int>]
//
// Exit codes: 0 success, 1 verification failure, 2 usage/config error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ptembed/ptembed.h"

namespace {

using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ApiFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(ptembed_status s) {
  if (s != PTEMBED_OK) {
    const std::string msg = ptembed_last_error();
    throw ApiFailure(msg.empty() ? ptembed_status_name(s) : msg);
  }
}

struct ParamsDeleter {
  void operator()(ptembed_params* p) const { ptembed_params_free(p); }
};
struct TrajectoryDeleter {
  void operator()(ptembed_trajectory* p) const { ptembed_trajectory_free(p); }
};
struct ContourDeleter {
  void operator()(ptembed_contour* p) const { ptembed_contour_free(p); }
};
struct ReportDeleter {
  void operator()(ptembed_verify_report* p) const { ptembed_verify_free(p); }
};
using ParamsPtr = std::unique_ptr<ptembed_params, ParamsDeleter>;

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Config {
 public:
  Config(const std::string& path, std::set<std::string> allowed) : allowed_(std::move(allowed)) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    try {
      data_ = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!data_.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : data_.items()) {
      if (!allowed_.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
  }

  bool has(const std::string& key) const { return data_.contains(key) && !data_.at(key).is_null(); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = data_.at(key);
    if (!v.is_number()) throw ConfigError("key '" + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("key '" + key + "' must be finite");
    return x;
  }

  int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const auto& v = data_.at(key);
    if (!v.is_number()) throw ConfigError("key '" + key + "' must be an integer");
    const double x = v.get<double>();
    if (!std::isfinite(x) || x != std::floor(x) || std::abs(x) > 2e9) {
      throw ConfigError("key '" + key + "' must be an integer");
    }
    return static_cast<int>(x);
  }

  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = data_.at(key);
    if (!v.is_boolean()) throw ConfigError("key '" + key + "' must be true or false");
    return v.get<bool>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const auto& v = data_.at(key);
    if (!v.is_array() || v.empty()) throw ConfigError("key '" + key + "' must be a nonempty array");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        throw ConfigError("key '" + key + "' must hold finite numbers");
      }
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<int> sizes(const std::string& key) const {
    std::vector<int> out;
    for (double x : numbers(key)) {
      if (x != std::floor(x) || x < 1 || x > 1e9) throw ConfigError("key '" + key + "' must hold positive integers");
      out.push_back(static_cast<int>(x));
    }
    return out;
  }

  const json& raw() const { return data_; }

 private:
  json data_;
  std::set<std::string> allowed_;
};

std::set<std::string> keys(std::initializer_list<const char*> names) { return {names.begin(), names.end()}; }

const std::set<std::string> kModelKeys = keys({"n_spins", "alpha", "theta", "theta1", "phi1", "phi1_star", "dense_cap",
                                               "construction_cap"});

std::set<std::string> with_model_keys(std::initializer_list<const char*> extra) {
  std::set<std::string> s = kModelKeys;
  s.insert(extra.begin(), extra.end());
  return s;
}

std::vector<double> linspace(double lo, double hi, int points) {
  if (points < 1) throw ConfigError("grid point count must be >= 1");
  if (!(hi >= lo)) throw ConfigError("grid maximum must be >= minimum");
  std::vector<double> out;
  for (int i = 0; i < points; ++i) out.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
  return out;
}

std::vector<double> real_grid(const Config& cfg, const std::string& stem, double lo, double hi, int points) {
  if (cfg.has(stem + "_grid")) {
    if (cfg.has(stem + "_min") || cfg.has(stem + "_max") || cfg.has(stem + "_points")) {
      throw ConfigError("give either " + stem + "_grid or " + stem + "_min/_max/_points");
    }
    return cfg.numbers(stem + "_grid");
  }
  return linspace(cfg.number(stem + "_min", lo), cfg.number(stem + "_max", hi), cfg.integer(stem + "_points", points));
}

ParamsPtr make_params(const Config& cfg, int default_n, double default_alpha) {
  const int n = cfg.integer("n_spins", default_n);
  const double theta1 = cfg.number("theta1", 0.0);
  double phi1 = cfg.number("phi1", 0.0);
  if (cfg.boolean("phi1_star", false)) {
    if (cfg.has("phi1")) throw ConfigError("give either phi1 or phi1_star");
    check(ptembed_phi1_star(n, &phi1));
  }
  if (cfg.has("alpha") && cfg.has("theta")) throw ConfigError("give either alpha or theta, not both");
  ptembed_params* raw = nullptr;
  if (cfg.has("theta")) {
    check(ptembed_params_from_theta(n, cfg.number("theta", 0.0), theta1, phi1, &raw));
  } else {
    check(ptembed_params_from_alpha(n, cfg.number("alpha", default_alpha), theta1, phi1, &raw));
  }
  ParamsPtr p(raw);
  ptembed_param_values v{};
  check(ptembed_params_get(p.get(), &v));
  check(ptembed_params_set_caps(p.get(), cfg.integer("dense_cap", v.dense_cap),
                                cfg.integer("construction_cap", v.construction_cap)));
  return p;
}

class Output {
 public:
  Output(const std::string& path) : path_(path), out_(path) {
    if (!out_) throw ConfigError("cannot write output '" + path + "'");
  }

  void metadata(const std::string& command, const Config& cfg, std::optional<std::int64_t> seed) {
    out_ << "# ptembed " << ptembed_version() << " command=" << command;
    if (seed) out_ << " seed=" << *seed;
    out_ << " config=" << cfg.raw().dump() << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  void finish() {
    out_.flush();
    if (!out_) throw ConfigError("failed writing output '" + path_ + "'");
  }

 private:
  std::string path_;
  std::ofstream out_;
};

struct Invocation {
  std::string command;
  std::string config_path;
  std::string out_path;
  std::optional<std::int64_t> seed;
};

int cmd_verify(const Invocation& inv) {
  const Config cfg(inv.config_path, keys({"n_spins", "dense_cap", "tolerance", "orthogonality_theta", "seed"}));
  std::ofstream out(inv.out_path);
  if (!out) throw ConfigError("cannot write output '" + inv.out_path + "'");

  ptembed_verify_options opts;
  ptembed_verify_options_default(&opts);
  opts.max_n = cfg.integer("n_spins", opts.max_n);
  opts.dense_cap = cfg.integer("dense_cap", opts.dense_cap);
  opts.orthogonality_theta = cfg.number("orthogonality_theta", opts.orthogonality_theta);
  if (cfg.has("tolerance")) opts.tolerance_override = cfg.number("tolerance", 0.0);
  if (cfg.has("seed")) opts.seed = static_cast<std::uint64_t>(cfg.integer("seed", 0));
  if (inv.seed) opts.seed = static_cast<std::uint64_t>(*inv.seed);

  ptembed_verify_report* raw = nullptr;
  check(ptembed_verify_run(&opts, &raw));
  std::unique_ptr<ptembed_verify_report, ReportDeleter> report(raw);

  json doc;
  doc["version"] = ptembed_version();
  doc["seed"] = opts.seed;
  doc["config"] = cfg.raw();
  doc["checks"] = json::array();
  int failures = 0;
  const std::size_t count = ptembed_verify_count(report.get());
  for (std::size_t i = 0; i < count; ++i) {
    ptembed_check c{};
    check(ptembed_verify_check(report.get(), i, &c));
    failures += c.passed ? 0 : 1;
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  residual=" << fmt(c.residual)
              << "  tolerance=" << fmt(c.tolerance);
    if (c.detail[0] != '\0') std::cout << "  (" << c.detail << ")";
    std::cout << '\n';
    doc["checks"].push_back({{"name", c.name},
                             {"passed", c.passed != 0},
                             {"residual", std::isfinite(c.residual) ? json(c.residual) : json(fmt(c.residual))},
                             {"tolerance", c.tolerance},
                             {"detail", c.detail}});
  }
  doc["passed"] = failures == 0;
  doc["failures"] = failures;
  std::cout << count << " checks, " << failures << " failed\n";
  out << doc.dump(2) << '\n';
  if (!out) throw ConfigError("failed writing output '" + inv.out_path + "'");
  return failures == 0 ? 0 : 1;
}

int cmd_trajectory(const Invocation& inv) {
  const Config cfg(inv.config_path, with_model_keys({"t_grid", "t_min", "t_max", "t_points"}));
  Output out(inv.out_path);
  const ParamsPtr params = make_params(cfg, 1, 0.9);
  const std::vector<double> grid = real_grid(cfg, "t", 0.0, 10.0, 101);

  ptembed_trajectory* raw = nullptr;
  check(ptembed_trajectory_run(params.get(), nullptr, 0, grid.data(), grid.size(), &raw));
  std::unique_ptr<ptembed_trajectory, TrajectoryDeleter> traj(raw);
  std::size_t rows = 0, dim = 0;
  check(ptembed_trajectory_size(traj.get(), &rows, &dim));
  ptembed_param_values v{};
  check(ptembed_params_get(params.get(), &v));
  const bool dump = v.n_spins <= 4;

  out.metadata(inv.command, cfg, inv.seed);
  std::vector<std::string> header = {"t", "success_prob", "pt_norm", "euclid_norm", "oracle_distance"};
  if (dump) {
    for (std::size_t j = 0; j < dim; ++j) {
      header.push_back("re_" + std::to_string(j));
      header.push_back("im_" + std::to_string(j));
    }
  }
  out.row(header);
  std::vector<double> state(2 * dim);
  for (std::size_t i = 0; i < rows; ++i) {
    ptembed_trajectory_row r{};
    check(ptembed_trajectory_row_get(traj.get(), i, &r));
    std::vector<std::string> cells = {fmt(r.t), fmt(r.success_prob), fmt(r.pt_norm), fmt(r.euclid_norm),
                                      fmt(r.oracle_distance)};
    if (dump) {
      check(ptembed_trajectory_state(traj.get(), i, state.data(), state.size()));
      for (double x : state) cells.push_back(fmt(x));
    }
    out.row(cells);
  }
  out.finish();
  return 0;
}

int cmd_fig2(const Invocation& inv) {
  const Config cfg(inv.config_path, keys({"alpha_grid", "alpha_min", "alpha_max", "alpha_points"}));
  Output out(inv.out_path);
  const std::vector<double> grid = real_grid(cfg, "alpha", 0.0, 1.5, 151);
  out.metadata(inv.command, cfg, inv.seed);
  out.row({"alpha", "A1", "A2", "B1", "B2", "resynthesis_residual"});
  for (double alpha : grid) {
    ptembed_n2_coefficients c{};
    check(ptembed_n2_coefficients_eval(alpha, &c));
    out.row({fmt(alpha), fmt(c.a1), fmt(c.a2), fmt(c.b1), fmt(c.b2), fmt(c.resynthesis_residual)});
  }
  out.finish();
  return 0;
}

std::vector<int> size_grid(const Config& cfg, double lo, double hi, int points) {
  if (cfg.has("n_grid")) {
    if (cfg.has("n_min") || cfg.has("n_max") || cfg.has("n_points")) {
      throw ConfigError("give either n_grid or n_min/n_max/n_points");
    }
    return cfg.sizes("n_grid");
  }
  const double n_min = cfg.number("n_min", lo);
  const double n_max = cfg.number("n_max", hi);
  const int n_points = cfg.integer("n_points", points);
  std::size_t count = 0;
  check(ptembed_log_spaced_sizes(n_min, n_max, n_points, nullptr, 0, &count));
  std::vector<int> out(count);
  check(ptembed_log_spaced_sizes(n_min, n_max, n_points, out.data(), out.size(), &count));
  return out;
}

int cmd_fig3(const Invocation& inv) {
  const Config cfg(inv.config_path, keys({"alpha_grid", "alpha_min", "alpha_max", "alpha_points", "n_grid", "n_min",
                                          "n_max", "n_points"}));
  Output out(inv.out_path);
  const std::vector<double> alphas = real_grid(cfg, "alpha", 0.0, 1.55, 32);
  const std::vector<int> sizes = size_grid(cfg, 1, 10000, 41);
  out.metadata(inv.command, cfg, inv.seed);
  out.row({"alpha", "n_spins", "dpmax"});
  for (double alpha : alphas) {
    double theta = 0.0;
    check(ptembed_theta_of_alpha(alpha, &theta));
    for (int n : sizes) {
      double log_value = 0.0;
      check(ptembed_dpmax_log(n, theta, &log_value));
      out.row({fmt(alpha), std::to_string(n), fmt(std::clamp(std::exp(log_value), 0.0, 1.0))});
    }
  }
  out.finish();
  return 0;
}

int cmd_fig4(const Invocation& inv) {
  const Config cfg(inv.config_path, keys({"n_grid", "n_min", "n_max", "n_step", "n_ref"}));
  Output out(inv.out_path);
  std::vector<int> sizes;
  if (cfg.has("n_grid")) {
    if (cfg.has("n_min") || cfg.has("n_max") || cfg.has("n_step")) {
      throw ConfigError("give either n_grid or n_min/n_max/n_step");
    }
    sizes = cfg.sizes("n_grid");
  } else {
    const int lo = cfg.integer("n_min", 100);
    const int hi = cfg.integer("n_max", 1000);
    const int step = cfg.integer("n_step", 1);
    if (lo < 1 || hi < lo || step < 1) throw ConfigError("need 1 <= n_min <= n_max and n_step >= 1");
    for (int n = lo; n <= hi; n += step) sizes.push_back(n);
  }
  const int n_ref = cfg.integer("n_ref", 100);
  out.metadata(inv.command, cfg, inv.seed);
  out.row({"n_spins", "f3", "beta"});
  for (int n : sizes) {
    double f3 = 0.0, beta = 0.0;
    check(ptembed_pinned_f3(n, n_ref, &f3));
    check(ptembed_solve_beta(n, f3, &beta));
    out.row({std::to_string(n), fmt(f3), fmt(beta)});
  }
  out.finish();
  return 0;
}

int cmd_fig5(const Invocation& inv) {
  const Config cfg(inv.config_path, keys({"n_grid", "n_min", "n_max", "n_points", "targets", "theta", "theta1",
                                          "alpha_lo", "threads"}));
  Output out(inv.out_path);
  std::filesystem::path json_path(inv.out_path);
  json_path.replace_extension(".json");
  if (json_path == std::filesystem::path(inv.out_path)) json_path.replace_extension(".fit.json");
  std::ofstream json_out(json_path);
  if (!json_out) throw ConfigError("cannot write output '" + json_path.string() + "'");

  const std::vector<int> sizes = size_grid(cfg, 10, 10000, 40);
  const std::vector<double> targets = cfg.has("targets") ? cfg.numbers("targets") : std::vector<double>{0.09, 0.54, 0.90};
  const double theta1 = cfg.number("theta1", std::numbers::pi / 2);
  const double alpha_lo = cfg.number("alpha_lo", 0.01);
  double alpha_hi = std::numbers::pi / 2 - 1e-6;
  if (cfg.has("theta")) {
    const double theta = cfg.number("theta", 0.0);
    if (!(theta > 0.0)) throw ConfigError("theta must be positive");
    alpha_hi = std::min(alpha_hi, std::atan(std::sinh(2.0 * theta)));
  }
  const int threads = cfg.integer("threads", 1);
  const double n_top = *std::max_element(sizes.begin(), sizes.end());

  out.metadata(inv.command, cfg, inv.seed);
  out.row({"target", "n_spins", "alpha", "log_n", "log_A_minus_alpha"});
  json doc;
  doc["version"] = ptembed_version();
  doc["config"] = cfg.raw();
  doc["contours"] = json::array();
  for (double target : targets) {
    ptembed_contour* raw = nullptr;
    check(ptembed_contour_trace(target, sizes.data(), sizes.size(), alpha_lo, alpha_hi, theta1, threads, &raw));
    std::unique_ptr<ptembed_contour, ContourDeleter> contour(raw);
    std::size_t n_points = 0, n_skipped = 0;
    check(ptembed_contour_size(contour.get(), &n_points, &n_skipped));
    json skipped = json::array();
    for (std::size_t i = 0; i < n_skipped; ++i) {
      int n = 0;
      const char* reason = nullptr;
      check(ptembed_contour_skip(contour.get(), i, &n, &reason));
      std::cerr << "ptembed: skipped N=" << n << " for target " << fmt(target) << ": " << reason << '\n';
      skipped.push_back({{"n_spins", n}, {"reason", reason}});
    }
    std::vector<double> ns, alphas, residuals;
    for (std::size_t i = 0; i < n_points; ++i) {
      int n = 0;
      double alpha = 0.0, residual = 0.0;
      check(ptembed_contour_point(contour.get(), i, &n, &alpha, &residual));
      ns.push_back(n);
      alphas.push_back(alpha);
      residuals.push_back(std::abs(residual));
    }
    ptembed_fit fit{};
    check(ptembed_power_law_fit(ns.data(), alphas.data(), ns.size(), &fit));
    ptembed_line_fit inset{};
    check(ptembed_inset_fit(fit.a, ns.data(), alphas.data(), ns.size(), n_top / 10.0, &inset));
    for (std::size_t i = 0; i < ns.size(); ++i) {
      const double gap = fit.a - alphas[i];
      out.row({fmt(target), std::to_string(static_cast<int>(ns[i])), fmt(alphas[i]), fmt(std::log(ns[i])),
               gap > 0.0 ? fmt(std::log(gap)) : "nan"});
    }
    doc["contours"].push_back({{"target", target},
                               {"A", fit.a},
                               {"B", fit.b},
                               {"gamma", fit.gamma},
                               {"residual_rms", fit.residual_rms},
                               {"points", ns.size()},
                               {"max_modsq_residual", *std::max_element(residuals.begin(), residuals.end())},
                               {"skipped", skipped},
                               {"inset", {{"n_min", n_top / 10.0},
                                          {"slope", inset.slope},
                                          {"intercept", inset.intercept},
                                          {"r_squared", inset.r_squared},
                                          {"used", inset.used}}}});
  }
  out.finish();
  json_out << doc.dump(2) << '\n';
  if (!json_out) throw ConfigError("failed writing output '" + json_path.string() + "'");
  return 0;
}

int cmd_darkstate(const Invocation& inv) {
  const Config cfg(inv.config_path, with_model_keys({"k", "m_y"}));
  Output out(inv.out_path);
  const ParamsPtr params = make_params(cfg, 2, 1.0);
  const int k = cfg.integer("k", 0);
  const double m_y = cfg.number("m_y", 0.3);
  ptembed_darkstate_report r{};
  check(ptembed_darkstate(params.get(), k, m_y, &r));
  const std::vector<std::pair<const char*, double>> rows = {
      {"epsilon", r.epsilon},
      {"eigen_residual", r.eigen_residual},
      {"dark_entropy_plus", r.dark_entropy_plus},
      {"dark_entropy_minus", r.dark_entropy_minus},
      {"bright_entropy", r.bright_entropy},
      {"overlap_re", r.overlap_re},
      {"overlap_im", r.overlap_im},
      {"overlap_modulus_sq", r.overlap_modulus_sq},
      {"spin_flip", r.spin_flip},
      {"commutator_norm", r.commutator_norm},
      {"spectrum_residual", r.spectrum_residual},
      {"dark_residual_plus", r.dark_residual_plus},
      {"dark_residual_minus", r.dark_residual_minus},
      {"splitting", r.splitting},
      {"bath_site_entropy", r.bath_site_entropy},
  };
  out.metadata(inv.command, cfg, inv.seed);
  out.row({"quantity", "value"});
  for (const auto& [name, value] : rows) {
    out.row({name, fmt(value)});
    std::cout << name << " = " << fmt(value) << '\n';
  }
  out.finish();
  return 0;
}

const std::map<std::string, std::pair<const char*, std::function<int(const Invocation&)>>>& commands() {
  static const std::map<std::string, std::pair<const char*, std::function<int(const Invocation&)>>> table = {
      {"verify", {"Run the invariant suite (exit 1 on any failed check)", cmd_verify}},
      {"trajectory", {"Post-selected trajectory vs direct non-Hermitian evolution", cmd_trajectory}},
      {"fig2", {"N=2 interaction coefficients against alpha", cmd_fig2}},
      {"fig3", {"Largest normalized eigenvalue of P over (alpha, N)", cmd_fig3}},
      {"fig4", {"beta(N) for the pinned orthogonality construction", cmd_fig4}},
      {"fig5", {"Fixed-overlap contours and power-law fits", cmd_fig5}},
      {"darkstate", {"Dark/bright state report for one eigenlevel", cmd_darkstate}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hermitian embedding of PT-symmetric spins: simulation, verification and figure data"};
  app.require_subcommand(1, 1);
  Invocation inv;
  std::int64_t seed = 0;
  for (const auto& [name, entry] : commands()) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", inv.config_path, "JSON configuration file")->required();
    sub->add_option("--out", inv.out_path, "Output file")->required();
    sub->add_option("--seed", seed, "Seed for randomized checks (verify)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ptembed: error: UsageError: " << e.what() << '\n';
    return 2;
  }
  inv.command = app.get_subcommands().front()->get_name();
  if (app.get_subcommands().front()->count("--seed") > 0) inv.seed = seed;

  try {
    return commands().at(inv.command).second(inv);
  } catch (const ConfigError& e) {
    std::cerr << "ptembed: error: ConfigError: " << e.what() << '\n';
  } catch (const ApiFailure& e) {
    std::cerr << "ptembed: error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "ptembed: error: Internal: " << e.what() << '\n';
  }
  return 2;
}
