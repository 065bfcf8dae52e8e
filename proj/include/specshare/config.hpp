#pragma once

// Experiment configuration.
//
// SimConfig mirrors the config file and keeps the engineering units a person
// writes down (dB, dBm). resolve() validates it and produces a Scenario in
// linear units; everything downstream consumes Scenario only.
//
// File format: one `section.key = value` per line, '#' starts a comment,
// order does not matter, lists are comma separated.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "specshare/errors.hpp"

namespace specshare {

enum class SolverKind { greedy, mcmc };
enum class PowerMode { uniform, full, qlearning };
enum class DesirabilityKind { simulated, count_only };

inline const char* to_string(SolverKind k) { return k == SolverKind::greedy ? "greedy" : "mcmc"; }
inline const char* to_string(PowerMode m) {
  switch (m) {
    case PowerMode::uniform: return "uniform";
    case PowerMode::full: return "full";
    case PowerMode::qlearning: return "qlearning";
  }
  return "?";
}
inline const char* to_string(DesirabilityKind k) {
  return k == DesirabilityKind::simulated ? "simulated" : "count_only";
}

inline SolverKind parse_solver(std::string_view s) {
  if (s == "greedy") return SolverKind::greedy;
  if (s == "mcmc") return SolverKind::mcmc;
  throw ConfigError("unknown solver '" + std::string(s) + "' (expected greedy|mcmc)");
}
inline PowerMode parse_power_mode(std::string_view s) {
  if (s == "uniform") return PowerMode::uniform;
  if (s == "full") return PowerMode::full;
  if (s == "qlearning") return PowerMode::qlearning;
  throw ConfigError("unknown power mode '" + std::string(s) + "' (expected uniform|full|qlearning)");
}
inline DesirabilityKind parse_desirability(std::string_view s) {
  if (s == "simulated") return DesirabilityKind::simulated;
  if (s == "count_only") return DesirabilityKind::count_only;
  throw ConfigError("unknown desirability model '" + std::string(s) + "'");
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Every tunable of an experiment, as written in a config file.
struct SimConfig {
  // geometry
  double area_side = 20.0;  // m
  int sbs_per_op = 2;
  double ue_max_dist = 5.0;  // m

  // channel
  double pl_const_db = 37.0;
  double pl_slope_db = 20.0;  // dB per decade of distance
  double pathloss_exponent = 2.0;
  double wall_loss_db = 15.0;
  bool wall_loss_enabled = false;
  double shadow_sigma_db = 4.0;
  double noise_dbm = -120.0;
  double p_tot_dbm = 10.0;
  int num_power_levels = 4;
  double sinr_th_db = 3.0;

  // game
  int num_rbs = 5;
  std::vector<int> rb_capacity{4};  // one value broadcasts to every RB
  std::vector<int> quota{2, 3, 4};
  std::vector<double> op_weights;  // empty: all 1
  double sbs_weight = 1.0;
  int fade_draws = 64;
  bool qos_gated = true;
  DesirabilityKind desirability = DesirabilityKind::simulated;

  // learning
  double gamma = 0.9;
  double lr = 0.1;
  bool lr_decay = true;
  double temp_tp = 0.5;
  int episodes = 500;

  // solver
  SolverKind solver = SolverKind::mcmc;
  int greedy_max_iterations = 2000;
  int mcmc_max_iterations = 5000;
  double temp_tb = 1.0;

  // run
  PowerMode power_mode = PowerMode::qlearning;
  int samples = 2500;
  std::uint64_t seed = 1;
  int max_rounds = 20;
  double tolerance = 1e-4;
  int workers = 1;
};

/// Resolved, validated parameters in linear units.
struct Scenario {
  double area_side;
  int num_ops;
  int sbs_per_op;
  double ue_max_dist;

  double pl_const_db;  // pathloss formula constants are defined in dB
  double pl_slope_db;
  double pathloss_exponent;
  double wall_loss_db;
  bool wall_loss_enabled;
  double shadow_sigma_db;  // log-normal shadowing is a dB-domain Gaussian
  double noise_w;
  double p_tot_w;
  int num_power_levels;
  double power_quantum_w;
  double sinr_th;

  int num_rbs;
  std::vector<int> rb_capacity;  // size num_rbs
  std::vector<int> quota;        // size num_ops
  std::vector<double> op_weights;
  double sbs_weight;
  int fade_draws;
  bool qos_gated;
  DesirabilityKind desirability;

  double gamma;
  double lr;
  bool lr_decay;
  double temp_tp;
  int episodes;

  SolverKind solver;
  int greedy_max_iterations;
  int mcmc_max_iterations;
  double temp_tb;

  PowerMode power_mode;
  int samples;
  std::uint64_t seed;
  int max_rounds;
  double tolerance;
  int workers;

  int num_sbs() const { return num_ops * sbs_per_op; }
  int num_children() const { return std::accumulate(quota.begin(), quota.end(), 0); }
  /// Transmit power of 1-based level n.
  double level_power(int level) const { return level * power_quantum_w; }
};

inline Scenario resolve(const SimConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (!(c.area_side > 0)) fail("geometry.area_side must be > 0");
  if (c.sbs_per_op < 1) fail("geometry.sbs_per_op must be >= 1");
  if (!(c.ue_max_dist > 0)) fail("geometry.ue_max_dist must be > 0");
  if (!(c.shadow_sigma_db >= 0)) fail("channel.shadow_sigma must be >= 0");
  if (c.num_power_levels < 1) fail("channel.power_levels must be >= 1");
  if (c.num_rbs < 1) fail("game.num_rbs must be >= 1");
  if (c.quota.empty()) fail("game.quota must list at least one operator");
  if (c.quota.size() > 16) fail("at most 16 operators are supported");
  for (int q : c.quota)
    if (q < 1) fail("every game.quota entry must be >= 1");
  if (c.rb_capacity.size() != 1 && c.rb_capacity.size() != static_cast<size_t>(c.num_rbs))
    fail("game.rb_capacity must hold one value or one per RB");
  for (int b : c.rb_capacity)
    if (b < 1) fail("game.rb_capacity entries must be >= 1");
  if (!c.op_weights.empty() && c.op_weights.size() != c.quota.size())
    fail("game.op_weights must have one entry per operator");
  for (double w : c.op_weights)
    if (!(w >= 0)) fail("game.op_weights must be >= 0");
  if (!(c.sbs_weight >= 0)) fail("game.sbs_weight must be >= 0");
  if (c.fade_draws < 1) fail("game.fade_draws must be >= 1");
  if (!(c.gamma >= 0 && c.gamma < 1)) fail("learning.gamma must lie in [0,1)");
  if (!(c.lr > 0 && c.lr <= 1)) fail("learning.lr must lie in (0,1]");
  if (!(c.temp_tp > 0)) fail("learning.temp must be > 0");
  if (c.episodes < 0) fail("learning.episodes must be >= 0");
  if (c.greedy_max_iterations < 0 || c.mcmc_max_iterations < 0)
    fail("solver iteration caps must be >= 0");
  if (!(c.temp_tb > 0)) fail("solver.temp must be > 0");
  if (c.samples < 0) fail("run.samples must be >= 0");
  if (c.max_rounds < 1) fail("run.max_rounds must be >= 1");
  if (!(c.tolerance >= 0)) fail("run.tolerance must be >= 0");
  if (c.workers < 1) fail("run.workers must be >= 1");

  Scenario s{};
  s.area_side = c.area_side;
  s.num_ops = static_cast<int>(c.quota.size());
  s.sbs_per_op = c.sbs_per_op;
  s.ue_max_dist = c.ue_max_dist;
  s.pl_const_db = c.pl_const_db;
  s.pl_slope_db = c.pl_slope_db;
  s.pathloss_exponent = c.pathloss_exponent;
  s.wall_loss_db = c.wall_loss_db;
  s.wall_loss_enabled = c.wall_loss_enabled;
  s.shadow_sigma_db = c.shadow_sigma_db;
  s.noise_w = dbm_to_watts(c.noise_dbm);
  s.p_tot_w = dbm_to_watts(c.p_tot_dbm);
  s.num_power_levels = c.num_power_levels;
  s.power_quantum_w = s.p_tot_w / c.num_power_levels;
  s.sinr_th = db_to_linear(c.sinr_th_db);
  s.num_rbs = c.num_rbs;
  s.rb_capacity = c.rb_capacity.size() == 1 ? std::vector<int>(c.num_rbs, c.rb_capacity[0])
                                            : c.rb_capacity;
  s.quota = c.quota;
  s.op_weights = c.op_weights.empty() ? std::vector<double>(c.quota.size(), 1.0) : c.op_weights;
  s.sbs_weight = c.sbs_weight;
  s.fade_draws = c.fade_draws;
  s.qos_gated = c.qos_gated;
  s.desirability = c.desirability;
  s.gamma = c.gamma;
  s.lr = c.lr;
  s.lr_decay = c.lr_decay;
  s.temp_tp = c.temp_tp;
  s.episodes = c.episodes;
  s.solver = c.solver;
  s.greedy_max_iterations = c.greedy_max_iterations;
  s.mcmc_max_iterations = c.mcmc_max_iterations;
  s.temp_tb = c.temp_tb;
  s.power_mode = c.power_mode;
  s.samples = c.samples;
  s.seed = c.seed;
  s.max_rounds = c.max_rounds;
  s.tolerance = c.tolerance;
  s.workers = c.workers;

  const int slots = std::accumulate(s.rb_capacity.begin(), s.rb_capacity.end(), 0);
  if (slots < s.num_children())
    fail("infeasible: total RB capacity " + std::to_string(slots) + " < total quota " +
         std::to_string(s.num_children()));
  return s;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

inline long long to_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

template <class T, class F>
std::vector<T> to_list(const std::string& v, F&& conv) {
  std::vector<T> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(conv(trim(item)));
  return out;
}

}  // namespace detail

/// Applies one `section.key = value` assignment.
inline void set_config_value(SimConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  const auto i = [&](const std::string& v) { return static_cast<int>(to_int(key, v)); };
  const auto d = [&](const std::string& v) { return to_double(key, v); };
  const std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"geometry.area_side", [&](auto& v) { c.area_side = d(v); }},
      {"geometry.sbs_per_op", [&](auto& v) { c.sbs_per_op = i(v); }},
      {"geometry.ue_max_dist", [&](auto& v) { c.ue_max_dist = d(v); }},
      {"channel.pl_const", [&](auto& v) { c.pl_const_db = d(v); }},
      {"channel.pl_slope", [&](auto& v) { c.pl_slope_db = d(v); }},
      {"channel.pathloss_exponent", [&](auto& v) { c.pathloss_exponent = d(v); }},
      {"channel.wall_loss", [&](auto& v) { c.wall_loss_db = d(v); }},
      {"channel.wall_loss_enabled", [&](auto& v) { c.wall_loss_enabled = to_bool(key, v); }},
      {"channel.shadow_sigma", [&](auto& v) { c.shadow_sigma_db = d(v); }},
      {"channel.noise_power", [&](auto& v) { c.noise_dbm = d(v); }},
      {"channel.p_tot", [&](auto& v) { c.p_tot_dbm = d(v); }},
      {"channel.power_levels", [&](auto& v) { c.num_power_levels = i(v); }},
      {"channel.sinr_th", [&](auto& v) { c.sinr_th_db = d(v); }},
      {"game.num_rbs", [&](auto& v) { c.num_rbs = i(v); }},
      {"game.rb_capacity", [&](auto& v) { c.rb_capacity = to_list<int>(v, i); }},
      {"game.quota", [&](auto& v) { c.quota = to_list<int>(v, i); }},
      {"game.op_weights", [&](auto& v) { c.op_weights = to_list<double>(v, d); }},
      {"game.sbs_weight", [&](auto& v) { c.sbs_weight = d(v); }},
      {"game.fade_draws", [&](auto& v) { c.fade_draws = i(v); }},
      {"game.qos_gated", [&](auto& v) { c.qos_gated = to_bool(key, v); }},
      {"game.desirability", [&](auto& v) { c.desirability = parse_desirability(v); }},
      {"learning.gamma", [&](auto& v) { c.gamma = d(v); }},
      {"learning.lr", [&](auto& v) { c.lr = d(v); }},
      {"learning.lr_decay", [&](auto& v) { c.lr_decay = to_bool(key, v); }},
      {"learning.temp", [&](auto& v) { c.temp_tp = d(v); }},
      {"learning.episodes", [&](auto& v) { c.episodes = i(v); }},
      {"solver.kind", [&](auto& v) { c.solver = parse_solver(v); }},
      {"solver.greedy_max_iterations", [&](auto& v) { c.greedy_max_iterations = i(v); }},
      {"solver.mcmc_max_iterations", [&](auto& v) { c.mcmc_max_iterations = i(v); }},
      {"solver.temp", [&](auto& v) { c.temp_tb = d(v); }},
      {"run.power_mode", [&](auto& v) { c.power_mode = parse_power_mode(v); }},
      {"run.samples", [&](auto& v) { c.samples = i(v); }},
      {"run.seed", [&](auto& v) { c.seed = static_cast<std::uint64_t>(to_int(key, v)); }},
      {"run.max_rounds", [&](auto& v) { c.max_rounds = i(v); }},
      {"run.tolerance", [&](auto& v) { c.tolerance = d(v); }},
      {"run.workers", [&](auto& v) { c.workers = i(v); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(value);
}

inline SimConfig parse_config(std::istream& in, SimConfig c = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(std::string_view(t).substr(0, eq));
    const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
    try {
      set_config_value(c, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

inline SimConfig load_config(const std::string& path, SimConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return parse_config(in, std::move(base));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// Canonical `key = value` rendering, used for config echo in summaries.
/// run.workers is left out: it never influences results.
inline std::vector<std::pair<std::string, std::string>> config_entries(const SimConfig& c) {
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  auto ints = [](const std::vector<int>& v) {
    std::string s;
    for (size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
    return s;
  };
  std::string weights;
  for (size_t k = 0; k < c.op_weights.size(); ++k) weights += (k ? "," : "") + num(c.op_weights[k]);
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {
      {"geometry.area_side", num(c.area_side)},
      {"geometry.sbs_per_op", std::to_string(c.sbs_per_op)},
      {"geometry.ue_max_dist", num(c.ue_max_dist)},
      {"channel.pl_const", num(c.pl_const_db)},
      {"channel.pl_slope", num(c.pl_slope_db)},
      {"channel.pathloss_exponent", num(c.pathloss_exponent)},
      {"channel.wall_loss", num(c.wall_loss_db)},
      {"channel.wall_loss_enabled", b(c.wall_loss_enabled)},
      {"channel.shadow_sigma", num(c.shadow_sigma_db)},
      {"channel.noise_power", num(c.noise_dbm)},
      {"channel.p_tot", num(c.p_tot_dbm)},
      {"channel.power_levels", std::to_string(c.num_power_levels)},
      {"channel.sinr_th", num(c.sinr_th_db)},
      {"game.num_rbs", std::to_string(c.num_rbs)},
      {"game.rb_capacity", ints(c.rb_capacity)},
      {"game.quota", ints(c.quota)},
      {"game.op_weights", weights},
      {"game.sbs_weight", num(c.sbs_weight)},
      {"game.fade_draws", std::to_string(c.fade_draws)},
      {"game.qos_gated", b(c.qos_gated)},
      {"game.desirability", to_string(c.desirability)},
      {"learning.gamma", num(c.gamma)},
      {"learning.lr", num(c.lr)},
      {"learning.lr_decay", b(c.lr_decay)},
      {"learning.temp", num(c.temp_tp)},
      {"learning.episodes", std::to_string(c.episodes)},
      {"solver.kind", to_string(c.solver)},
      {"solver.greedy_max_iterations", std::to_string(c.greedy_max_iterations)},
      {"solver.mcmc_max_iterations", std::to_string(c.mcmc_max_iterations)},
      {"solver.temp", num(c.temp_tb)},
      {"run.power_mode", to_string(c.power_mode)},
      {"run.samples", std::to_string(c.samples)},
      {"run.seed", std::to_string(c.seed)},
      {"run.max_rounds", std::to_string(c.max_rounds)},
      {"run.tolerance", num(c.tolerance)},
  };
}

}  // namespace specshare
