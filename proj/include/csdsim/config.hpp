#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "csdsim/error.hpp"

namespace csdsim {

/// Every tunable constant of the simulator. Defaults are the published model
/// values; behavioural knobs that the published model leaves unspecified carry
/// the calibrated values documented in README.md.
struct RunConfig {
  // replication control
  double horizon_days = 60.0;
  double replications = 30;
  std::uint64_t seed = 1;

  // arrivals
  double task_lambda = 87.0;
  double agent_gamma = 800.0;
  double arrivals_per_day = 0;  // 0: lambda/gamma are per-run populations, 1: per-day rates

  // task attributes
  double similarity_low = 0.30;
  double similarity_high = 0.98;
  double duration_min = 1.0;
  double duration_mode = 16.0;
  double duration_max = 30.0;
  double award_low = 250.0;
  double award_high = 2000.0;
  double attraction_rate = 0.70;
  double task_skills_max = 2;

  // agent attributes
  double experience_alpha = 1.0;
  double experience_beta = 5.0;
  double experience_max = 3000.0;
  double agent_skills_max = 5;
  double skill_vocabulary_size = 6;
  double skill_match_superset = 0;  // 0: any shared tag, 1: agent covers all requirements
  double reliability_window = 15;

  // registration (agent decision, part one)
  double reg_rate_per_day = 1.0;
  double reg_threshold = 0.8;
  double open_list_cap = 5;
  double competition_cap = 18;
  double crowded_bernoulli_p = 0.3;
  double interest_width = 0.10;

  // submission (agent decision, part two)
  double sub_rate_per_day = 0.51;
  double sub_product_threshold = 0.051;
  double rank_discouragement = 0.15;
  double crowd_aversion = 3.0;
  double work_fraction = 0.5;
  double quality_pass = 75.0;

  // predictors
  double fps_slope = 0.0473;
  double fps_intercept = 0.014;
  double invert_tsr = 0;

  // lifecycle
  double repost_failed = 1;
  double max_reposts = 6;

  // belt table: upper rating bound (inclusive), population share, p(qualified submission),
  // preferred task similarity
  double belt_gray_max = 900.0;
  double belt_green_max = 1200.0;
  double belt_blue_max = 1500.0;
  double belt_yellow_max = 2200.0;
  double belt_gray_share = 0.9002;
  double belt_green_share = 0.0288;
  double belt_blue_share = 0.0539;
  double belt_yellow_share = 0.0154;
  double belt_red_share = 0.0016;
  double belt_gray_p = 0.25;
  double belt_green_p = 0.45;
  double belt_blue_p = 0.39;
  double belt_yellow_p = 0.6;
  double belt_red_p = 0.6;
  double belt_gray_affinity = 0.80;
  double belt_green_affinity = 0.80;
  double belt_blue_affinity = 0.80;
  double belt_yellow_affinity = 0.80;
  double belt_red_affinity = 0.80;
  double belt_gray_interest = 0.10;
  double belt_green_interest = 0.10;
  double belt_blue_interest = 0.50;
  double belt_yellow_interest = 0.50;
  double belt_red_interest = 0.50;

  // scenarios
  double focal_arrival_day = 10.0;
  double focal_duration_days = 20.0;
  double focal_similarity = 0.75;
  double gate_spread = 0.05;

  // utilisation control chart
  double control_sigma = 3.0;

  bool operator==(const RunConfig&) const = default;
};

enum class KeyKind { Real, Integer, Flag, Probability, Seed };

struct ConfigKey {
  std::string_view name;
  KeyKind kind;
  double RunConfig::*field;  // null for the seed key
  double lo;
  double hi;
};

inline const std::vector<ConfigKey>& config_keys() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  using K = KeyKind;
  static const std::vector<ConfigKey> keys = {
      {"seed", K::Seed, nullptr, 0, inf},
      {"horizon_days", K::Real, &RunConfig::horizon_days, 0, inf},
      {"replications", K::Integer, &RunConfig::replications, 1, 1e6},
      {"task_lambda", K::Real, &RunConfig::task_lambda, 0, 1e6},
      {"agent_gamma", K::Real, &RunConfig::agent_gamma, 0, 1e6},
      {"arrivals_per_day", K::Flag, &RunConfig::arrivals_per_day, 0, 1},
      {"similarity_low", K::Probability, &RunConfig::similarity_low, 0, 1},
      {"similarity_high", K::Probability, &RunConfig::similarity_high, 0, 1},
      {"duration_min", K::Real, &RunConfig::duration_min, 1, inf},
      {"duration_mode", K::Real, &RunConfig::duration_mode, 1, inf},
      {"duration_max", K::Real, &RunConfig::duration_max, 1, inf},
      {"award_low", K::Real, &RunConfig::award_low, 0, inf},
      {"award_high", K::Real, &RunConfig::award_high, 0, inf},
      {"attraction_rate", K::Probability, &RunConfig::attraction_rate, 0, 1},
      {"task_skills_max", K::Integer, &RunConfig::task_skills_max, 1, 32},
      {"experience_alpha", K::Real, &RunConfig::experience_alpha, 1e-9, inf},
      {"experience_beta", K::Real, &RunConfig::experience_beta, 1e-9, inf},
      {"experience_max", K::Real, &RunConfig::experience_max, 1e-9, inf},
      {"agent_skills_max", K::Integer, &RunConfig::agent_skills_max, 1, 32},
      {"skill_vocabulary_size", K::Integer, &RunConfig::skill_vocabulary_size, 1, 32},
      {"skill_match_superset", K::Flag, &RunConfig::skill_match_superset, 0, 1},
      {"reliability_window", K::Integer, &RunConfig::reliability_window, 1, 1e6},
      {"reg_rate_per_day", K::Real, &RunConfig::reg_rate_per_day, 1e-12, inf},
      {"reg_threshold", K::Probability, &RunConfig::reg_threshold, 0, 1},
      {"open_list_cap", K::Integer, &RunConfig::open_list_cap, 1, 1e6},
      {"competition_cap", K::Integer, &RunConfig::competition_cap, 0, 1e6},
      {"crowded_bernoulli_p", K::Probability, &RunConfig::crowded_bernoulli_p, 0, 1},
      {"interest_width", K::Real, &RunConfig::interest_width, 1e-9, inf},
      {"sub_rate_per_day", K::Real, &RunConfig::sub_rate_per_day, 1e-12, inf},
      {"sub_product_threshold", K::Probability, &RunConfig::sub_product_threshold, 0, 1},
      {"rank_discouragement", K::Real, &RunConfig::rank_discouragement, 0, inf},
      {"crowd_aversion", K::Real, &RunConfig::crowd_aversion, 0, inf},
      {"work_fraction", K::Probability, &RunConfig::work_fraction, 0, 1},
      {"quality_pass", K::Real, &RunConfig::quality_pass, 0, 100},
      {"fps_slope", K::Real, &RunConfig::fps_slope, -inf, inf},
      {"fps_intercept", K::Real, &RunConfig::fps_intercept, -inf, inf},
      {"invert_tsr", K::Flag, &RunConfig::invert_tsr, 0, 1},
      {"repost_failed", K::Flag, &RunConfig::repost_failed, 0, 1},
      {"max_reposts", K::Integer, &RunConfig::max_reposts, 0, 1e6},
      {"belt_gray_max", K::Real, &RunConfig::belt_gray_max, 0, inf},
      {"belt_green_max", K::Real, &RunConfig::belt_green_max, 0, inf},
      {"belt_blue_max", K::Real, &RunConfig::belt_blue_max, 0, inf},
      {"belt_yellow_max", K::Real, &RunConfig::belt_yellow_max, 0, inf},
      {"belt_gray_share", K::Probability, &RunConfig::belt_gray_share, 0, 1},
      {"belt_green_share", K::Probability, &RunConfig::belt_green_share, 0, 1},
      {"belt_blue_share", K::Probability, &RunConfig::belt_blue_share, 0, 1},
      {"belt_yellow_share", K::Probability, &RunConfig::belt_yellow_share, 0, 1},
      {"belt_red_share", K::Probability, &RunConfig::belt_red_share, 0, 1},
      {"belt_gray_p", K::Probability, &RunConfig::belt_gray_p, 0, 1},
      {"belt_green_p", K::Probability, &RunConfig::belt_green_p, 0, 1},
      {"belt_blue_p", K::Probability, &RunConfig::belt_blue_p, 0, 1},
      {"belt_yellow_p", K::Probability, &RunConfig::belt_yellow_p, 0, 1},
      {"belt_red_p", K::Probability, &RunConfig::belt_red_p, 0, 1},
      {"belt_gray_affinity", K::Probability, &RunConfig::belt_gray_affinity, 0, 1},
      {"belt_green_affinity", K::Probability, &RunConfig::belt_green_affinity, 0, 1},
      {"belt_blue_affinity", K::Probability, &RunConfig::belt_blue_affinity, 0, 1},
      {"belt_yellow_affinity", K::Probability, &RunConfig::belt_yellow_affinity, 0, 1},
      {"belt_red_affinity", K::Probability, &RunConfig::belt_red_affinity, 0, 1},
      {"belt_gray_interest", K::Probability, &RunConfig::belt_gray_interest, 0, 1},
      {"belt_green_interest", K::Probability, &RunConfig::belt_green_interest, 0, 1},
      {"belt_blue_interest", K::Probability, &RunConfig::belt_blue_interest, 0, 1},
      {"belt_yellow_interest", K::Probability, &RunConfig::belt_yellow_interest, 0, 1},
      {"belt_red_interest", K::Probability, &RunConfig::belt_red_interest, 0, 1},
      {"focal_arrival_day", K::Real, &RunConfig::focal_arrival_day, 0, inf},
      {"focal_duration_days", K::Real, &RunConfig::focal_duration_days, 1, inf},
      {"focal_similarity", K::Probability, &RunConfig::focal_similarity, 0, 1},
      {"gate_spread", K::Probability, &RunConfig::gate_spread, 0, 0.5},
      {"control_sigma", K::Real, &RunConfig::control_sigma, 0, inf},
  };
  return keys;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

/// Sets one key from its textual value. Throws ConfigError naming the key.
inline void set_config_value(RunConfig& cfg, std::string_view key, std::string_view text) {
  const auto& keys = config_keys();
  const auto it = std::find_if(keys.begin(), keys.end(),
                               [&](const ConfigKey& k) { return k.name == key; });
  if (it == keys.end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  const std::string value = trim(text);
  if (it->kind == KeyKind::Seed) {
    try {
      std::size_t pos = 0;
      const auto s = std::stoull(value, &pos, 0);
      if (pos != value.size() || value.empty() || !std::isdigit(static_cast<unsigned char>(value[0])))
        throw std::invalid_argument("not unsigned");
      cfg.seed = s;
    } catch (const std::exception&) {
      throw ConfigError("config key 'seed': expected unsigned integer, got '" + value + "'");
    }
    return;
  }
  double v = 0;
  try {
    std::size_t pos = 0;
    v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw ConfigError("config key '" + std::string(key) + "': expected number, got '" + value + "'");
  }
  if (!std::isfinite(v) || v < it->lo || v > it->hi) {
    throw ConfigError("config key '" + std::string(key) + "' out of range [" + format_double(it->lo) +
                      ", " + format_double(it->hi) + "]: " + value);
  }
  if ((it->kind == KeyKind::Integer || it->kind == KeyKind::Flag) && v != std::floor(v)) {
    throw ConfigError("config key '" + std::string(key) + "' must be an integer: " + value);
  }
  cfg.*(it->field) = v;
}

/// Cross-key constraints that single-key ranges cannot express.
inline void validate(const RunConfig& c) {
  if (c.similarity_low > c.similarity_high)
    throw ConfigError("similarity_low must not exceed similarity_high");
  if (!(c.duration_min <= c.duration_mode && c.duration_mode <= c.duration_max))
    throw ConfigError("duration_min <= duration_mode <= duration_max violated");
  if (c.award_low > c.award_high) throw ConfigError("award_low must not exceed award_high");
  if (!(c.belt_gray_max < c.belt_green_max && c.belt_green_max < c.belt_blue_max &&
        c.belt_blue_max < c.belt_yellow_max))
    throw ConfigError("belt rating bounds must be strictly increasing");
  const double shares = c.belt_gray_share + c.belt_green_share + c.belt_blue_share +
                        c.belt_yellow_share + c.belt_red_share;
  if (shares <= 0) throw ConfigError("belt population shares must not all be zero");
  if (c.task_skills_max > c.skill_vocabulary_size || c.agent_skills_max > c.skill_vocabulary_size)
    throw ConfigError("skill counts cannot exceed skill_vocabulary_size");
}

/// Parses `key = value` lines; '#' starts a comment. Absent keys keep defaults.
inline RunConfig parse_config(std::istream& in, const std::string& origin = "<config>") {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    set_config_value(cfg, trim(std::string_view(t).substr(0, eq)),
                     std::string_view(t).substr(eq + 1));
  }
  validate(cfg);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

inline std::string config_value_text(const RunConfig& cfg, const ConfigKey& k) {
  if (k.kind == KeyKind::Seed) return std::to_string(cfg.seed);
  return format_double(cfg.*(k.field));
}

/// Effective config as `key = value` text, one key per line in registry order.
inline std::string echo_config(const RunConfig& cfg) {
  std::ostringstream os;
  for (const auto& k : config_keys()) os << k.name << " = " << config_value_text(cfg, k) << '\n';
  return os.str();
}

/// FNV-1a over the echoed config; stamped into every output file.
inline std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char ch : echo_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace csdsim
