#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "csdsim/domain.hpp"
#include "csdsim/engine.hpp"

namespace csdsim {

// ---------------------------------------------------------------------------
// Sampling models
// ---------------------------------------------------------------------------

/// Task and agent arrival counts. With `per_day` unset the means are whole-run
/// populations spread uniformly over the horizon.
struct ArrivalModel {
  double task_lambda = 87.0;
  double agent_gamma = 800.0;
  bool per_day = false;

  static ArrivalModel from(const RunConfig& c) { return {c.task_lambda, c.agent_gamma, c.arrivals_per_day != 0}; }

  /// Sorted arrival days on [0, horizon).
  static std::vector<double> arrival_days(RandomStream& s, double mean, double horizon, bool per_day) {
    std::vector<double> days;
    if (horizon <= 0) return days;
    const auto n = s.poisson(per_day ? mean * horizon : mean);
    days.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) days.push_back(s.uniform() * horizon);
    std::sort(days.begin(), days.end());
    return days;
  }
};

struct SimilarityModel {
  double low = 0.30;
  double high = 0.98;
  double sample(RandomStream& s) const { return s.uniform(low, high); }
};

/// Beta(alpha, beta) on [0, max]. Uses inversion when alpha == 1, otherwise
/// the ratio of gamma variates.
struct ExperienceModel {
  double alpha = 1.0;
  double beta = 5.0;
  double max = 3000.0;

  static ExperienceModel from(const RunConfig& c) { return {c.experience_alpha, c.experience_beta, c.experience_max}; }

  double sample(RandomStream& s) const {
    double x;
    if (alpha == 1.0) {
      x = 1.0 - std::pow(1.0 - s.uniform(), 1.0 / beta);
    } else {
      std::mt19937_64 eng(s.next_u64());
      const double ga = std::gamma_distribution<double>(alpha, 1.0)(eng);
      const double gb = std::gamma_distribution<double>(beta, 1.0)(eng);
      x = ga / (ga + gb);
    }
    return max * x;
  }

  /// CDF of the scaled Beta(1, beta) at `rating` (exact only for alpha == 1).
  double cdf_alpha1(double rating) const { return 1.0 - std::pow(1.0 - std::clamp(rating / max, 0.0, 1.0), beta); }
};

// ---------------------------------------------------------------------------
// Aggregate metrics
// ---------------------------------------------------------------------------

/// Task completion ratio C / R.
inline std::optional<double> compute_tcr(const PlatformCounters& c) {
  if (c.registered == 0) return std::nullopt;
  return static_cast<double>(c.completed) / static_cast<double>(c.registered);
}

/// Task failure ratio 1 - C / R.
inline std::optional<double> compute_tfr(const PlatformCounters& c) {
  const auto tcr = compute_tcr(c);
  if (!tcr) return std::nullopt;
  return 1.0 - *tcr;
}

/// Fraction of agents holding at least one open task.
inline std::optional<double> compute_utilization(std::span<const Agent> agents) {
  if (agents.empty()) return std::nullopt;
  std::size_t busy = 0;
  for (const auto& a : agents) busy += a.open_list.empty() ? 0 : 1;
  return static_cast<double>(busy) / static_cast<double>(agents.size());
}

inline std::optional<double> compute_utilization(std::size_t busy, std::size_t total) {
  if (total == 0) return std::nullopt;
  return static_cast<double>(busy) / static_cast<double>(total);
}

/// Mean similarity over the given open tasks.
inline std::optional<double> pool_openness(std::span<const double> similarities) {
  if (similarities.empty()) return std::nullopt;
  double sum = 0;
  for (const double s : similarities) sum += s;
  return sum / static_cast<double>(similarities.size());
}

struct ControlChart {
  double mean = 0;
  double sigma = 0;
  double lower = 0;
  double upper = 0;
};

/// Mean +- k sigma bands over a daily series (population sigma).
inline std::optional<ControlChart> control_chart(std::span<const double> series, double k = 3.0) {
  if (series.empty()) return std::nullopt;
  double sum = 0;
  for (const double v : series) sum += v;
  const double mean = sum / static_cast<double>(series.size());
  double ss = 0;
  for (const double v : series) ss += (v - mean) * (v - mean);
  const double sigma = std::sqrt(ss / static_cast<double>(series.size()));
  return ControlChart{mean, sigma, mean - k * sigma, mean + k * sigma};
}

// ---------------------------------------------------------------------------
// Agent creation
// ---------------------------------------------------------------------------

/// Random non-empty skill set with 1..max_tags tags out of `vocabulary` tags.
inline SkillSet sample_skills(RandomStream& s, int vocabulary, int max_tags) {
  const int k = static_cast<int>(s.uniform_int(1, max_tags));
  std::vector<int> tags(static_cast<std::size_t>(vocabulary));
  for (int i = 0; i < vocabulary; ++i) tags[static_cast<std::size_t>(i)] = i;
  s.shuffle(tags);
  SkillSet out;
  for (int i = 0; i < k; ++i) out.bits |= 1U << tags[static_cast<std::size_t>(i)];
  return out;
}

/// New agent: rating from the experience model, belt from the table, random
/// skills, empty reliability window.
inline Agent spawn_agent(AgentId id, double day, RandomStream& experience, RandomStream& skills,
                         const ExperienceModel& model, const BeltTable& belts, int vocabulary = 6,
                         int max_skills = 5) {
  Agent a;
  a.id = id;
  a.joined_day = day;
  a.rating = model.sample(experience);
  a.belt = belts.belt_of(a.rating);
  a.skills = sample_skills(skills, vocabulary, max_skills);
  return a;
}

}  // namespace csdsim
