#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>

#include "csdsim/domain.hpp"
#include "csdsim/engine.hpp"

namespace csdsim {

// ---------------------------------------------------------------------------
// Durations
// ---------------------------------------------------------------------------

/// Triangular(min, mode, max) task duration in days.
struct DurationModel {
  double min = 1.0;
  double mode = 16.0;
  double max = 30.0;

  static DurationModel from(const RunConfig& c) { return {c.duration_min, c.duration_mode, c.duration_max}; }

  double mean() const { return (min + mode + max) / 3.0; }

  /// Inverse-CDF transform of a uniform draw.
  double quantile(double u) const {
    if (max == min) return min;
    const double split = (mode - min) / (max - min);
    if (u < split) return min + std::sqrt(u * (max - min) * (mode - min));
    return max - std::sqrt((1.0 - u) * (max - min) * (max - mode));
  }

  double sample(RandomStream& s) const { return quantile(s.uniform()); }
};

inline double sample_duration(RandomStream& s, const DurationModel& m = {}) { return m.sample(s); }

// ---------------------------------------------------------------------------
// Failure predictors
// ---------------------------------------------------------------------------

struct RegistrantWeight {
  double reliability;  // Re_j
  double p;            // P_j from the belt table
};

/// Traffic-light band of the registration-phase predictor, keyed on summed
/// reliability: green above 2, yellow in (1, 2], red at or below 1.
enum class FprBand : std::uint8_t { Red, Yellow, Green };

inline std::string_view to_string(FprBand b) {
  switch (b) {
    case FprBand::Red: return "red";
    case FprBand::Yellow: return "yellow";
    case FprBand::Green: return "green";
  }
  return "?";
}

struct FprResult {
  double value;
  FprBand band;
};

/// Registration-phase failure prediction: W = sum(Re_j * P_j) divided by 3, 2
/// or 1 depending on where sum(Re_j) falls. Empty input has no prediction.
inline std::optional<FprResult> compute_fpr(std::span<const RegistrantWeight> registrants) {
  if (registrants.empty()) return std::nullopt;
  double sum_re = 0, weighted = 0;
  for (const auto& r : registrants) {
    sum_re += r.reliability;
    weighted += r.reliability * r.p;
  }
  if (sum_re > 2.0) return FprResult{weighted / 3.0, FprBand::Green};
  if (sum_re > 1.0) return FprResult{weighted / 2.0, FprBand::Yellow};
  return FprResult{weighted, FprBand::Red};
}

/// Platform task submission ratio, 1 - S/R as printed; `invert` gives S/R.
inline std::optional<double> compute_tsr(std::uint64_t submitted, std::uint64_t registered, bool invert = false) {
  if (registered == 0) return std::nullopt;
  const double ratio = static_cast<double>(submitted) / static_cast<double>(registered);
  return invert ? ratio : 1.0 - ratio;
}

inline std::optional<double> compute_tsr(const PlatformCounters& c, bool invert = false) {
  return compute_tsr(c.submitted, c.registered, invert);
}

/// Submission-phase failure prediction, linear in TSR.
inline double compute_fps(double tsr, double slope = 0.0473, double intercept = 0.014) {
  return slope * tsr + intercept;
}

// ---------------------------------------------------------------------------
// Review and reposting
// ---------------------------------------------------------------------------

/// Resolves a task in PeerReview: completed iff the best score reaches the pass mark.
inline TaskState peer_review(TaskRuntime& task, double quality_pass = 75.0) {
  if (task.state() != TaskState::PeerReview)
    throw ModelInvariantError("peer review on task " + std::to_string(task.id()) + " in state " +
                              std::string(to_string(task.state())));
  const auto best = task.best_score();
  const TaskState outcome = (best && *best >= quality_pass) ? TaskState::Completed : TaskState::Failed;
  task.transition(outcome);
  return outcome;
}

/// Fresh copy of a failed, starved or dropped task, posted on `day`.
inline TaskSpec repost(const TaskRuntime& task, double day, TaskId new_id) {
  if (!counts_as_failure(task.state()))
    throw std::invalid_argument("only failed, starved or dropped tasks can be reposted (task " +
                                std::to_string(task.id()) + " is " + std::string(to_string(task.state())) + ")");
  TaskSpec next = task.spec();
  next.id = new_id;
  next.arrival = day;
  next.status = TaskStatus::Cancelled;
  next.repost_count = task.spec().repost_count + 1;
  next.reposted_from = task.id();
  return next;
}

}  // namespace csdsim
