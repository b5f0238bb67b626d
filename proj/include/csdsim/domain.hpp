#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csdsim/config.hpp"
#include "csdsim/error.hpp"

namespace csdsim {

using TaskId = std::uint32_t;
using AgentId = std::uint32_t;

// ---------------------------------------------------------------------------
// Belts
// ---------------------------------------------------------------------------

enum class Belt : std::uint8_t { Gray, Green, Blue, Yellow, Red };

inline constexpr std::array<Belt, 5> kAllBelts = {Belt::Gray, Belt::Green, Belt::Blue, Belt::Yellow,
                                                  Belt::Red};

inline std::string_view to_string(Belt b) {
  constexpr std::array<std::string_view, 5> names = {"Gray", "Green", "Blue", "Yellow", "Red"};
  return names[static_cast<std::size_t>(b)];
}

inline std::optional<Belt> parse_belt(std::string_view s) {
  for (const Belt b : kAllBelts) {
    const auto name = to_string(b);
    if (s.size() == name.size() &&
        std::equal(s.begin(), s.end(), name.begin(), [](char a, char c) {
          return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(c));
        }))
      return b;
  }
  return std::nullopt;
}

/// Bit set of belts, used for admission gates.
class BeltSet {
 public:
  constexpr BeltSet() = default;
  constexpr BeltSet(std::initializer_list<Belt> belts) {
    for (const Belt b : belts) insert(b);
  }
  static constexpr BeltSet all() { return BeltSet{Belt::Gray, Belt::Green, Belt::Blue, Belt::Yellow, Belt::Red}; }

  constexpr void insert(Belt b) { bits_ |= bit(b); }
  constexpr bool contains(Belt b) const { return (bits_ & bit(b)) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool operator==(const BeltSet&) const = default;

  std::string label() const {
    std::string out;
    for (const Belt b : kAllBelts)
      if (contains(b)) {
        if (!out.empty()) out += '+';
        out += to_string(b);
      }
    return out.empty() ? "none" : out;
  }

 private:
  static constexpr std::uint8_t bit(Belt b) { return static_cast<std::uint8_t>(1U << static_cast<unsigned>(b)); }
  std::uint8_t bits_ = 0;
};

struct BeltRow {
  Belt belt;
  double rating_max;  // inclusive upper bound; +inf for the top belt
  double population_share;
  double p_qualified;
  double preferred_similarity;
  double interest_peak;  // chance of considering a task at the preferred similarity
};

/// Rating range -> population share -> qualified-submission probability.
/// Boundary ratings (900, 1200, ...) belong to the lower belt.
class BeltTable {
 public:
  BeltTable() : BeltTable(RunConfig{}) {}

  explicit BeltTable(const RunConfig& c) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    rows_ = {{
        {Belt::Gray, c.belt_gray_max, c.belt_gray_share, c.belt_gray_p, c.belt_gray_affinity, c.belt_gray_interest},
        {Belt::Green, c.belt_green_max, c.belt_green_share, c.belt_green_p, c.belt_green_affinity, c.belt_green_interest},
        {Belt::Blue, c.belt_blue_max, c.belt_blue_share, c.belt_blue_p, c.belt_blue_affinity, c.belt_blue_interest},
        {Belt::Yellow, c.belt_yellow_max, c.belt_yellow_share, c.belt_yellow_p, c.belt_yellow_affinity, c.belt_yellow_interest},
        {Belt::Red, inf, c.belt_red_share, c.belt_red_p, c.belt_red_affinity, c.belt_red_interest},
    }};
  }

  Belt belt_of(double rating) const {
    if (!(rating >= 0)) throw std::invalid_argument("rating must be non-negative");
    for (const auto& r : rows_)
      if (rating <= r.rating_max) return r.belt;
    return Belt::Red;
  }

  double qualified_submission_probability(Belt b) const { return row(b).p_qualified; }
  double preferred_similarity(Belt b) const { return row(b).preferred_similarity; }
  double interest_peak(Belt b) const { return row(b).interest_peak; }

  /// Population share renormalised over the table (published shares sum to 99.99%).
  double normalized_share(Belt b) const {
    double total = 0;
    for (const auto& r : rows_) total += r.population_share;
    return row(b).population_share / total;
  }

  const BeltRow& row(Belt b) const { return rows_[static_cast<std::size_t>(b)]; }
  const std::array<BeltRow, 5>& rows() const { return rows_; }

 private:
  std::array<BeltRow, 5> rows_{};
};

// ---------------------------------------------------------------------------
// Skills
// ---------------------------------------------------------------------------

/// Skill tags as a bit set over a vocabulary of at most 32 tags.
struct SkillSet {
  std::uint32_t bits = 0;

  bool empty() const { return bits == 0; }
  int count() const { return std::popcount(bits); }
  bool intersects(SkillSet o) const { return (bits & o.bits) != 0; }
  bool covers(SkillSet o) const { return (bits & o.bits) == o.bits; }
  bool operator==(const SkillSet&) const = default;
};

inline bool skills_match(SkillSet agent, SkillSet requirements, bool superset) {
  return superset ? agent.covers(requirements) : agent.intersects(requirements);
}

// ---------------------------------------------------------------------------
// Tasks
// ---------------------------------------------------------------------------

enum class TaskStatus : std::uint8_t { Cancelled = 0, Completed = 1 };

/// Static description of a posted task.
struct TaskSpec {
  TaskId id = 0;
  double arrival = 0;   // day posted
  double duration = 1;  // days until registration and submission close
  double award = 0;     // USD
  SkillSet requirements;
  std::string task_type = "development";
  std::vector<std::string> technology;
  double similarity = 0.5;  // similarity to the concurrently open pool, [0, 1]
  TaskStatus status = TaskStatus::Cancelled;
  std::uint32_t repost_count = 0;
  std::optional<TaskId> reposted_from;
  std::optional<std::uint32_t> project;

  double deadline() const { return arrival + duration; }
};

enum class TaskState : std::uint8_t {
  Arrived,
  Registered,
  Submitted,
  PeerReview,
  Completed,
  Failed,
  Starved,
  Dropped,
};

inline std::string_view to_string(TaskState s) {
  constexpr std::array<std::string_view, 8> names = {"Arrived", "Registered", "Submitted", "PeerReview",
                                                     "Completed", "Failed", "Starved", "Dropped"};
  return names[static_cast<std::size_t>(s)];
}

inline bool is_terminal(TaskState s) {
  return s == TaskState::Completed || s == TaskState::Failed || s == TaskState::Starved ||
         s == TaskState::Dropped;
}

inline bool counts_as_failure(TaskState s) {
  return s == TaskState::Failed || s == TaskState::Starved || s == TaskState::Dropped;
}

/// Edges of the task-completion state chart.
inline bool is_legal_transition(TaskState from, TaskState to) {
  using S = TaskState;
  switch (from) {
    case S::Arrived: return to == S::Registered || to == S::Starved;
    case S::Registered: return to == S::Submitted || to == S::Dropped;
    case S::Submitted: return to == S::PeerReview;
    case S::PeerReview: return to == S::Completed || to == S::Failed;
    default: return false;
  }
}

struct Registration {
  AgentId agent;
  double reliability;  // Re_j at registration time
  Belt belt;
  double rating;
  double day;
};

struct Submission {
  AgentId agent;
  double day;
  double score;  // 0..100
};

enum class Phase : std::uint8_t { Registration, Submission };

inline std::string_view to_string(Phase p) { return p == Phase::Registration ? "registration" : "submission"; }

struct FailurePrediction {
  Phase phase;
  double value;
  double day;
};

/// Live lifecycle state of one posted task.
class TaskRuntime {
 public:
  explicit TaskRuntime(TaskSpec spec) : spec_(std::move(spec)) {}

  const TaskSpec& spec() const { return spec_; }
  TaskId id() const { return spec_.id; }
  TaskState state() const { return state_; }

  void transition(TaskState to) {
    if (!is_legal_transition(state_, to))
      throw ModelInvariantError("task " + std::to_string(spec_.id) + ": illegal transition " +
                                std::string(to_string(state_)) + " -> " + std::string(to_string(to)));
    state_ = to;
    if (to == TaskState::Completed) spec_.status = TaskStatus::Completed;
  }

  bool accepts_registrations() const {
    return state_ == TaskState::Arrived || state_ == TaskState::Registered || state_ == TaskState::Submitted;
  }
  bool open() const { return accepts_registrations(); }

  bool has_registrant(AgentId a) const {
    return std::any_of(registrants_.begin(), registrants_.end(), [a](const Registration& r) { return r.agent == a; });
  }
  bool has_submission_from(AgentId a) const {
    return std::any_of(submissions_.begin(), submissions_.end(), [a](const Submission& s) { return s.agent == a; });
  }

  void add_registrant(const Registration& r) {
    if (has_registrant(r.agent))
      throw ModelInvariantError("agent " + std::to_string(r.agent) + " registered twice for task " +
                                std::to_string(spec_.id));
    registrants_.push_back(r);
    last_registrant_rating_ = r.rating;
    if (state_ == TaskState::Arrived) transition(TaskState::Registered);
  }

  void add_submission(const Submission& s) {
    if (!has_registrant(s.agent))
      throw ModelInvariantError("submission from non-registrant " + std::to_string(s.agent) + " on task " +
                                std::to_string(spec_.id));
    if (has_submission_from(s.agent))
      throw ModelInvariantError("duplicate submission on task " + std::to_string(spec_.id));
    submissions_.push_back(s);
    if (state_ == TaskState::Registered) transition(TaskState::Submitted);
  }

  void record_prediction(const FailurePrediction& p) {
    if (p.phase == Phase::Registration && state_ != TaskState::Registered)
      throw ModelInvariantError("registration-phase prediction outside Registered state");
    if (p.phase == Phase::Submission && submissions_.empty())
      throw ModelInvariantError("submission-phase prediction before first submission");
    (p.phase == Phase::Registration ? fpr_history_ : fps_history_).push_back(p);
  }

  std::optional<double> best_score() const {
    if (submissions_.empty()) return std::nullopt;
    double best = submissions_.front().score;
    for (const auto& s : submissions_) best = std::max(best, s.score);
    return best;
  }

  const std::vector<Registration>& registrants() const { return registrants_; }
  const std::vector<Submission>& submissions() const { return submissions_; }
  const std::vector<FailurePrediction>& fpr_history() const { return fpr_history_; }
  const std::vector<FailurePrediction>& fps_history() const { return fps_history_; }

  std::optional<double> task_score;
  std::optional<AgentId> winner;
  bool attractable = true;
  bool focal = false;
  BeltSet admitted = BeltSet::all();
  std::optional<double> resolved_day;

  std::optional<double> last_registrant_rating() const { return last_registrant_rating_; }

 private:
  TaskSpec spec_;
  TaskState state_ = TaskState::Arrived;
  std::vector<Registration> registrants_;
  std::vector<Submission> submissions_;
  std::vector<FailurePrediction> fpr_history_;
  std::vector<FailurePrediction> fps_history_;
  std::optional<double> last_registrant_rating_;
};

// ---------------------------------------------------------------------------
// Agents
// ---------------------------------------------------------------------------

struct Agent {
  AgentId id = 0;
  double reliability = 0;  // Re, qualified fraction of the recent window
  double rating = 0;       // Ra, points in [0, 3000]
  Belt belt = Belt::Gray;
  SkillSet skills;                   // SK
  std::optional<double> last_score;  // So
  std::uint32_t wins = 0;            // Wi
  std::string location = "unknown";  // L
  double joined_day = 0;             // MA is now - joined_day
  std::vector<TaskId> open_list;
  std::deque<bool> recent_window;  // newest at the back
  std::uint32_t registrations = 0;
  std::uint32_t submissions = 0;

  double tenure(double now) const { return now - joined_day; }
  bool holds(TaskId t) const { return std::find(open_list.begin(), open_list.end(), t) != open_list.end(); }
  void release(TaskId t) { std::erase(open_list, t); }
};

// ---------------------------------------------------------------------------
// Projects and the platform
// ---------------------------------------------------------------------------

/// Sequential tasks that make up one requester project.
struct Project {
  std::uint32_t id = 0;
  std::vector<TaskId> tasks;
  double duration = 0;       // pd: last submission day - first registration day
  double failure_ratio = 0;  // pf: failed / total
  std::vector<AgentId> participants;
};

/// Derives pd, pf and participants from the project's task runtimes.
inline Project summarize_project(std::uint32_t id, const std::vector<const TaskRuntime*>& tasks) {
  Project p;
  p.id = id;
  std::optional<double> first_reg, last_sub;
  std::size_t failed = 0;
  for (const TaskRuntime* t : tasks) {
    p.tasks.push_back(t->id());
    if (counts_as_failure(t->state())) ++failed;
    for (const auto& r : t->registrants()) {
      if (!first_reg || r.day < *first_reg) first_reg = r.day;
      if (std::find(p.participants.begin(), p.participants.end(), r.agent) == p.participants.end())
        p.participants.push_back(r.agent);
    }
    for (const auto& s : t->submissions())
      if (!last_sub || s.day > *last_sub) last_sub = s.day;
  }
  if (first_reg && last_sub) p.duration = std::max(0.0, *last_sub - *first_reg);
  p.failure_ratio = tasks.empty() ? 0.0 : static_cast<double>(failed) / static_cast<double>(tasks.size());
  return p;
}

/// Running platform counters. `failed` counts registered tasks that were
/// dropped or did not pass review; never-registered (starved) tasks are kept
/// apart so that completed + failed <= registered holds.
struct PlatformCounters {
  std::uint64_t registered = 0;  // R
  std::uint64_t submitted = 0;   // S
  std::uint64_t completed = 0;   // C
  std::uint64_t failed = 0;      // F
  std::uint64_t starved = 0;
  std::uint64_t dropped = 0;
  std::uint64_t review_failed = 0;

  std::uint64_t total_failures() const { return failed + starved; }
  bool operator==(const PlatformCounters&) const = default;
};

}  // namespace csdsim
