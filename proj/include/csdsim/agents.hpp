#pragma once

#include <cmath>
#include <optional>
#include <string_view>

#include "csdsim/domain.hpp"
#include "csdsim/engine.hpp"

namespace csdsim {

/// Thresholds of the two-part agent decision procedure.
struct DecisionRules {
  double reg_threshold = 0.8;         // register when draw >= threshold
  std::size_t open_list_cap = 5;      // simultaneous open tasks per agent
  std::size_t competition_cap = 18;   // registrants before the crowded rule applies
  double crowded_bernoulli_p = 0.3;   // registration chance on a crowded task
  double sub_product_threshold = 0.051;
  double quality_pass = 75.0;
  bool superset_skills = false;
  std::size_t reliability_window = 15;

  static DecisionRules from(const RunConfig& c) {
    DecisionRules r;
    r.reg_threshold = c.reg_threshold;
    r.open_list_cap = static_cast<std::size_t>(c.open_list_cap);
    r.competition_cap = static_cast<std::size_t>(c.competition_cap);
    r.crowded_bernoulli_p = c.crowded_bernoulli_p;
    r.sub_product_threshold = c.sub_product_threshold;
    r.quality_pass = c.quality_pass;
    r.superset_skills = c.skill_match_superset != 0;
    r.reliability_window = static_cast<std::size_t>(c.reliability_window);
    return r;
  }
};

// ---------------------------------------------------------------------------
// Registration
// ---------------------------------------------------------------------------

enum class RegisterOutcome : std::uint8_t {
  Register,
  Decline,          // draw below threshold / crowded Bernoulli failed
  OpenListFull,
  SkillMismatch,
  ZeroRating,
  TaskClosed,
  AlreadyRegistered,
  BeltNotAdmitted,
};

inline std::string_view to_string(RegisterOutcome o) {
  switch (o) {
    case RegisterOutcome::Register: return "register";
    case RegisterOutcome::Decline: return "decline";
    case RegisterOutcome::OpenListFull: return "open-list-full";
    case RegisterOutcome::SkillMismatch: return "skill-mismatch";
    case RegisterOutcome::ZeroRating: return "zero-rating";
    case RegisterOutcome::TaskClosed: return "task-closed";
    case RegisterOutcome::AlreadyRegistered: return "already-registered";
    case RegisterOutcome::BeltNotAdmitted: return "belt-not-admitted";
  }
  return "?";
}

struct RegistrationDecisionContext {
  const Agent& agent;
  const TaskRuntime& task;
  std::size_t registrant_count;
  double draw;          // uniform [0,1), threshold test
  double crowded_draw;  // uniform [0,1), Bernoulli test once the task is crowded
};

/// Pure registration predicate. Eligibility failures come back as a decline
/// with the reason; the state change is applied by `apply_registration`.
inline RegisterOutcome decide_register(const RegistrationDecisionContext& ctx, const DecisionRules& rules) {
  if (!ctx.task.accepts_registrations()) return RegisterOutcome::TaskClosed;
  if (ctx.task.has_registrant(ctx.agent.id)) return RegisterOutcome::AlreadyRegistered;
  if (ctx.agent.open_list.size() >= rules.open_list_cap) return RegisterOutcome::OpenListFull;
  if (!(ctx.agent.rating > 0)) return RegisterOutcome::ZeroRating;
  if (!skills_match(ctx.agent.skills, ctx.task.spec().requirements, rules.superset_skills))
    return RegisterOutcome::SkillMismatch;
  if (!ctx.task.admitted.contains(ctx.agent.belt)) return RegisterOutcome::BeltNotAdmitted;
  if (ctx.registrant_count < rules.competition_cap)
    return ctx.draw >= rules.reg_threshold ? RegisterOutcome::Register : RegisterOutcome::Decline;
  return ctx.crowded_draw < rules.crowded_bernoulli_p ? RegisterOutcome::Register : RegisterOutcome::Decline;
}

inline void apply_registration(Agent& agent, TaskRuntime& task, double day, const DecisionRules& rules) {
  if (agent.open_list.size() >= rules.open_list_cap)
    throw ModelInvariantError("agent " + std::to_string(agent.id) + " open list over capacity");
  agent.open_list.push_back(task.id());
  ++agent.registrations;
  task.add_registrant(Registration{agent.id, agent.reliability, agent.belt, agent.rating, day});
}

// ---------------------------------------------------------------------------
// Submission
// ---------------------------------------------------------------------------

struct SubmissionDecisionContext {
  const Agent& agent;
  const TaskRuntime& task;
  double p_qualified;  // P(qualified Sub) of the agent's belt
  double draw;         // uniform [0,1)
};

/// Submit iff draw * P(qualified Sub) falls below the product threshold.
inline bool decide_submit(const SubmissionDecisionContext& ctx, const DecisionRules& rules) {
  if (!ctx.agent.holds(ctx.task.id()))
    throw ModelInvariantError("agent " + std::to_string(ctx.agent.id) + " deciding on task " +
                              std::to_string(ctx.task.id()) + " outside its open list");
  return ctx.draw * ctx.p_qualified < rules.sub_product_threshold;
}

/// Quality score in [0, 100).
inline double score_submission(RandomStream& quality) { return 100.0 * quality.uniform(); }

inline bool is_qualified(double score, double quality_pass = 75.0) { return score >= quality_pass; }

inline void apply_submission(Agent& agent, TaskRuntime& task, double day, double score) {
  task.add_submission(Submission{agent.id, day, score});
  agent.last_score = score;
  ++agent.submissions;
}

/// Highest qualified score wins; earliest submission breaks ties. Sets the
/// task score but leaves agent bookkeeping to the caller.
inline std::optional<AgentId> determine_winner(TaskRuntime& task, double quality_pass = 75.0) {
  std::optional<Submission> best;
  for (const auto& s : task.submissions()) {
    if (!task.task_score || s.score > *task.task_score) task.task_score = s.score;
    if (!is_qualified(s.score, quality_pass)) continue;
    if (!best || s.score > best->score || (s.score == best->score && s.day < best->day)) best = s;
  }
  task.winner = best ? std::optional<AgentId>(best->agent) : std::nullopt;
  return task.winner;
}

// ---------------------------------------------------------------------------
// Reliability
// ---------------------------------------------------------------------------

/// Shifts one registration outcome (qualified submission or not) into the
/// agent's window and recomputes reliability over the window.
inline void update_reliability(Agent& agent, bool qualified_submission, std::size_t window = 15) {
  agent.recent_window.push_back(qualified_submission);
  while (agent.recent_window.size() > window) agent.recent_window.pop_front();
  std::size_t hits = 0;
  for (const bool b : agent.recent_window) hits += b ? 1 : 0;
  agent.reliability = agent.recent_window.empty()
                          ? 0.0
                          : static_cast<double>(hits) / static_cast<double>(agent.recent_window.size());
}

}  // namespace csdsim
