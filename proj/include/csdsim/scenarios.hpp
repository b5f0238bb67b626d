#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "csdsim/simulator.hpp"
#include "csdsim/stats.hpp"

namespace csdsim {

enum class ScenarioKind : std::uint8_t { Baseline, Openness, Diversity };

inline std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Baseline: return "baseline";
    case ScenarioKind::Openness: return "openness";
    case ScenarioKind::Diversity: return "diversity";
  }
  return "?";
}

/// One policy under test.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Baseline;
  std::optional<double> openness_gate;  // target pool mean similarity
  BeltSet belts = BeltSet::all();       // belts admitted to the focal task
  std::size_t replications = 30;
  std::uint64_t seed_base = 1;
  FocalTask focal;
  unsigned threads = 1;

  static ScenarioConfig from(const RunConfig& c, ScenarioKind kind) {
    ScenarioConfig s;
    s.kind = kind;
    s.replications = static_cast<std::size_t>(c.replications);
    s.seed_base = c.seed;
    s.focal.arrival = c.focal_arrival_day;
    s.focal.duration = c.focal_duration_days;
    s.focal.similarity = c.focal_similarity;
    return s;
  }
};

inline constexpr std::array<double, 4> kOpennessGates = {0.60, 0.70, 0.80, 0.90};

/// Aggregated outcome of one policy over its replications.
struct ReplicationSummary {
  std::string policy;
  std::size_t replications = 0;
  std::size_t fail = 0;
  std::size_t success = 0;
  std::size_t in_flight = 0;
  std::size_t zero_submission = 0;  // failed without any submission (starved or dropped)
  std::size_t unqualified = 0;      // failed review
  double failure_rate = 0;          // fail / replications
  double mean_registrations = 0;
  double mean_submissions = 0;
  std::array<double, 5> registration_share{};  // by belt, over all replications
  std::array<double, 5> submission_share{};
  std::vector<double> mean_prediction;  // by day since posting, mean latest prediction
  double mean_final_prediction = 0;
  double pool_openness_at_posting = 0;
  double mid_belt_availability_at_posting = 0;
};

/// Summarises the focal task across replications.
inline ReplicationSummary summarize_focal(const std::string& policy, const std::vector<ReplicationResult>& runs,
                                         const FocalTask& focal) {
  ReplicationSummary s;
  s.policy = policy;
  s.replications = runs.size();
  std::array<double, 5> reg{}, sub{};
  double reg_total = 0, sub_total = 0;
  const auto days = static_cast<std::size_t>(std::ceil(focal.duration)) + 1;
  std::vector<double> pred_sum(days, 0.0);
  std::vector<std::size_t> pred_n(days, 0);
  double final_sum = 0;
  std::size_t final_n = 0, posting_n = 0;
  for (const auto& run : runs) {
    const TaskRuntime* t = run.focal_task();
    if (t == nullptr) continue;
    if (t->state() == TaskState::Completed) ++s.success;
    else if (counts_as_failure(t->state())) ++s.fail;
    else ++s.in_flight;
    if (t->state() == TaskState::Starved || t->state() == TaskState::Dropped) ++s.zero_submission;
    if (t->state() == TaskState::Failed) ++s.unqualified;
    s.mean_registrations += static_cast<double>(t->registrants().size());
    s.mean_submissions += static_cast<double>(t->submissions().size());
    for (const auto& r : t->registrants()) {
      reg[static_cast<std::size_t>(r.belt)] += 1;
      reg_total += 1;
    }
    for (const auto& sm : t->submissions()) {
      sub[static_cast<std::size_t>(run.agents[sm.agent].belt)] += 1;
      sub_total += 1;
    }
    // merge both phases into one latest-value trajectory
    std::vector<FailurePrediction> all(t->fpr_history());
    all.insert(all.end(), t->fps_history().begin(), t->fps_history().end());
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.day < b.day; });
    std::size_t k = 0;
    std::optional<double> latest;
    for (std::size_t d = 0; d < days; ++d) {
      const double until = t->spec().arrival + static_cast<double>(d);
      while (k < all.size() && all[k].day <= until) latest = all[k++].value;
      if (latest) {
        pred_sum[d] += *latest;
        ++pred_n[d];
      }
    }
    if (!all.empty()) {
      final_sum += all.back().value;
      ++final_n;
    }
    const auto day = static_cast<std::size_t>(std::floor(t->spec().arrival));
    if (day < run.daily.size()) {
      const auto& m = run.daily[day];
      s.pool_openness_at_posting += m.pool_openness.value_or(0.0);
      s.mid_belt_availability_at_posting +=
          m.total_agents ? static_cast<double>(m.mid_belt_agents) / static_cast<double>(m.total_agents) : 0.0;
      ++posting_n;
    }
  }
  const double n = std::max<double>(1.0, static_cast<double>(runs.size()));
  s.failure_rate = static_cast<double>(s.fail) / n;
  s.mean_registrations /= n;
  s.mean_submissions /= n;
  for (std::size_t b = 0; b < 5; ++b) {
    s.registration_share[b] = reg_total > 0 ? reg[b] / reg_total : 0.0;
    s.submission_share[b] = sub_total > 0 ? sub[b] / sub_total : 0.0;
  }
  s.mean_prediction.resize(days);
  for (std::size_t d = 0; d < days; ++d) s.mean_prediction[d] = pred_n[d] ? pred_sum[d] / static_cast<double>(pred_n[d]) : 0.0;
  s.mean_final_prediction = final_n ? final_sum / static_cast<double>(final_n) : 0.0;
  if (posting_n) {
    s.pool_openness_at_posting /= static_cast<double>(posting_n);
    s.mid_belt_availability_at_posting /= static_cast<double>(posting_n);
  }
  return s;
}

inline std::string openness_label(double gate) {
  return "similarity-" + std::to_string(static_cast<int>(std::lround(gate * 100)));
}

/// Focal task posted into a pool whose background similarity is centred on
/// `gate`; the focal task carries the same similarity.
inline ReplicationSummary run_openness_scenario(double gate, const RunConfig& cfg, ScenarioConfig sc) {
  const bool allowed = std::any_of(kOpennessGates.begin(), kOpennessGates.end(),
                                   [gate](double g) { return std::fabs(g - gate) < 1e-9; });
  if (!allowed) throw std::invalid_argument("openness gate must be one of 0.60, 0.70, 0.80, 0.90");
  sc.kind = ScenarioKind::Openness;
  sc.openness_gate = gate;
  RunSetup setup;
  setup.pool_similarity = gate;
  setup.focal = sc.focal;
  setup.focal->similarity = gate;
  setup.focal->admitted = BeltSet::all();
  const auto runs = run_replications(cfg, seed_range(sc.seed_base, sc.replications), setup, sc.threads);
  return summarize_focal(openness_label(gate), runs, *setup.focal);
}

/// Focal task open only to the admitted belts; pool left at its default law.
inline ReplicationSummary run_diversity_scenario(BeltSet belts, const RunConfig& cfg, ScenarioConfig sc) {
  if (belts.empty()) throw std::invalid_argument("diversity scenario needs at least one admitted belt");
  sc.kind = ScenarioKind::Diversity;
  sc.belts = belts;
  RunSetup setup;
  setup.focal = sc.focal;
  setup.focal->admitted = belts;
  const auto runs = run_replications(cfg, seed_range(sc.seed_base, sc.replications), setup, sc.threads);
  return summarize_focal(belts.label(), runs, *setup.focal);
}

/// The four published diversity policies, strictest first.
inline std::vector<BeltSet> diversity_policies() {
  return {BeltSet{Belt::Yellow, Belt::Red}, BeltSet{Belt::Blue, Belt::Yellow, Belt::Red},
          BeltSet{Belt::Green, Belt::Blue, Belt::Yellow, Belt::Red}, BeltSet::all()};
}

struct WhatIfRow {
  double day;
  double pool_openness;          // mean over replications at the posting day
  double mid_belt_availability;  // Green+Blue share of present agents at the posting day
  double predicted_failure;      // focal failure rate with this posting day
  ReplicationSummary summary;
};

/// Reruns the focal task with its posting day moved to each candidate.
inline std::vector<WhatIfRow> what_if_posting_day(const FocalTask& focal, const std::vector<double>& candidate_days,
                                                  const RunConfig& cfg, const ScenarioConfig& sc) {
  std::vector<WhatIfRow> rows;
  for (const double day : candidate_days) {
    if (day < 0 || day + focal.duration > cfg.horizon_days)
      throw std::invalid_argument("candidate posting day " + std::to_string(day) + " leaves the task past the horizon");
    RunSetup setup;
    setup.focal = focal;
    setup.focal->arrival = day;
    setup.pool_similarity = sc.openness_gate;
    const auto runs = run_replications(cfg, seed_range(sc.seed_base, sc.replications), setup, sc.threads);
    auto summary = summarize_focal("day-" + format_double(day), runs, *setup.focal);
    rows.push_back({day, summary.pool_openness_at_posting, summary.mid_belt_availability_at_posting,
                    summary.failure_rate, std::move(summary)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Platform baseline
// ---------------------------------------------------------------------------

/// Outcome mix over every resolved task of a set of replications.
struct BaselineSummary {
  std::size_t resolved = 0;
  std::size_t success = 0;
  std::size_t unqualified = 0;      // reached review, no qualified submission
  std::size_t zero_submission = 0;  // starved or dropped
  std::size_t starved = 0;
  std::size_t in_flight = 0;        // still open at the horizon, excluded from the rates

  double rate(std::size_t k) const { return resolved ? static_cast<double>(k) / static_cast<double>(resolved) : 0.0; }
  double success_rate() const { return rate(success); }
  double unqualified_rate() const { return rate(unqualified); }
  double zero_submission_rate() const { return rate(zero_submission); }
  double failure_rate() const { return rate(resolved - success); }
};

inline BaselineSummary summarize_baseline(const std::vector<ReplicationResult>& runs) {
  BaselineSummary b;
  for (const auto& run : runs)
    for (const auto& t : run.tasks) {
      switch (t.state()) {
        case TaskState::Completed: ++b.success; break;
        case TaskState::Failed: ++b.unqualified; break;
        case TaskState::Starved: ++b.starved; [[fallthrough]];
        case TaskState::Dropped: ++b.zero_submission; break;
        default: ++b.in_flight; continue;
      }
      ++b.resolved;
    }
  return b;
}

/// Platform-wide analogue of a policy row: every task of every replication.
inline ReplicationSummary summarize_platform(const std::string& policy, const std::vector<ReplicationResult>& runs) {
  ReplicationSummary s;
  s.policy = policy;
  s.replications = runs.size();
  std::array<double, 5> reg{}, sub{};
  double reg_total = 0, sub_total = 0;
  std::size_t tasks = 0;
  for (const auto& run : runs)
    for (const auto& t : run.tasks) {
      ++tasks;
      if (t.state() == TaskState::Completed) ++s.success;
      else if (counts_as_failure(t.state())) ++s.fail;
      else ++s.in_flight;
      if (t.state() == TaskState::Starved || t.state() == TaskState::Dropped) ++s.zero_submission;
      if (t.state() == TaskState::Failed) ++s.unqualified;
      s.mean_registrations += static_cast<double>(t.registrants().size());
      s.mean_submissions += static_cast<double>(t.submissions().size());
      for (const auto& r : t.registrants()) {
        reg[static_cast<std::size_t>(r.belt)] += 1;
        reg_total += 1;
      }
      for (const auto& sm : t.submissions()) {
        sub[static_cast<std::size_t>(run.agents[sm.agent].belt)] += 1;
        sub_total += 1;
      }
    }
  const double resolved = static_cast<double>(s.fail + s.success);
  s.failure_rate = resolved > 0 ? static_cast<double>(s.fail) / resolved : 0.0;
  if (tasks) {
    s.mean_registrations /= static_cast<double>(tasks);
    s.mean_submissions /= static_cast<double>(tasks);
  }
  for (std::size_t b = 0; b < 5; ++b) {
    s.registration_share[b] = reg_total > 0 ? reg[b] / reg_total : 0.0;
    s.submission_share[b] = sub_total > 0 ? sub[b] / sub_total : 0.0;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Evaluation against historical failures
// ---------------------------------------------------------------------------

/// Failed-task counts on one day, split by the phase the failure belongs to.
struct HistoricalRecord {
  int day = 0;
  double registration = 0;  // starved or dropped (no submission)
  double submission = 0;    // submitted but failed review
};

/// Mean simulated failures per day and phase across replications, days 0..days-1.
inline std::vector<HistoricalRecord> simulated_failure_series(const std::vector<ReplicationResult>& runs,
                                                              std::size_t days) {
  std::vector<HistoricalRecord> out(days);
  for (std::size_t d = 0; d < days; ++d) out[d].day = static_cast<int>(d);
  if (runs.empty()) return out;
  for (const auto& run : runs) {
    PlatformCounters prev;
    for (std::size_t d = 0; d < days && d + 1 < run.daily.size(); ++d) {
      // failures resolved during [d, d+1) show up in the next sample
      const PlatformCounters& next = run.daily[d + 1].counters;
      if (d == 0) prev = run.daily[0].counters;
      out[d].registration += static_cast<double>((next.starved + next.dropped) - (prev.starved + prev.dropped));
      out[d].submission += static_cast<double>(next.review_failed - prev.review_failed);
      prev = next;
    }
  }
  for (auto& r : out) {
    r.registration /= static_cast<double>(runs.size());
    r.submission /= static_cast<double>(runs.size());
  }
  return out;
}

struct PhaseEvaluation {
  Phase phase = Phase::Registration;
  std::size_t n = 0;
  double actual_sum = 0;
  double predicted_sum = 0;
  std::optional<double> mre;
  std::optional<TestResult> t;        // per-day errors (actual - predicted) against zero
  std::optional<TestResult> pearson;  // actual vs predicted
};

inline PhaseEvaluation evaluate_phase(Phase phase, std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw std::invalid_argument("evaluate_phase: series lengths differ");
  PhaseEvaluation e;
  e.phase = phase;
  e.n = actual.size();
  std::vector<double> err(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) {
    e.actual_sum += actual[i];
    e.predicted_sum += predicted[i];
    err[i] = actual[i] - predicted[i];
  }
  e.mre = mre(actual, predicted);
  e.t = t_test(err, 0.0);
  e.pearson = pearson(actual, predicted);
  return e;
}

}  // namespace csdsim
