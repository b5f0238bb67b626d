#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <thread>
#include <vector>

#include "csdsim/agents.hpp"
#include "csdsim/config.hpp"
#include "csdsim/domain.hpp"
#include "csdsim/engine.hpp"
#include "csdsim/lifecycle.hpp"
#include "csdsim/platform.hpp"

namespace csdsim {

/// A task injected at a fixed day and tracked separately, e.g. the task whose
/// posting policy is under study.
struct FocalTask {
  double arrival = 10.0;
  double duration = 20.0;
  double similarity = 0.75;
  BeltSet admitted = BeltSet::all();
};

/// Per-replication variations on the base configuration.
struct RunSetup {
  std::optional<double> pool_similarity;  // centre of the background similarity band
  std::optional<FocalTask> focal;
};

struct DailyMetrics {
  int day = 0;
  std::size_t open_tasks = 0;
  std::optional<double> tcr;
  std::optional<double> tfr;
  std::optional<double> tsr;
  std::optional<double> utilization;
  std::optional<double> pool_openness;
  std::size_t busy_agents = 0;
  std::size_t total_agents = 0;
  std::size_t mid_belt_agents = 0;
  PlatformCounters counters;
};

struct ReplicationResult {
  std::uint64_t seed = 0;
  std::uint64_t trace_hash = 0;
  std::uint64_t events = 0;
  std::vector<DailyMetrics> daily;
  std::vector<TaskRuntime> tasks;
  std::vector<Agent> agents;
  PlatformCounters counters;
  std::optional<TaskId> focal;
  std::size_t max_open_list = 0;
  std::uint64_t registration_attempts = 0;
  std::uint64_t submission_attempts = 0;

  const TaskRuntime* focal_task() const { return focal ? &tasks[*focal] : nullptr; }

  std::size_t in_flight() const {
    return static_cast<std::size_t>(std::count_if(tasks.begin(), tasks.end(), [](const TaskRuntime& t) {
      return !is_terminal(t.state());
    }));
  }
};

/// Interest of an agent in a task ("the agent is registering"): a Gaussian
/// bump around the belt's preferred task similarity.
inline double registration_interest(double task_similarity, double preferred, double width, double peak = 1.0) {
  const double z = (task_similarity - preferred) / width;
  return peak * std::exp(-0.5 * z * z);
}

/// Willingness to work on a registered task ("the agent is submitting"): an
/// estimate of the chance of winning. It falls off as (typical / registrants)
/// to the power `aversion` once the task is busier than the typical
/// competition level, and with the number of higher-rated registrants.
inline double submission_willingness(std::size_t registrants, std::size_t higher_ranked, double typical,
                                     double aversion, double rank) {
  const double crowd = registrants > typical ? std::pow(typical / static_cast<double>(registrants), aversion) : 1.0;
  return crowd / (1.0 + rank * static_cast<double>(higher_ranked));
}

/// One replication: clock from 0 to the horizon over the hybrid platform,
/// lifecycle and agent model. Single-threaded and deterministic in (config,
/// setup, seed).
class Simulation {
 public:
  Simulation(const RunConfig& cfg, RunSetup setup, std::uint64_t seed)
      : cfg_(cfg),
        setup_(std::move(setup)),
        rng_(seed),
        queue_(cfg.horizon_days),
        belts_(cfg),
        rules_(DecisionRules::from(cfg)),
        durations_(DurationModel::from(cfg)),
        experience_(ExperienceModel::from(cfg)),
        reg_process_(cfg.reg_rate_per_day, Stream::Registration),
        sub_process_(cfg.sub_rate_per_day, Stream::Submission) {
    result_.seed = seed;
  }

  ReplicationResult run() {
    prime();
    while (!queue_.empty()) {
      const EventRecord ev = queue_.pop();
      trace_.add(ev);
      dispatch(ev);
    }
    result_.trace_hash = trace_.value();
    result_.events = trace_.count();
    result_.tasks = std::move(tasks_);
    result_.agents = std::move(agents_);
    result_.counters = counters_;
    return std::move(result_);
  }

 private:
  // -- setup ---------------------------------------------------------------

  void prime() {
    const double horizon = cfg_.horizon_days;
    const auto arrivals = ArrivalModel::from(cfg_);
    for (const double day : ArrivalModel::arrival_days(rng_[Stream::TaskArrival], arrivals.task_lambda, horizon,
                                                       arrivals.per_day)) {
      TaskSpec spec = draw_task(day);
      queue_.schedule(day, EventKind::TaskArrival, add_task(std::move(spec)));
    }
    if (setup_.focal && setup_.focal->arrival <= horizon) {
      TaskSpec spec = draw_task(setup_.focal->arrival);
      spec.duration = setup_.focal->duration;
      spec.similarity = setup_.focal->similarity;
      const TaskId id = add_task(std::move(spec));
      tasks_[id].focal = true;
      tasks_[id].admitted = setup_.focal->admitted;
      result_.focal = id;
      queue_.schedule(setup_.focal->arrival, EventKind::TaskArrival, id);
    }
    const auto agent_days =
        ArrivalModel::arrival_days(rng_[Stream::AgentArrival], arrivals.agent_gamma, horizon, arrivals.per_day);
    agents_.reserve(agent_days.size());
    for (std::size_t i = 0; i < agent_days.size(); ++i)
      queue_.schedule(agent_days[i], EventKind::AgentArrival, i);
    for (int d = 0; d <= static_cast<int>(std::floor(horizon)); ++d)
      queue_.schedule(static_cast<double>(d), EventKind::DailySample, static_cast<std::uint64_t>(d));
  }

  TaskSpec draw_task(double day) {
    TaskSpec s;
    s.arrival = day;
    s.duration = durations_.sample(rng_[Stream::Duration]);
    if (setup_.pool_similarity) {
      const double c = *setup_.pool_similarity;
      s.similarity = std::clamp(rng_[Stream::Similarity].uniform(c - cfg_.gate_spread, c + cfg_.gate_spread), 0.0, 1.0);
    } else {
      s.similarity = SimilarityModel{cfg_.similarity_low, cfg_.similarity_high}.sample(rng_[Stream::Similarity]);
    }
    s.award = rng_[Stream::Award].uniform(cfg_.award_low, cfg_.award_high);
    s.requirements = sample_skills(rng_[Stream::Skills], static_cast<int>(cfg_.skill_vocabulary_size),
                                   static_cast<int>(cfg_.task_skills_max));
    return s;
  }

  TaskId add_task(TaskSpec spec) {
    const auto id = static_cast<TaskId>(tasks_.size());
    spec.id = id;
    tasks_.emplace_back(std::move(spec));
    return id;
  }

  // -- dispatch ------------------------------------------------------------

  void dispatch(const EventRecord& ev) {
    switch (ev.kind) {
      case EventKind::TaskArrival: on_task_arrival(static_cast<TaskId>(ev.subject)); break;
      case EventKind::AgentArrival: on_agent_arrival(); break;
      case EventKind::RegistrationAttempt: on_registration_attempt(static_cast<AgentId>(ev.subject)); break;
      case EventKind::SubmissionAttempt: on_submission_attempt(static_cast<AgentId>(ev.subject)); break;
      case EventKind::Deadline: on_deadline(static_cast<TaskId>(ev.subject)); break;
      case EventKind::Review: on_review(static_cast<TaskId>(ev.subject)); break;
      case EventKind::DailySample: on_daily_sample(static_cast<int>(ev.subject)); break;
    }
  }

  void on_task_arrival(TaskId id) {
    TaskRuntime& t = tasks_[id];
    const double u = rng_[Stream::Attraction].uniform();
    t.attractable = t.focal || u < cfg_.attraction_rate;
    open_.push_back(id);
    queue_.schedule(t.spec().deadline(), EventKind::Deadline, id);
  }

  void on_agent_arrival() {
    const auto id = static_cast<AgentId>(agents_.size());
    agents_.push_back(spawn_agent(id, queue_.now(), rng_[Stream::Experience], rng_[Stream::Skills], experience_,
                                  belts_, static_cast<int>(cfg_.skill_vocabulary_size),
                                  static_cast<int>(cfg_.agent_skills_max)));
    queue_.schedule(queue_.now() + reg_process_.next_gap(rng_), EventKind::RegistrationAttempt, id);
    queue_.schedule(queue_.now() + sub_process_.next_gap(rng_), EventKind::SubmissionAttempt, id);
  }

  /// One registration event: the agent walks the open pool in random order
  /// and decides on each task until its open list is full.
  void on_registration_attempt(AgentId id) {
    ++result_.registration_attempts;
    Agent& a = agents_[id];
    queue_.schedule(queue_.now() + reg_process_.next_gap(rng_), EventKind::RegistrationAttempt, id);
    if (open_.empty() || a.open_list.size() >= rules_.open_list_cap) return;
    order_.assign(open_.begin(), open_.end());
    rng_[Stream::Selection].shuffle(order_);
    RandomStream& reg = rng_[Stream::Registration];
    for (const TaskId tid : order_) {
      if (a.open_list.size() >= rules_.open_list_cap) break;
      TaskRuntime& t = tasks_[tid];
      if (!t.attractable) continue;
      const double interest_draw = reg.uniform();
      const double draw = reg.uniform();
      const double crowded_draw = reg.uniform();
      const double interest =
          registration_interest(t.spec().similarity, belts_.preferred_similarity(a.belt), cfg_.interest_width,
                                belts_.interest_peak(a.belt));
      if (!(interest_draw < interest)) continue;
      if (decide_register({a, t, t.registrants().size(), draw, crowded_draw}, rules_) != RegisterOutcome::Register)
        continue;
      const bool first = t.state() == TaskState::Arrived;
      apply_registration(a, t, queue_.now(), rules_);
      result_.max_open_list = std::max(result_.max_open_list, a.open_list.size());
      if (first) ++counters_.registered;
      if (t.state() == TaskState::Registered) record_fpr(t);
    }
  }

  /// One submission event: the agent considers every task it holds.
  void on_submission_attempt(AgentId id) {
    ++result_.submission_attempts;
    Agent& a = agents_[id];
    queue_.schedule(queue_.now() + sub_process_.next_gap(rng_), EventKind::SubmissionAttempt, id);
    if (a.open_list.empty()) return;
    RandomStream& sub = rng_[Stream::Submission];
    const std::vector<TaskId> held = a.open_list;
    for (const TaskId tid : held) {
      TaskRuntime& t = tasks_[tid];
      const double willing_draw = sub.uniform();
      const double draw = sub.uniform();
      if (queue_.now() > t.spec().deadline())
        throw ModelInvariantError("submission attempt after deadline on task " + std::to_string(t.id()));
      if (queue_.now() < t.spec().arrival + cfg_.work_fraction * t.spec().duration) continue;
      std::size_t higher = 0;
      for (const auto& r : t.registrants()) higher += r.rating > a.rating ? 1 : 0;
      const double willing = submission_willingness(t.registrants().size(), higher, cfg_.competition_cap,
                                                    cfg_.crowd_aversion, cfg_.rank_discouragement);
      if (!(willing_draw < willing)) continue;
      if (!decide_submit({a, t, belts_.qualified_submission_probability(a.belt), draw}, rules_)) continue;

      const bool first = t.submissions().empty();
      const double score = score_submission(rng_[Stream::Quality]);
      apply_submission(a, t, queue_.now(), score);
      if (first) ++counters_.submitted;
      a.release(t.id());
      update_reliability(a, is_qualified(score, cfg_.quality_pass), rules_.reliability_window);
      record_fps(t);
    }
  }

  void on_deadline(TaskId id) {
    TaskRuntime& t = tasks_[id];
    std::erase(open_, id);
    for (const auto& r : t.registrants()) {
      Agent& a = agents_[r.agent];
      if (a.holds(id)) {
        a.release(id);
        update_reliability(a, false, rules_.reliability_window);
      }
    }
    switch (t.state()) {
      case TaskState::Arrived:
        t.transition(TaskState::Starved);
        ++counters_.starved;
        resolve(t);
        break;
      case TaskState::Registered:
        t.transition(TaskState::Dropped);
        ++counters_.failed;
        ++counters_.dropped;
        resolve(t);
        break;
      case TaskState::Submitted:
        t.transition(TaskState::PeerReview);
        queue_.schedule(queue_.now(), EventKind::Review, id);
        break;
      default:
        throw ModelInvariantError("deadline for task " + std::to_string(id) + " in state " +
                                  std::string(to_string(t.state())));
    }
  }

  void on_review(TaskId id) {
    TaskRuntime& t = tasks_[id];
    if (const auto w = determine_winner(t, cfg_.quality_pass)) ++agents_[*w].wins;
    if (peer_review(t, cfg_.quality_pass) == TaskState::Completed) {
      ++counters_.completed;
    } else {
      ++counters_.failed;
      ++counters_.review_failed;
    }
    resolve(t);
  }

  /// Bookkeeping once a task reaches a terminal state: repost failures.
  void resolve(TaskRuntime& t) {
    t.resolved_day = queue_.now();
    if (t.focal || cfg_.repost_failed == 0 || !counts_as_failure(t.state())) return;
    if (t.spec().repost_count >= static_cast<std::uint32_t>(cfg_.max_reposts)) return;
    const auto next_id = static_cast<TaskId>(tasks_.size());
    TaskSpec next = repost(t, queue_.now(), next_id);
    // add_task may reallocate tasks_, so `t` must not be touched afterwards
    add_task(std::move(next));
    queue_.schedule(queue_.now(), EventKind::TaskArrival, next_id);
  }

  void on_daily_sample(int day) {
    DailyMetrics m;
    m.day = day;
    m.open_tasks = open_.size();
    m.counters = counters_;
    m.tcr = compute_tcr(counters_);
    m.tfr = compute_tfr(counters_);
    m.tsr = compute_tsr(counters_, cfg_.invert_tsr != 0);
    for (const auto& a : agents_) {
      m.busy_agents += a.open_list.empty() ? 0 : 1;
      m.mid_belt_agents += (a.belt == Belt::Green || a.belt == Belt::Blue) ? 1 : 0;
    }
    m.total_agents = agents_.size();
    m.utilization = compute_utilization(m.busy_agents, m.total_agents);
    std::vector<double> sims;
    sims.reserve(open_.size());
    for (const TaskId id : open_) sims.push_back(tasks_[id].spec().similarity);
    m.pool_openness = pool_openness(sims);
    result_.daily.push_back(m);
    for (const TaskId id : open_) {
      TaskRuntime& t = tasks_[id];
      if (t.state() == TaskState::Registered) record_fpr(t);
      else if (t.state() == TaskState::Submitted) record_fps(t);
    }
  }

  // -- predictors ----------------------------------------------------------

  void record_fpr(TaskRuntime& t) {
    std::vector<RegistrantWeight> w;
    w.reserve(t.registrants().size());
    for (const auto& r : t.registrants()) w.push_back({r.reliability, belts_.qualified_submission_probability(r.belt)});
    if (const auto fpr = compute_fpr(w)) t.record_prediction({Phase::Registration, fpr->value, queue_.now()});
  }

  void record_fps(TaskRuntime& t) {
    if (const auto tsr = compute_tsr(counters_, cfg_.invert_tsr != 0))
      t.record_prediction({Phase::Submission, compute_fps(*tsr, cfg_.fps_slope, cfg_.fps_intercept), queue_.now()});
  }

  RunConfig cfg_;
  RunSetup setup_;
  RngStreams rng_;
  EventQueue queue_;
  BeltTable belts_;
  DecisionRules rules_;
  DurationModel durations_;
  ExperienceModel experience_;
  RateProcess reg_process_;
  RateProcess sub_process_;
  TraceHash trace_;

  std::vector<TaskRuntime> tasks_;
  std::vector<Agent> agents_;
  std::vector<TaskId> open_;
  std::vector<TaskId> order_;
  PlatformCounters counters_;
  ReplicationResult result_;
};

inline ReplicationResult run_replication(const RunConfig& cfg, std::uint64_t seed, const RunSetup& setup = {}) {
  validate(cfg);
  return Simulation(cfg, setup, seed).run();
}

/// Runs one replication per seed. Replications share only the immutable
/// config and are fanned out over `threads` workers; results keep seed order.
inline std::vector<ReplicationResult> run_replications(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                                       const RunSetup& setup = {}, unsigned threads = 0) {
  validate(cfg);
  std::vector<ReplicationResult> out(seeds.size());
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, seeds.size())));
  if (threads <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) out[i] = Simulation(cfg, setup, seeds[i]).run();
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < seeds.size(); i += threads) out[i] = Simulation(cfg, setup, seeds[i]).run();
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Seeds base, base+1, ... used for paired replications across policies.
inline std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = base + i;
  return s;
}

}  // namespace csdsim
