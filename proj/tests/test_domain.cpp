#include <gtest/gtest.h>

#include <limits>

#include "csdsim/domain.hpp"
#include "csdsim/engine.hpp"
#include "csdsim/platform.hpp"

using namespace csdsim;

TEST(BeltTable, BoundariesBelongToLowerBelt) {
  const BeltTable t;
  EXPECT_EQ(t.belt_of(0), Belt::Gray);
  EXPECT_EQ(t.belt_of(900), Belt::Gray);
  EXPECT_EQ(t.belt_of(900.0001), Belt::Green);
  EXPECT_EQ(t.belt_of(1200), Belt::Green);
  EXPECT_EQ(t.belt_of(1200.5), Belt::Blue);
  EXPECT_EQ(t.belt_of(1500), Belt::Blue);
  EXPECT_EQ(t.belt_of(1501), Belt::Yellow);
  EXPECT_EQ(t.belt_of(2200), Belt::Yellow);
  EXPECT_EQ(t.belt_of(2200.01), Belt::Red);
  EXPECT_EQ(t.belt_of(3000), Belt::Red);
  EXPECT_THROW(t.belt_of(-1), std::invalid_argument);
  EXPECT_THROW(t.belt_of(std::nan("")), std::invalid_argument);
}

TEST(BeltTable, PartitionPropertyOverExperienceSamples) {
  const BeltTable t;
  const std::array<double, 6> edges = {-std::numeric_limits<double>::infinity(), 900, 1200, 1500, 2200,
                                       std::numeric_limits<double>::infinity()};
  RandomStream r(77);
  const ExperienceModel m;
  for (int i = 0; i < 10000; ++i) {
    const double rating = m.sample(r);
    int owners = 0;
    std::size_t owner = 0;
    for (std::size_t b = 0; b < 5; ++b)
      if (rating > edges[b] && rating <= edges[b + 1]) {
        ++owners;
        owner = b;
      }
    ASSERT_EQ(owners, 1) << rating;
    ASSERT_EQ(static_cast<std::size_t>(t.belt_of(rating)), owner) << rating;
  }
}

TEST(BeltTable, PublishedValues) {
  const BeltTable t;
  EXPECT_DOUBLE_EQ(t.qualified_submission_probability(Belt::Gray), 0.25);
  EXPECT_DOUBLE_EQ(t.qualified_submission_probability(Belt::Green), 0.45);
  EXPECT_DOUBLE_EQ(t.qualified_submission_probability(Belt::Blue), 0.39);
  EXPECT_DOUBLE_EQ(t.qualified_submission_probability(Belt::Yellow), 0.6);
  EXPECT_DOUBLE_EQ(t.qualified_submission_probability(Belt::Red), 0.6);
  EXPECT_DOUBLE_EQ(t.row(Belt::Gray).population_share, 0.9002);
  EXPECT_DOUBLE_EQ(t.row(Belt::Red).population_share, 0.0016);
  double total = 0;
  for (const Belt b : kAllBelts) total += t.normalized_share(b);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(BeltSet, MembershipAndLabels) {
  BeltSet s{Belt::Yellow, Belt::Red};
  EXPECT_TRUE(s.contains(Belt::Red));
  EXPECT_FALSE(s.contains(Belt::Gray));
  EXPECT_EQ(s.label(), "Yellow+Red");
  EXPECT_EQ(BeltSet::all().label(), "Gray+Green+Blue+Yellow+Red");
  EXPECT_EQ(BeltSet{}.label(), "none");
  EXPECT_TRUE(BeltSet{}.empty());
  s.insert(Belt::Blue);
  EXPECT_EQ(s.label(), "Blue+Yellow+Red");
}

TEST(BeltSet, ParseBeltCaseInsensitive) {
  EXPECT_EQ(parse_belt("gray"), Belt::Gray);
  EXPECT_EQ(parse_belt("YELLOW"), Belt::Yellow);
  EXPECT_EQ(parse_belt("Red"), Belt::Red);
  EXPECT_FALSE(parse_belt("purple"));
  EXPECT_FALSE(parse_belt(""));
}

TEST(Skills, MatchPredicates) {
  const SkillSet agent{0b0110};
  EXPECT_TRUE(skills_match(agent, SkillSet{0b0010}, false));
  EXPECT_TRUE(skills_match(agent, SkillSet{0b0011}, false));
  EXPECT_FALSE(skills_match(agent, SkillSet{0b0011}, true));
  EXPECT_TRUE(skills_match(agent, SkillSet{0b0110}, true));
  EXPECT_FALSE(skills_match(agent, SkillSet{0b1001}, false));
  EXPECT_EQ(agent.count(), 2);
}

TEST(TaskState, TransitionTableMatchesStateChart) {
  using S = TaskState;
  const std::vector<std::pair<S, S>> edges = {
      {S::Arrived, S::Registered}, {S::Arrived, S::Starved},     {S::Registered, S::Submitted},
      {S::Registered, S::Dropped}, {S::Submitted, S::PeerReview}, {S::PeerReview, S::Completed},
      {S::PeerReview, S::Failed}};
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) {
      const auto from = static_cast<S>(a), to = static_cast<S>(b);
      const bool listed = std::find(edges.begin(), edges.end(), std::pair{from, to}) != edges.end();
      EXPECT_EQ(is_legal_transition(from, to), listed) << to_string(from) << " -> " << to_string(to);
    }
}

TEST(TaskState, FailureClassification) {
  EXPECT_TRUE(counts_as_failure(TaskState::Starved));
  EXPECT_TRUE(counts_as_failure(TaskState::Dropped));
  EXPECT_TRUE(counts_as_failure(TaskState::Failed));
  EXPECT_FALSE(counts_as_failure(TaskState::Completed));
  EXPECT_FALSE(counts_as_failure(TaskState::Submitted));
  for (const auto s : {TaskState::Completed, TaskState::Failed, TaskState::Starved, TaskState::Dropped})
    EXPECT_TRUE(is_terminal(s));
}

TEST(TaskRuntime, LifecycleAndGuards) {
  TaskSpec spec;
  spec.id = 4;
  spec.arrival = 2;
  spec.duration = 10;
  TaskRuntime t(spec);
  EXPECT_DOUBLE_EQ(t.spec().deadline(), 12.0);
  EXPECT_TRUE(t.accepts_registrations());
  EXPECT_THROW(t.add_submission({1, 3.0, 80}), ModelInvariantError);
  EXPECT_THROW(t.record_prediction({Phase::Registration, 0.1, 2.0}), ModelInvariantError);
  t.add_registrant({1, 0.5, Belt::Gray, 400, 2.5});
  EXPECT_EQ(t.state(), TaskState::Registered);
  EXPECT_THROW(t.add_registrant({1, 0.5, Belt::Gray, 400, 2.6}), ModelInvariantError);
  EXPECT_THROW(t.record_prediction({Phase::Submission, 0.1, 2.6}), ModelInvariantError);
  t.record_prediction({Phase::Registration, 0.1, 2.6});
  t.add_registrant({2, 0.2, Belt::Blue, 1300, 2.7});
  EXPECT_EQ(t.last_registrant_rating(), 1300);
  t.add_submission({2, 4.0, 60});
  EXPECT_EQ(t.state(), TaskState::Submitted);
  EXPECT_THROW(t.add_submission({2, 4.5, 61}), ModelInvariantError);
  EXPECT_THROW(t.record_prediction({Phase::Registration, 0.1, 4.1}), ModelInvariantError);
  EXPECT_TRUE(t.accepts_registrations());
  t.add_submission({1, 5.0, 90});
  EXPECT_EQ(t.best_score(), 90);
  EXPECT_THROW(t.transition(TaskState::Completed), ModelInvariantError);
  t.transition(TaskState::PeerReview);
  EXPECT_FALSE(t.accepts_registrations());
  t.transition(TaskState::Completed);
  EXPECT_EQ(t.spec().status, TaskStatus::Completed);
  EXPECT_THROW(t.transition(TaskState::Failed), ModelInvariantError);
}

TEST(Agent, OpenListHelpers) {
  Agent a;
  a.open_list = {3, 5, 8};
  EXPECT_TRUE(a.holds(5));
  a.release(5);
  EXPECT_FALSE(a.holds(5));
  EXPECT_EQ(a.open_list.size(), 2U);
  a.joined_day = 4;
  EXPECT_DOUBLE_EQ(a.tenure(10), 6);
}

TEST(Project, Summary) {
  TaskSpec s1;
  s1.id = 0;
  TaskSpec s2;
  s2.id = 1;
  TaskRuntime a(s1), b(s2);
  a.add_registrant({7, 0, Belt::Gray, 100, 1.0});
  a.add_registrant({8, 0, Belt::Gray, 100, 2.0});
  a.add_submission({7, 6.0, 80});
  a.transition(TaskState::PeerReview);
  a.transition(TaskState::Completed);
  b.add_registrant({7, 0, Belt::Gray, 100, 3.0});
  b.transition(TaskState::Dropped);
  const auto p = summarize_project(3, {&a, &b});
  EXPECT_EQ(p.id, 3U);
  EXPECT_DOUBLE_EQ(p.duration, 5.0);
  EXPECT_DOUBLE_EQ(p.failure_ratio, 0.5);
  EXPECT_EQ(p.participants.size(), 2U);
  EXPECT_EQ(p.tasks.size(), 2U);
}

// Every attribute of the task, agent and project tuples is a field of one type.
TEST(Domain, TupleSymbolsAreFields) {
  TaskSpec t;
  t.id = 1;                        // id
  t.arrival = 0;                   // arr
  t.duration = 1;                  // d
  t.award = 1;                     // aw
  t.requirements = SkillSet{1};    // req
  t.task_type = "development";     // type
  t.technology = {"java"};         // tech
  t.status = TaskStatus::Completed;  // status
  Agent a;
  a.id = 1;              // AID
  a.reliability = 0;     // Re
  a.rating = 0;          // Ra
  a.skills = {};         // SK
  a.last_score = 1.0;    // So
  a.wins = 0;            // Wi
  a.location = "x";      // L
  a.joined_day = 0;      // MA
  Project p;
  p.duration = 0;        // pd
  p.failure_ratio = 0;   // pf
  SUCCEED();
}
