#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "csdsim/config.hpp"
#include "csdsim/scenarios.hpp"

using namespace csdsim;

namespace {

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace

TEST(Config, DefaultsAreValid) { EXPECT_NO_THROW(validate(RunConfig{})); }

TEST(Config, ParsesKeyValueWithComments) {
  const auto c = parse("# header\nreplications = 5  # inline\n\n  seed=0x10\nreg_threshold = 0.75\n");
  EXPECT_EQ(c.replications, 5);
  EXPECT_EQ(c.seed, 16U);
  EXPECT_DOUBLE_EQ(c.reg_threshold, 0.75);
  EXPECT_DOUBLE_EQ(c.task_lambda, 87.0);
}

TEST(Config, RejectsUnknownKey) {
  try {
    parse("no_such_key = 3\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("no_such_key"), std::string::npos);
  }
}

TEST(Config, RejectsRangeAndTypeViolations) {
  EXPECT_THROW(parse("reg_threshold = 1.5\n"), ConfigError);
  EXPECT_THROW(parse("task_lambda = -1\n"), ConfigError);
  EXPECT_THROW(parse("replications = 2.5\n"), ConfigError);
  EXPECT_THROW(parse("replications = 0\n"), ConfigError);
  EXPECT_THROW(parse("open_list_cap = abc\n"), ConfigError);
  EXPECT_THROW(parse("seed = -3\n"), ConfigError);
  EXPECT_THROW(parse("seed = 12x\n"), ConfigError);
  EXPECT_THROW(parse("quality_pass = nan\n"), ConfigError);
  EXPECT_THROW(parse("just text\n"), ConfigError);
}

TEST(Config, RejectsCrossKeyViolations) {
  EXPECT_THROW(parse("similarity_low = 0.9\nsimilarity_high = 0.5\n"), ConfigError);
  EXPECT_THROW(parse("duration_mode = 40\n"), ConfigError);
  EXPECT_THROW(parse("belt_green_max = 800\n"), ConfigError);
  EXPECT_THROW(parse("task_skills_max = 7\n"), ConfigError);
}

TEST(Config, EchoRoundTripsExactly) {
  RunConfig c;
  c.seed = 987654321987ULL;
  c.reg_threshold = 0.1 + 0.2;
  c.task_lambda = 1.0 / 3.0;
  c.belt_red_p = 0.123456789012345678;
  c.interest_width = 0.07;
  const auto back = parse(echo_config(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(parse(echo_config(RunConfig{})), RunConfig{});
}

TEST(Config, HashTracksEveryKey) {
  std::set<std::uint64_t> hashes = {config_hash(RunConfig{})};
  for (const auto& k : config_keys()) {
    RunConfig c;
    if (k.kind == KeyKind::Seed) c.seed += 1;
    else c.*(k.field) = std::nextafter(c.*(k.field), HUGE_VAL);
    hashes.insert(config_hash(c));
  }
  EXPECT_EQ(hashes.size(), config_keys().size() + 1);
}

TEST(Config, RegistryCoversEveryField) {
  const auto& keys = config_keys();
  std::set<std::string_view> names;
  std::vector<double RunConfig::*> fields;
  for (const auto& k : keys) {
    EXPECT_TRUE(names.insert(k.name).second) << k.name;
    if (k.kind == KeyKind::Seed) continue;
    EXPECT_EQ(std::count(fields.begin(), fields.end(), k.field), 0) << k.name;
    fields.push_back(k.field);
  }
  // RunConfig holds only the seed plus one double per remaining key
  EXPECT_EQ(sizeof(RunConfig), sizeof(std::uint64_t) + (keys.size() - 1) * sizeof(double));
  std::istringstream echo(echo_config(RunConfig{}));
  std::set<std::string> echoed;
  std::string line;
  while (std::getline(echo, line)) echoed.insert(trim(line.substr(0, line.find('='))));
  EXPECT_EQ(echoed.size(), keys.size());
  for (const auto& k : keys) EXPECT_TRUE(echoed.count(std::string(k.name))) << k.name;
}

TEST(Config, ModuleDefaultsMatchConfigDefaults) {
  const RunConfig c;
  const DecisionRules d, f = DecisionRules::from(c);
  EXPECT_EQ(d.reg_threshold, f.reg_threshold);
  EXPECT_EQ(d.open_list_cap, f.open_list_cap);
  EXPECT_EQ(d.competition_cap, f.competition_cap);
  EXPECT_EQ(d.crowded_bernoulli_p, f.crowded_bernoulli_p);
  EXPECT_EQ(d.sub_product_threshold, f.sub_product_threshold);
  EXPECT_EQ(d.quality_pass, f.quality_pass);
  EXPECT_EQ(d.superset_skills, f.superset_skills);
  EXPECT_EQ(d.reliability_window, f.reliability_window);
  const DurationModel dm, dc = DurationModel::from(c);
  EXPECT_EQ(dm.min, dc.min);
  EXPECT_EQ(dm.mode, dc.mode);
  EXPECT_EQ(dm.max, dc.max);
  const ArrivalModel am, ac = ArrivalModel::from(c);
  EXPECT_EQ(am.task_lambda, ac.task_lambda);
  EXPECT_EQ(am.agent_gamma, ac.agent_gamma);
  EXPECT_EQ(am.per_day, ac.per_day);
  const ExperienceModel em, ec = ExperienceModel::from(c);
  EXPECT_EQ(em.alpha, ec.alpha);
  EXPECT_EQ(em.beta, ec.beta);
  EXPECT_EQ(em.max, ec.max);
  const SimilarityModel sm;
  EXPECT_EQ(sm.low, c.similarity_low);
  EXPECT_EQ(sm.high, c.similarity_high);
  EXPECT_EQ(compute_fps(0.5), compute_fps(0.5, c.fps_slope, c.fps_intercept));
  const FocalTask ft;
  const auto sc = ScenarioConfig::from(c, ScenarioKind::Openness);
  EXPECT_EQ(ft.arrival, sc.focal.arrival);
  EXPECT_EQ(ft.duration, sc.focal.duration);
  EXPECT_EQ(ft.similarity, sc.focal.similarity);
  EXPECT_EQ(sc.replications, static_cast<std::size_t>(c.replications));
  const EventQueue q;
  EXPECT_EQ(q.horizon(), c.horizon_days);
}

TEST(Config, PublishedConstants) {
  const RunConfig c;
  EXPECT_EQ(c.horizon_days, 60);
  EXPECT_EQ(c.task_lambda, 87);
  EXPECT_EQ(c.agent_gamma, 800);
  EXPECT_EQ(c.reg_threshold, 0.8);
  EXPECT_EQ(c.open_list_cap, 5);
  EXPECT_EQ(c.competition_cap, 18);
  EXPECT_EQ(c.crowded_bernoulli_p, 0.3);
  EXPECT_EQ(c.sub_rate_per_day, 0.51);
  EXPECT_EQ(c.sub_product_threshold, 0.051);
  EXPECT_EQ(c.quality_pass, 75);
  EXPECT_EQ(c.fps_slope, 0.0473);
  EXPECT_EQ(c.fps_intercept, 0.014);
  EXPECT_EQ(c.attraction_rate, 0.70);
  EXPECT_EQ(c.reliability_window, 15);
  EXPECT_EQ(c.similarity_low, 0.30);
  EXPECT_EQ(c.similarity_high, 0.98);
}

TEST(Config, LoadMissingFileIsConfigError) {
  EXPECT_THROW(load_config("/nonexistent/dir/x.cfg"), ConfigError);
  EXPECT_NO_THROW(load_config(std::string(CSDSIM_TEST_DATA) + "/small.cfg"));
  EXPECT_THROW(load_config(std::string(CSDSIM_TEST_DATA) + "/unknown_key.cfg"), ConfigError);
  EXPECT_THROW(load_config(std::string(CSDSIM_TEST_DATA) + "/out_of_range.cfg"), ConfigError);
}
