#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "csdsim/io.hpp"

using namespace csdsim;
using namespace std::chrono;

namespace {

const std::string kData = CSDSIM_TEST_DATA;

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Csv, SplitHandlesQuotes) {
  EXPECT_EQ(split_csv_line("a,b,,c"), (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(split_csv_line("\"x,y\",\"he said \"\"hi\"\"\",z"),
            (std::vector<std::string>{"x,y", "he said \"hi\"", "z"}));
  EXPECT_EQ(split_csv_line("a,b\r"), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_number(std::nullopt), "");
  EXPECT_EQ(csv_number(0.25), "0.25");
}

TEST(Dates, IsoRoundTrip) {
  const auto d = parse_iso_date("2014-02-28");
  ASSERT_TRUE(d);
  EXPECT_EQ(format_iso_date(*d), "2014-02-28");
  EXPECT_EQ(format_iso_date(*d + days{1}), "2014-03-01");
  EXPECT_FALSE(parse_iso_date("2014-02-30"));
  EXPECT_FALSE(parse_iso_date("2014/02/28"));
  EXPECT_FALSE(parse_iso_date("14-02-28"));
  EXPECT_FALSE(parse_iso_date("2014-1a-01"));
}

TEST(History, SchemaMismatchIsDataError) {
  EXPECT_THROW(ingest_history(kData + "/bad_schema_history.csv"), DataError);
  EXPECT_THROW(ingest_history(kData + "/does_not_exist.csv"), DataError);
}

TEST(History, RowErrorsCollectedWithLineNumbers) {
  const auto h = ingest_history(kData + "/bad_rows_history.csv");
  ASSERT_EQ(h.rows.size(), 2U);
  EXPECT_EQ(h.rows[0].task_id, "T1");
  EXPECT_EQ(h.rows[0].technology, (std::vector<std::string>{"java", "sql"}));
  EXPECT_EQ(h.rows[1].task_id, "T5");
  EXPECT_EQ(h.rows[1].technology, (std::vector<std::string>{"java", "python"}));
  EXPECT_EQ(h.rows[1].failure_phase, FailurePhase::Registration);
  EXPECT_FALSE(h.rows[1].similarity);
  ASSERT_EQ(h.errors.size(), 5U);
  const std::vector<std::size_t> lines = {3, 4, 5, 7, 8};
  for (std::size_t i = 0; i < lines.size(); ++i) EXPECT_EQ(h.errors[i].line, lines[i]);
  EXPECT_NE(h.errors[1].message.find("submissions exceed registrations"), std::string::npos);
}

TEST(History, FailedPhaseInference) {
  HistoryRow r;
  r.status = TaskStatus::Cancelled;
  r.registrations = 4;
  EXPECT_EQ(r.failed_in(), Phase::Registration);
  r.submissions = 1;
  EXPECT_EQ(r.failed_in(), Phase::Submission);
  r.failure_phase = FailurePhase::Registration;
  EXPECT_EQ(r.failed_in(), Phase::Registration);
}

TEST(History, ExportIngestRoundTrip) {
  const auto run = run_replication(RunConfig{}, 21);
  std::stringstream ss;
  const auto origin = sys_days{year{2014} / January / 1};
  write_history(ss, run, origin);
  const auto h = ingest_history(ss);
  EXPECT_TRUE(h.errors.empty());
  std::size_t terminal = 0, cancelled = 0;
  for (const auto& t : run.tasks) {
    terminal += is_terminal(t.state()) ? 1 : 0;
    cancelled += counts_as_failure(t.state()) ? 1 : 0;
  }
  ASSERT_EQ(h.rows.size(), terminal);
  std::size_t got_cancelled = 0;
  for (const auto& r : h.rows) got_cancelled += r.status == TaskStatus::Cancelled ? 1 : 0;
  EXPECT_EQ(got_cancelled, cancelled);

  // failures land on the day their window closes, split by phase
  std::vector<HistoricalRecord> oracle(60);
  for (const auto& t : run.tasks) {
    if (!counts_as_failure(t.state())) continue;
    const auto day = static_cast<std::size_t>(std::floor(t.spec().deadline()));
    if (day >= 60) continue;
    (t.state() == TaskState::Failed ? oracle[day].submission : oracle[day].registration) += 1;
  }
  const auto series = history_series(h.rows, 60);
  auto earliest = h.rows.front().posting_date;
  for (const auto& r : h.rows) earliest = std::min(earliest, r.posting_date);
  const auto shift = static_cast<std::size_t>((earliest - origin).count());
  for (std::size_t d = shift; d < 60; ++d) {
    EXPECT_DOUBLE_EQ(series[d - shift].registration, oracle[d].registration) << d;
    EXPECT_DOUBLE_EQ(series[d - shift].submission, oracle[d].submission) << d;
  }
}

TEST(EvaluationFixture, ReproducesOracleMre) {
  const auto s = load_evaluation_series(kData + "/evaluation_series.csv");
  ASSERT_EQ(s.registration.actual.size(), 30U);
  const auto e = evaluate(s);
  ASSERT_EQ(e.size(), 2U);
  for (const auto& [phase, expected] : {std::pair{Phase::Registration, 0.011}, std::pair{Phase::Submission, 0.020}}) {
    const auto& ps = s.of(phase);
    long double sa = 0, sp = 0;
    for (std::size_t i = 0; i < ps.actual.size(); ++i) {
      sa += ps.actual[i];
      sp += ps.predicted[i];
    }
    const double oracle = static_cast<double>((sa - sp) / sa);
    EXPECT_NEAR(oracle, expected, 1e-9);
    EXPECT_NEAR(*e[static_cast<std::size_t>(phase)].mre, oracle, 1e-9);
  }
}

TEST(EvaluationFixture, SchemaErrors) {
  std::istringstream bad("day,actual,predicted\n1,2,3\n");
  EXPECT_THROW(load_evaluation_series(bad), DataError);
  std::istringstream short_row("day,actual_registration,predicted_registration,actual_submission,predicted_submission\n1,2\n");
  EXPECT_THROW(load_evaluation_series(short_row), DataError);
  std::istringstream nan_row("day,actual_registration,predicted_registration,actual_submission,predicted_submission\n1,x,1,1,1\n");
  EXPECT_THROW(load_evaluation_series(nan_row), DataError);
}

TEST(Outputs, HeadersAndProvenance) {
  RunConfig cfg;
  cfg.seed = 99;
  const auto runs = run_replications(cfg, seed_range(cfg.seed, 2), {}, 1);
  const std::string prov = "# csdsim seed=99 config_hash=" + hex64(config_hash(cfg));
  const std::vector<std::pair<std::string, std::string>> files = {
      {platform_daily_csv(cfg, runs), "day,open_tasks,tcr,tfr,tsr,utilization,pool_openness,busy_agents,total_agents"},
      {task_predictions_csv(cfg, runs[0]), "task_id,day,phase,prediction"},
      {scenario_summary_csv(cfg, {summarize_platform("baseline", runs)}),
       "policy,fail,success,failure_rate,reg_pct_Gray,reg_pct_Green,reg_pct_Blue,reg_pct_Yellow,reg_pct_Red,"
       "sub_pct_Gray,sub_pct_Green,sub_pct_Blue,sub_pct_Yellow,sub_pct_Red"},
      {control_chart_csv(cfg, runs), "day,utilization,mean,lower,upper,out_of_control"},
      {evaluation_csv(cfg, evaluate(EvaluationSeries{})),
       "phase,n,actual_sum,predicted_sum,mre,t_statistic,t_p_value,pearson_r,pearson_p_value"},
  };
  for (const auto& [content, header] : files) {
    const auto l = lines_of(content);
    ASSERT_GE(l.size(), 2U);
    EXPECT_EQ(l[0], prov);
    EXPECT_EQ(l[1], header);
  }
  EXPECT_EQ(lines_of(platform_daily_csv(cfg, runs)).size(), 2U + 61U);
  EXPECT_EQ(lines_of(effective_config_text(cfg))[0], prov);
}

TEST(Outputs, PlatformDailyIsReplicationMean) {
  RunConfig cfg;
  const auto runs = run_replications(cfg, seed_range(7, 2), {}, 1);
  const auto l = lines_of(platform_daily_csv(cfg, runs));
  const auto f = split_csv_line(l[2 + 30]);
  EXPECT_EQ(f[0], "30");
  const double open = (static_cast<double>(runs[0].daily[30].open_tasks) + static_cast<double>(runs[1].daily[30].open_tasks)) / 2;
  EXPECT_DOUBLE_EQ(std::stod(f[1]), open);
  const double total = (static_cast<double>(runs[0].daily[30].total_agents) + static_cast<double>(runs[1].daily[30].total_agents)) / 2;
  EXPECT_DOUBLE_EQ(std::stod(f[8]), total);
}

TEST(Outputs, WriteOutputsCreatesDirectory) {
  const auto dir = std::filesystem::temp_directory_path() / "csdsim_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  write_outputs(dir, {{"a.txt", "hello\n"}});
  std::ifstream in(dir / "a.txt");
  std::string s;
  std::getline(in, s);
  EXPECT_EQ(s, "hello");
  std::filesystem::remove_all(dir.parent_path());
}

TEST(FpsCalibration, RecoversLinearRelation) {
  // closing-day groups whose failure share is exactly 0.2 * tsr + 0.1
  std::vector<HistoryRow> rows;
  const auto origin = sys_days{year{2015} / March / 1};
  int id = 0;
  for (int day = 0; day < 10; ++day) {
    const std::uint64_t regs = 10, subs = static_cast<std::uint64_t>(day);
    const double tsr = 1.0 - static_cast<double>(subs) / static_cast<double>(regs);
    const double share = 0.2 * tsr + 0.1;
    const int n = 100;
    const int failed = static_cast<int>(std::lround(share * n));
    for (int k = 0; k < n; ++k) {
      HistoryRow r;
      r.task_id = "T" + std::to_string(id++);
      r.posting_date = origin + days{day};
      r.duration_days = 0.5;
      r.registrations = regs;
      r.submissions = subs;
      r.status = k < failed ? TaskStatus::Cancelled : TaskStatus::Completed;
      rows.push_back(r);
    }
  }
  const auto pts = fps_calibration_points(rows, false);
  ASSERT_EQ(pts.size(), 10U);
  const auto fit = calibrate_fps(pts);
  ASSERT_TRUE(fit);
  EXPECT_NEAR(fit->slope, 0.2, 1e-9);
  EXPECT_NEAR(fit->intercept, 0.1, 1e-9);
  EXPECT_TRUE(fps_calibration_points({}, false).empty());
}
