#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "csdsim/config.hpp"
#include "csdsim/error.hpp"
#include "csdsim/scenarios.hpp"
#include "csdsim/simulator.hpp"
#include "csdsim/stats.hpp"

namespace csdsim {

// ---------------------------------------------------------------------------
// CSV primitives
// ---------------------------------------------------------------------------

/// Splits one CSV line. Double-quoted fields may contain commas and "" escapes.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (const char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline std::string csv_number(std::optional<double> v) { return v ? format_double(*v) : std::string(); }

/// Provenance line stamped at the top of every output file.
inline std::string provenance_header(const RunConfig& cfg, std::string_view prefix = "# ") {
  return std::string(prefix) + "csdsim seed=" + std::to_string(cfg.seed) + " config_hash=" + hex64(config_hash(cfg)) +
         "\n";
}

// ---------------------------------------------------------------------------
// History ingestion
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& history_columns() {
  static const std::vector<std::string> cols = {"task_id",    "posting_date",  "duration_days", "award_usd",
                                                "task_type",  "technology",    "similarity",    "registrations",
                                                "submissions", "status",       "failure_phase"};
  return cols;
}

enum class FailurePhase : std::uint8_t { Registration, Submission, Review };

inline std::string_view to_string(FailurePhase p) {
  switch (p) {
    case FailurePhase::Registration: return "registration";
    case FailurePhase::Submission: return "submission";
    case FailurePhase::Review: return "review";
  }
  return "?";
}

struct HistoryRow {
  std::string task_id;
  std::chrono::sys_days posting_date;
  double duration_days = 0;
  double award_usd = 0;
  std::string task_type;
  std::vector<std::string> technology;
  std::optional<double> similarity;
  std::uint64_t registrations = 0;
  std::uint64_t submissions = 0;
  TaskStatus status = TaskStatus::Completed;
  std::optional<FailurePhase> failure_phase;

  /// Phase a cancelled task failed in; inferred from counts when not recorded.
  Phase failed_in() const {
    if (failure_phase) return *failure_phase == FailurePhase::Registration ? Phase::Registration : Phase::Submission;
    return submissions == 0 ? Phase::Registration : Phase::Submission;
  }
};

struct RowError {
  std::size_t line;
  std::string message;
};

struct HistoryIngest {
  std::vector<HistoryRow> rows;
  std::vector<RowError> errors;
};

inline std::optional<std::chrono::sys_days> parse_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
  y = std::stoi(std::string(s.substr(0, 4)));
  m = static_cast<unsigned>(std::stoi(std::string(s.substr(5, 2))));
  d = static_cast<unsigned>(std::stoi(std::string(s.substr(8, 2))));
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd};
}

inline std::string format_iso_date(std::chrono::sys_days d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

namespace detail {

inline double parse_real(const std::string& s, const char* what) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string(what) + ": not a number '" + s + "'");
  }
  if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": not a number '" + s + "'");
  return v;
}

inline std::uint64_t parse_count(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument(std::string(what) + ": not a non-negative integer '" + s + "'");
  return std::stoull(s);
}

}  // namespace detail

/// Parses one data row; throws std::invalid_argument describing the first violation.
inline HistoryRow parse_history_row(const std::vector<std::string>& f) {
  if (f.size() != history_columns().size())
    throw std::invalid_argument("expected " + std::to_string(history_columns().size()) + " fields, got " +
                                std::to_string(f.size()));
  HistoryRow r;
  r.task_id = trim(f[0]);
  if (r.task_id.empty()) throw std::invalid_argument("task_id: empty");
  const auto date = parse_iso_date(trim(f[1]));
  if (!date) throw std::invalid_argument("posting_date: not an ISO-8601 date '" + f[1] + "'");
  r.posting_date = *date;
  r.duration_days = detail::parse_real(trim(f[2]), "duration_days");
  if (r.duration_days <= 0) throw std::invalid_argument("duration_days: must be positive");
  r.award_usd = detail::parse_real(trim(f[3]), "award_usd");
  if (r.award_usd < 0) throw std::invalid_argument("award_usd: must be non-negative");
  r.task_type = trim(f[4]);
  std::string tech = trim(f[5]);
  for (std::size_t b = 0; !tech.empty();) {
    const auto e = tech.find(';', b);
    const std::string tag = trim(std::string_view(tech).substr(b, e == std::string::npos ? std::string::npos : e - b));
    if (!tag.empty()) r.technology.push_back(tag);
    if (e == std::string::npos) break;
    b = e + 1;
  }
  if (const std::string s = trim(f[6]); !s.empty()) {
    r.similarity = detail::parse_real(s, "similarity");
    if (*r.similarity < 0 || *r.similarity > 1) throw std::invalid_argument("similarity: outside [0, 1]");
  }
  r.registrations = detail::parse_count(trim(f[7]), "registrations");
  r.submissions = detail::parse_count(trim(f[8]), "submissions");
  if (r.submissions > r.registrations) throw std::invalid_argument("submissions exceed registrations");
  const std::string status = trim(f[9]);
  if (status == "completed") r.status = TaskStatus::Completed;
  else if (status == "cancelled") r.status = TaskStatus::Cancelled;
  else throw std::invalid_argument("status: expected completed or cancelled, got '" + status + "'");
  if (const std::string s = trim(f[10]); !s.empty()) {
    if (s == "registration") r.failure_phase = FailurePhase::Registration;
    else if (s == "submission") r.failure_phase = FailurePhase::Submission;
    else if (s == "review") r.failure_phase = FailurePhase::Review;
    else throw std::invalid_argument("failure_phase: unknown value '" + s + "'");
    if (r.status == TaskStatus::Completed) throw std::invalid_argument("failure_phase set on a completed task");
  }
  return r;
}

/// Reads a history CSV. A header that does not match the schema is fatal
/// (DataError); bad rows are collected with their line numbers.
inline HistoryIngest ingest_history(std::istream& in, const std::string& origin = "<history>") {
  HistoryIngest out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty() || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (!header) {
      for (auto& f : fields) f = trim(f);
      if (fields != history_columns()) {
        std::string want;
        for (const auto& c : history_columns()) want += (want.empty() ? "" : ",") + c;
        throw DataError(origin + ":" + std::to_string(lineno) + ": header does not match schema; expected " + want);
      }
      header = true;
      continue;
    }
    try {
      out.rows.push_back(parse_history_row(fields));
    } catch (const std::invalid_argument& e) {
      out.errors.push_back({lineno, e.what()});
    }
  }
  return out;
}

inline HistoryIngest ingest_history(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open history file '" + path + "'");
  return ingest_history(in, path);
}

/// Actual failures per day and phase, indexed from the earliest posting date.
/// A cancelled task is counted on the day its window closes.
inline std::vector<HistoricalRecord> history_series(const std::vector<HistoryRow>& rows, std::size_t window) {
  std::vector<HistoricalRecord> out(window);
  for (std::size_t d = 0; d < window; ++d) out[d].day = static_cast<int>(d);
  if (rows.empty()) return out;
  auto origin = rows.front().posting_date;
  for (const auto& r : rows) origin = std::min(origin, r.posting_date);
  for (const auto& r : rows) {
    if (r.status != TaskStatus::Cancelled) continue;
    const double close = static_cast<double>((r.posting_date - origin).count()) + r.duration_days;
    const auto day = static_cast<std::size_t>(std::floor(close));
    if (day >= window) continue;
    (r.failed_in() == Phase::Registration ? out[day].registration : out[day].submission) += 1;
  }
  return out;
}

/// Tag names used when exporting simulated tasks as history rows.
inline std::string skill_tag(int bit) {
  static const std::array<const char*, 8> names = {"java", "javascript", "python", "dotnet",
                                                   "sql",  "html",       "ios",    "android"};
  return bit < static_cast<int>(names.size()) ? names[static_cast<std::size_t>(bit)] : "tag" + std::to_string(bit);
}

/// Writes the resolved tasks of one replication in the history schema, so a
/// simulated platform can stand in for the unpublished real dataset.
inline void write_history(std::ostream& os, const ReplicationResult& run, std::chrono::sys_days origin) {
  os << "task_id,posting_date,duration_days,award_usd,task_type,technology,similarity,registrations,submissions,"
        "status,failure_phase\n";
  for (const auto& t : run.tasks) {
    if (!is_terminal(t.state())) continue;
    const auto& s = t.spec();
    // the posting day is floored, so shift the duration to keep the closing day exact
    const auto posted = static_cast<int>(std::floor(s.arrival));
    std::string tech;
    for (int b = 0; b < 32; ++b)
      if (s.requirements.bits & (1U << b)) tech += (tech.empty() ? "" : ";") + skill_tag(b);
    std::string phase;
    if (t.state() == TaskState::Starved || t.state() == TaskState::Dropped) phase = "registration";
    else if (t.state() == TaskState::Failed) phase = "review";
    os << "T" << s.id << ',' << format_iso_date(origin + std::chrono::days{posted}) << ','
       << format_double(s.deadline() - posted) << ',' << format_double(std::round(s.award)) << ',' << s.task_type << ','
       << tech << ',' << format_double(s.similarity) << ',' << t.registrants().size() << ','
       << t.submissions().size() << ',' << (t.state() == TaskState::Completed ? "completed" : "cancelled") << ','
       << phase << '\n';
  }
}

// ---------------------------------------------------------------------------
// Actual-vs-predicted series
// ---------------------------------------------------------------------------

struct PhaseSeries {
  std::vector<double> actual;
  std::vector<double> predicted;
};

struct EvaluationSeries {
  PhaseSeries registration;
  PhaseSeries submission;
  const PhaseSeries& of(Phase p) const { return p == Phase::Registration ? registration : submission; }
};

/// Reads `day,actual_registration,predicted_registration,actual_submission,predicted_submission`.
inline EvaluationSeries load_evaluation_series(std::istream& in, const std::string& origin = "<series>") {
  static const std::vector<std::string> cols = {"day", "actual_registration", "predicted_registration",
                                                "actual_submission", "predicted_submission"};
  EvaluationSeries s;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line[0] == '#') continue;
    auto f = split_csv_line(line);
    for (auto& x : f) x = trim(x);
    if (!header) {
      if (f != cols) throw DataError(origin + ":" + std::to_string(lineno) + ": header does not match series schema");
      header = true;
      continue;
    }
    if (f.size() != cols.size()) throw DataError(origin + ":" + std::to_string(lineno) + ": wrong field count");
    try {
      s.registration.actual.push_back(detail::parse_real(f[1], "actual_registration"));
      s.registration.predicted.push_back(detail::parse_real(f[2], "predicted_registration"));
      s.submission.actual.push_back(detail::parse_real(f[3], "actual_submission"));
      s.submission.predicted.push_back(detail::parse_real(f[4], "predicted_submission"));
    } catch (const std::invalid_argument& e) {
      throw DataError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return s;
}

inline EvaluationSeries load_evaluation_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open series file '" + path + "'");
  return load_evaluation_series(in, path);
}

inline EvaluationSeries align_series(const std::vector<HistoricalRecord>& actual,
                                     const std::vector<HistoricalRecord>& predicted) {
  EvaluationSeries s;
  const std::size_t n = std::min(actual.size(), predicted.size());
  for (std::size_t d = 0; d < n; ++d) {
    s.registration.actual.push_back(actual[d].registration);
    s.registration.predicted.push_back(predicted[d].registration);
    s.submission.actual.push_back(actual[d].submission);
    s.submission.predicted.push_back(predicted[d].submission);
  }
  return s;
}

inline std::vector<PhaseEvaluation> evaluate(const EvaluationSeries& s) {
  return {evaluate_phase(Phase::Registration, s.registration.actual, s.registration.predicted),
          evaluate_phase(Phase::Submission, s.submission.actual, s.submission.predicted)};
}

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

struct OutputFile {
  std::string name;
  std::string content;
};

/// Mean of the daily platform metrics across replications; a cell is empty
/// when the metric is undefined in every replication on that day.
inline std::string platform_daily_csv(const RunConfig& cfg, const std::vector<ReplicationResult>& runs) {
  std::ostringstream os;
  os << provenance_header(cfg);
  os << "day,open_tasks,tcr,tfr,tsr,utilization,pool_openness,busy_agents,total_agents\n";
  std::size_t days = 0;
  for (const auto& r : runs) days = std::max(days, r.daily.size());
  for (std::size_t d = 0; d < days; ++d) {
    double open = 0, busy = 0, total = 0;
    std::array<double, 5> sum{};
    std::array<std::size_t, 5> n{};
    std::size_t k = 0;
    for (const auto& r : runs) {
      if (d >= r.daily.size()) continue;
      const auto& m = r.daily[d];
      ++k;
      open += static_cast<double>(m.open_tasks);
      busy += static_cast<double>(m.busy_agents);
      total += static_cast<double>(m.total_agents);
      const std::array<std::optional<double>, 5> v = {m.tcr, m.tfr, m.tsr, m.utilization, m.pool_openness};
      for (std::size_t i = 0; i < 5; ++i)
        if (v[i]) {
          sum[i] += *v[i];
          ++n[i];
        }
    }
    const double kk = static_cast<double>(k);
    os << d << ',' << format_double(open / kk);
    for (std::size_t i = 0; i < 5; ++i)
      os << ',' << csv_number(n[i] ? std::optional<double>(sum[i] / static_cast<double>(n[i])) : std::nullopt);
    os << ',' << format_double(busy / kk) << ',' << format_double(total / kk) << '\n';
  }
  return os.str();
}

/// Predictor histories of one replication's tasks, in event order per task.
inline std::string task_predictions_csv(const RunConfig& cfg, const ReplicationResult& run) {
  std::ostringstream os;
  os << provenance_header(cfg);
  os << "task_id,day,phase,prediction\n";
  for (const auto& t : run.tasks) {
    for (const auto* hist : {&t.fpr_history(), &t.fps_history()})
      for (const auto& p : *hist)
        os << t.id() << ',' << format_double(p.day) << ',' << to_string(p.phase) << ',' << format_double(p.value)
           << '\n';
  }
  return os.str();
}

inline std::string scenario_summary_csv(const RunConfig& cfg, const std::vector<ReplicationSummary>& rows) {
  std::ostringstream os;
  os << provenance_header(cfg);
  os << "policy,fail,success,failure_rate";
  for (const Belt b : kAllBelts) os << ",reg_pct_" << to_string(b);
  for (const Belt b : kAllBelts) os << ",sub_pct_" << to_string(b);
  os << '\n';
  for (const auto& r : rows) {
    os << csv_field(r.policy) << ',' << r.fail << ',' << r.success << ',' << format_double(r.failure_rate);
    for (const double v : r.registration_share) os << ',' << format_double(100.0 * v);
    for (const double v : r.submission_share) os << ',' << format_double(100.0 * v);
    os << '\n';
  }
  return os.str();
}

/// Mean daily utilization across replications against mean +- k sigma bands.
inline std::string control_chart_csv(const RunConfig& cfg, const std::vector<ReplicationResult>& runs) {
  std::vector<std::size_t> day_of;
  std::vector<double> series;
  std::size_t days = 0;
  for (const auto& r : runs) days = std::max(days, r.daily.size());
  for (std::size_t d = 0; d < days; ++d) {
    double sum = 0;
    std::size_t n = 0;
    for (const auto& r : runs)
      if (d < r.daily.size() && r.daily[d].utilization) {
        sum += *r.daily[d].utilization;
        ++n;
      }
    // days with no agents yet carry no utilization and are skipped
    if (n == 0) continue;
    day_of.push_back(d);
    series.push_back(sum / static_cast<double>(n));
  }
  std::ostringstream os;
  os << provenance_header(cfg);
  os << "day,utilization,mean,lower,upper,out_of_control\n";
  const auto chart = control_chart(series, cfg.control_sigma);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const bool out = series[i] < chart->lower || series[i] > chart->upper;
    os << day_of[i] << ',' << format_double(series[i]) << ',' << format_double(chart->mean) << ','
       << format_double(chart->lower) << ',' << format_double(chart->upper) << ',' << (out ? 1 : 0) << '\n';
  }
  return os.str();
}

inline std::string evaluation_csv(const RunConfig& cfg, const std::vector<PhaseEvaluation>& rows) {
  std::ostringstream os;
  os << provenance_header(cfg);
  os << "phase,n,actual_sum,predicted_sum,mre,t_statistic,t_p_value,pearson_r,pearson_p_value\n";
  for (const auto& e : rows) {
    os << to_string(e.phase) << ',' << e.n << ',' << format_double(e.actual_sum) << ','
       << format_double(e.predicted_sum) << ',' << csv_number(e.mre) << ','
       << csv_number(e.t ? std::optional<double>(e.t->statistic) : std::nullopt) << ','
       << csv_number(e.t ? std::optional<double>(e.t->p_value) : std::nullopt) << ','
       << csv_number(e.pearson ? std::optional<double>(e.pearson->statistic) : std::nullopt) << ','
       << csv_number(e.pearson ? std::optional<double>(e.pearson->p_value) : std::nullopt) << '\n';
  }
  return os.str();
}

inline std::string effective_config_text(const RunConfig& cfg) { return provenance_header(cfg) + echo_config(cfg); }

/// Writes every file into `dir`, creating it if needed. IO failures surface
/// as std::runtime_error naming the path.
inline void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  for (const auto& f : files) {
    const auto path = dir / f.name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << f.content;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
  }
}

// ---------------------------------------------------------------------------
// FPS calibration
// ---------------------------------------------------------------------------

struct CalibrationPoint {
  int day;
  double tsr;           // 1 - submissions / registrations over tasks closing that day
  double failure_ratio;  // share of those tasks that failed after registration
};

/// One point per closing day with at least one registered task.
inline std::vector<CalibrationPoint> fps_calibration_points(const std::vector<HistoryRow>& rows, bool invert_tsr) {
  std::vector<CalibrationPoint> pts;
  if (rows.empty()) return pts;
  auto origin = rows.front().posting_date;
  for (const auto& r : rows) origin = std::min(origin, r.posting_date);
  std::map<int, std::array<double, 4>> by_day;  // registrations, submissions, tasks, failures
  for (const auto& r : rows) {
    if (r.registrations == 0) continue;
    const int day = static_cast<int>(
        std::floor(static_cast<double>((r.posting_date - origin).count()) + r.duration_days));
    auto& a = by_day[day];
    a[0] += static_cast<double>(r.registrations);
    a[1] += static_cast<double>(r.submissions);
    a[2] += 1;
    a[3] += r.status == TaskStatus::Cancelled ? 1 : 0;
  }
  for (const auto& [day, a] : by_day) {
    const auto tsr = compute_tsr(static_cast<std::uint64_t>(a[1]), static_cast<std::uint64_t>(a[0]), invert_tsr);
    pts.push_back({day, *tsr, a[3] / a[2]});
  }
  return pts;
}

inline std::optional<LinearFit> calibrate_fps(const std::vector<CalibrationPoint>& pts) {
  std::vector<double> x, y;
  for (const auto& p : pts) {
    x.push_back(p.tsr);
    y.push_back(p.failure_ratio);
  }
  return fit_linear(x, y);
}

}  // namespace csdsim
