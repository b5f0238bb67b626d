// csdsim command-line front end.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>

#include "csdsim/io.hpp"

namespace {

using namespace csdsim;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

constexpr const char* kConfigEnv = "CSDSIM_CONFIG";

struct Common {
  std::string config_path;
  std::string out_dir = "out";
  unsigned threads = 0;
  std::map<std::string, std::string> overrides;  // key -> text, from --<key> flags
};

RunConfig effective_config(const Common& c) {
  RunConfig cfg;
  std::string path = c.config_path;
  if (path.empty())
    if (const char* env = std::getenv(kConfigEnv)) path = env;
  if (!path.empty()) cfg = load_config(path);
  for (const auto& [key, value] : c.overrides) set_config_value(cfg, key, value);
  validate(cfg);
  return cfg;
}

std::string pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << 100.0 * v << '%';
  return os.str();
}

std::string report_header(const RunConfig& cfg, std::string_view title) {
  std::ostringstream os;
  os << title << "\n" << std::string(title.size(), '=') << "\n";
  os << "master seed:  " << cfg.seed << "\n";
  os << "config hash:  " << hex64(config_hash(cfg)) << "\n";
  os << "replications: " << static_cast<std::size_t>(cfg.replications) << " x " << cfg.horizon_days << " days\n\n";
  return os.str();
}

std::vector<ReplicationResult> run_baseline(const RunConfig& cfg, unsigned threads) {
  return run_replications(cfg, seed_range(cfg.seed, static_cast<std::size_t>(cfg.replications)), {}, threads);
}

std::string baseline_report(const RunConfig& cfg, const std::vector<ReplicationResult>& runs,
                            const std::vector<PhaseEvaluation>& eval) {
  std::ostringstream os;
  os << report_header(cfg, "csdsim baseline run");
  const auto b = summarize_baseline(runs);
  os << "Task outcomes over " << b.resolved << " resolved tasks (" << b.in_flight << " still open at the horizon)\n";
  os << "  success          " << pct(b.success_rate()) << "   (reference 71%)\n";
  os << "  unqualified      " << pct(b.unqualified_rate()) << "   (reference 19%)\n";
  os << "  zero submission  " << pct(b.zero_submission_rate()) << "   (reference 7%; starved "
     << pct(b.rate(b.starved)) << ")\n";
  os << "  failure          " << pct(b.failure_rate()) << "\n\n";

  std::vector<double> util;
  double reliability = 0;
  std::size_t agents = 0, submitters = 0;
  double registrants = 0;
  std::size_t registered_tasks = 0;
  for (const auto& r : runs) {
    for (const auto& d : r.daily)
      if (d.utilization) util.push_back(*d.utilization);
    for (const auto& a : r.agents) {
      ++agents;
      if (a.submissions > 0) {
        reliability += a.reliability;
        ++submitters;
      }
    }
    for (const auto& t : r.tasks)
      if (!t.registrants().empty()) {
        registrants += static_cast<double>(t.registrants().size());
        ++registered_tasks;
      }
  }
  if (const auto chart = control_chart(util, cfg.control_sigma)) {
    os << "Utilization mean " << pct(chart->mean) << ", sd " << std::setprecision(3) << chart->sigma
       << "   (reference 43%, sd 0.15)\n";
  }
  os << "Mean registrants per registered task " << std::setprecision(3)
     << (registered_tasks ? registrants / static_cast<double>(registered_tasks) : 0.0) << "   (reference 18)\n";
  os << "Mean reliability of submitting agents "
     << pct(submitters ? reliability / static_cast<double>(submitters) : 0.0) << " over " << submitters << " of "
     << agents << " agents   (reference 10%)\n\n";

  PlatformCounters total;
  for (const auto& r : runs) {
    total.registered += r.counters.registered;
    total.submitted += r.counters.submitted;
    total.completed += r.counters.completed;
    total.failed += r.counters.failed;
    total.starved += r.counters.starved;
  }
  os << "Counters summed over replications: R=" << total.registered << " S=" << total.submitted
     << " C=" << total.completed << " F=" << total.failed << " starved=" << total.starved << "\n";
  if (const auto tcr = compute_tcr(total)) os << "TCR " << pct(*tcr) << ", TFR " << pct(1 - *tcr) << "\n";
  if (!eval.empty()) {
    os << "\nEvaluation against history\n";
    for (const auto& e : eval) {
      os << "  " << to_string(e.phase) << ": n=" << e.n;
      if (e.mre) os << " MRE=" << format_double(*e.mre);
      if (e.t) os << " t=" << format_double(e.t->statistic) << " p=" << format_double(e.t->p_value);
      if (e.pearson) os << " r=" << format_double(e.pearson->statistic) << " p=" << format_double(e.pearson->p_value);
      os << "\n";
    }
  }
  return os.str();
}

std::vector<PhaseEvaluation> evaluate_history(const RunConfig& cfg, const std::vector<ReplicationResult>& runs,
                                              const std::string& history_path) {
  const auto ingest = ingest_history(history_path);
  for (const auto& e : ingest.errors) std::cerr << history_path << ":" << e.line << ": " << e.message << "\n";
  const auto window = static_cast<std::size_t>(std::floor(cfg.horizon_days));
  return evaluate(align_series(history_series(ingest.rows, window), simulated_failure_series(runs, window)));
}

int cmd_run(const Common& c, const std::string& history, const std::string& export_history) {
  const RunConfig cfg = effective_config(c);
  const auto runs = run_baseline(cfg, c.threads);
  std::vector<PhaseEvaluation> eval;
  if (!history.empty()) eval = evaluate_history(cfg, runs, history);
  else eval = evaluate(EvaluationSeries{});
  std::vector<OutputFile> files = {
      {"platform_daily.csv", platform_daily_csv(cfg, runs)},
      {"task_predictions.csv", task_predictions_csv(cfg, runs.front())},
      {"scenario_summary.csv", scenario_summary_csv(cfg, {summarize_platform("baseline", runs)})},
      {"utilization_control_chart.csv", control_chart_csv(cfg, runs)},
      {"evaluation.csv", evaluation_csv(cfg, eval)},
      {"run_report.txt", provenance_header(cfg) + baseline_report(cfg, runs, history.empty() ? decltype(eval){} : eval)},
      {"effective_config.txt", effective_config_text(cfg)},
  };
  if (!export_history.empty()) {
    std::ostringstream os;
    os << provenance_header(cfg);
    write_history(os, runs.front(), std::chrono::sys_days{std::chrono::year{2018} / 4 / 1});
    files.push_back({export_history, os.str()});
  }
  write_outputs(c.out_dir, files);
  std::cout << files[5].content.substr(files[5].content.find('\n') + 1);
  return kExitOk;
}

std::string trajectories_csv(const RunConfig& cfg, const std::vector<ReplicationSummary>& rows) {
  std::ostringstream os;
  os << provenance_header(cfg);
  os << "policy,day_since_posting,mean_prediction\n";
  for (const auto& r : rows)
    for (std::size_t d = 0; d < r.mean_prediction.size(); ++d)
      os << csv_field(r.policy) << ',' << d << ',' << format_double(r.mean_prediction[d]) << '\n';
  return os.str();
}

std::string scenario_report(const RunConfig& cfg, std::string_view title, const std::vector<ReplicationSummary>& rows,
                            const std::vector<double>& reference) {
  std::ostringstream os;
  os << report_header(cfg, title);
  os << "policy                          fail  success  failure   reference  registrations  submissions\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    char line[256];
    std::snprintf(line, sizeof line, "%-30s %5zu  %7zu  %7s  %10s  %13.1f  %11.1f\n", r.policy.c_str(), r.fail,
                  r.success, pct(r.failure_rate).c_str(), i < reference.size() ? pct(reference[i]).c_str() : "",
                  r.mean_registrations, r.mean_submissions);
    os << line;
  }
  os << "\nRegistration share by belt (%)\n";
  for (const auto& r : rows) {
    os << "  " << r.policy << ":";
    for (const Belt b : kAllBelts)
      os << ' ' << to_string(b) << '=' << pct(r.registration_share[static_cast<std::size_t>(b)]);
    os << "\n";
  }
  os << "Submission share by belt (%)\n";
  for (const auto& r : rows) {
    os << "  " << r.policy << ":";
    for (const Belt b : kAllBelts)
      os << ' ' << to_string(b) << '=' << pct(r.submission_share[static_cast<std::size_t>(b)]);
    os << "\n";
  }
  return os.str();
}

int cmd_scenario(const Common& c, const std::string& kind, std::vector<double> gates,
                 const std::vector<std::string>& policies) {
  const RunConfig cfg = effective_config(c);
  auto sc = ScenarioConfig::from(cfg, kind == "openness" ? ScenarioKind::Openness : ScenarioKind::Diversity);
  sc.threads = c.threads;
  std::vector<ReplicationSummary> rows;
  std::vector<double> reference;
  std::string title;
  if (kind == "openness") {
    title = "csdsim scenario: task openness";
    if (gates.empty()) gates.assign(kOpennessGates.begin(), kOpennessGates.end());
    const std::map<int, double> published = {{60, 0.60}, {70, 22.0 / 30}, {80, 25.0 / 30}, {90, 23.0 / 30}};
    for (const double g : gates) {
      try {
        rows.push_back(run_openness_scenario(g, cfg, sc));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      const auto it = published.find(static_cast<int>(std::lround(g * 100)));
      reference.push_back(it == published.end() ? 0.0 : it->second);
    }
  } else {
    title = "csdsim scenario: agent diversity";
    std::vector<BeltSet> sets;
    if (policies.empty()) {
      sets = diversity_policies();
      reference = {0.80, 0.60, 0.73, 0.86};
    }
    for (const auto& p : policies) {
      BeltSet s;
      std::string tok;
      std::istringstream is(p);
      while (std::getline(is, tok, '+')) {
        const auto b = parse_belt(trim(tok));
        if (!b) throw ConfigError("unknown belt '" + tok + "' in policy '" + p + "'");
        s.insert(*b);
      }
      sets.push_back(s);
    }
    for (const auto& s : sets) {
      try {
        rows.push_back(run_diversity_scenario(s, cfg, sc));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
  }
  const std::string report = scenario_report(cfg, title, rows, reference);
  write_outputs(c.out_dir, {{"scenario_summary.csv", scenario_summary_csv(cfg, rows)},
                            {"scenario_trajectories.csv", trajectories_csv(cfg, rows)},
                            {"run_report.txt", provenance_header(cfg) + report},
                            {"effective_config.txt", effective_config_text(cfg)}});
  std::cout << report;
  return kExitOk;
}

int cmd_whatif(const Common& c, const std::vector<double>& days, std::optional<double> gate) {
  const RunConfig cfg = effective_config(c);
  auto sc = ScenarioConfig::from(cfg, ScenarioKind::Baseline);
  sc.threads = c.threads;
  sc.openness_gate = gate;
  std::vector<double> candidates = days;
  if (candidates.empty())
    for (int d = 0; d <= 4; ++d) candidates.push_back(cfg.focal_arrival_day + d);
  std::vector<WhatIfRow> rows;
  try {
    rows = what_if_posting_day(sc.focal, candidates, cfg, sc);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::ostringstream csv, report;
  csv << provenance_header(cfg) << "day,pool_openness,mid_belt_availability,predicted_failure\n";
  report << report_header(cfg, "csdsim what-if: focal posting day");
  report << "  day  pool openness  mid-belt availability  predicted failure\n";
  for (const auto& r : rows) {
    csv << format_double(r.day) << ',' << format_double(r.pool_openness) << ',' << format_double(r.mid_belt_availability)
        << ',' << format_double(r.predicted_failure) << '\n';
    char line[128];
    std::snprintf(line, sizeof line, "%5.1f  %13.3f  %21.3f  %17s\n", r.day, r.pool_openness, r.mid_belt_availability,
                  pct(r.predicted_failure).c_str());
    report << line;
  }
  write_outputs(c.out_dir, {{"whatif.csv", csv.str()},
                            {"run_report.txt", provenance_header(cfg) + report.str()},
                            {"effective_config.txt", effective_config_text(cfg)}});
  std::cout << report.str();
  return kExitOk;
}

int cmd_evaluate(const Common& c, const std::string& series, const std::string& history) {
  const RunConfig cfg = effective_config(c);
  std::vector<PhaseEvaluation> eval;
  if (!series.empty()) {
    eval = evaluate(load_evaluation_series(series));
  } else {
    eval = evaluate_history(cfg, run_baseline(cfg, c.threads), history);
  }
  std::ostringstream report;
  report << report_header(cfg, "csdsim evaluation");
  for (const auto& e : eval) {
    report << to_string(e.phase) << ": n=" << e.n << " actual=" << format_double(e.actual_sum)
           << " predicted=" << format_double(e.predicted_sum);
    report << " MRE=" << (e.mre ? format_double(*e.mre) : std::string("no-data"));
    report << " t=" << (e.t ? format_double(e.t->statistic) + " (p=" + format_double(e.t->p_value) + ")" : "no-data");
    report << " r="
           << (e.pearson ? format_double(e.pearson->statistic) + " (p=" + format_double(e.pearson->p_value) + ")"
                         : "no-data")
           << "\n";
  }
  write_outputs(c.out_dir, {{"evaluation.csv", evaluation_csv(cfg, eval)},
                            {"run_report.txt", provenance_header(cfg) + report.str()},
                            {"effective_config.txt", effective_config_text(cfg)}});
  std::cout << report.str();
  return kExitOk;
}

int cmd_calibrate(const Common& c, const std::string& history) {
  const RunConfig cfg = effective_config(c);
  const auto ingest = ingest_history(history);
  for (const auto& e : ingest.errors) std::cerr << history << ":" << e.line << ": " << e.message << "\n";
  const auto pts = fps_calibration_points(ingest.rows, cfg.invert_tsr != 0);
  const auto fit = calibrate_fps(pts);
  if (!fit) throw DataError("calibrate-fps: need at least two closing days with distinct TSR values");
  std::ostringstream csv;
  csv << provenance_header(cfg) << "day,tsr,failure_ratio,fitted\n";
  for (const auto& p : pts)
    csv << p.day << ',' << format_double(p.tsr) << ',' << format_double(p.failure_ratio) << ','
        << format_double(fit->slope * p.tsr + fit->intercept) << '\n';
  std::ostringstream out;
  out << provenance_header(cfg) << "# least-squares fit over " << fit->n << " closing days\n";
  out << "fps_slope = " << format_double(fit->slope) << "\nfps_intercept = " << format_double(fit->intercept) << "\n";
  write_outputs(c.out_dir, {{"fps_calibration.csv", csv.str()},
                            {"fps_calibration.txt", out.str()},
                            {"effective_config.txt", effective_config_text(cfg)}});
  std::cout << out.str();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"csdsim: crowdsourced software development marketplace simulator"};
  app.require_subcommand(1);
  Common common;
  app.add_option("-c,--config", common.config_path,
                 std::string("key = value config file (default: $") + kConfigEnv + ")");
  app.add_option("-o,--out", common.out_dir, "output directory")->capture_default_str();
  app.add_option("-j,--threads", common.threads, "worker threads for replications (0 = hardware)");
  auto* cfg_group = app.add_option_group("model", "every config key can be overridden as --<key> <value>");
  for (const auto& k : config_keys()) {
    const std::string name(k.name);
    cfg_group->add_option_function<std::string>(
        "--" + name, [&common, name](const std::string& v) { common.overrides[name] = v; }, "override " + name);
  }

  std::string history, export_history, series;
  auto* run = app.add_subcommand("run", "baseline platform run");
  run->add_option("--history", history, "history CSV to evaluate the run against");
  run->add_option("--export-history", export_history, "also write the first replication as a history CSV (file name)");

  auto* scenario = app.add_subcommand("scenario", "policy scenarios");
  scenario->require_subcommand(1);
  std::vector<double> gates;
  std::vector<std::string> policies;
  auto* openness = scenario->add_subcommand("openness", "focal task in pools of fixed similarity");
  openness->add_option("--gate", gates, "pool similarity gate(s): 0.6 0.7 0.8 0.9 (default all)");
  auto* diversity = scenario->add_subcommand("diversity", "focal task restricted to belt sets");
  diversity->add_option("--policy", policies, "admitted belts joined by '+', e.g. Blue+Yellow+Red (default: four)");

  auto* whatif = app.add_subcommand("whatif", "move the focal task's posting day");
  std::vector<double> days;
  std::optional<double> gate;
  whatif->add_option("--day", days, "candidate posting day(s) (default: focal day .. +4)");
  whatif->add_option("--gate", gate, "hold the background pool at this similarity");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "MRE, t-test and Pearson of predictions vs actual failures");
  auto* series_opt = evaluate_cmd->add_option("--series", series, "actual-vs-predicted series CSV");
  auto* history_opt = evaluate_cmd->add_option("--history", history, "history CSV compared with a simulated run");
  series_opt->excludes(history_opt);

  auto* calibrate = app.add_subcommand("calibrate-fps", "refit the FPS line against a history CSV");
  calibrate->add_option("--history", history, "history CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(common, history, export_history);
    if (*openness) return cmd_scenario(common, "openness", gates, {});
    if (*diversity) return cmd_scenario(common, "diversity", {}, policies);
    if (*whatif) return cmd_whatif(common, days, gate);
    if (*evaluate_cmd) {
      if (series.empty() && history.empty()) throw ConfigError("evaluate needs --series or --history");
      return cmd_evaluate(common, series, history);
    }
    if (*calibrate) return cmd_calibrate(common, history);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ModelInvariantError& e) {
    std::cerr << "model invariant violated: " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}
