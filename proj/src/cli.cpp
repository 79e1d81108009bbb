#include "vtrack/cli.hpp"

#include <chrono>
#include <filesystem>
#include <ostream>

#include <CLI11.hpp>

#include "vtrack/config.hpp"
#include "vtrack/errors.hpp"
#include "vtrack/io.hpp"
#include "vtrack/sim.hpp"

namespace vtrack {

std::string truth_path_for(const std::string& scans_path) {
  const std::string ext = ".jsonl";
  if (scans_path.size() > ext.size() &&
      scans_path.compare(scans_path.size() - ext.size(), ext.size(), ext) == 0) {
    return scans_path.substr(0, scans_path.size() - ext.size()) + ".gt.jsonl";
  }
  return scans_path + ".gt.jsonl";
}

std::string cmd_simulate(const std::string& scenario_path, const std::string& out_path,
                         std::uint64_t seed) {
  const ScenarioSpec spec = load_scenario(scenario_path, seed);
  const SimOutput sim = simulate(spec, seed);
  const std::string gt_path = truth_path_for(out_path);
  write_scans(out_path, sim.scans);
  write_truth(gt_path, sim.truth);
  return gt_path;
}

double TrackSummary::frames_per_second() const {
  return seconds > 0.0 ? static_cast<double>(stats.frames) / seconds : 0.0;
}

TrackSummary cmd_track(const std::string& scans_path, const std::string& config_path,
                       const std::string& out_path, std::optional<std::uint64_t> seed) {
  PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_pipeline_config(config_path);
  if (seed) cfg.tlinkage.seed = *seed;
  const std::vector<Scan> scans = read_scans(scans_path);
  TrackSummary summary;
  const auto start = std::chrono::steady_clock::now();
  const std::vector<FrameResult> results = run_pipeline(scans, cfg, &summary.stats);
  summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_results(out_path, results);
  return summary;
}

EvaluationReport cmd_evaluate(const std::string& results_path, const std::string& gt_path,
                              const std::string& out_dir) {
  const GroundTruth gt = read_truth(gt_path);
  const std::vector<FrameResult> results = read_results(results_path);
  EvaluationReport report = evaluate(results, gt);
  write_report(out_dir, report);
  return report;
}

EvaluationReport cmd_run_all(const std::string& scenario_path, const std::string& config_path,
                             const std::string& out_dir, std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());
  const std::filesystem::path base(out_dir);
  const std::string scans = (base / "scans.jsonl").string();
  const std::string results = (base / "results.jsonl").string();
  const std::string gt = cmd_simulate(scenario_path, scans, seed);
  cmd_track(scans, config_path, results, seed);
  return cmd_evaluate(results, gt, out_dir);
}

namespace {

void report_run(const TrackSummary& s, std::ostream& err) {
  for (const std::string& d : s.stats.diagnostics) err << "warning: skipped " << d << "\n";
  err << "frames=" << s.stats.frames << " skipped=" << s.stats.skipped
      << " seconds=" << s.seconds << " fps=" << s.frames_per_second() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vehicle detection and tracking from multi-layer 2D range scans", "vtrack"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string config, output, input, gt;
  std::optional<std::uint64_t> track_seed;

  CLI::App* sim = app.add_subcommand("simulate", "Simulate a scenario into scan and truth files");
  sim->add_option("scenario", input, "Scenario key=value file")->required();
  sim->add_option("--out", output, "Scan JSONL output (truth goes to <out>.gt.jsonl)")->required();
  sim->add_option("--seed", seed, "Random seed");

  CLI::App* track = app.add_subcommand("track", "Run the detection and tracking pipeline");
  track->add_option("scans", input, "Scan JSONL file")->required();
  track->add_option("--config", config, "Pipeline key=value file");
  track->add_option("--out", output, "Results JSONL output")->required();
  track->add_option("--seed", track_seed, "Overrides tlinkage.seed");

  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Score results against ground truth");
  evaluate_cmd->add_option("results", input, "Results JSONL file")->required();
  evaluate_cmd->add_option("--gt", gt, "Ground-truth JSONL file")->required();
  evaluate_cmd->add_option("--out", output, "Directory for metric tables")->required();

  CLI::App* all = app.add_subcommand("run-all", "simulate, track and evaluate into one directory");
  all->add_option("scenario", input, "Scenario key=value file")->required();
  all->add_option("--config", config, "Pipeline key=value file");
  all->add_option("--out", output, "Output directory")->required();
  all->add_option("--seed", seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    if (sim->parsed()) {
      const std::string gt_path = cmd_simulate(input, output, seed);
      out << "wrote " << output << " and " << gt_path << "\n";
    } else if (track->parsed()) {
      report_run(cmd_track(input, config, output, track_seed), err);
      out << "wrote " << output << "\n";
    } else if (evaluate_cmd->parsed()) {
      const EvaluationReport r = cmd_evaluate(input, gt, output);
      out << "id_consistency=" << r.ids.score << "\n";
    } else if (all->parsed()) {
      const EvaluationReport r = cmd_run_all(input, config, output, seed);
      out << "id_consistency=" << r.ids.score << "\n";
    }
  } catch (const Error& e) {
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n') c = ' ';
    }
    err << "error: " << e.code() << ": " << msg << "\n";
    return 2;
  }
  return 0;
}

}  // namespace vtrack
