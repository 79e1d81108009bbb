#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "vtrack/eval.hpp"
#include "vtrack/pipeline.hpp"

namespace vtrack {

/// Writes `out_path` (scans) and the ground truth next to it. Returns the
/// ground-truth path.
std::string cmd_simulate(const std::string& scenario_path, const std::string& out_path,
                         std::uint64_t seed);

struct TrackSummary {
  RunStats stats;
  double seconds = 0.0;  // pipeline time, excluding file I/O
  double frames_per_second() const;
};

/// Runs the pipeline over a scan file. An empty config path means defaults;
/// `seed` overrides tlinkage.seed when given.
TrackSummary cmd_track(const std::string& scans_path, const std::string& config_path,
                       const std::string& out_path, std::optional<std::uint64_t> seed = {});

EvaluationReport cmd_evaluate(const std::string& results_path, const std::string& gt_path,
                              const std::string& out_dir);

/// simulate + track + evaluate into one directory.
EvaluationReport cmd_run_all(const std::string& scenario_path, const std::string& config_path,
                             const std::string& out_dir, std::uint64_t seed);

/// Ground-truth path paired with a scan file: x.jsonl -> x.gt.jsonl.
std::string truth_path_for(const std::string& scans_path);

/// Entry point. Errors print one line `error: <code>: <message>` to `err`
/// and return 2.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vtrack
