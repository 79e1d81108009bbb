#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vtrack/eval.hpp"
#include "vtrack/pipeline.hpp"
#include "vtrack/segmentation.hpp"
#include "vtrack/sim.hpp"

namespace vtrack {

// Every JSONL writer emits one compact object per line with a fixed key
// order. Readers throw ParseError naming the file and line.

std::string scan_to_json(const Scan& scan);
Scan scan_from_json(const std::string& line);
void write_scans(const std::string& path, std::span<const Scan> scans);
std::vector<Scan> read_scans(const std::string& path);

std::string truth_to_json(const FrameTruth& frame);
FrameTruth truth_from_json(const std::string& line);
void write_truth(const std::string& path, const GroundTruth& gt);
GroundTruth read_truth(const std::string& path);

std::string result_to_json(const FrameResult& frame);
FrameResult result_from_json(const std::string& line);
void write_results(const std::string& path, std::span<const FrameResult> results);
std::vector<FrameResult> read_results(const std::string& path);

/// Metric table headers, also documented with golden examples.
inline constexpr const char* kHeadingCsvHeader =
    "method,real_mean_deg,real_std_deg,abs_mean_deg,abs_std_deg,count";
inline constexpr const char* kDistributionCsvHeader = "method,eq0,le1,le2,le3,le4,le5,count";
inline constexpr const char* kTrajectoryCsvHeader =
    "method,state,x_mean_m,x_std_m,y_mean_m,y_std_m,count";
inline constexpr const char* kIdCsvHeader =
    "gt_id,observed_frames,best_track,covered_frames,consistent";
inline constexpr const char* kSummaryCsvHeader = "metric,value";

/// Writes table2_heading.csv, table3_distribution.csv, table4_trajectory.csv,
/// id_consistency.csv, summary.csv and plot_data.jsonl into `dir`, creating
/// it if needed.
void write_report(const std::string& dir, const EvaluationReport& report);

/// Whole file as a string; throws IoError.
std::string read_file(const std::string& path);
/// Throws IoError.
void write_file(const std::string& path, const std::string& content);

}  // namespace vtrack
