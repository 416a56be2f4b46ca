#pragma once

#include <string>
#include <vector>

#include "leodet/harness.hpp"

namespace leodet {

// Track CSV, one file per track.
std::string track_to_csv(const RadarTrack& track, const TimeScale& ts);
RadarTrack track_from_csv(const std::string& text, const TimeScale& ts);
void write_track_csv(const std::string& path, const RadarTrack& track, const TimeScale& ts);
RadarTrack read_track_csv(const std::string& path, const TimeScale& ts);

// Attributable JSON record.
std::string attributable_to_json(const Attributable& a, const TimeScale& ts);
Attributable attributable_from_json(const std::string& text, const TimeScale& ts);

// State estimate JSON (epoch, 6-state, row-major covariance).
std::string state_to_json(const StateEstimate& est, const TimeScale& ts);
StateEstimate state_from_json(const std::string& text, const TimeScale& ts);

// Sampled ephemeris CSV (epoch_iso, position, velocity); real-data mode input
// and simulator truth output.
std::string ephemeris_to_csv(const std::vector<InertialState>& states, const TimeScale& ts);
std::vector<InertialState> ephemeris_from_csv(const std::string& text, const TimeScale& ts);

// Scenario spec JSON.
std::string scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec scenario_from_json(const std::string& text);

// Report JSONL, one record per segment.
std::string record_to_jsonl(const SegmentRecord& r);
SegmentRecord record_from_jsonl(const std::string& line);
void write_report_jsonl(const std::string& path, const DetectionReport& report);
DetectionReport read_report_jsonl(const std::string& path);

// Filter run-log CSV rows.
struct RunLogRow {
  double epoch = 0.0;
  std::optional<double> err_pos_m;
  double psi = 0.0;
  double nu_rho_m = 0.0;
  double nu_rhodot_mps = 0.0;
  double trace_p_pos = 0.0;
  double trace_p_vel = 0.0;
  std::optional<double> p_manoeuvre;
  std::optional<int> inflations;
  std::optional<bool> smoothed;
};
std::string run_log_to_csv(const std::vector<RunLogRow>& rows, const TimeScale& ts,
                           bool mdf_columns);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace leodet
