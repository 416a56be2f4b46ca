#pragma once

#include <map>
#include <memory>
#include <optional>

#include "leodet/config.hpp"

namespace leodet {

struct GridTags {
  std::string intensity;  // "low" | "medium" | "high" | "" (none)
  std::string offset;     // "2h" | "6h" | "12h" | ""
  std::string direction;  // "T" | "OOP" | "hybrid" | ""
};

struct ScenarioSpec {
  int schema_version = 1;
  std::string id = "scenario";
  // Scenario time scale; all epochs below are seconds from this reference.
  std::string reference_epoch_iso = "2020-08-18T00:00:00Z";
  double t_start = 0.0;
  double t_end = 345600.0;  // 4 days
  OrbitalElements elements;
  double elements_epoch = 0.0;
  SpacecraftParams truth_params{2300.0, 2.2, 10.0, 10.0};
  SpacecraftParams model_params{2300.0, 2.0, 9.5, 10.0};
  std::optional<RadarStation> station;  // defaults to the config station
  std::vector<ManoeuvreSpec> manoeuvres;
  uint64_t seed = 1;
  GridTags tags;
};

struct SegmentInfo {
  int index = 0;          // segment i runs from track i-1 to track i
  double t_begin = 0.0;   // previous track's last plot epoch
  double t_mid = 0.0;     // current track's mid epoch
  bool truth_label = false;
};

struct GeneratedScenario {
  std::shared_ptr<Ephemeris> truth;
  std::vector<RadarTrack> tracks;
  std::vector<SegmentInfo> segments;
  RadarStation station;
};

class ScenarioError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

GeneratedScenario generate_scenario(const ScenarioSpec& spec, const Config& cfg);

// One row of the campaign report; detector fields are present only for the
// detectors that ran on the segment.
struct SegmentRecord {
  std::string scenario_id;
  int segment_id = 0;
  bool truth_label = false;
  std::optional<double> alg1_md, alg1_pr_md;
  std::optional<bool> alg1_decision;
  std::optional<int> alg1_dropped;
  std::optional<double> j_median, p1m, p5m, p8m, p1d, p5d, p8d;
  std::optional<bool> alg2_decision;
  std::optional<double> ukf_psi_first, ukf_psi_max, ukf_psi_agg, ukf_p;
  std::optional<bool> ukf_decision;
  std::optional<double> mdf_p;
  std::optional<int> mdf_inflations;
  std::optional<bool> mdf_decision, mdf_smoothed;
};

struct DetectorRates {
  int manoeuvred = 0;
  int clean = 0;
  int detected = 0;        // true positives
  int false_positives = 0;

  double detection_rate() const { return manoeuvred ? double(detected) / manoeuvred : 0.0; }
  double false_positive_rate() const { return clean ? double(false_positives) / clean : 0.0; }
  double false_negative_rate() const { return manoeuvred ? 1.0 - detection_rate() : 0.0; }
};

struct DetectionReport {
  std::vector<SegmentRecord> records;

  // Decision counts per detector name ("alg1", "alg2", "ukf", "mdf"), keyed
  // by scenario id ("" aggregates everything).
  std::map<std::string, std::map<std::string, DetectorRates>> rates() const;
};

struct CampaignOptions {
  bool run_alg1 = false;
  bool run_alg2 = false;
  bool run_ukf = false;
  bool run_mdf = false;
};

DetectionReport run_campaign(std::span<const ScenarioSpec> specs, const CampaignOptions& opt,
                             const Config& cfg);

// Filter initialization shared by the campaign and the CLI: truth state at
// `epoch` with the configured covariance, optionally mean-perturbed.
StateEstimate initial_estimate(const Ephemeris& truth, double epoch, const Matrix6d& cov_lvlh,
                               bool perturb, uint64_t seed);

Matrix6d lvlh_cov_to_inertial(const Matrix6d& cov_lvlh, const InertialState& at);
Matrix6d ra_initial_cov_lvlh(const HarnessConfig& h);

// 3 intensities x 3 offsets x 3 directions about an anchor track found on the
// manoeuvre-free trajectory, plus the manoeuvre-free base case.
std::vector<ScenarioSpec> make_grid(const ScenarioSpec& base, const Config& cfg);

// Reporting.
std::string render_report_csv(const DetectionReport& report);
std::string render_report_markdown(const DetectionReport& report);
DetectionReport parse_report_csv(const std::string& text);

}  // namespace leodet
