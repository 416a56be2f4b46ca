#pragma once

#include <string>

#include "leodet/alg1.hpp"
#include "leodet/alg2.hpp"
#include "leodet/mdf.hpp"
#include "leodet/time.hpp"

namespace leodet {

struct HarnessConfig {
  // Synthetic initial covariance for reachability segment starts, LVLH axes.
  double ra_init_sigma_pos = 10.0;  // m
  double ra_init_sigma_vel = 0.01;  // m/s
  // Draw the initial mean from that covariance instead of starting exactly
  // on the truth.
  bool perturb_initial = true;
  // Fraction of the scenario span at which the grid generator anchors the
  // post-manoeuvre track.
  double anchor_fraction = 0.6;
  double truth_sample_dt = 10.0;  // s, ephemeris cache resolution
  double psi_threshold = 0.5;     // filter detector probability threshold
  // Seed shape for the filter's initial covariance (LVLH axes, row-major);
  // recorded from a converged filter run, then scaled on use.
  Matrix6d filter_initial_cov_lvlh = Matrix6d::Identity();
  double filter_initial_cov_scale = 1.0;
};

struct Config {
  std::string reference_epoch_iso = "2020-08-18T00:00:00Z";
  DynamicsConfig dynamics;
  RadarStation radar;
  UkfConfig ukf;
  Alg1Config alg1;
  Alg2Config alg2;
  MdfConfig mdf;
  HarnessConfig harness;

  TimeScale time_scale() const { return TimeScale(reference_epoch_iso); }

  static Config defaults();
};

Config load_config(const std::string& path);
void save_config(const Config& cfg, const std::string& path);
std::string config_to_json(const Config& cfg);
Config config_from_json(const std::string& text);

}  // namespace leodet
