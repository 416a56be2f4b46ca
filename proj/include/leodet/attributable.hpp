#pragma once

#include <Eigen/Dense>

#include "leodet/radar.hpp"

namespace leodet {

// Virtual measurement of a whole track at its mid-epoch, with covariance over
// (rho0, el0, az0, rhodot0).
struct Attributable {
  double t0 = 0.0;
  double rho0 = 0.0;     // m
  double el0 = 0.0;      // rad
  double az0 = 0.0;      // rad
  double rhodot0 = 0.0;  // m/s
  Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();
  int order = 2;
  int n_plots = 0;
  bool low_quality = false;

  Eigen::Vector4d vec() const { return {rho0, el0, az0, rhodot0}; }
};

// Shared-parameter polynomial fit result. Parameters are ordered as
// (rho_0..rho_n, el_0..el_n, az_0..az_n) with basis t^j / j! about the track
// mid-time; the range-rate rows reuse the range parameters.
struct FitResult {
  int order = 0;
  double t0 = 0.0;
  Eigen::VectorXd params;
  Eigen::MatrixXd cov;
  Eigen::VectorXd residuals;
  int n_plots = 0;
  bool low_quality = false;
};

struct DesignSystem {
  Eigen::MatrixXd a_sys;         // stacked (rho, el, az, rhodot) blocks
  Eigen::VectorXd weights;       // diagonal of W = Sigma_upsilon^-1
  Eigen::VectorXd measurements;  // stacked measurement vector
  double t0 = 0.0;
};

class FitError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Order rule: 2-plot tracks are capped at 1 (and flagged), otherwise the
// default of 2 escalates to 3 once the track spans more than 60 s.
int auto_order(const RadarTrack& track);

DesignSystem build_design(const RadarTrack& track, int order);

// Weighted least squares through the whitened system; order <= 0 applies the
// auto rule.
FitResult fit_track(const RadarTrack& track, int order = 0);

Attributable to_attributable(const FitResult& fit, const RadarTrack& track);

inline Attributable fit_attributable(const RadarTrack& track, int order = 0) {
  return to_attributable(fit_track(track, order), track);
}

// Sigma of (rho0, rhodot0) when range and range rate are fitted separately
// with the same order; diagnostic baseline for the shared-parameter gain.
std::pair<double, double> independent_fit_sigmas(const RadarTrack& track, int order);

// Unwraps a sampled angle sequence onto a continuous branch.
std::vector<double> unwrap_angles(const std::vector<double>& angles);

}  // namespace leodet
