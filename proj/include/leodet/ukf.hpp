#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "leodet/dynamics.hpp"
#include "leodet/radar.hpp"

namespace leodet {

struct StateEstimate {
  double epoch = 0.0;
  Eigen::VectorXd x;    // (r, v) in m, m/s; optional trailing ballistic coeff
  Eigen::MatrixXd cov;

  InertialState state() const { return InertialState::from_vec(epoch, x.head<6>()); }
};

enum class MeasurementSubset { kRangeRangeRate, kAll };

struct UkfConfig {
  // NaN resolves to the canonical 3 - n at the point of use.
  double kappa = std::numeric_limits<double>::quiet_NaN();
  // LVLH white-acceleration PSDs, m^2/s^3 (radial, along-track, cross-track).
  double q_radial = 5e-10;
  double q_along_track = 1e-9;
  double q_cross_track = 5e-10;
  double process_dt = 600.0;  // s, discretization of the noise accumulation
  MeasurementSubset subset = MeasurementSubset::kRangeRangeRate;
  bool estimate_ballistic = false;
  double q_ballistic = 1e-16;  // m^4/kg^2/s random walk PSD on B
};

struct SigmaPoints {
  Eigen::MatrixXd points;  // n x (2n+1), column 0 is the mean
  Eigen::VectorXd w_mean;
  Eigen::VectorXd w_cov;
};

struct PlotResidual {
  double epoch = 0.0;
  Eigen::VectorXd innovation;
  Eigen::MatrixXd innovation_cov;
  double psi = 0.0;  // sqrt(nu^T S^-1 nu)
};

struct TrackMetrics {
  double psi_first = 0.0;
  double psi_max = 0.0;
  double psi_agg = 0.0;
  double p_manoeuvre = 0.0;  // pr_md(psi_first, dof)
};

// One predict+update cycle retained for smoothing.
struct FilterStep {
  StateEstimate prior;      // estimate the prediction started from
  StateEstimate predicted;  // after propagation and process noise
  Eigen::MatrixXd cross_cov;  // cov(prior state, predicted state)
  StateEstimate posterior;  // after the measurement update
  bool manoeuvre_flag = false;
  bool track_start = false;
  int track_index = -1;
};

class SmoothingError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

using FlowFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double t_from, double t_to)>;
using MeasureFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double t)>;

// Symmetric sigma-point set from a Cholesky factor of the covariance, with a
// small escalating diagonal regularization on factorization failure.
SigmaPoints sigma_points(const StateEstimate& est, double kappa);

struct PredictRecord {
  StateEstimate prior;
  StateEstimate predicted;
  Eigen::MatrixXd cross_cov;
};

PredictRecord ukf_predict(const StateEstimate& est, double t_to, const FlowFn& flow,
                          const Eigen::MatrixXd& process_noise, double kappa);

struct UpdateResult {
  StateEstimate posterior;
  PlotResidual residual;
};

// Measurement update with sigma points redrawn from the predicted estimate so
// that the innovation covariance reflects the process noise.
UpdateResult ukf_update(const StateEstimate& predicted, const Eigen::VectorXd& y,
                        const Eigen::MatrixXd& noise_cov, const MeasureFn& h, double kappa);

// Fixed-interval RTS pass over a window of steps. Returns smoothed estimates
// at the window's step boundaries: entry 0 at steps.front().prior epoch, then
// one per step posterior. Throws if an interior step is manoeuvre-flagged.
std::vector<StateEstimate> rts_smooth(std::span<const FilterStep> steps);

// Per-track summary of the plot residual metrics; p is pr_md(psi_first, dof).
TrackMetrics track_metric(std::span<const PlotResidual> residuals);

struct TrackRunResult {
  std::vector<PlotResidual> residuals;
  TrackMetrics metrics;
  size_t first_step = 0;  // indices into the filter history
  size_t last_step = 0;
};

// Sequential orbit-determination filter over radar tracks. Measurement model
// uses range and range rate unless configured otherwise.
class OrbitUkf {
 public:
  OrbitUkf(SpacecraftParams model, RadarStation station, UkfConfig ucfg, DynamicsConfig dcfg);

  void reset(const StateEstimate& initial);

  // Process noise accumulated from `from` over dt_total along the predicted
  // trajectory, in process_dt increments.
  Eigen::MatrixXd process_noise(const StateEstimate& from, double dt_total) const;

  PredictRecord predict_to(const StateEstimate& from, double t, bool between_tracks) const;

  // One plot: prediction (process noise only between tracks) plus update.
  PlotResidual step(const RadarPlot& plot, bool between_tracks);

  // Whole track; the prior covariance entering the first plot is scaled by
  // cov_scale (covariance inflation hook).
  TrackRunResult process_track(const RadarTrack& track, double cov_scale = 1.0);

  const StateEstimate& estimate() const { return est_; }
  void set_estimate(const StateEstimate& est) { est_ = est; }
  std::vector<FilterStep>& history() { return history_; }
  const std::vector<FilterStep>& history() const { return history_; }
  double kappa() const;
  int measurement_dim() const;
  const UkfConfig& config() const { return ucfg_; }
  const SpacecraftParams& model() const { return model_; }
  const RadarStation& station() const { return station_; }
  const DynamicsConfig& dynamics() const { return dcfg_; }

  Eigen::VectorXd measure(const Eigen::VectorXd& x, double t, const RadarPlot& reference) const;
  Eigen::VectorXd plot_measurement(const RadarPlot& plot) const;
  Eigen::MatrixXd plot_noise(const RadarPlot& plot) const;
  FlowFn flow() const;

  int tracks_processed() const { return tracks_processed_; }

 private:
  SpacecraftParams model_;
  RadarStation station_;
  UkfConfig ucfg_;
  DynamicsConfig dcfg_;
  StateEstimate est_;
  std::vector<FilterStep> history_;
  int tracks_processed_ = 0;
};

}  // namespace leodet
