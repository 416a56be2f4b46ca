#include "leodet/mdf.hpp"

#include <cmath>

#include "leodet/statkit.hpp"

namespace leodet {

namespace {

// Detection statistic of an attributable against a predicted state at the
// attributable epoch: unscented transform through (rho, rhodot) plus the
// attributable covariance, per the filter's virtual-measurement check.
struct DetectionStat {
  double md = 0.0;
  double p = 0.0;
};

DetectionStat detection_stat(const OrbitUkf& ukf, const StateEstimate& predicted,
                             const Attributable& attr) {
  const auto n = predicted.x.size();
  const SigmaPoints sp = sigma_points(predicted, ukf.kappa());

  Eigen::Matrix2Xd obs(2, 2 * n + 1);
  for (Eigen::Index j = 0; j < 2 * n + 1; ++j) {
    const RadarObservation o = observe(
        InertialState::from_vec(predicted.epoch, sp.points.col(j).head<6>()), ukf.station(),
        ukf.dynamics());
    obs.col(j) << o.range, o.range_rate;
  }
  Eigen::Vector2d y_hat = Eigen::Vector2d::Zero();
  for (Eigen::Index j = 0; j < 2 * n + 1; ++j) y_hat += sp.w_mean[j] * obs.col(j);

  Eigen::Matrix2d s;
  s << attr.cov(0, 0), attr.cov(0, 3), attr.cov(3, 0), attr.cov(3, 3);
  for (Eigen::Index j = 0; j < 2 * n + 1; ++j) {
    const Eigen::Vector2d dy = obs.col(j) - y_hat;
    s += sp.w_cov[j] * dy * dy.transpose();
  }

  const Eigen::Vector2d nu = Eigen::Vector2d(attr.rho0, attr.rhodot0) - y_hat;
  DetectionStat out;
  out.md = mahalanobis(nu, {Eigen::Vector2d::Zero(), s});
  out.p = pr_md(out.md, 2);
  return out;
}

}  // namespace

ManoeuvreDetectionFilter::ManoeuvreDetectionFilter(SpacecraftParams model, RadarStation station,
                                                   UkfConfig ucfg, MdfConfig mcfg,
                                                   DynamicsConfig dcfg)
    : ukf_(model, std::move(station), ucfg, dcfg), mcfg_(mcfg) {}

void ManoeuvreDetectionFilter::reset(const StateEstimate& initial) { ukf_.reset(initial); }

ManoeuvreDetectionFilter::DetectionProbe ManoeuvreDetectionFilter::probe_attributable(
    const StateEstimate& from, const Attributable& attr, int doublings) const {
  StateEstimate predicted = ukf_.predict_to(from, attr.t0, true).predicted;
  for (int k = 0; k < doublings; ++k) predicted.cov *= 2.0;
  const DetectionStat stat = detection_stat(ukf_, predicted, attr);
  return {stat.p, stat.md};
}

MdfTrackOutcome ManoeuvreDetectionFilter::process_track(const RadarTrack& track) {
  MdfTrackOutcome out;
  out.track_index = ukf_.tracks_processed();

  const Attributable attr = fit_attributable(track);

  // Detection against the prediction at the attributable epoch; the state
  // itself is never touched here.
  StateEstimate predicted = ukf_.predict_to(ukf_.estimate(), attr.t0, true).predicted;
  DetectionStat stat = detection_stat(ukf_, predicted, attr);
  out.p_manoeuvre = stat.p;
  out.md = stat.md;
  out.manoeuvre_declared = stat.p >= mcfg_.p_threshold;

  // Inflate until the attributable is statistically consistent.
  while (stat.p >= mcfg_.p_threshold && out.inflations < mcfg_.inflation_cap) {
    predicted.cov *= 2.0;
    ++out.inflations;
    stat = detection_stat(ukf_, predicted, attr);
  }
  if (stat.p >= mcfg_.p_threshold) {
    // Out of doublings with the check still failing.
    out.inflation_saturated = true;
    out.p_manoeuvre = 1.0;
    out.manoeuvre_declared = true;
  }

  const double scale = std::ldexp(1.0, out.inflations);  // exact power of two
  TrackRunResult run = ukf_.process_track(track, scale);
  out.ukf_metrics = run.metrics;
  ukf_.history()[run.first_step].manoeuvre_flag = out.manoeuvre_declared;

  if (!out.manoeuvre_declared && mcfg_.long_smoothing) {
    // Backward pass over the gap and the track, then a forward re-filter from
    // the smoothed previous-boundary state.
    const std::span<const FilterStep> window(ukf_.history().data() + run.first_step,
                                             run.last_step - run.first_step + 1);
    const std::vector<StateEstimate> smoothed = rts_smooth(window);
    ukf_.history().resize(run.first_step);
    ukf_.set_estimate(smoothed.front());
    ukf_.process_track(track, 1.0);
    out.smoothed = true;
  }

  out.post_state = ukf_.estimate();
  return out;
}

}  // namespace leodet
