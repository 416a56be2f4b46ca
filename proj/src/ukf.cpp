#include "leodet/ukf.hpp"

#include <cmath>

#include "leodet/statkit.hpp"

namespace leodet {

namespace {

double wrap_pm_pi(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

Eigen::MatrixXd covariance_root(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  // Ill-conditioned covariance after long gaps: escalate a diagonal loading
  // until the factorization succeeds.
  const auto n = cov.rows();
  double eps = 1e-12 * cov.trace() / static_cast<double>(n);
  if (eps <= 0.0) eps = 1e-300;
  for (int i = 0; i < 60; ++i) {
    llt.compute(cov + eps * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) {
      return llt.matrixL();
    }
    eps *= 10.0;
  }
  throw CovarianceError("sigma_points: covariance cannot be factorized");
}

void symmetrize(Eigen::MatrixXd& m) { m = (0.5 * (m + m.transpose())).eval(); }

}  // namespace

SigmaPoints sigma_points(const StateEstimate& est, double kappa) {
  const auto n = est.x.size();
  const double nk = static_cast<double>(n) + kappa;
  if (nk <= 0.0) {
    throw std::invalid_argument("sigma_points: n + kappa must be positive");
  }
  const Eigen::MatrixXd root = covariance_root(est.cov);
  const double scale = std::sqrt(nk);

  SigmaPoints sp;
  sp.points.resize(n, 2 * n + 1);
  sp.points.col(0) = est.x;
  for (Eigen::Index j = 0; j < n; ++j) {
    sp.points.col(1 + j) = est.x + scale * root.col(j);
    sp.points.col(1 + n + j) = est.x - scale * root.col(j);
  }
  sp.w_mean.setConstant(2 * n + 1, 1.0 / (2.0 * nk));
  sp.w_mean[0] = kappa / nk;
  sp.w_cov = sp.w_mean;
  return sp;
}

PredictRecord ukf_predict(const StateEstimate& est, double t_to, const FlowFn& flow,
                          const Eigen::MatrixXd& process_noise, double kappa) {
  const auto n = est.x.size();
  const SigmaPoints sp = sigma_points(est, kappa);

  Eigen::MatrixXd propagated(n, 2 * n + 1);
  for (Eigen::Index j = 0; j < 2 * n + 1; ++j) {
    propagated.col(j) = flow(sp.points.col(j), est.epoch, t_to);
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < 2 * n + 1; ++j) mean += sp.w_mean[j] * propagated.col(j);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < 2 * n + 1; ++j) {
    const Eigen::VectorXd d = propagated.col(j) - mean;
    cov += sp.w_cov[j] * d * d.transpose();
    cross += sp.w_cov[j] * (sp.points.col(j) - est.x) * d.transpose();
  }
  cov += process_noise;
  symmetrize(cov);

  PredictRecord rec;
  rec.prior = est;
  rec.predicted = {t_to, std::move(mean), std::move(cov)};
  rec.cross_cov = std::move(cross);
  return rec;
}

UpdateResult ukf_update(const StateEstimate& predicted, const Eigen::VectorXd& y,
                        const Eigen::MatrixXd& noise_cov, const MeasureFn& h, double kappa) {
  const auto n = predicted.x.size();
  const auto m = y.size();
  const SigmaPoints sp = sigma_points(predicted, kappa);

  Eigen::MatrixXd obs(m, 2 * n + 1);
  for (Eigen::Index j = 0; j < 2 * n + 1; ++j) {
    obs.col(j) = h(sp.points.col(j), predicted.epoch);
  }
  Eigen::VectorXd y_hat = Eigen::VectorXd::Zero(m);
  for (Eigen::Index j = 0; j < 2 * n + 1; ++j) y_hat += sp.w_mean[j] * obs.col(j);

  Eigen::MatrixXd s = noise_cov;
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index j = 0; j < 2 * n + 1; ++j) {
    const Eigen::VectorXd dy = obs.col(j) - y_hat;
    s += sp.w_cov[j] * dy * dy.transpose();
    cross += sp.w_cov[j] * (sp.points.col(j) - predicted.x) * dy.transpose();
  }
  symmetrize(s);

  const Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) {
    throw CovarianceError("ukf_update: innovation covariance not positive definite");
  }
  const Eigen::VectorXd nu = y - y_hat;
  // K = cross * S^-1 via the factorization.
  const Eigen::MatrixXd gain = llt.solve(cross.transpose()).transpose();

  UpdateResult out;
  out.posterior.epoch = predicted.epoch;
  out.posterior.x = predicted.x + gain * nu;
  out.posterior.cov = predicted.cov - gain * s * gain.transpose();
  symmetrize(out.posterior.cov);

  out.residual.epoch = predicted.epoch;
  out.residual.innovation = nu;
  out.residual.innovation_cov = s;
  out.residual.psi = std::sqrt(std::max(0.0, nu.dot(llt.solve(nu))));
  return out;
}

std::vector<StateEstimate> rts_smooth(std::span<const FilterStep> steps) {
  if (steps.empty()) {
    throw SmoothingError("rts_smooth: empty window");
  }
  for (size_t i = 0; i + 1 < steps.size(); ++i) {
    if (steps[i].manoeuvre_flag) {
      throw SmoothingError("rts_smooth: manoeuvre inside smoothing window");
    }
  }

  const size_t k = steps.size();
  std::vector<StateEstimate> smoothed(k + 1);
  smoothed[k] = steps[k - 1].posterior;
  for (size_t i = k; i-- > 0;) {
    const FilterStep& s = steps[i];
    const Eigen::LLT<Eigen::MatrixXd> llt(s.predicted.cov);
    if (llt.info() != Eigen::Success) {
      throw CovarianceError("rts_smooth: predicted covariance not positive definite");
    }
    // G = C * P_pred^-1
    const Eigen::MatrixXd gain = llt.solve(s.cross_cov.transpose()).transpose();
    StateEstimate& out = smoothed[i];
    out.epoch = s.prior.epoch;
    out.x = s.prior.x + gain * (smoothed[i + 1].x - s.predicted.x);
    out.cov = s.prior.cov +
              gain * (smoothed[i + 1].cov - s.predicted.cov) * gain.transpose();
    symmetrize(out.cov);
  }
  return smoothed;
}

TrackMetrics track_metric(std::span<const PlotResidual> residuals) {
  if (residuals.empty()) {
    throw std::invalid_argument("track_metric: no residuals");
  }
  TrackMetrics m;
  m.psi_first = residuals.front().psi;
  double sum = 0.0;
  for (const PlotResidual& r : residuals) {
    m.psi_max = std::max(m.psi_max, r.psi);
    sum += r.psi;
  }
  m.psi_agg = std::sqrt(sum) / static_cast<double>(residuals.size());
  m.p_manoeuvre = pr_md(m.psi_first, static_cast<int>(residuals.front().innovation.size()));
  return m;
}

OrbitUkf::OrbitUkf(SpacecraftParams model, RadarStation station, UkfConfig ucfg,
                   DynamicsConfig dcfg)
    : model_(model), station_(std::move(station)), ucfg_(ucfg), dcfg_(dcfg) {}

void OrbitUkf::reset(const StateEstimate& initial) {
  est_ = initial;
  history_.clear();
  tracks_processed_ = 0;
}

double OrbitUkf::kappa() const {
  if (std::isnan(ucfg_.kappa)) {
    const double n = ucfg_.estimate_ballistic ? 7.0 : 6.0;
    return 3.0 - n;
  }
  return ucfg_.kappa;
}

int OrbitUkf::measurement_dim() const {
  return ucfg_.subset == MeasurementSubset::kRangeRangeRate ? 2 : 4;
}

FlowFn OrbitUkf::flow() const {
  return [this](const Eigen::VectorXd& x, double t_from, double t_to) {
    SpacecraftParams params = model_;
    if (x.size() > 6) {
      // Ballistic coefficient carried in the state.
      params.mass_kg = 1.0;
      params.drag_coeff = std::max(0.0, x[6]);
      params.drag_area_m2 = 1.0;
    }
    const InertialState out =
        propagate(InertialState::from_vec(t_from, x.head<6>()), params, t_to, dcfg_);
    Eigen::VectorXd y = x;
    y.head<6>() = out.vec();
    return y;
  };
}

Eigen::VectorXd OrbitUkf::measure(const Eigen::VectorXd& x, double t,
                                  const RadarPlot& reference) const {
  const RadarObservation o = observe(InertialState::from_vec(t, x.head<6>()), station_, dcfg_);
  if (ucfg_.subset == MeasurementSubset::kRangeRangeRate) {
    return Eigen::Vector2d(o.range, o.range_rate);
  }
  // Keep transformed azimuths on the measured plot's branch so that sigma
  // averaging and the innovation are seam-free.
  const double az = reference.azimuth + wrap_pm_pi(o.azimuth - reference.azimuth);
  return Eigen::Vector4d(o.range, o.range_rate, az, o.elevation);
}

Eigen::VectorXd OrbitUkf::plot_measurement(const RadarPlot& plot) const {
  if (ucfg_.subset == MeasurementSubset::kRangeRangeRate) {
    return Eigen::Vector2d(plot.range, plot.range_rate);
  }
  return Eigen::Vector4d(plot.range, plot.range_rate, plot.azimuth, plot.elevation);
}

Eigen::MatrixXd OrbitUkf::plot_noise(const RadarPlot& plot) const {
  if (ucfg_.subset == MeasurementSubset::kRangeRangeRate) {
    return Eigen::Vector2d(plot.sigma_range * plot.sigma_range,
                           plot.sigma_range_rate * plot.sigma_range_rate)
        .asDiagonal();
  }
  return Eigen::Vector4d(plot.sigma_range * plot.sigma_range,
                         plot.sigma_range_rate * plot.sigma_range_rate,
                         plot.sigma_azimuth * plot.sigma_azimuth,
                         plot.sigma_elevation * plot.sigma_elevation)
      .asDiagonal();
}

Eigen::MatrixXd OrbitUkf::process_noise(const StateEstimate& from, double dt_total) const {
  const auto n = from.x.size();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  if (dt_total <= 0.0) return q;

  const Eigen::Vector3d psd(ucfg_.q_radial, ucfg_.q_along_track, ucfg_.q_cross_track);
  InertialState cursor = from.state();
  double remaining = dt_total;
  while (remaining > 1e-9) {
    const double dt = std::min(ucfg_.process_dt, remaining);
    const Eigen::Matrix3d rot = lvlh_basis(cursor);
    const Eigen::Matrix3d s = rot * psd.asDiagonal() * rot.transpose();
    q.block<3, 3>(0, 0) += s * (dt * dt * dt / 3.0);
    q.block<3, 3>(0, 3) += s * (dt * dt / 2.0);
    q.block<3, 3>(3, 0) += s * (dt * dt / 2.0);
    q.block<3, 3>(3, 3) += s * dt;
    remaining -= dt;
    if (remaining > 1e-9) {
      cursor = propagate(cursor, model_, cursor.epoch + dt, dcfg_);
    }
  }
  if (n > 6) {
    q(6, 6) = ucfg_.q_ballistic * dt_total;
  }
  return q;
}

PredictRecord OrbitUkf::predict_to(const StateEstimate& from, double t,
                                   bool between_tracks) const {
  const auto n = from.x.size();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  if (between_tracks) {
    q = process_noise(from, t - from.epoch);
  }
  return ukf_predict(from, t, flow(), q, kappa());
}

PlotResidual OrbitUkf::step(const RadarPlot& plot, bool between_tracks) {
  if (plot.epoch < est_.epoch) {
    throw std::invalid_argument("OrbitUkf::step: plot predates the estimate");
  }
  PredictRecord pred = predict_to(est_, plot.epoch, between_tracks);
  const MeasureFn h = [this, &plot](const Eigen::VectorXd& x, double t) {
    return measure(x, t, plot);
  };
  UpdateResult upd = ukf_update(pred.predicted, plot_measurement(plot), plot_noise(plot), h,
                                kappa());

  FilterStep fs;
  fs.prior = std::move(pred.prior);
  fs.predicted = std::move(pred.predicted);
  fs.cross_cov = std::move(pred.cross_cov);
  fs.posterior = upd.posterior;
  fs.track_start = between_tracks;
  fs.track_index = tracks_processed_;
  history_.push_back(std::move(fs));

  est_ = std::move(upd.posterior);
  return upd.residual;
}

TrackRunResult OrbitUkf::process_track(const RadarTrack& track, double cov_scale) {
  if (track.plots.empty()) {
    throw std::invalid_argument("process_track: empty track");
  }
  TrackRunResult out;
  out.first_step = history_.size();

  // Prediction across the inter-track gap carries process noise; the prior
  // covariance entering the track absorbs any inflation factor.
  {
    const RadarPlot& plot = track.plots.front();
    PredictRecord pred = predict_to(est_, plot.epoch, true);
    pred.predicted.cov *= cov_scale;
    const MeasureFn h = [this, &plot](const Eigen::VectorXd& x, double t) {
      return measure(x, t, plot);
    };
    UpdateResult upd = ukf_update(pred.predicted, plot_measurement(plot), plot_noise(plot), h,
                                  kappa());
    FilterStep fs;
    fs.prior = std::move(pred.prior);
    fs.predicted = std::move(pred.predicted);
    fs.cross_cov = std::move(pred.cross_cov);
    fs.posterior = upd.posterior;
    fs.track_start = true;
    fs.track_index = tracks_processed_;
    history_.push_back(std::move(fs));
    est_ = std::move(upd.posterior);
    out.residuals.push_back(std::move(upd.residual));
  }
  for (size_t i = 1; i < track.plots.size(); ++i) {
    out.residuals.push_back(step(track.plots[i], false));
  }

  out.last_step = history_.size() - 1;
  out.metrics = track_metric(out.residuals);
  ++tracks_processed_;
  return out;
}

}  // namespace leodet
