#include "leodet/alg2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace leodet {

namespace {

Eigen::Matrix2d attributable_range_cov(const Attributable& attr) {
  Eigen::Matrix2d c;
  // (rho0, rhodot0) marginal of the (rho0, el0, az0, rhodot0) covariance.
  c << attr.cov(0, 0), attr.cov(0, 3), attr.cov(3, 0), attr.cov(3, 3);
  return c;
}

Eigen::Matrix2d solve_gram(const ShootingProblem& prob) {
  Eigen::Matrix2d gram = Eigen::Matrix2d::Zero();
  for (int k = 0; k < prob.legs; ++k) {
    const double dt = prob.node_epochs[k + 1] - prob.node_epochs[k];
    const Eigen::Matrix<double, 2, 3> ck =
        prob.h_jacobian * prob.node_to_final[static_cast<size_t>(k)].rightCols<3>();
    gram += dt * ck * ck.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(gram);
  if (es.eigenvalues()[0] <= 1e-13 * es.eigenvalues()[1] || es.eigenvalues()[1] <= 0.0) {
    throw ShootingError("solve_min_energy: terminal constraint is rank deficient");
  }
  return gram;
}

}  // namespace

ShootingProblem build_problem(const StateEstimate& est, const Attributable& attr,
                              const SpacecraftParams& model, int legs, const RadarStation& st,
                              const DynamicsConfig& cfg) {
  if (legs < 1) {
    throw std::invalid_argument("build_problem: need at least one leg");
  }
  if (attr.t0 <= est.epoch) {
    throw std::invalid_argument("build_problem: attributable epoch predates the estimate");
  }

  ShootingProblem prob;
  prob.legs = legs;
  prob.node_epochs.resize(legs + 1);
  const double t0 = est.epoch;
  const double tf = attr.t0;
  for (int k = 0; k <= legs; ++k) {
    prob.node_epochs[k] = t0 + (tf - t0) * static_cast<double>(k) / legs;
  }
  prob.node_epochs.back() = tf;

  // Ballistic nominal trajectory and per-leg transition matrices.
  InertialState cursor = InertialState::from_vec(est.epoch, est.x.head<6>());
  prob.node_states.push_back(cursor.vec());
  prob.leg_stms.reserve(legs);
  for (int k = 0; k < legs; ++k) {
    prob.leg_stms.push_back(stm(cursor, model, prob.node_epochs[k + 1], cfg).phi);
    cursor = propagate(cursor, model, prob.node_epochs[k + 1], cfg);
    prob.node_states.push_back(cursor.vec());
  }

  prob.node_to_final.assign(legs, Matrix6d::Identity());
  prob.node_to_final[legs - 1] = prob.leg_stms[legs - 1];
  for (int k = legs - 2; k >= 0; --k) {
    prob.node_to_final[k] = prob.node_to_final[k + 1] * prob.leg_stms[k];
  }
  prob.full_stm = prob.node_to_final[0];

  const RadarObservation nominal = observe(cursor, st, cfg);
  prob.nominal_obs << nominal.range, nominal.range_rate;

  // Central finite differences of (rho, rhodot) about the terminal state.
  for (int j = 0; j < 6; ++j) {
    const double delta = j < 3 ? cfg.stm_delta_pos : cfg.stm_delta_vel;
    Vector6d yp = cursor.vec();
    Vector6d ym = cursor.vec();
    yp[j] += delta;
    ym[j] -= delta;
    const RadarObservation op = observe(InertialState::from_vec(tf, yp), st, cfg);
    const RadarObservation om = observe(InertialState::from_vec(tf, ym), st, cfg);
    prob.h_jacobian(0, j) = (op.range - om.range) / (2.0 * delta);
    prob.h_jacobian(1, j) = (op.range_rate - om.range_rate) / (2.0 * delta);
  }
  return prob;
}

DeltaVSolution solve_min_energy(const ShootingProblem& prob, const Eigen::Vector2d& target) {
  const Eigen::Matrix2d gram = solve_gram(prob);
  const Eigen::Vector2d b = target - prob.nominal_obs;
  const Eigen::Vector2d lambda = gram.ldlt().solve(b);

  DeltaVSolution sol;
  sol.impulses.resize(prob.legs);
  for (int k = 0; k < prob.legs; ++k) {
    const double dt = prob.node_epochs[k + 1] - prob.node_epochs[k];
    const Eigen::Matrix<double, 2, 3> ck =
        prob.h_jacobian * prob.node_to_final[static_cast<size_t>(k)].rightCols<3>();
    sol.impulses[static_cast<size_t>(k)] = dt * ck.transpose() * lambda;
    sol.total_dv += sol.impulses[static_cast<size_t>(k)].norm();
    sol.energy += sol.impulses[static_cast<size_t>(k)].squaredNorm() / dt;
  }
  return sol;
}

MonteCarloEnergy monte_carlo_energy(const ShootingProblem& prob, const StateEstimate& est,
                                    const Attributable& attr, int samples, uint64_t seed) {
  if (samples < 2) {
    throw std::invalid_argument("monte_carlo_energy: need at least two samples");
  }
  const Eigen::Matrix2d gram = solve_gram(prob);
  const Eigen::LDLT<Eigen::Matrix2d> gram_ldlt(gram);

  const Eigen::Matrix<double, 2, 6> sens = prob.h_jacobian * prob.full_stm;
  const Eigen::Vector2d attr_mean(attr.rho0, attr.rhodot0);

  std::mt19937_64 rng(seed);
  Eigen::LLT<Eigen::MatrixXd> state_llt(est.cov.topLeftCorner<6, 6>());
  if (state_llt.info() != Eigen::Success) {
    throw CovarianceError("monte_carlo_energy: state covariance not positive definite");
  }
  Eigen::LLT<Eigen::Matrix2d> meas_llt(attributable_range_cov(attr));
  if (meas_llt.info() != Eigen::Success) {
    throw CovarianceError("monte_carlo_energy: attributable covariance not positive definite");
  }
  const Eigen::MatrixXd state_root = state_llt.matrixL();
  const Eigen::Matrix2d meas_root = meas_llt.matrixL();

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> energies;
  energies.reserve(static_cast<size_t>(samples));
  MonteCarloEnergy out{EmpiricalCdf({0.0, 0.0}), 0};
  for (int i = 0; i < samples; ++i) {
    Vector6d z;
    for (int j = 0; j < 6; ++j) z[j] = gauss(rng);
    Eigen::Vector2d w(gauss(rng), gauss(rng));
    const Vector6d dx0 = state_root * z;
    const Eigen::Vector2d target = attr_mean + meas_root * w;
    const Eigen::Vector2d b = (target - prob.nominal_obs) - sens * dx0;
    const double j_val = b.dot(gram_ldlt.solve(b));
    if (!std::isfinite(j_val) || j_val < 0.0) {
      ++out.dropped;
      continue;
    }
    energies.push_back(j_val);
  }
  if (energies.size() < 2) {
    throw ShootingError("monte_carlo_energy: too few valid samples");
  }
  out.cdf = EmpiricalCdf(std::move(energies));
  return out;
}

namespace {

double grid_percentile(const std::vector<double>& grid, const std::vector<double>& cdf,
                       double d) {
  for (size_t i = 0; i < grid.size(); ++i) {
    if (cdf[i] >= d) return grid[i];
  }
  return grid.back();
}

}  // namespace

double BaselineReference::percentile_mean(double d) const {
  return grid_percentile(grid, mean_cdf, d);
}

double BaselineReference::percentile_conservative(double d) const {
  return grid_percentile(grid, conservative_cdf, d);
}

BaselineReference baseline_reference(const ShootingProblem& prob, const StateEstimate& est,
                                     const Attributable& attr, int replicates, int samples,
                                     int grid_points, uint64_t seed) {
  if (replicates < 10) {
    throw std::invalid_argument("baseline_reference: need at least 10 replicates");
  }

  // Measurement distribution a no-manoeuvre trajectory would induce: the
  // linearized push-forward of the state uncertainty plus the fit noise.
  const Eigen::Matrix<double, 2, 6> sens = prob.h_jacobian * prob.full_stm;
  const Eigen::Matrix2d meas_cov = attributable_range_cov(attr);
  const Eigen::Matrix2d proj_cov =
      sens * est.cov.topLeftCorner<6, 6>() * sens.transpose() + meas_cov;
  Eigen::LLT<Eigen::Matrix2d> proj_llt(proj_cov);
  if (proj_llt.info() != Eigen::Success) {
    throw CovarianceError("baseline_reference: projected covariance not positive definite");
  }
  const Eigen::Matrix2d proj_root = proj_llt.matrixL();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<EmpiricalCdf> cdfs;
  cdfs.reserve(static_cast<size_t>(replicates));
  double j_min = std::numeric_limits<double>::max();
  double j_max = 0.0;
  for (int r = 0; r < replicates; ++r) {
    Attributable synthetic = attr;
    const Eigen::Vector2d shift = proj_root * Eigen::Vector2d(gauss(rng), gauss(rng));
    synthetic.rho0 = prob.nominal_obs[0] + shift[0];
    synthetic.rhodot0 = prob.nominal_obs[1] + shift[1];
    const uint64_t sub_seed = seed ^ (0x9E3779B97F4A7C15ull + static_cast<uint64_t>(r));
    MonteCarloEnergy mc = monte_carlo_energy(prob, est, synthetic, samples, sub_seed);
    for (double j : mc.cdf.samples()) {
      if (j > 0.0) j_min = std::min(j_min, j);
      j_max = std::max(j_max, j);
    }
    cdfs.push_back(std::move(mc.cdf));
  }
  if (!(j_max > 0.0)) {
    // Degenerate (zero-covariance) inputs: all energies vanish.
    j_min = 1e-30;
    j_max = 1.0;
  }
  j_min = std::max(j_min, 1e-300);

  BaselineReference ref;
  ref.grid.resize(static_cast<size_t>(grid_points));
  const double lmin = std::log(j_min);
  const double lmax = std::log(j_max);
  for (int i = 0; i < grid_points; ++i) {
    const double f = grid_points == 1 ? 0.0 : static_cast<double>(i) / (grid_points - 1);
    ref.grid[static_cast<size_t>(i)] = std::exp(lmin + f * (lmax - lmin));
  }

  ref.mean_cdf.resize(ref.grid.size());
  ref.conservative_cdf.resize(ref.grid.size());
  for (size_t i = 0; i < ref.grid.size(); ++i) {
    double mean = 0.0;
    double sq = 0.0;
    for (const EmpiricalCdf& cdf : cdfs) {
      const double v = cdf.eval(ref.grid[i]);
      mean += v;
      sq += v * v;
    }
    mean /= static_cast<double>(replicates);
    const double var = std::max(0.0, sq / static_cast<double>(replicates) - mean * mean);
    ref.mean_cdf[i] = mean;
    // Band shifted toward larger energies: lower probability at equal J.
    ref.conservative_cdf[i] = std::clamp(mean - 2.0 * std::sqrt(var), 0.0, 1.0);
  }
  // Restore monotonicity where the band subtraction dips.
  for (size_t i = 1; i < ref.conservative_cdf.size(); ++i) {
    ref.conservative_cdf[i] = std::max(ref.conservative_cdf[i], ref.conservative_cdf[i - 1]);
  }
  return ref;
}

PMetrics p_metrics(const EmpiricalCdf& candidate, const BaselineReference& ref) {
  auto scale = [&candidate](double d, double j_d) {
    const double p = candidate.eval(j_d);
    return std::max(0.0, (d - p) / d);
  };
  PMetrics m;
  m.p1m = scale(0.1, ref.percentile_mean(0.1));
  m.p5m = scale(0.5, ref.percentile_mean(0.5));
  m.p8m = scale(0.8, ref.percentile_mean(0.8));
  m.p1d = scale(0.1, ref.percentile_conservative(0.1));
  m.p5d = scale(0.5, ref.percentile_conservative(0.5));
  m.p8d = scale(0.8, ref.percentile_conservative(0.8));
  return m;
}

Alg2Result detect_alg2(const StateEstimate& est, const RadarTrack& track, const RadarStation& st,
                       const SpacecraftParams& model, const Alg2Config& acfg,
                       const DynamicsConfig& dcfg, uint64_t seed) {
  Alg2Result res;
  res.attributable = fit_attributable(track);

  const ShootingProblem prob = build_problem(est, res.attributable, model, acfg.legs, st, dcfg);
  MonteCarloEnergy mc = monte_carlo_energy(prob, est, res.attributable, acfg.samples, seed);
  res.dropped_samples = mc.dropped;
  res.invalid =
      mc.dropped > static_cast<int>(acfg.max_drop_fraction * static_cast<double>(acfg.samples));

  const BaselineReference ref =
      baseline_reference(prob, est, res.attributable, acfg.baseline_replicates, acfg.samples,
                         acfg.grid_points, seed ^ 0xD1B54A32D192ED03ull);
  res.metrics = p_metrics(mc.cdf, ref);
  res.j_median = mc.cdf.percentile(0.5);
  res.decision = res.metrics.p1m >= acfg.decision_threshold;
  return res;
}

}  // namespace leodet
