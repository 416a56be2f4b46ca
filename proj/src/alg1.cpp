#include "leodet/alg1.hpp"

#include <algorithm>
#include <cmath>

namespace leodet {

namespace {

double wrap_pm_pi(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

}  // namespace

std::vector<int> subset_indices(MeasurementSubset subset) {
  if (subset == MeasurementSubset::kRangeRangeRate) {
    return {0, 3};
  }
  return {0, 1, 2, 3};
}

ParticleCloud sample_initial(const StateEstimate& est, int count, uint64_t seed) {
  if (count < 1) {
    throw std::invalid_argument("sample_initial: need at least one particle");
  }
  std::mt19937_64 rng(seed);
  const Eigen::MatrixXd draws =
      sample_gaussian({est.x.head<6>(), est.cov.topLeftCorner<6, 6>()}, count, rng);
  ParticleCloud cloud;
  cloud.epoch = est.epoch;
  cloud.states = draws.transpose();
  return cloud;
}

CloudPropagation propagate_cloud(const ParticleCloud& cloud, const SpacecraftParams& params,
                                 double t_target, const DynamicsConfig& cfg) {
  if (t_target < cloud.epoch) {
    throw std::invalid_argument("propagate_cloud: target predates the cloud");
  }
  const auto m = cloud.count();
  Eigen::MatrixXd out(m, 6);
  std::vector<char> ok(m, 0);

#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index i = 0; i < m; ++i) {
    try {
      const InertialState xi = InertialState::from_vec(cloud.epoch, cloud.states.row(i));
      out.row(i) = propagate(xi, params, t_target, cfg).vec();
      ok[i] = 1;
    } catch (const PropagationError&) {
      ok[i] = 0;
    }
  }

  CloudPropagation result;
  result.cloud.epoch = t_target;
  Eigen::Index kept = 0;
  result.cloud.states.resize(m, 6);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (ok[i]) {
      result.cloud.states.row(kept++) = out.row(i);
    } else {
      ++result.dropped;
    }
  }
  result.cloud.states.conservativeResize(kept, 6);
  if (kept == 0) {
    throw PropagationError("propagate_cloud: every particle was lost");
  }
  return result;
}

ProjectedMeasurement project_cloud(const ParticleCloud& cloud, const RadarStation& st,
                                   const DynamicsConfig& cfg) {
  const auto m = cloud.count();
  if (m < 1) {
    throw std::invalid_argument("project_cloud: empty cloud");
  }
  Eigen::MatrixXd obs(m, 4);
  for (Eigen::Index i = 0; i < m; ++i) {
    const InertialState xi = InertialState::from_vec(cloud.epoch, cloud.states.row(i));
    const RadarObservation o = observe(xi, st, cfg);
    obs.row(i) << o.range, o.elevation, o.azimuth, o.range_rate;
  }

  // All reductions run in a canonical (sorted) order so the result is
  // bit-identical under any permutation of the particles.
  std::vector<Eigen::Index> order(m);
  for (Eigen::Index i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&obs](Eigen::Index a, Eigen::Index b) {
    for (int c = 0; c < 4; ++c) {
      if (obs(a, c) != obs(b, c)) return obs(a, c) < obs(b, c);
    }
    return false;
  });

  // Continuous azimuth branch about the circular mean.
  double sc = 0.0, ss = 0.0;
  for (const Eigen::Index i : order) {
    sc += std::cos(obs(i, 2));
    ss += std::sin(obs(i, 2));
  }
  const double az_ref = std::atan2(ss, sc);
  for (Eigen::Index i = 0; i < m; ++i) {
    obs(i, 2) = az_ref + wrap_pm_pi(obs(i, 2) - az_ref);
  }

  ProjectedMeasurement proj;
  Eigen::Vector4d sum = Eigen::Vector4d::Zero();
  for (const Eigen::Index i : order) sum += obs.row(i).transpose();
  proj.mean = sum / static_cast<double>(m);
  if (m > 1) {
    Eigen::Matrix4d acc = Eigen::Matrix4d::Zero();
    for (const Eigen::Index i : order) {
      const Eigen::Vector4d d = obs.row(i).transpose() - proj.mean;
      acc += d * d.transpose();
    }
    proj.cov = acc / static_cast<double>(m - 1);
  }
  return proj;
}

Alg1Result detect_alg1(const StateEstimate& est, const RadarTrack& track, const RadarStation& st,
                       const SpacecraftParams& model, const Alg1Config& acfg,
                       const DynamicsConfig& dcfg, uint64_t seed) {
  Alg1Result res;
  res.attributable = fit_attributable(track);
  if (res.attributable.t0 <= est.epoch) {
    throw std::invalid_argument("detect_alg1: track mid-epoch predates the estimate");
  }

  const ParticleCloud initial = sample_initial(est, acfg.particles, seed);
  CloudPropagation prop = propagate_cloud(initial, model, res.attributable.t0, dcfg);
  res.dropped_particles = prop.dropped;
  res.invalid = prop.dropped >
                static_cast<int>(acfg.max_drop_fraction * static_cast<double>(acfg.particles));
  res.projected = project_cloud(prop.cloud, st, dcfg);

  res.delta = res.attributable.vec() - res.projected.mean;
  res.delta[2] = wrap_pm_pi(res.delta[2]);  // azimuth difference across the seam
  res.delta_cov = res.attributable.cov + res.projected.cov;

  const std::vector<int> idx = subset_indices(acfg.subset);
  const auto k = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd d(k);
  Eigen::MatrixXd c(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    d[i] = res.delta[idx[i]];
    for (Eigen::Index j = 0; j < k; ++j) {
      c(i, j) = res.delta_cov(idx[i], idx[j]);
    }
  }
  res.md = mahalanobis(d, {Eigen::VectorXd::Zero(k), c});
  res.pr_md = pr_md(res.md, static_cast<int>(k));
  res.decision = res.pr_md >= acfg.decision_threshold;
  return res;
}

}  // namespace leodet
