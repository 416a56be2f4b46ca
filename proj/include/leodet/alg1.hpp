#pragma once

#include <cstdint>

#include "leodet/attributable.hpp"
#include "leodet/radar.hpp"
#include "leodet/statkit.hpp"
#include "leodet/ukf.hpp"

namespace leodet {

struct ParticleCloud {
  double epoch = 0.0;
  Eigen::MatrixXd states;  // one particle per row, (r, v)

  Eigen::Index count() const { return states.rows(); }
};

// Measurement-space image of a cloud: mean and unbiased sample covariance over
// (rho, el, az, rhodot), azimuth averaged on a continuous branch.
struct ProjectedMeasurement {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
};

struct Alg1Config {
  int particles = 1000;
  MeasurementSubset subset = MeasurementSubset::kRangeRangeRate;
  double decision_threshold = 0.5;
  double max_drop_fraction = 0.01;  // dropped-particle budget before flagging
};

struct Alg1Result {
  double md = 0.0;
  double pr_md = 0.0;
  bool decision = false;
  int dropped_particles = 0;
  bool invalid = false;  // drop fraction exceeded the budget
  Eigen::Vector4d delta = Eigen::Vector4d::Zero();
  Eigen::Matrix4d delta_cov = Eigen::Matrix4d::Zero();
  Attributable attributable;
  ProjectedMeasurement projected;
};

ParticleCloud sample_initial(const StateEstimate& est, int count, uint64_t seed);

struct CloudPropagation {
  ParticleCloud cloud;
  int dropped = 0;  // particles lost to re-entry / divergence
};

CloudPropagation propagate_cloud(const ParticleCloud& cloud, const SpacecraftParams& params,
                                 double t_target, const DynamicsConfig& cfg);

ProjectedMeasurement project_cloud(const ParticleCloud& cloud, const RadarStation& st,
                                   const DynamicsConfig& cfg);

// Full segment check: track attributable vs the propagated cloud's projected
// measurement, Mahalanobis distance on the configured observable subset.
Alg1Result detect_alg1(const StateEstimate& est, const RadarTrack& track, const RadarStation& st,
                       const SpacecraftParams& model, const Alg1Config& acfg,
                       const DynamicsConfig& dcfg, uint64_t seed);

// Indices of the configured subset within the (rho, el, az, rhodot) ordering.
std::vector<int> subset_indices(MeasurementSubset subset);

}  // namespace leodet
