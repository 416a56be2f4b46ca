#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace leodet {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

struct InertialState {
  double epoch = 0.0;  // seconds on the scenario time scale
  Eigen::Vector3d r = Eigen::Vector3d::Zero();  // m, Earth-centered inertial
  Eigen::Vector3d v = Eigen::Vector3d::Zero();  // m/s

  Vector6d vec() const {
    Vector6d y;
    y << r, v;
    return y;
  }
  static InertialState from_vec(double epoch, const Vector6d& y) {
    return {epoch, y.head<3>(), y.tail<3>()};
  }
};

struct SpacecraftParams {
  double mass_kg = 2300.0;
  double drag_coeff = 2.2;
  double drag_area_m2 = 10.0;
  double srp_area_m2 = 10.0;  // carried for completeness; no SRP force modelled

  double ballistic_coeff() const { return drag_coeff * drag_area_m2 / mass_kg; }
};

// Piecewise-constant thrust acceleration expressed in the LVLH frame
// (radial, transverse, cross-track), re-rotated to inertial at every
// integrator stage evaluation.
struct ManoeuvreSpec {
  double start_epoch = 0.0;  // s
  double duration = 0.0;     // s
  Eigen::Vector3d accel_lvlh = Eigen::Vector3d::Zero();  // m/s^2

  double end_epoch() const { return start_epoch + duration; }
  double delta_v() const { return accel_lvlh.norm() * duration; }
};

struct StateTransition {
  double t0 = 0.0;
  double t1 = 0.0;
  Matrix6d phi = Matrix6d::Identity();
};

struct AtmosphereConfig {
  // Exponential density rho(h) = rho0 * exp(-(h - h0) / scale_height).
  double rho0 = 3.614e-14;        // kg/m^3
  double h0 = 700e3;              // m
  double scale_height = 88.667e3; // m
};

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol_pos = 1e-6;  // m
  double abs_tol_vel = 1e-9;  // m/s
  double max_step = 300.0;    // s
  long max_steps = 20000000;
};

struct DynamicsConfig {
  double mu = 3.986004418e14;        // m^3/s^2 (WGS-84)
  double earth_radius = 6378137.0;   // m
  double j2 = 1.08262668e-3;
  bool enable_j2 = true;
  bool enable_drag = true;
  AtmosphereConfig atmosphere;
  IntegratorConfig integrator;
  double earth_rotation_rate = 7.2921150e-5;  // rad/s, about inertial +z
  double reentry_altitude = 100e3;            // m
  double stm_delta_pos = 1.0;                 // m, central-difference step
  double stm_delta_vel = 1e-3;                // m/s
};

class PropagationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};
class ReentryError : public PropagationError {
  using PropagationError::PropagationError;
};
class DivergenceError : public PropagationError {
  using PropagationError::PropagationError;
};
class SingularFrameError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Rotation matrix mapping LVLH coordinates (radial, transverse, cross-track)
// to the inertial frame; columns are the LVLH axes.
Eigen::Matrix3d lvlh_basis(const InertialState& x);

// Total modelled acceleration at (t, r, v) including any active manoeuvres.
Eigen::Vector3d total_acceleration(const DynamicsConfig& cfg, const SpacecraftParams& params,
                                   double t, const Eigen::Vector3d& r, const Eigen::Vector3d& v,
                                   std::span<const ManoeuvreSpec> manoeuvres);

// Numerically integrates the state to tf. Backward propagation (tf < epoch)
// is supported only with an empty manoeuvre list.
InertialState propagate(const InertialState& x0, const SpacecraftParams& params, double tf,
                        std::span<const ManoeuvreSpec> manoeuvres, const DynamicsConfig& cfg);

inline InertialState propagate(const InertialState& x0, const SpacecraftParams& params, double tf,
                               const DynamicsConfig& cfg) {
  return propagate(x0, params, tf, {}, cfg);
}

// State transition matrix by central finite differences of the propagator.
// Column perturbation sizes come from cfg.stm_delta_pos / cfg.stm_delta_vel.
StateTransition stm(const InertialState& x0, const SpacecraftParams& params, double tf,
                    const DynamicsConfig& cfg);

// Keplerian elements (angles in radians) for scenario construction.
struct OrbitalElements {
  double semi_major_axis = 7078137.0;  // m
  double eccentricity = 0.0;
  double inclination = 0.0;
  double raan = 0.0;
  double arg_perigee = 0.0;
  double true_anomaly = 0.0;
};

InertialState state_from_elements(const OrbitalElements& el, double epoch, double mu);

double specific_energy(const InertialState& x, double mu);
double semi_major_axis(const InertialState& x, double mu);
double raan_of(const InertialState& x);
double orbital_period(double semi_major_axis_m, double mu);

// Dense trajectory handle: propagates once onto a coarse grid and answers
// point queries by short re-propagation from the nearest cached sample.
class Ephemeris {
 public:
  Ephemeris(const InertialState& x0, const SpacecraftParams& params,
            std::vector<ManoeuvreSpec> manoeuvres, const DynamicsConfig& cfg, double t_begin,
            double t_end, double sample_dt = 10.0);

  InertialState at(double t) const;
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  const std::vector<InertialState>& samples() const { return samples_; }
  const std::vector<ManoeuvreSpec>& manoeuvres() const { return manoeuvres_; }

 private:
  SpacecraftParams params_;
  std::vector<ManoeuvreSpec> manoeuvres_;
  DynamicsConfig cfg_;
  double t_begin_;
  double t_end_;
  double sample_dt_;
  std::vector<InertialState> samples_;
};

}  // namespace leodet
