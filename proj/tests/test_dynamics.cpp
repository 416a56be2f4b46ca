#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "leodet/dynamics.hpp"

using namespace leodet;

namespace {

DynamicsConfig two_body_config() {
  DynamicsConfig cfg;
  cfg.enable_j2 = false;
  cfg.enable_drag = false;
  return cfg;
}

InertialState circular_equatorial(double a, const DynamicsConfig& cfg) {
  InertialState x;
  x.r = {a, 0.0, 0.0};
  x.v = {0.0, std::sqrt(cfg.mu / a), 0.0};
  return x;
}

InertialState leo_state(const DynamicsConfig& cfg) {
  OrbitalElements el;
  el.semi_major_axis = 7078137.0;
  el.eccentricity = 0.001;
  el.inclination = 98.2 * M_PI / 180.0;
  el.raan = 1.1;
  el.arg_perigee = 0.4;
  el.true_anomaly = 2.2;
  return state_from_elements(el, 0.0, cfg.mu);
}

}  // namespace

TEST_CASE("lvlh basis geometry") {
  const DynamicsConfig cfg = two_body_config();
  const InertialState x = circular_equatorial(7078137.0, cfg);
  const Eigen::Matrix3d r = lvlh_basis(x);

  CHECK((r.col(0) - Eigen::Vector3d::UnitX()).norm() < 1e-14);
  CHECK((r.col(2) - Eigen::Vector3d::UnitZ()).norm() < 1e-14);
  CHECK((r.col(1) - Eigen::Vector3d::UnitY()).norm() < 1e-14);

  const InertialState y = leo_state(cfg);
  const Eigen::Matrix3d ry = lvlh_basis(y);
  CHECK((ry.transpose() * ry - Eigen::Matrix3d::Identity()).norm() < 1e-12);
  const Eigen::Vector3d h = y.r.cross(y.v).normalized();
  CHECK((ry * Eigen::Vector3d::UnitZ() - h).norm() < 1e-12);
  CHECK(ry.determinant() == doctest::Approx(1.0).epsilon(1e-12));

  InertialState rectilinear;
  rectilinear.r = {7e6, 0.0, 0.0};
  rectilinear.v = {7500.0, 0.0, 0.0};
  CHECK_THROWS_AS(lvlh_basis(rectilinear), SingularFrameError);
}

TEST_CASE("zero-time propagation is the identity") {
  const DynamicsConfig cfg = two_body_config();
  const InertialState x = leo_state(cfg);
  const InertialState y = propagate(x, SpacecraftParams{}, x.epoch, cfg);
  CHECK(y.r == x.r);
  CHECK(y.v == x.v);
}

TEST_CASE("kepler period closure") {
  const DynamicsConfig cfg = two_body_config();
  const double a = 7078137.0;
  const InertialState x = circular_equatorial(a, cfg);
  const double period = orbital_period(a, cfg.mu);

  const InertialState y = propagate(x, SpacecraftParams{}, period, cfg);
  CHECK((y.r - x.r).norm() / a < 1e-6);
  CHECK((y.v - x.v).norm() / x.v.norm() < 1e-6);
}

TEST_CASE("j2 nodal regression matches the secular rate") {
  DynamicsConfig cfg;
  cfg.enable_drag = false;

  OrbitalElements el;
  el.semi_major_axis = 7078137.0;
  el.eccentricity = 0.0001;
  el.inclination = 98.2 * M_PI / 180.0;
  el.raan = 0.3;
  InertialState x = state_from_elements(el, 0.0, cfg.mu);

  // Least-squares slope of the unwrapped node over one day averages out the
  // short-period wobble.
  const double dt = 300.0;
  const int n = 288;
  std::vector<double> t(n), node(n);
  InertialState cursor = x;
  double prev = raan_of(cursor);
  double unwrapped = prev;
  for (int i = 0; i < n; ++i) {
    t[i] = cursor.epoch;
    node[i] = unwrapped;
    cursor = propagate(cursor, SpacecraftParams{}, cursor.epoch + dt, cfg);
    double cur = raan_of(cursor);
    double d = std::fmod(cur - prev, 2.0 * M_PI);
    if (d > M_PI) d -= 2.0 * M_PI;
    if (d < -M_PI) d += 2.0 * M_PI;
    unwrapped += d;
    prev = cur;
  }
  double st = 0.0, sn = 0.0, stt = 0.0, stn = 0.0;
  for (int i = 0; i < n; ++i) {
    st += t[i];
    sn += node[i];
    stt += t[i] * t[i];
    stn += t[i] * node[i];
  }
  const double slope = (n * stn - st * sn) / (n * stt - st * st);

  const double p = el.semi_major_axis * (1.0 - el.eccentricity * el.eccentricity);
  const double mean_motion = std::sqrt(cfg.mu / std::pow(el.semi_major_axis, 3));
  const double analytic = -1.5 * mean_motion * cfg.j2 *
                          std::pow(cfg.earth_radius / p, 2) * std::cos(el.inclination);
  CHECK(std::abs(slope - analytic) / std::abs(analytic) < 0.01);
}

TEST_CASE("energy conservation over ten orbits") {
  const DynamicsConfig cfg = two_body_config();
  const InertialState x = leo_state(cfg);
  const double period = orbital_period(semi_major_axis(x, cfg.mu), cfg.mu);
  const InertialState y = propagate(x, SpacecraftParams{}, 10.0 * period, cfg);
  const double e0 = specific_energy(x, cfg.mu);
  const double e1 = specific_energy(y, cfg.mu);
  CHECK(std::abs(e1 - e0) / std::abs(e0) < 10.0 * cfg.integrator.rel_tol);
}

TEST_CASE("backward propagation inverts forward") {
  const DynamicsConfig cfg = two_body_config();
  const InertialState x = leo_state(cfg);
  const InertialState fwd = propagate(x, SpacecraftParams{}, 3000.0, cfg);
  const InertialState back = propagate(fwd, SpacecraftParams{}, 0.0, cfg);
  CHECK((back.r - x.r).norm() < 5e-3);
  const std::vector<ManoeuvreSpec> burn{{100.0, 10.0, {0.0, 1e-3, 0.0}}};
  CHECK_THROWS_AS(propagate(fwd, SpacecraftParams{}, 0.0, burn, cfg), std::invalid_argument);
}

TEST_CASE("zero-acceleration manoeuvre is bit-identical to none") {
  DynamicsConfig cfg;  // full force model
  const InertialState x = leo_state(cfg);
  const double tf = 1800.0;
  const InertialState plain = propagate(x, SpacecraftParams{}, tf, cfg);
  // Boundaries at the propagation endpoints leave the step sequence intact.
  const std::vector<ManoeuvreSpec> zero{{0.0, tf, Eigen::Vector3d::Zero()}};
  const InertialState with_zero = propagate(x, SpacecraftParams{}, tf, zero, cfg);
  CHECK(plain.r == with_zero.r);
  CHECK(plain.v == with_zero.v);
}

TEST_CASE("out-of-plane burn preserves the semi-major axis to first order") {
  const DynamicsConfig cfg = two_body_config();
  const InertialState x = circular_equatorial(7078137.0, cfg);
  const double a0 = semi_major_axis(x, cfg.mu);

  // 0.01 m/s cross-track over 10 s.
  const std::vector<ManoeuvreSpec> burn{{600.0, 10.0, {0.0, 0.0, 1e-3}}};
  const InertialState y = propagate(x, SpacecraftParams{}, 1200.0, burn, cfg);
  const double a1 = semi_major_axis(y, cfg.mu);
  CHECK(std::abs(a1 - a0) / a0 < 1e-6);
}

TEST_CASE("tangential burn raises the orbit") {
  const DynamicsConfig cfg = two_body_config();
  const InertialState x = circular_equatorial(7078137.0, cfg);
  const double a0 = semi_major_axis(x, cfg.mu);
  const std::vector<ManoeuvreSpec> burn{{600.0, 30.0, {0.0, 1e-3, 0.0}}};
  const InertialState y = propagate(x, SpacecraftParams{}, 1200.0, burn, cfg);
  // dv = 0.03 m/s -> da ~ 2 a dv / v ~ 56 m.
  const double expected = 2.0 * a0 * 0.03 / x.v.norm();
  CHECK(semi_major_axis(y, cfg.mu) - a0 == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("re-entry and divergence raise dedicated errors") {
  const DynamicsConfig cfg = two_body_config();
  InertialState falling;
  falling.r = {cfg.earth_radius + 150e3, 0.0, 0.0};
  falling.v = {-2000.0, 1000.0, 0.0};  // steeply descending
  CHECK_THROWS_AS(propagate(falling, SpacecraftParams{}, 2000.0, cfg), ReentryError);

  InertialState bad;
  bad.r = {std::nan(""), 0.0, 0.0};
  bad.v = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(propagate(bad, SpacecraftParams{}, 10.0, cfg), DivergenceError);
}

TEST_CASE("stm identity at zero span and finite-difference consistency") {
  DynamicsConfig cfg;
  const InertialState x = leo_state(cfg);

  const StateTransition id = stm(x, SpacecraftParams{}, x.epoch, cfg);
  CHECK((id.phi - Matrix6d::Identity()).norm() == 0.0);

  const StateTransition st600 = stm(x, SpacecraftParams{}, 600.0, cfg);
  Vector6d delta = Vector6d::Zero();
  delta[1] = 1.0;  // 1 m position offset
  const InertialState xp = InertialState::from_vec(0.0, x.vec() + delta);
  const Vector6d nonlinear =
      propagate(xp, SpacecraftParams{}, 600.0, cfg).vec() -
      propagate(x, SpacecraftParams{}, 600.0, cfg).vec();
  const Vector6d linear = st600.phi * delta;
  CHECK((linear - nonlinear).norm() / nonlinear.norm() < 1e-3);
}

TEST_CASE("stm determinant is unity for the two-body flow") {
  const DynamicsConfig cfg = two_body_config();
  const InertialState x = leo_state(cfg);
  const StateTransition st = stm(x, SpacecraftParams{}, 5400.0, cfg);
  CHECK(std::abs(st.phi.determinant() - 1.0) < 1e-6);
}

TEST_CASE("stm composes across legs") {
  DynamicsConfig cfg;
  const InertialState x = leo_state(cfg);
  const StateTransition full = stm(x, SpacecraftParams{}, 1200.0, cfg);
  const StateTransition first = stm(x, SpacecraftParams{}, 600.0, cfg);
  const InertialState mid = propagate(x, SpacecraftParams{}, 600.0, cfg);
  const StateTransition second = stm(mid, SpacecraftParams{}, 1200.0, cfg);
  const Matrix6d composed = second.phi * first.phi;
  CHECK((composed - full.phi).norm() / full.phi.norm() < 1e-6);
}

TEST_CASE("ephemeris cache agrees with direct propagation") {
  DynamicsConfig cfg;
  const InertialState x = leo_state(cfg);
  const std::vector<ManoeuvreSpec> burn{{900.0, 30.0, {0.0, 1e-3, 0.0}}};
  const Ephemeris eph(x, SpacecraftParams{}, burn, cfg, 0.0, 3600.0, 10.0);

  for (double t : {0.0, 123.4, 905.0, 2000.0, 3600.0}) {
    const InertialState direct = propagate(x, SpacecraftParams{}, t, burn, cfg);
    const InertialState cached = eph.at(t);
    CHECK((direct.r - cached.r).norm() < 1e-2);
  }
  CHECK_THROWS_AS(eph.at(4000.0), std::out_of_range);
}
