#include "leodet/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace leodet {

Eigen::Matrix3d lvlh_basis(const InertialState& x) {
  const double rn = x.r.norm();
  if (rn <= 0.0) {
    throw SingularFrameError("lvlh_basis: zero position vector");
  }
  const Eigen::Vector3d h = x.r.cross(x.v);
  const double hn = h.norm();
  if (hn <= 1e-9 * rn * x.v.norm() || hn == 0.0) {
    throw SingularFrameError("lvlh_basis: rectilinear state, angular momentum ~ 0");
  }
  const Eigen::Vector3d radial = x.r / rn;
  const Eigen::Vector3d cross = h / hn;
  const Eigen::Vector3d transverse = cross.cross(radial);
  Eigen::Matrix3d basis;
  basis.col(0) = radial;
  basis.col(1) = transverse;
  basis.col(2) = cross;
  return basis;
}

namespace {

Eigen::Vector3d natural_acceleration(const DynamicsConfig& cfg, const SpacecraftParams& params,
                                     const Eigen::Vector3d& r, const Eigen::Vector3d& v) {
  const double rn2 = r.squaredNorm();
  const double rn = std::sqrt(rn2);
  const double rn3 = rn2 * rn;
  Eigen::Vector3d a = -cfg.mu / rn3 * r;

  if (cfg.enable_j2) {
    const double zr = r.z() / rn;
    const double zr2 = zr * zr;
    const double k = -1.5 * cfg.j2 * cfg.mu * cfg.earth_radius * cfg.earth_radius / (rn2 * rn3);
    a.x() += k * r.x() * (1.0 - 5.0 * zr2);
    a.y() += k * r.y() * (1.0 - 5.0 * zr2);
    a.z() += k * r.z() * (3.0 - 5.0 * zr2);
  }

  if (cfg.enable_drag) {
    const Eigen::Vector3d omega(0.0, 0.0, cfg.earth_rotation_rate);
    const Eigen::Vector3d v_rel = v - omega.cross(r);
    const double h = rn - cfg.earth_radius;
    const double rho =
        cfg.atmosphere.rho0 * std::exp(-(h - cfg.atmosphere.h0) / cfg.atmosphere.scale_height);
    a -= 0.5 * rho * params.ballistic_coeff() * v_rel.norm() * v_rel;
  }
  return a;
}

}  // namespace

Eigen::Vector3d total_acceleration(const DynamicsConfig& cfg, const SpacecraftParams& params,
                                   double t, const Eigen::Vector3d& r, const Eigen::Vector3d& v,
                                   std::span<const ManoeuvreSpec> manoeuvres) {
  Eigen::Vector3d a = natural_acceleration(cfg, params, r, v);
  for (const ManoeuvreSpec& m : manoeuvres) {
    if (t >= m.start_epoch && t < m.end_epoch() && m.accel_lvlh.squaredNorm() > 0.0) {
      a += lvlh_basis({t, r, v}) * m.accel_lvlh;
    }
  }
  return a;
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr double kB5[7] = {35.0 / 384,      0.0,  500.0 / 1113, 125.0 / 192,
                           -2187.0 / 6784, 11.0 / 84, 0.0};
constexpr double kB4[7] = {5179.0 / 57600,  0.0,        7571.0 / 16695, 393.0 / 640,
                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

// The active manoeuvre set is fixed for a whole segment; it is applied
// unconditionally so that boundary-epoch stage evaluations stay consistent
// with the rest of the segment.
struct Rhs {
  const DynamicsConfig& cfg;
  const SpacecraftParams& params;
  std::span<const ManoeuvreSpec> active;

  Vector6d operator()(double t, const Vector6d& y) const {
    Vector6d dy;
    dy.head<3>() = y.tail<3>();
    Eigen::Vector3d a = natural_acceleration(cfg, params, y.head<3>(), y.tail<3>());
    for (const ManoeuvreSpec& m : active) {
      if (m.accel_lvlh.squaredNorm() > 0.0) {
        a += lvlh_basis({t, y.head<3>(), y.tail<3>()}) * m.accel_lvlh;
      }
    }
    dy.tail<3>() = a;
    return dy;
  }
};

// Local-error margin under the configured tolerances, keeping the accumulated
// drift over multi-orbit spans within the tolerance itself.
constexpr double kLocalMargin = 5.0;

double error_norm(const Vector6d& err, const Vector6d& y0, const Vector6d& y1,
                  const IntegratorConfig& ic) {
  double acc = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double atol = i < 3 ? ic.abs_tol_pos : ic.abs_tol_vel;
    const double sk = (atol + ic.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]))) /
                      kLocalMargin;
    const double e = err[i] / sk;
    acc += e * e;
  }
  return std::sqrt(acc / 6.0);
}

// Adaptive DOPRI5 over one segment with a fixed set of active manoeuvres.
Vector6d integrate_segment(const DynamicsConfig& cfg, const SpacecraftParams& params,
                           std::span<const ManoeuvreSpec> active, double t0, Vector6d y,
                           double t1, long& steps_budget) {
  if (t1 == t0) return y;
  const IntegratorConfig& ic = cfg.integrator;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const Rhs rhs{cfg, params, active};

  double t = t0;
  double h = dir * std::min(10.0, std::abs(t1 - t0));
  Vector6d k[7];
  k[0] = rhs(t, y);

  while (dir * (t1 - t) > 0.0) {
    if (--steps_budget <= 0) {
      throw DivergenceError("propagate: step budget exhausted");
    }
    const double remaining = std::abs(t1 - t);
    h = dir * std::min({std::abs(h), ic.max_step, remaining});
    const bool last = std::abs(h) >= remaining;
    if (std::abs(h) < 1e-12 * std::max(1.0, std::abs(t))) {
      throw DivergenceError("propagate: step size underflow");
    }

    for (int s = 1; s < 7; ++s) {
      Vector6d ys = y;
      for (int j = 0; j < s; ++j) {
        if (kA[s][j] != 0.0) ys += h * kA[s][j] * k[j];
      }
      k[s] = rhs(t + kC[s] * h, ys);
    }

    Vector6d y5 = y;
    Vector6d err = Vector6d::Zero();
    for (int s = 0; s < 7; ++s) {
      if (kB5[s] != 0.0) y5 += h * kB5[s] * k[s];
      err += h * (kB5[s] - kB4[s]) * k[s];
    }

    if (!y5.allFinite()) {
      throw DivergenceError("propagate: non-finite state");
    }
    const double en = error_norm(err, y, y5, ic);
    if (en <= 1.0) {
      t = last ? t1 : t + h;
      y = y5;
      k[0] = k[6];  // FSAL
      const double alt = y.head<3>().norm() - cfg.earth_radius;
      if (alt < cfg.reentry_altitude) {
        throw ReentryError("propagate: altitude below re-entry threshold");
      }
    }
    const double scale = en > 0.0 ? 0.9 * std::pow(en, -0.2) : 5.0;
    h *= std::clamp(scale, 0.2, 5.0);
  }
  return y;
}

}  // namespace

InertialState propagate(const InertialState& x0, const SpacecraftParams& params, double tf,
                        std::span<const ManoeuvreSpec> manoeuvres, const DynamicsConfig& cfg) {
  if (!x0.vec().allFinite()) {
    throw DivergenceError("propagate: non-finite initial state");
  }
  if (tf < x0.epoch && !manoeuvres.empty()) {
    throw std::invalid_argument("propagate: backward propagation with manoeuvres");
  }

  // Split the timeline at manoeuvre boundaries so each segment integrates a
  // fixed active set.
  std::vector<double> breaks;
  breaks.push_back(x0.epoch);
  for (const ManoeuvreSpec& m : manoeuvres) {
    for (double b : {m.start_epoch, m.end_epoch()}) {
      if (b > x0.epoch && b < tf) breaks.push_back(b);
    }
  }
  breaks.push_back(tf);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  if (tf < x0.epoch) {  // backward: sorted ascending, walk reversed
    std::reverse(breaks.begin(), breaks.end());
  }

  Vector6d y = x0.vec();
  long budget = cfg.integrator.max_steps;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double ta = breaks[i];
    const double tb = breaks[i + 1];
    const double tm = 0.5 * (ta + tb);
    std::vector<ManoeuvreSpec> active;
    for (const ManoeuvreSpec& m : manoeuvres) {
      if (tm >= m.start_epoch && tm < m.end_epoch()) active.push_back(m);
    }
    y = integrate_segment(cfg, params, active, ta, y, tb, budget);
  }
  return InertialState::from_vec(tf, y);
}

StateTransition stm(const InertialState& x0, const SpacecraftParams& params, double tf,
                    const DynamicsConfig& cfg) {
  StateTransition st;
  st.t0 = x0.epoch;
  st.t1 = tf;
  if (tf == x0.epoch) {
    return st;
  }
  for (int j = 0; j < 6; ++j) {
    const double delta = j < 3 ? cfg.stm_delta_pos : cfg.stm_delta_vel;
    Vector6d yp = x0.vec();
    Vector6d ym = x0.vec();
    yp[j] += delta;
    ym[j] -= delta;
    const Vector6d fp = propagate(InertialState::from_vec(x0.epoch, yp), params, tf, cfg).vec();
    const Vector6d fm = propagate(InertialState::from_vec(x0.epoch, ym), params, tf, cfg).vec();
    st.phi.col(j) = (fp - fm) / (2.0 * delta);
  }
  return st;
}

InertialState state_from_elements(const OrbitalElements& el, double epoch, double mu) {
  const double p = el.semi_major_axis * (1.0 - el.eccentricity * el.eccentricity);
  const double cnu = std::cos(el.true_anomaly);
  const double snu = std::sin(el.true_anomaly);
  const double rn = p / (1.0 + el.eccentricity * cnu);

  const Eigen::Vector3d r_pqw(rn * cnu, rn * snu, 0.0);
  const double k = std::sqrt(mu / p);
  const Eigen::Vector3d v_pqw(-k * snu, k * (el.eccentricity + cnu), 0.0);

  const Eigen::AngleAxisd r3_raan(el.raan, Eigen::Vector3d::UnitZ());
  const Eigen::AngleAxisd r1_inc(el.inclination, Eigen::Vector3d::UnitX());
  const Eigen::AngleAxisd r3_argp(el.arg_perigee, Eigen::Vector3d::UnitZ());
  const Eigen::Matrix3d rot = (r3_raan * r1_inc * r3_argp).toRotationMatrix();

  return {epoch, rot * r_pqw, rot * v_pqw};
}

double specific_energy(const InertialState& x, double mu) {
  return 0.5 * x.v.squaredNorm() - mu / x.r.norm();
}

double semi_major_axis(const InertialState& x, double mu) {
  return -mu / (2.0 * specific_energy(x, mu));
}

double raan_of(const InertialState& x) {
  const Eigen::Vector3d h = x.r.cross(x.v);
  const Eigen::Vector3d n = Eigen::Vector3d::UnitZ().cross(h);
  if (n.norm() == 0.0) {
    throw SingularFrameError("raan_of: equatorial orbit has undefined node");
  }
  return std::atan2(n.y(), n.x());
}

double orbital_period(double semi_major_axis_m, double mu) {
  return 2.0 * M_PI * std::sqrt(std::pow(semi_major_axis_m, 3) / mu);
}

Ephemeris::Ephemeris(const InertialState& x0, const SpacecraftParams& params,
                     std::vector<ManoeuvreSpec> manoeuvres, const DynamicsConfig& cfg,
                     double t_begin, double t_end, double sample_dt)
    : params_(params),
      manoeuvres_(std::move(manoeuvres)),
      cfg_(cfg),
      t_begin_(t_begin),
      t_end_(t_end),
      sample_dt_(sample_dt) {
  if (t_end < t_begin) {
    throw std::invalid_argument("Ephemeris: t_end < t_begin");
  }
  InertialState cursor = x0;
  if (x0.epoch != t_begin) {
    // The anchor state may predate the window; manoeuvres must not precede it.
    cursor = propagate(x0, params_, t_begin, manoeuvres_, cfg_);
  }
  samples_.push_back(cursor);
  const auto n = static_cast<size_t>(std::ceil((t_end - t_begin) / sample_dt_));
  samples_.reserve(n + 1);
  for (size_t i = 1; i <= n; ++i) {
    const double t = std::min(t_begin + static_cast<double>(i) * sample_dt_, t_end);
    cursor = propagate(cursor, params_, t, manoeuvres_, cfg_);
    samples_.push_back(cursor);
  }
}

InertialState Ephemeris::at(double t) const {
  if (t < t_begin_ - 1e-9 || t > t_end_ + 1e-9) {
    throw std::out_of_range("Ephemeris::at: epoch outside sampled window");
  }
  const double clamped = std::clamp(t, t_begin_, t_end_);
  auto idx = static_cast<size_t>(std::floor((clamped - t_begin_) / sample_dt_));
  idx = std::min(idx, samples_.size() - 1);
  const InertialState& base = samples_[idx];
  if (base.epoch == clamped) return base;
  return propagate(base, params_, clamped, manoeuvres_, cfg_);
}

}  // namespace leodet
