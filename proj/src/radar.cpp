#include "leodet/radar.hpp"

#include <cmath>
#include <random>

namespace leodet {

namespace {

// WGS-84 ellipsoid for station geodesy.
constexpr double kWgsA = 6378137.0;
constexpr double kWgsF = 1.0 / 298.257223563;
constexpr double kWgsE2 = kWgsF * (2.0 - kWgsF);

Eigen::Vector3d station_ecef(const RadarStation& st) {
  const double sl = std::sin(st.latitude);
  const double cl = std::cos(st.latitude);
  const double n = kWgsA / std::sqrt(1.0 - kWgsE2 * sl * sl);
  return {(n + st.altitude) * cl * std::cos(st.longitude),
          (n + st.altitude) * cl * std::sin(st.longitude),
          (n * (1.0 - kWgsE2) + st.altitude) * sl};
}

double wrap_two_pi(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  return a < 0.0 ? a + 2.0 * M_PI : a;
}

}  // namespace

StationFrame station_frame(const RadarStation& st, double epoch, const DynamicsConfig& cfg) {
  const double theta = cfg.earth_rotation_rate * epoch;
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitZ()).toRotationMatrix();

  const double sl = std::sin(st.latitude);
  const double cl = std::cos(st.latitude);
  const double so = std::sin(st.longitude);
  const double co = std::cos(st.longitude);
  const Eigen::Vector3d east_ecef(-so, co, 0.0);
  const Eigen::Vector3d north_ecef(-sl * co, -sl * so, cl);
  const Eigen::Vector3d up_ecef(cl * co, cl * so, sl);

  StationFrame f;
  f.position = rz * station_ecef(st);
  f.velocity = Eigen::Vector3d(0.0, 0.0, cfg.earth_rotation_rate).cross(f.position);
  f.east = rz * east_ecef;
  f.north = rz * north_ecef;
  f.up = rz * up_ecef;
  return f;
}

RadarObservation observe(const InertialState& x, const RadarStation& st,
                         const DynamicsConfig& cfg) {
  const StationFrame f = station_frame(st, x.epoch, cfg);
  const Eigen::Vector3d rho_vec = x.r - f.position;
  const Eigen::Vector3d rho_dot_vec = x.v - f.velocity;

  RadarObservation obs;
  obs.range = rho_vec.norm();
  obs.range_rate = rho_vec.dot(rho_dot_vec) / obs.range;
  obs.azimuth = wrap_two_pi(std::atan2(rho_vec.dot(f.east), rho_vec.dot(f.north)));
  obs.elevation = std::asin(std::clamp(rho_vec.dot(f.up) / obs.range, -1.0, 1.0));
  return obs;
}

bool azimuth_within_limits(double azimuth, const RadarStation& st) {
  if (!st.azimuth_limits) return true;
  const double lo = wrap_two_pi((*st.azimuth_limits)[0]);
  const double hi = wrap_two_pi((*st.azimuth_limits)[1]);
  const double az = wrap_two_pi(azimuth);
  if (lo <= hi) return az >= lo && az <= hi;
  return az >= lo || az <= hi;  // wedge wraps through 0
}

std::vector<PassWindow> find_passes(const Ephemeris& traj, const RadarStation& st, double t0,
                                    double t1, const DynamicsConfig& cfg) {
  constexpr double kScanStep = 10.0;
  constexpr double kRefine = 0.1;

  auto visible = [&](double t) {
    const RadarObservation o = observe(traj.at(t), st, cfg);
    return o.elevation >= st.min_elevation && azimuth_within_limits(o.azimuth, st);
  };
  // Boolean bisection of a visibility transition bracketed in (a, b].
  auto refine = [&](double a, double b, bool vis_a) {
    while (b - a > kRefine) {
      const double m = 0.5 * (a + b);
      if (visible(m) == vis_a) {
        a = m;
      } else {
        b = m;
      }
    }
    return 0.5 * (a + b);
  };

  std::vector<PassWindow> passes;
  double t_prev = t0;
  bool vis_prev = visible(t0);
  double rise = vis_prev ? t0 : 0.0;
  for (double t = t0 + kScanStep; t_prev < t1; t += kScanStep) {
    const double tc = std::min(t, t1);
    const bool vis = visible(tc);
    if (vis != vis_prev) {
      const double tx = refine(t_prev, tc, vis_prev);
      if (vis) {
        rise = tx;
      } else {
        passes.push_back({rise, tx});
      }
      vis_prev = vis;
    }
    t_prev = tc;
  }
  if (vis_prev) {
    passes.push_back({rise, t1});
  }
  return passes;
}

RadarTrack synthesize_track(const Ephemeris& truth, const RadarStation& st,
                            const PassWindow& pass, uint64_t seed, const DynamicsConfig& cfg) {
  if (pass.duration() < 2.0 * st.plot_cadence) {
    throw TrackSynthesisError("synthesize_track: pass shorter than two plot cadences");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  RadarTrack track;
  track.station_id = st.id;
  for (double t = pass.t_rise; t <= pass.t_set + 1e-9; t += st.plot_cadence) {
    const RadarObservation o = observe(truth.at(t), st, cfg);
    RadarPlot p;
    p.epoch = t;
    p.range = o.range + st.sigma_range * gauss(rng);
    p.range_rate = o.range_rate + st.sigma_range_rate * gauss(rng);
    p.azimuth = wrap_two_pi(o.azimuth + st.sigma_azimuth * gauss(rng));
    p.elevation = o.elevation + st.sigma_elevation * gauss(rng);
    p.sigma_range = st.sigma_range;
    p.sigma_range_rate = st.sigma_range_rate;
    p.sigma_azimuth = st.sigma_azimuth;
    p.sigma_elevation = st.sigma_elevation;
    track.plots.push_back(p);
  }
  if (track.plots.size() < 2) {
    throw TrackSynthesisError("synthesize_track: fewer than two plots in pass");
  }
  return track;
}

}  // namespace leodet
