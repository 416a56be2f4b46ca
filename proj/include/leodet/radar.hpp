#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "leodet/dynamics.hpp"

namespace leodet {

struct RadarStation {
  std::string id = "station-0";
  double latitude = 0.6475;        // rad, geodetic
  double longitude = -0.0977;      // rad
  double altitude = 100.0;         // m
  double min_elevation = 0.08727;  // rad (5 deg)
  double plot_cadence = 10.0;      // s
  double sigma_range = 10.0;       // m
  double sigma_range_rate = 0.5;   // m/s
  double sigma_azimuth = 3.4907e-3;    // rad (0.2 deg)
  double sigma_elevation = 3.4907e-3;  // rad (0.2 deg)
  // Field-of-regard wedge [min, max] in azimuth; may wrap through 0.
  std::optional<std::array<double, 2>> azimuth_limits;
};

struct RadarObservation {
  double range = 0.0;       // m
  double range_rate = 0.0;  // m/s
  double azimuth = 0.0;     // rad, clockwise from North in [0, 2*pi)
  double elevation = 0.0;   // rad from local horizon
};

struct RadarPlot {
  double epoch = 0.0;
  double range = 0.0;
  double range_rate = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
  double sigma_range = 10.0;
  double sigma_range_rate = 0.5;
  double sigma_azimuth = 3.4907e-3;
  double sigma_elevation = 3.4907e-3;
};

struct RadarTrack {
  std::string station_id;
  std::vector<RadarPlot> plots;

  double first_epoch() const { return plots.front().epoch; }
  double last_epoch() const { return plots.back().epoch; }
  double mid_epoch() const { return 0.5 * (first_epoch() + last_epoch()); }
  double span() const { return last_epoch() - first_epoch(); }
};

struct PassWindow {
  double t_rise = 0.0;
  double t_set = 0.0;
  double duration() const { return t_set - t_rise; }
};

// Station position/velocity and local East/North/Up axes in the inertial
// frame at a given epoch (uniform Earth rotation about +z).
struct StationFrame {
  Eigen::Vector3d position;
  Eigen::Vector3d velocity;
  Eigen::Vector3d east;
  Eigen::Vector3d north;
  Eigen::Vector3d up;
};
StationFrame station_frame(const RadarStation& st, double epoch, const DynamicsConfig& cfg);

// Geometric radar observables; no visibility filtering.
RadarObservation observe(const InertialState& x, const RadarStation& st,
                         const DynamicsConfig& cfg);

bool azimuth_within_limits(double azimuth, const RadarStation& st);

// Visibility intervals over [t0, t1]: elevation above the mask and azimuth
// inside the field of regard; 10 s scan refined by bisection to 0.1 s.
std::vector<PassWindow> find_passes(const Ephemeris& traj, const RadarStation& st, double t0,
                                    double t1, const DynamicsConfig& cfg);

class TrackSynthesisError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Noisy plots at the station cadence across a pass; deterministic per seed.
RadarTrack synthesize_track(const Ephemeris& truth, const RadarStation& st,
                            const PassWindow& pass, uint64_t seed, const DynamicsConfig& cfg);

}  // namespace leodet
