#pragma once

#include "leodet/attributable.hpp"
#include "leodet/ukf.hpp"

namespace leodet {

struct MdfConfig {
  int inflation_cap = 10;      // doublings before declaring saturation
  double p_threshold = 0.5;
  bool long_smoothing = true;
};

struct MdfTrackOutcome {
  int track_index = -1;
  double p_manoeuvre = 0.0;    // first evaluation, before any inflation
  double md = 0.0;
  int inflations = 0;
  bool manoeuvre_declared = false;
  bool inflation_saturated = false;
  bool smoothed = false;
  StateEstimate post_state;
  TrackMetrics ukf_metrics;
};

// UKF backbone with an attributable-based manoeuvre check ahead of each
// track: the predicted state is tested against the track's (rho, rhodot)
// attributable, the predicted covariance is doubled until the test passes,
// and the track is then filtered plot by plot from the inflated prior. The
// attributable is never used to update the state. Tracks without a declared
// manoeuvre are followed by a backward/forward smoothing pass across the gap.
class ManoeuvreDetectionFilter {
 public:
  ManoeuvreDetectionFilter(SpacecraftParams model, RadarStation station, UkfConfig ucfg,
                           MdfConfig mcfg, DynamicsConfig dcfg);

  void reset(const StateEstimate& initial);
  MdfTrackOutcome process_track(const RadarTrack& track);

  const StateEstimate& estimate() const { return ukf_.estimate(); }
  const OrbitUkf& ukf() const { return ukf_; }
  OrbitUkf& ukf() { return ukf_; }
  const MdfConfig& config() const { return mcfg_; }

  // Detection stage in isolation: probability and MD of the attributable
  // against the prediction under k covariance doublings.
  struct DetectionProbe {
    double p = 0.0;
    double md = 0.0;
  };
  DetectionProbe probe_attributable(const StateEstimate& from, const Attributable& attr,
                                    int doublings) const;

 private:
  OrbitUkf ukf_;
  MdfConfig mcfg_;
  size_t boundary_step_ = 0;  // history index of the previous track boundary
  bool have_boundary_ = false;
};

}  // namespace leodet
