#include "leodet/config.hpp"

#include <fstream>
#include <json.hpp>

namespace leodet {

namespace {

using nlohmann::json;

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json matrix_to_json(const Matrix6d& m) {
  std::vector<double> flat(36);
  for (int i = 0; i < 6; ++i) {
    for (int k = 0; k < 6; ++k) flat[static_cast<size_t>(6 * i + k)] = m(i, k);
  }
  return json(flat);
}

Matrix6d matrix_from_json(const json& j) {
  const auto flat = j.get<std::vector<double>>();
  if (flat.size() != 36) throw std::invalid_argument("config: expected 36 matrix entries");
  Matrix6d m;
  for (int i = 0; i < 6; ++i) {
    for (int k = 0; k < 6; ++k) m(i, k) = flat[static_cast<size_t>(6 * i + k)];
  }
  return m;
}

json dynamics_to_json(const DynamicsConfig& c) {
  return json{{"mu", c.mu},
              {"earth_radius", c.earth_radius},
              {"j2", c.j2},
              {"enable_j2", c.enable_j2},
              {"enable_drag", c.enable_drag},
              {"atmosphere_rho0", c.atmosphere.rho0},
              {"atmosphere_h0", c.atmosphere.h0},
              {"atmosphere_scale_height", c.atmosphere.scale_height},
              {"integrator_rel_tol", c.integrator.rel_tol},
              {"integrator_abs_tol_pos", c.integrator.abs_tol_pos},
              {"integrator_abs_tol_vel", c.integrator.abs_tol_vel},
              {"integrator_max_step", c.integrator.max_step},
              {"earth_rotation_rate", c.earth_rotation_rate},
              {"reentry_altitude", c.reentry_altitude},
              {"stm_delta_pos", c.stm_delta_pos},
              {"stm_delta_vel", c.stm_delta_vel}};
}

void dynamics_from_json(const json& j, DynamicsConfig& c) {
  maybe(j, "mu", c.mu);
  maybe(j, "earth_radius", c.earth_radius);
  maybe(j, "j2", c.j2);
  maybe(j, "enable_j2", c.enable_j2);
  maybe(j, "enable_drag", c.enable_drag);
  maybe(j, "atmosphere_rho0", c.atmosphere.rho0);
  maybe(j, "atmosphere_h0", c.atmosphere.h0);
  maybe(j, "atmosphere_scale_height", c.atmosphere.scale_height);
  maybe(j, "integrator_rel_tol", c.integrator.rel_tol);
  maybe(j, "integrator_abs_tol_pos", c.integrator.abs_tol_pos);
  maybe(j, "integrator_abs_tol_vel", c.integrator.abs_tol_vel);
  maybe(j, "integrator_max_step", c.integrator.max_step);
  maybe(j, "earth_rotation_rate", c.earth_rotation_rate);
  maybe(j, "reentry_altitude", c.reentry_altitude);
  maybe(j, "stm_delta_pos", c.stm_delta_pos);
  maybe(j, "stm_delta_vel", c.stm_delta_vel);
}

json station_to_json(const RadarStation& s) {
  json j{{"id", s.id},
         {"latitude", s.latitude},
         {"longitude", s.longitude},
         {"altitude", s.altitude},
         {"min_elevation", s.min_elevation},
         {"plot_cadence", s.plot_cadence},
         {"sigma_range", s.sigma_range},
         {"sigma_range_rate", s.sigma_range_rate},
         {"sigma_azimuth", s.sigma_azimuth},
         {"sigma_elevation", s.sigma_elevation}};
  if (s.azimuth_limits) {
    j["azimuth_limits"] = std::vector<double>{(*s.azimuth_limits)[0], (*s.azimuth_limits)[1]};
  }
  return j;
}

void station_from_json(const json& j, RadarStation& s) {
  maybe(j, "id", s.id);
  maybe(j, "latitude", s.latitude);
  maybe(j, "longitude", s.longitude);
  maybe(j, "altitude", s.altitude);
  maybe(j, "min_elevation", s.min_elevation);
  maybe(j, "plot_cadence", s.plot_cadence);
  maybe(j, "sigma_range", s.sigma_range);
  maybe(j, "sigma_range_rate", s.sigma_range_rate);
  maybe(j, "sigma_azimuth", s.sigma_azimuth);
  maybe(j, "sigma_elevation", s.sigma_elevation);
  if (j.contains("azimuth_limits")) {
    if (j.at("azimuth_limits").is_null()) {
      s.azimuth_limits.reset();
    } else {
      const auto v = j.at("azimuth_limits").get<std::vector<double>>();
      if (v.size() != 2) throw std::invalid_argument("config: azimuth_limits needs 2 entries");
      s.azimuth_limits = std::array<double, 2>{v[0], v[1]};
    }
  }
}

json ukf_to_json(const UkfConfig& c) {
  json j{{"q_radial", c.q_radial},
         {"q_along_track", c.q_along_track},
         {"q_cross_track", c.q_cross_track},
         {"process_dt", c.process_dt},
         {"measurement_subset",
          c.subset == MeasurementSubset::kRangeRangeRate ? "range_range_rate" : "all"},
         {"estimate_ballistic", c.estimate_ballistic},
         {"q_ballistic", c.q_ballistic}};
  if (!std::isnan(c.kappa)) j["kappa"] = c.kappa;
  return j;
}

void ukf_from_json(const json& j, UkfConfig& c) {
  maybe(j, "kappa", c.kappa);
  maybe(j, "q_radial", c.q_radial);
  maybe(j, "q_along_track", c.q_along_track);
  maybe(j, "q_cross_track", c.q_cross_track);
  maybe(j, "process_dt", c.process_dt);
  if (j.contains("measurement_subset")) {
    const auto s = j.at("measurement_subset").get<std::string>();
    if (s == "range_range_rate") {
      c.subset = MeasurementSubset::kRangeRangeRate;
    } else if (s == "all") {
      c.subset = MeasurementSubset::kAll;
    } else {
      throw std::invalid_argument("config: unknown measurement_subset " + s);
    }
  }
  maybe(j, "estimate_ballistic", c.estimate_ballistic);
  maybe(j, "q_ballistic", c.q_ballistic);
}

}  // namespace

Config Config::defaults() { return Config{}; }

std::string config_to_json(const Config& cfg) {
  json j;
  j["reference_epoch_iso"] = cfg.reference_epoch_iso;
  j["dynamics"] = dynamics_to_json(cfg.dynamics);
  j["radar"] = station_to_json(cfg.radar);
  j["ukf"] = ukf_to_json(cfg.ukf);
  j["alg1"] = json{{"particles", cfg.alg1.particles},
                   {"decision_threshold", cfg.alg1.decision_threshold},
                   {"max_drop_fraction", cfg.alg1.max_drop_fraction},
                   {"measurement_subset", cfg.alg1.subset == MeasurementSubset::kRangeRangeRate
                                              ? "range_range_rate"
                                              : "all"}};
  j["alg2"] = json{{"legs", cfg.alg2.legs},
                   {"samples", cfg.alg2.samples},
                   {"baseline_replicates", cfg.alg2.baseline_replicates},
                   {"grid_points", cfg.alg2.grid_points},
                   {"decision_threshold", cfg.alg2.decision_threshold},
                   {"max_drop_fraction", cfg.alg2.max_drop_fraction}};
  j["mdf"] = json{{"inflation_cap", cfg.mdf.inflation_cap},
                  {"p_threshold", cfg.mdf.p_threshold},
                  {"long_smoothing", cfg.mdf.long_smoothing}};
  j["harness"] = json{{"ra_init_sigma_pos", cfg.harness.ra_init_sigma_pos},
                      {"ra_init_sigma_vel", cfg.harness.ra_init_sigma_vel},
                      {"perturb_initial", cfg.harness.perturb_initial},
                      {"anchor_fraction", cfg.harness.anchor_fraction},
                      {"truth_sample_dt", cfg.harness.truth_sample_dt},
                      {"psi_threshold", cfg.harness.psi_threshold},
                      {"filter_initial_cov_lvlh",
                       matrix_to_json(cfg.harness.filter_initial_cov_lvlh)},
                      {"filter_initial_cov_scale", cfg.harness.filter_initial_cov_scale}};
  return j.dump(2);
}

Config config_from_json(const std::string& text) {
  const json j = json::parse(text);
  Config cfg;
  maybe(j, "reference_epoch_iso", cfg.reference_epoch_iso);
  if (j.contains("dynamics")) dynamics_from_json(j.at("dynamics"), cfg.dynamics);
  if (j.contains("radar")) station_from_json(j.at("radar"), cfg.radar);
  if (j.contains("ukf")) ukf_from_json(j.at("ukf"), cfg.ukf);
  if (j.contains("alg1")) {
    const json& a = j.at("alg1");
    maybe(a, "particles", cfg.alg1.particles);
    maybe(a, "decision_threshold", cfg.alg1.decision_threshold);
    maybe(a, "max_drop_fraction", cfg.alg1.max_drop_fraction);
    if (a.contains("measurement_subset")) {
      cfg.alg1.subset = a.at("measurement_subset").get<std::string>() == "all"
                            ? MeasurementSubset::kAll
                            : MeasurementSubset::kRangeRangeRate;
    }
  }
  if (j.contains("alg2")) {
    const json& a = j.at("alg2");
    maybe(a, "legs", cfg.alg2.legs);
    maybe(a, "samples", cfg.alg2.samples);
    maybe(a, "baseline_replicates", cfg.alg2.baseline_replicates);
    maybe(a, "grid_points", cfg.alg2.grid_points);
    maybe(a, "decision_threshold", cfg.alg2.decision_threshold);
    maybe(a, "max_drop_fraction", cfg.alg2.max_drop_fraction);
  }
  if (j.contains("mdf")) {
    const json& a = j.at("mdf");
    maybe(a, "inflation_cap", cfg.mdf.inflation_cap);
    maybe(a, "p_threshold", cfg.mdf.p_threshold);
    maybe(a, "long_smoothing", cfg.mdf.long_smoothing);
  }
  if (j.contains("harness")) {
    const json& a = j.at("harness");
    maybe(a, "ra_init_sigma_pos", cfg.harness.ra_init_sigma_pos);
    maybe(a, "ra_init_sigma_vel", cfg.harness.ra_init_sigma_vel);
    maybe(a, "perturb_initial", cfg.harness.perturb_initial);
    maybe(a, "anchor_fraction", cfg.harness.anchor_fraction);
    maybe(a, "truth_sample_dt", cfg.harness.truth_sample_dt);
    maybe(a, "psi_threshold", cfg.harness.psi_threshold);
    if (a.contains("filter_initial_cov_lvlh")) {
      cfg.harness.filter_initial_cov_lvlh = matrix_from_json(a.at("filter_initial_cov_lvlh"));
    }
    maybe(a, "filter_initial_cov_scale", cfg.harness.filter_initial_cov_scale);
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_config: cannot open " + path);
  }
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json(text);
}

void save_config(const Config& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_config: cannot open " + path);
  }
  out << config_to_json(cfg) << "\n";
}

}  // namespace leodet
