#include "leodet/io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace leodet {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

template <typename T>
void put_opt(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
void get_opt(const json& j, const char* key, std::optional<T>& v) {
  if (j.contains(key)) v = j.at(key).get<T>();
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

std::string track_to_csv(const RadarTrack& track, const TimeScale& ts) {
  std::string out =
      "epoch_iso,range_m,range_rate_mps,azimuth_rad,elevation_rad,"
      "sigma_range_m,sigma_rr_mps,sigma_az_rad,sigma_el_rad\n";
  for (const RadarPlot& p : track.plots) {
    out += ts.to_iso(p.epoch) + "," + fmt(p.range) + "," + fmt(p.range_rate) + "," +
           fmt(p.azimuth) + "," + fmt(p.elevation) + "," + fmt(p.sigma_range) + "," +
           fmt(p.sigma_range_rate) + "," + fmt(p.sigma_azimuth) + "," + fmt(p.sigma_elevation) +
           "\n";
  }
  return out;
}

RadarTrack track_from_csv(const std::string& text, const TimeScale& ts) {
  const auto rows = lines_of(text);
  if (rows.size() < 2) throw std::runtime_error("track_from_csv: no data rows");
  RadarTrack track;
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i], ',');
    if (f.size() != 9) throw std::runtime_error("track_from_csv: expected 9 columns");
    RadarPlot p;
    p.epoch = ts.to_epoch(f[0]);
    p.range = std::stod(f[1]);
    p.range_rate = std::stod(f[2]);
    p.azimuth = std::stod(f[3]);
    p.elevation = std::stod(f[4]);
    p.sigma_range = std::stod(f[5]);
    p.sigma_range_rate = std::stod(f[6]);
    p.sigma_azimuth = std::stod(f[7]);
    p.sigma_elevation = std::stod(f[8]);
    track.plots.push_back(p);
  }
  return track;
}

void write_track_csv(const std::string& path, const RadarTrack& track, const TimeScale& ts) {
  write_text_file(path, track_to_csv(track, ts));
}

RadarTrack read_track_csv(const std::string& path, const TimeScale& ts) {
  return track_from_csv(read_text_file(path), ts);
}

std::string attributable_to_json(const Attributable& a, const TimeScale& ts) {
  std::vector<double> cov(16);
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) cov[static_cast<size_t>(4 * i + k)] = a.cov(i, k);
  }
  const json j{{"t0_iso", ts.to_iso(a.t0)},     {"rho0_m", a.rho0},
               {"el0_rad", a.el0},              {"az0_rad", a.az0},
               {"rhodot0_mps", a.rhodot0},      {"cov_rowmajor_4x4", cov},
               {"order", a.order},              {"n_plots", a.n_plots},
               {"low_quality", a.low_quality}};
  return j.dump();
}

Attributable attributable_from_json(const std::string& text, const TimeScale& ts) {
  const json j = json::parse(text);
  Attributable a;
  a.t0 = ts.to_epoch(j.at("t0_iso").get<std::string>());
  a.rho0 = j.at("rho0_m").get<double>();
  a.el0 = j.at("el0_rad").get<double>();
  a.az0 = j.at("az0_rad").get<double>();
  a.rhodot0 = j.at("rhodot0_mps").get<double>();
  const auto cov = j.at("cov_rowmajor_4x4").get<std::vector<double>>();
  if (cov.size() != 16) throw std::runtime_error("attributable_from_json: covariance size");
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) a.cov(i, k) = cov[static_cast<size_t>(4 * i + k)];
  }
  a.order = j.at("order").get<int>();
  a.n_plots = j.at("n_plots").get<int>();
  a.low_quality = j.at("low_quality").get<bool>();
  return a;
}

std::string state_to_json(const StateEstimate& est, const TimeScale& ts) {
  const auto n = est.x.size();
  std::vector<double> x(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) x[static_cast<size_t>(i)] = est.x[i];
  std::vector<double> cov(static_cast<size_t>(n * n));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) cov[static_cast<size_t>(n * i + k)] = est.cov(i, k);
  }
  const json j{{"epoch_iso", ts.to_iso(est.epoch)}, {"x", x}, {"cov_rowmajor", cov}};
  return j.dump();
}

StateEstimate state_from_json(const std::string& text, const TimeScale& ts) {
  const json j = json::parse(text);
  StateEstimate est;
  est.epoch = ts.to_epoch(j.at("epoch_iso").get<std::string>());
  const auto x = j.at("x").get<std::vector<double>>();
  const auto n = static_cast<Eigen::Index>(x.size());
  est.x.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) est.x[i] = x[static_cast<size_t>(i)];
  const auto cov = j.at("cov_rowmajor").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(cov.size()) != n * n) {
    throw std::runtime_error("state_from_json: covariance size");
  }
  est.cov.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) est.cov(i, k) = cov[static_cast<size_t>(n * i + k)];
  }
  return est;
}

std::string ephemeris_to_csv(const std::vector<InertialState>& states, const TimeScale& ts) {
  std::string out = "epoch_iso,rx_m,ry_m,rz_m,vx_mps,vy_mps,vz_mps\n";
  for (const InertialState& s : states) {
    out += ts.to_iso(s.epoch) + "," + fmt(s.r.x()) + "," + fmt(s.r.y()) + "," + fmt(s.r.z()) +
           "," + fmt(s.v.x()) + "," + fmt(s.v.y()) + "," + fmt(s.v.z()) + "\n";
  }
  return out;
}

std::vector<InertialState> ephemeris_from_csv(const std::string& text, const TimeScale& ts) {
  const auto rows = lines_of(text);
  std::vector<InertialState> out;
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto f = split(rows[i], ',');
    if (f.size() != 7) throw std::runtime_error("ephemeris_from_csv: expected 7 columns");
    InertialState s;
    s.epoch = ts.to_epoch(f[0]);
    s.r << std::stod(f[1]), std::stod(f[2]), std::stod(f[3]);
    s.v << std::stod(f[4]), std::stod(f[5]), std::stod(f[6]);
    out.push_back(s);
  }
  return out;
}

std::string scenario_to_json(const ScenarioSpec& spec) {
  json j;
  j["schema_version"] = spec.schema_version;
  j["id"] = spec.id;
  j["reference_epoch_iso"] = spec.reference_epoch_iso;
  j["t_start"] = spec.t_start;
  j["t_end"] = spec.t_end;
  j["elements"] = json{{"semi_major_axis", spec.elements.semi_major_axis},
                       {"eccentricity", spec.elements.eccentricity},
                       {"inclination", spec.elements.inclination},
                       {"raan", spec.elements.raan},
                       {"arg_perigee", spec.elements.arg_perigee},
                       {"true_anomaly", spec.elements.true_anomaly}};
  j["elements_epoch"] = spec.elements_epoch;
  auto params_json = [](const SpacecraftParams& p) {
    return json{{"mass_kg", p.mass_kg},
                {"drag_coeff", p.drag_coeff},
                {"drag_area_m2", p.drag_area_m2},
                {"srp_area_m2", p.srp_area_m2}};
  };
  j["truth_params"] = params_json(spec.truth_params);
  j["model_params"] = params_json(spec.model_params);
  j["manoeuvres"] = json::array();
  for (const ManoeuvreSpec& m : spec.manoeuvres) {
    j["manoeuvres"].push_back(json{
        {"start_epoch", m.start_epoch},
        {"duration", m.duration},
        {"accel_lvlh", std::vector<double>{m.accel_lvlh.x(), m.accel_lvlh.y(), m.accel_lvlh.z()}},
    });
  }
  j["seed"] = spec.seed;
  j["tags"] = json{{"intensity", spec.tags.intensity},
                   {"offset", spec.tags.offset},
                   {"direction", spec.tags.direction}};
  return j.dump(2);
}

ScenarioSpec scenario_from_json(const std::string& text) {
  const json j = json::parse(text);
  ScenarioSpec spec;
  if (j.contains("schema_version")) spec.schema_version = j.at("schema_version").get<int>();
  if (spec.schema_version != 1) {
    throw std::runtime_error("scenario_from_json: unsupported schema_version");
  }
  spec.id = j.at("id").get<std::string>();
  if (j.contains("reference_epoch_iso")) {
    spec.reference_epoch_iso = j.at("reference_epoch_iso").get<std::string>();
  }
  spec.t_start = j.at("t_start").get<double>();
  spec.t_end = j.at("t_end").get<double>();
  const json& el = j.at("elements");
  spec.elements.semi_major_axis = el.at("semi_major_axis").get<double>();
  spec.elements.eccentricity = el.at("eccentricity").get<double>();
  spec.elements.inclination = el.at("inclination").get<double>();
  spec.elements.raan = el.at("raan").get<double>();
  spec.elements.arg_perigee = el.at("arg_perigee").get<double>();
  spec.elements.true_anomaly = el.at("true_anomaly").get<double>();
  if (j.contains("elements_epoch")) spec.elements_epoch = j.at("elements_epoch").get<double>();
  auto params_from = [](const json& p) {
    SpacecraftParams out;
    out.mass_kg = p.at("mass_kg").get<double>();
    out.drag_coeff = p.at("drag_coeff").get<double>();
    out.drag_area_m2 = p.at("drag_area_m2").get<double>();
    if (p.contains("srp_area_m2")) out.srp_area_m2 = p.at("srp_area_m2").get<double>();
    return out;
  };
  spec.truth_params = params_from(j.at("truth_params"));
  spec.model_params = params_from(j.at("model_params"));
  if (j.contains("manoeuvres")) {
    for (const json& m : j.at("manoeuvres")) {
      ManoeuvreSpec ms;
      ms.start_epoch = m.at("start_epoch").get<double>();
      ms.duration = m.at("duration").get<double>();
      const auto a = m.at("accel_lvlh").get<std::vector<double>>();
      if (a.size() != 3) throw std::runtime_error("scenario_from_json: accel_lvlh size");
      ms.accel_lvlh << a[0], a[1], a[2];
      spec.manoeuvres.push_back(ms);
    }
  }
  if (j.contains("seed")) spec.seed = j.at("seed").get<uint64_t>();
  if (j.contains("tags")) {
    const json& t = j.at("tags");
    if (t.contains("intensity")) spec.tags.intensity = t.at("intensity").get<std::string>();
    if (t.contains("offset")) spec.tags.offset = t.at("offset").get<std::string>();
    if (t.contains("direction")) spec.tags.direction = t.at("direction").get<std::string>();
  }
  return spec;
}

std::string record_to_jsonl(const SegmentRecord& r) {
  json j;
  j["scenario_id"] = r.scenario_id;
  j["segment_id"] = r.segment_id;
  j["truth_label"] = r.truth_label;
  put_opt(j, "alg1_md", r.alg1_md);
  put_opt(j, "alg1_pr_md", r.alg1_pr_md);
  put_opt(j, "alg1_decision", r.alg1_decision);
  put_opt(j, "alg1_dropped", r.alg1_dropped);
  put_opt(j, "J_median", r.j_median);
  put_opt(j, "P1M", r.p1m);
  put_opt(j, "P5M", r.p5m);
  put_opt(j, "P8M", r.p8m);
  put_opt(j, "P1D", r.p1d);
  put_opt(j, "P5D", r.p5d);
  put_opt(j, "P8D", r.p8d);
  put_opt(j, "decision", r.alg2_decision);
  put_opt(j, "ukf_psi_first", r.ukf_psi_first);
  put_opt(j, "ukf_psi_max", r.ukf_psi_max);
  put_opt(j, "ukf_psi_agg", r.ukf_psi_agg);
  put_opt(j, "ukf_p", r.ukf_p);
  put_opt(j, "ukf_decision", r.ukf_decision);
  put_opt(j, "mdf_p", r.mdf_p);
  put_opt(j, "mdf_inflations", r.mdf_inflations);
  put_opt(j, "mdf_decision", r.mdf_decision);
  put_opt(j, "mdf_smoothed", r.mdf_smoothed);
  return j.dump();
}

SegmentRecord record_from_jsonl(const std::string& line) {
  const json j = json::parse(line);
  SegmentRecord r;
  r.scenario_id = j.at("scenario_id").get<std::string>();
  r.segment_id = j.at("segment_id").get<int>();
  r.truth_label = j.at("truth_label").get<bool>();
  get_opt(j, "alg1_md", r.alg1_md);
  get_opt(j, "alg1_pr_md", r.alg1_pr_md);
  get_opt(j, "alg1_decision", r.alg1_decision);
  get_opt(j, "alg1_dropped", r.alg1_dropped);
  get_opt(j, "J_median", r.j_median);
  get_opt(j, "P1M", r.p1m);
  get_opt(j, "P5M", r.p5m);
  get_opt(j, "P8M", r.p8m);
  get_opt(j, "P1D", r.p1d);
  get_opt(j, "P5D", r.p5d);
  get_opt(j, "P8D", r.p8d);
  get_opt(j, "decision", r.alg2_decision);
  get_opt(j, "ukf_psi_first", r.ukf_psi_first);
  get_opt(j, "ukf_psi_max", r.ukf_psi_max);
  get_opt(j, "ukf_psi_agg", r.ukf_psi_agg);
  get_opt(j, "ukf_p", r.ukf_p);
  get_opt(j, "ukf_decision", r.ukf_decision);
  get_opt(j, "mdf_p", r.mdf_p);
  get_opt(j, "mdf_inflations", r.mdf_inflations);
  get_opt(j, "mdf_decision", r.mdf_decision);
  get_opt(j, "mdf_smoothed", r.mdf_smoothed);
  return r;
}

void write_report_jsonl(const std::string& path, const DetectionReport& report) {
  std::string out;
  for (const SegmentRecord& r : report.records) {
    out += record_to_jsonl(r) + "\n";
  }
  write_text_file(path, out);
}

DetectionReport read_report_jsonl(const std::string& path) {
  DetectionReport report;
  for (const std::string& line : lines_of(read_text_file(path))) {
    report.records.push_back(record_from_jsonl(line));
  }
  return report;
}

std::string run_log_to_csv(const std::vector<RunLogRow>& rows, const TimeScale& ts,
                           bool mdf_columns) {
  std::string out = "epoch_iso,err_pos_m,psi_i,nu_rho_m,nu_rhodot_mps,trace_P_pos,trace_P_vel";
  if (mdf_columns) out += ",p_manoeuvre,inflations,smoothed";
  out += "\n";
  for (const RunLogRow& r : rows) {
    out += ts.to_iso(r.epoch) + ",";
    out += (r.err_pos_m ? fmt(*r.err_pos_m) : "") + std::string(",");
    out += fmt(r.psi) + "," + fmt(r.nu_rho_m) + "," + fmt(r.nu_rhodot_mps) + "," +
           fmt(r.trace_p_pos) + "," + fmt(r.trace_p_vel);
    if (mdf_columns) {
      out += ",";
      out += (r.p_manoeuvre ? fmt(*r.p_manoeuvre) : "") + std::string(",");
      out += (r.inflations ? std::to_string(*r.inflations) : "") + std::string(",");
      out += r.smoothed ? (*r.smoothed ? "1" : "0") : "";
    }
    out += "\n";
  }
  return out;
}

}  // namespace leodet
