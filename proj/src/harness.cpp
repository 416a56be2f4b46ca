#include "leodet/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "leodet/statkit.hpp"

namespace leodet {

namespace {

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  // splitmix64 over the combined value; decorrelates derived streams.
  uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Matrix6d lvlh_cov_to_inertial(const Matrix6d& cov_lvlh, const InertialState& at) {
  const Eigen::Matrix3d rot = lvlh_basis(at);
  Matrix6d t = Matrix6d::Zero();
  t.block<3, 3>(0, 0) = rot;
  t.block<3, 3>(3, 3) = rot;
  return t * cov_lvlh * t.transpose();
}

Matrix6d ra_initial_cov_lvlh(const HarnessConfig& h) {
  Vector6d d;
  d << h.ra_init_sigma_pos * h.ra_init_sigma_pos, h.ra_init_sigma_pos * h.ra_init_sigma_pos,
      h.ra_init_sigma_pos * h.ra_init_sigma_pos, h.ra_init_sigma_vel * h.ra_init_sigma_vel,
      h.ra_init_sigma_vel * h.ra_init_sigma_vel, h.ra_init_sigma_vel * h.ra_init_sigma_vel;
  return d.asDiagonal();
}

StateEstimate initial_estimate(const Ephemeris& truth, double epoch, const Matrix6d& cov_lvlh,
                               bool perturb, uint64_t seed) {
  const InertialState x_true = truth.at(epoch);
  const Matrix6d cov = lvlh_cov_to_inertial(cov_lvlh, x_true);

  StateEstimate est;
  est.epoch = epoch;
  est.x = x_true.vec();
  est.cov = cov;
  if (perturb) {
    std::mt19937_64 rng(seed);
    est.x = sample_gaussian({est.x, est.cov}, 1, rng).col(0);
  }
  return est;
}

GeneratedScenario generate_scenario(const ScenarioSpec& spec, const Config& cfg) {
  GeneratedScenario gen;
  gen.station = spec.station.value_or(cfg.radar);

  InertialState x0 = state_from_elements(spec.elements, spec.elements_epoch, cfg.dynamics.mu);
  gen.truth = std::make_shared<Ephemeris>(x0, spec.truth_params, spec.manoeuvres, cfg.dynamics,
                                          spec.t_start, spec.t_end, cfg.harness.truth_sample_dt);

  const std::vector<PassWindow> passes =
      find_passes(*gen.truth, gen.station, spec.t_start, spec.t_end, cfg.dynamics);
  for (size_t i = 0; i < passes.size(); ++i) {
    if (passes[i].duration() < 2.0 * gen.station.plot_cadence) continue;
    gen.tracks.push_back(synthesize_track(*gen.truth, gen.station, passes[i],
                                          mix_seed(spec.seed, i), cfg.dynamics));
  }
  if (gen.tracks.empty()) {
    throw ScenarioError("generate_scenario: no usable passes in the scenario span");
  }

  for (size_t i = 1; i < gen.tracks.size(); ++i) {
    SegmentInfo seg;
    seg.index = static_cast<int>(i);
    seg.t_begin = gen.tracks[i - 1].last_epoch();
    seg.t_mid = gen.tracks[i].mid_epoch();
    seg.truth_label = false;
    for (const ManoeuvreSpec& m : spec.manoeuvres) {
      if (m.end_epoch() > seg.t_begin && m.start_epoch <= seg.t_mid) {
        seg.truth_label = true;
      }
    }
    gen.segments.push_back(seg);
  }
  return gen;
}

std::vector<ScenarioSpec> make_grid(const ScenarioSpec& base, const Config& cfg) {
  if (!base.manoeuvres.empty()) {
    throw std::invalid_argument("make_grid: base spec must be manoeuvre-free");
  }
  const Config* c = &cfg;
  const RadarStation station = base.station.value_or(c->radar);
  const InertialState x0 =
      state_from_elements(base.elements, base.elements_epoch, cfg.dynamics.mu);
  const Ephemeris truth(x0, base.truth_params, {}, cfg.dynamics, base.t_start, base.t_end,
                        cfg.harness.truth_sample_dt);
  const std::vector<PassWindow> passes =
      find_passes(truth, station, base.t_start, base.t_end, cfg.dynamics);

  const double t_anchor_min =
      base.t_start + cfg.harness.anchor_fraction * (base.t_end - base.t_start);
  double anchor_mid = -1.0;
  size_t anchor_index = 0;
  for (size_t i = 0; i < passes.size(); ++i) {
    if (passes[i].duration() < 2.0 * station.plot_cadence) continue;
    const double mid = 0.5 * (passes[i].t_rise + passes[i].t_set);
    if (mid >= t_anchor_min) {
      anchor_mid = mid;
      anchor_index = i;
      break;
    }
  }
  if (anchor_mid < 0.0 || anchor_index == 0) {
    throw ScenarioError("make_grid: no anchor pass with a preceding track");
  }

  constexpr double kAccel = 1e-3;  // m/s^2
  const std::vector<std::pair<std::string, double>> intensities = {
      {"low", 5.0}, {"medium", 30.0}, {"high", 120.0}};
  const std::vector<std::pair<std::string, double>> offsets = {
      {"2h", 7200.0}, {"6h", 21600.0}, {"12h", 43200.0}};
  const std::vector<std::pair<std::string, Eigen::Vector3d>> directions = {
      {"T", {0.0, 1.0, 0.0}},
      {"OOP", {0.0, 0.0, 1.0}},
      {"hybrid", {0.0, 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)}}};

  std::vector<ScenarioSpec> grid;
  ScenarioSpec clean = base;
  clean.id = base.id + "-clean";
  clean.tags = {"none", "", ""};
  grid.push_back(clean);

  for (const auto& [dname, dvec] : directions) {
    for (const auto& [iname, duration] : intensities) {
      for (const auto& [oname, offset] : offsets) {
        ScenarioSpec s = base;
        s.id = base.id + "-" + dname + "-" + iname + "-" + oname;
        s.tags = {iname, oname, dname};
        ManoeuvreSpec m;
        m.start_epoch = anchor_mid - offset;
        m.duration = duration;
        m.accel_lvlh = kAccel * dvec;
        s.manoeuvres.push_back(m);
        grid.push_back(s);
      }
    }
  }
  return grid;
}

DetectionReport run_campaign(std::span<const ScenarioSpec> specs, const CampaignOptions& opt,
                             const Config& cfg) {
  std::map<std::pair<std::string, int>, SegmentRecord> records;

  for (const ScenarioSpec& spec : specs) {
    const GeneratedScenario gen = generate_scenario(spec, cfg);
    const Matrix6d ra_cov = ra_initial_cov_lvlh(cfg.harness);

    auto record_of = [&records, &spec](int segment_id, bool truth_label) -> SegmentRecord& {
      SegmentRecord& r = records[{spec.id, segment_id}];
      r.scenario_id = spec.id;
      r.segment_id = segment_id;
      r.truth_label = truth_label;
      return r;
    };

    if (opt.run_alg1 || opt.run_alg2) {
      for (const SegmentInfo& seg : gen.segments) {
        const RadarTrack& track = gen.tracks[static_cast<size_t>(seg.index)];
        const StateEstimate est =
            initial_estimate(*gen.truth, seg.t_begin, ra_cov, cfg.harness.perturb_initial,
                             mix_seed(spec.seed, 1000 + static_cast<uint64_t>(seg.index)));
        SegmentRecord& rec = record_of(seg.index, seg.truth_label);
        if (opt.run_alg1) {
          const Alg1Result res =
              detect_alg1(est, track, gen.station, spec.model_params, cfg.alg1, cfg.dynamics,
                          mix_seed(spec.seed, 2000 + static_cast<uint64_t>(seg.index)));
          rec.alg1_md = res.md;
          rec.alg1_pr_md = res.pr_md;
          rec.alg1_decision = res.decision;
          rec.alg1_dropped = res.dropped_particles;
        }
        if (opt.run_alg2) {
          const Alg2Result res =
              detect_alg2(est, track, gen.station, spec.model_params, cfg.alg2, cfg.dynamics,
                          mix_seed(spec.seed, 3000 + static_cast<uint64_t>(seg.index)));
          rec.j_median = res.j_median;
          rec.p1m = res.metrics.p1m;
          rec.p5m = res.metrics.p5m;
          rec.p8m = res.metrics.p8m;
          rec.p1d = res.metrics.p1d;
          rec.p5d = res.metrics.p5d;
          rec.p8d = res.metrics.p8d;
          rec.alg2_decision = res.decision;
        }
      }
    }

    const Matrix6d filter_cov =
        cfg.harness.filter_initial_cov_scale * cfg.harness.filter_initial_cov_lvlh;
    if (opt.run_ukf) {
      OrbitUkf filter(spec.model_params, gen.station, cfg.ukf, cfg.dynamics);
      filter.reset(initial_estimate(*gen.truth, spec.t_start, filter_cov,
                                    cfg.harness.perturb_initial, mix_seed(spec.seed, 4000)));
      for (size_t i = 0; i < gen.tracks.size(); ++i) {
        const TrackRunResult run = filter.process_track(gen.tracks[i]);
        if (i == 0) continue;  // no segment ends at the first track
        const SegmentInfo& seg = gen.segments[i - 1];
        SegmentRecord& rec = record_of(seg.index, seg.truth_label);
        rec.ukf_psi_first = run.metrics.psi_first;
        rec.ukf_psi_max = run.metrics.psi_max;
        rec.ukf_psi_agg = run.metrics.psi_agg;
        rec.ukf_p = run.metrics.p_manoeuvre;
        rec.ukf_decision = run.metrics.p_manoeuvre >= cfg.harness.psi_threshold;
      }
    }
    if (opt.run_mdf) {
      ManoeuvreDetectionFilter filter(spec.model_params, gen.station, cfg.ukf, cfg.mdf,
                                      cfg.dynamics);
      filter.reset(initial_estimate(*gen.truth, spec.t_start, filter_cov,
                                    cfg.harness.perturb_initial, mix_seed(spec.seed, 4000)));
      for (size_t i = 0; i < gen.tracks.size(); ++i) {
        const MdfTrackOutcome outcome = filter.process_track(gen.tracks[i]);
        if (i == 0) continue;
        const SegmentInfo& seg = gen.segments[i - 1];
        SegmentRecord& rec = record_of(seg.index, seg.truth_label);
        rec.mdf_p = outcome.p_manoeuvre;
        rec.mdf_inflations = outcome.inflations;
        rec.mdf_decision = outcome.manoeuvre_declared;
        rec.mdf_smoothed = outcome.smoothed;
      }
    }
  }

  DetectionReport report;
  report.records.reserve(records.size());
  for (auto& [key, rec] : records) {
    report.records.push_back(std::move(rec));
  }
  return report;
}

std::map<std::string, std::map<std::string, DetectorRates>> DetectionReport::rates() const {
  std::map<std::string, std::map<std::string, DetectorRates>> out;
  auto tally = [&out](const std::string& scenario, const std::string& detector, bool truth,
                      bool decision) {
    for (const std::string& key : {scenario, std::string()}) {
      DetectorRates& r = out[key][detector];
      if (truth) {
        ++r.manoeuvred;
        if (decision) ++r.detected;
      } else {
        ++r.clean;
        if (decision) ++r.false_positives;
      }
    }
  };
  for (const SegmentRecord& rec : records) {
    if (rec.alg1_decision) tally(rec.scenario_id, "alg1", rec.truth_label, *rec.alg1_decision);
    if (rec.alg2_decision) tally(rec.scenario_id, "alg2", rec.truth_label, *rec.alg2_decision);
    if (rec.ukf_decision) tally(rec.scenario_id, "ukf", rec.truth_label, *rec.ukf_decision);
    if (rec.mdf_decision) tally(rec.scenario_id, "mdf", rec.truth_label, *rec.mdf_decision);
  }
  return out;
}

namespace {

constexpr const char* kCsvHeader =
    "scenario_id,segment_id,truth_label,alg1_md,alg1_pr_md,alg1_decision,alg1_dropped,"
    "J_median,P1M,P5M,P8M,P1D,P5D,P8D,decision,"
    "ukf_psi_first,ukf_psi_max,ukf_psi_agg,ukf_p,ukf_decision,"
    "mdf_p,mdf_inflations,mdf_decision,mdf_smoothed,"
    "detector,manoeuvred,detected,clean,false_positives";

std::string opt_num(const std::optional<double>& v) { return v ? fmt(*v) : ""; }
std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : ""; }
std::string opt_bool(const std::optional<bool>& v) { return v ? (*v ? "1" : "0") : ""; }

}  // namespace

std::string render_report_csv(const DetectionReport& report) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const SegmentRecord& r : report.records) {
    out += r.scenario_id + "," + std::to_string(r.segment_id) + "," +
           (r.truth_label ? "1" : "0") + "," + opt_num(r.alg1_md) + "," +
           opt_num(r.alg1_pr_md) + "," + opt_bool(r.alg1_decision) + "," +
           opt_int(r.alg1_dropped) + "," + opt_num(r.j_median) + "," + opt_num(r.p1m) + "," +
           opt_num(r.p5m) + "," + opt_num(r.p8m) + "," + opt_num(r.p1d) + "," + opt_num(r.p5d) +
           "," + opt_num(r.p8d) + "," + opt_bool(r.alg2_decision) + "," +
           opt_num(r.ukf_psi_first) + "," + opt_num(r.ukf_psi_max) + "," +
           opt_num(r.ukf_psi_agg) + "," + opt_num(r.ukf_p) + "," + opt_bool(r.ukf_decision) +
           "," + opt_num(r.mdf_p) + "," + opt_int(r.mdf_inflations) + "," +
           opt_bool(r.mdf_decision) + "," + opt_bool(r.mdf_smoothed) + ",,,,,\n";
  }
  // One totals row per detector over all scenarios.
  const auto all = report.rates();
  if (const auto it = all.find(std::string()); it != all.end()) {
    for (const auto& [detector, r] : it->second) {
      out += "totals,-1,0,,,,,,,,,,,,,,,,,,,,,," + detector + "," +
             std::to_string(r.manoeuvred) + "," + std::to_string(r.detected) + "," +
             std::to_string(r.clean) + "," + std::to_string(r.false_positives) + "\n";
    }
  }
  return out;
}

DetectionReport parse_report_csv(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  if (!std::getline(ss, line)) {
    throw std::runtime_error("parse_report_csv: empty input");
  }
  DetectionReport report;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    f.push_back(cur);
    if (f.size() != 29) throw std::runtime_error("parse_report_csv: expected 29 columns");
    if (f[0] == "totals") continue;
    SegmentRecord r;
    r.scenario_id = f[0];
    r.segment_id = std::stoi(f[1]);
    r.truth_label = f[2] == "1";
    auto num = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    auto integer = [](const std::string& s) -> std::optional<int> {
      if (s.empty()) return std::nullopt;
      return std::stoi(s);
    };
    auto boolean = [](const std::string& s) -> std::optional<bool> {
      if (s.empty()) return std::nullopt;
      return s == "1";
    };
    r.alg1_md = num(f[3]);
    r.alg1_pr_md = num(f[4]);
    r.alg1_decision = boolean(f[5]);
    r.alg1_dropped = integer(f[6]);
    r.j_median = num(f[7]);
    r.p1m = num(f[8]);
    r.p5m = num(f[9]);
    r.p8m = num(f[10]);
    r.p1d = num(f[11]);
    r.p5d = num(f[12]);
    r.p8d = num(f[13]);
    r.alg2_decision = boolean(f[14]);
    r.ukf_psi_first = num(f[15]);
    r.ukf_psi_max = num(f[16]);
    r.ukf_psi_agg = num(f[17]);
    r.ukf_p = num(f[18]);
    r.ukf_decision = boolean(f[19]);
    r.mdf_p = num(f[20]);
    r.mdf_inflations = integer(f[21]);
    r.mdf_decision = boolean(f[22]);
    r.mdf_smoothed = boolean(f[23]);
    report.records.push_back(std::move(r));
  }
  return report;
}

std::string render_report_markdown(const DetectionReport& report) {
  std::string out = "# Detection report\n\n";
  const auto rates = report.rates();

  out += "| scenario | detector | manoeuvred | detected % | false pos % | false neg % |\n";
  out += "|---|---|---|---|---|---|\n";
  char buf[160];
  for (const auto& [scenario, detectors] : rates) {
    const std::string label = scenario.empty() ? "**all**" : scenario;
    for (const auto& [detector, r] : detectors) {
      std::snprintf(buf, sizeof(buf), "| %s | %s | %d | %.1f | %.1f | %.1f |\n", label.c_str(),
                    detector.c_str(), r.manoeuvred, 100.0 * r.detection_rate(),
                    100.0 * r.false_positive_rate(), 100.0 * r.false_negative_rate());
      out += buf;
    }
  }

  out += "\n| scenario | segment | truth | alg1 PR_MD | alg2 P1M | ukf p | mdf p |\n";
  out += "|---|---|---|---|---|---|---|\n";
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string("");
    char b[32];
    std::snprintf(b, sizeof(b), "%.3f", *v);
    return std::string(b);
  };
  for (const SegmentRecord& r : report.records) {
    out += "| " + r.scenario_id + " | " + std::to_string(r.segment_id) + " | " +
           (r.truth_label ? "yes" : "no") + " | " + cell(r.alg1_pr_md) + " | " + cell(r.p1m) +
           " | " + cell(r.ukf_p) + " | " + cell(r.mdf_p) + " |\n";
  }
  return out;
}

}  // namespace leodet
