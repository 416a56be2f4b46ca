// Command-line front end: scenario simulation, track fitting, filter runs,
// reachability detection, and campaign reporting.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "leodet/alg1.hpp"
#include "leodet/alg2.hpp"
#include "leodet/harness.hpp"
#include "leodet/io.hpp"
#include "leodet/mdf.hpp"

namespace fs = std::filesystem;
using namespace leodet;

namespace {

struct GlobalArgs {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = ".";
};

Config effective_config(const GlobalArgs& g) {
  Config cfg = g.config_path.empty() ? Config::defaults() : load_config(g.config_path);
  return cfg;
}

ScenarioSpec load_spec(const std::string& path, const GlobalArgs& g) {
  ScenarioSpec spec = scenario_from_json(read_text_file(path));
  if (g.seed_set) spec.seed = g.seed;
  return spec;
}

std::vector<ScenarioSpec> load_spec_dir(const std::string& dir, const GlobalArgs& g) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ScenarioSpec> specs;
  for (const auto& f : files) specs.push_back(load_spec(f.string(), g));
  if (specs.empty()) throw std::runtime_error("no .json scenario specs in " + dir);
  return specs;
}

void write_tracks(const GeneratedScenario& gen, const fs::path& dir, const TimeScale& ts) {
  for (size_t i = 0; i < gen.tracks.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "track_%03zu.csv", i);
    write_track_csv((dir / name).string(), gen.tracks[i], ts);
  }
}

std::vector<RadarTrack> read_tracks(const std::string& dir, const TimeScale& ts) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".csv" && e.path().filename().string().rfind("track_", 0) == 0) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<RadarTrack> tracks;
  for (const auto& f : files) tracks.push_back(read_track_csv(f.string(), ts));
  if (tracks.empty()) throw std::runtime_error("no track_*.csv files in " + dir);
  return tracks;
}

int cmd_simulate(const GlobalArgs& g, const std::string& spec_path) {
  const Config cfg = effective_config(g);
  const ScenarioSpec spec = load_spec(spec_path, g);
  const TimeScale ts(spec.reference_epoch_iso);
  const GeneratedScenario gen = generate_scenario(spec, cfg);

  const fs::path out(g.out_dir);
  fs::create_directories(out);
  write_tracks(gen, out, ts);
  write_text_file((out / "truth.csv").string(), ephemeris_to_csv(gen.truth->samples(), ts));
  write_text_file((out / "spec.json").string(), scenario_to_json(spec));

  std::string seg = "segment_id,t_begin_iso,t_mid_iso,truth_label\n";
  for (const SegmentInfo& s : gen.segments) {
    seg += std::to_string(s.index) + "," + ts.to_iso(s.t_begin) + "," + ts.to_iso(s.t_mid) +
           "," + (s.truth_label ? "1" : "0") + "\n";
  }
  write_text_file((out / "segments.csv").string(), seg);
  std::cout << gen.tracks.size() << " tracks, " << gen.segments.size() << " segments -> "
            << out.string() << "\n";
  return 0;
}

int cmd_fit(const GlobalArgs& g, const std::string& track_path, int order) {
  const Config cfg = effective_config(g);
  const TimeScale ts = cfg.time_scale();
  const RadarTrack track = read_track_csv(track_path, ts);
  const Attributable attr = fit_attributable(track, order);
  const fs::path out = fs::path(g.out_dir) / "attributable.json";
  fs::create_directories(out.parent_path());
  write_text_file(out.string(), attributable_to_json(attr, ts) + "\n");
  std::cout << attributable_to_json(attr, ts) << "\n";
  return 0;
}

RunLogRow log_row(const PlotResidual& res, const StateEstimate& est, const Ephemeris* truth) {
  RunLogRow row;
  row.epoch = res.epoch;
  if (truth) {
    row.err_pos_m = (truth->at(res.epoch).r - est.x.head<3>()).norm();
  }
  row.psi = res.psi;
  row.nu_rho_m = res.innovation[0];
  row.nu_rhodot_mps = res.innovation.size() > 1 ? res.innovation[1] : 0.0;
  row.trace_p_pos = est.cov.topLeftCorner<3, 3>().trace();
  row.trace_p_vel = est.cov.block<3, 3>(3, 3).trace();
  return row;
}

int cmd_filter(const GlobalArgs& g, const std::string& spec_path, bool mdf_mode) {
  const Config cfg = effective_config(g);
  const ScenarioSpec spec = load_spec(spec_path, g);
  const TimeScale ts(spec.reference_epoch_iso);
  const GeneratedScenario gen = generate_scenario(spec, cfg);

  const Matrix6d p0 =
      cfg.harness.filter_initial_cov_scale * cfg.harness.filter_initial_cov_lvlh;
  const StateEstimate init = initial_estimate(*gen.truth, spec.t_start, p0,
                                              cfg.harness.perturb_initial,
                                              spec.seed ^ 0xF1EA5EEDull);

  std::vector<RunLogRow> rows;
  if (!mdf_mode) {
    OrbitUkf filter(spec.model_params, gen.station, cfg.ukf, cfg.dynamics);
    filter.reset(init);
    for (const RadarTrack& track : gen.tracks) {
      const TrackRunResult run = filter.process_track(track);
      for (const PlotResidual& r : run.residuals) {
        rows.push_back(log_row(r, filter.estimate(), gen.truth.get()));
      }
    }
  } else {
    ManoeuvreDetectionFilter filter(spec.model_params, gen.station, cfg.ukf, cfg.mdf,
                                    cfg.dynamics);
    filter.reset(init);
    for (const RadarTrack& track : gen.tracks) {
      const MdfTrackOutcome outcome = filter.process_track(track);
      RunLogRow row;
      row.epoch = track.mid_epoch();
      row.err_pos_m =
          (gen.truth->at(outcome.post_state.epoch).r - outcome.post_state.x.head<3>()).norm();
      row.psi = outcome.ukf_metrics.psi_first;
      row.trace_p_pos = outcome.post_state.cov.topLeftCorner<3, 3>().trace();
      row.trace_p_vel = outcome.post_state.cov.block<3, 3>(3, 3).trace();
      row.p_manoeuvre = outcome.p_manoeuvre;
      row.inflations = outcome.inflations;
      row.smoothed = outcome.smoothed;
      rows.push_back(row);
    }
  }

  const fs::path out = fs::path(g.out_dir) / (mdf_mode ? "mdf_run_log.csv" : "ukf_run_log.csv");
  fs::create_directories(out.parent_path());
  write_text_file(out.string(), run_log_to_csv(rows, ts, mdf_mode));
  std::cout << "run log -> " << out.string() << "\n";
  return 0;
}

int cmd_detect(const GlobalArgs& g, const std::string& state_path, const std::string& track_path,
               bool alg2_mode, int truth_label) {
  const Config cfg = effective_config(g);
  const TimeScale ts = cfg.time_scale();
  const StateEstimate est = state_from_json(read_text_file(state_path), ts);
  const RadarTrack track = read_track_csv(track_path, ts);

  SegmentRecord rec;
  rec.scenario_id = fs::path(track_path).stem().string();
  rec.segment_id = 0;
  rec.truth_label = truth_label == 1;
  const uint64_t seed = g.seed_set ? g.seed : 1;
  if (alg2_mode) {
    const Alg2Result res =
        detect_alg2(est, track, cfg.radar, SpacecraftParams{}, cfg.alg2, cfg.dynamics, seed);
    rec.j_median = res.j_median;
    rec.p1m = res.metrics.p1m;
    rec.p5m = res.metrics.p5m;
    rec.p8m = res.metrics.p8m;
    rec.p1d = res.metrics.p1d;
    rec.p5d = res.metrics.p5d;
    rec.p8d = res.metrics.p8d;
    rec.alg2_decision = res.decision;
  } else {
    const Alg1Result res =
        detect_alg1(est, track, cfg.radar, SpacecraftParams{}, cfg.alg1, cfg.dynamics, seed);
    rec.alg1_md = res.md;
    rec.alg1_pr_md = res.pr_md;
    rec.alg1_decision = res.decision;
    rec.alg1_dropped = res.dropped_particles;
  }

  const fs::path out = fs::path(g.out_dir) / "report.jsonl";
  fs::create_directories(out.parent_path());
  std::ofstream append(out, std::ios::app);
  append << record_to_jsonl(rec) << "\n";
  std::cout << record_to_jsonl(rec) << "\n";
  return 0;
}

int cmd_campaign(const GlobalArgs& g, const std::string& spec_dir,
                 const std::vector<std::string>& detectors) {
  const Config cfg = effective_config(g);
  const std::vector<ScenarioSpec> specs = load_spec_dir(spec_dir, g);

  CampaignOptions opt;
  for (const std::string& d : detectors) {
    if (d == "alg1") {
      opt.run_alg1 = true;
    } else if (d == "alg2") {
      opt.run_alg2 = true;
    } else if (d == "ukf") {
      opt.run_ukf = true;
    } else if (d == "mdf") {
      opt.run_mdf = true;
    } else {
      throw std::runtime_error("unknown detector: " + d);
    }
  }

  const DetectionReport report = run_campaign(specs, opt, cfg);
  const fs::path out(g.out_dir);
  fs::create_directories(out);
  write_report_jsonl((out / "report.jsonl").string(), report);
  write_text_file((out / "report.csv").string(), render_report_csv(report));
  write_text_file((out / "report.md").string(), render_report_markdown(report));
  std::cout << report.records.size() << " segment records -> " << out.string() << "\n";
  return 0;
}

int cmd_report(const GlobalArgs& g, const std::string& jsonl_path) {
  const DetectionReport report = read_report_jsonl(jsonl_path);
  const fs::path out(g.out_dir);
  fs::create_directories(out);
  write_text_file((out / "report.csv").string(), render_report_csv(report));
  write_text_file((out / "report.md").string(), render_report_markdown(report));
  std::cout << "tables -> " << out.string() << "\n";
  return 0;
}

int cmd_make_grid(const GlobalArgs& g, const std::string& base_path) {
  const Config cfg = effective_config(g);
  const ScenarioSpec base = load_spec(base_path, g);
  const std::vector<ScenarioSpec> grid = make_grid(base, cfg);
  const fs::path out(g.out_dir);
  fs::create_directories(out);
  for (const ScenarioSpec& s : grid) {
    write_text_file((out / (s.id + ".json")).string(), scenario_to_json(s));
  }
  std::cout << grid.size() << " scenario specs -> " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manoeuvre detection for LEO objects from surveillance radar tracks"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "Config JSON path");
  auto* seed_opt = app.add_option("--seed", g.seed, "Override scenario seeds");
  app.add_option("--out", g.out_dir, "Output directory");

  std::string spec_path, track_path, state_path, spec_dir, jsonl_path;
  int order = 0;
  int truth_label = -1;
  std::vector<std::string> detectors{"alg1", "alg2"};

  auto* simulate = app.add_subcommand("simulate", "Generate tracks and truth for a scenario");
  simulate->add_option("--spec", spec_path, "Scenario spec JSON")->required();

  auto* fit = app.add_subcommand("fit", "Fit an attributable to a track CSV");
  fit->add_option("--track", track_path, "Track CSV")->required();
  fit->add_option("--order", order, "Polynomial order (0 = auto)");

  auto* ukf = app.add_subcommand("ukf", "Run the plain filter over a scenario");
  ukf->add_option("--spec", spec_path, "Scenario spec JSON")->required();

  auto* mdf = app.add_subcommand("mdf", "Run the manoeuvre detection filter over a scenario");
  mdf->add_option("--spec", spec_path, "Scenario spec JSON")->required();

  auto* a1 = app.add_subcommand("detect-alg1", "Particle-cloud check of one segment");
  a1->add_option("--state", state_path, "Initial state JSON")->required();
  a1->add_option("--track", track_path, "Track CSV")->required();
  a1->add_option("--truth-label", truth_label, "Truth label for the report (0/1)");

  auto* a2 = app.add_subcommand("detect-alg2", "Minimum-energy check of one segment");
  a2->add_option("--state", state_path, "Initial state JSON")->required();
  a2->add_option("--track", track_path, "Track CSV")->required();
  a2->add_option("--truth-label", truth_label, "Truth label for the report (0/1)");

  auto* campaign = app.add_subcommand("campaign", "Run detectors over a directory of specs");
  campaign->add_option("--specs", spec_dir, "Directory of scenario spec JSONs")->required();
  campaign->add_option("--detectors", detectors, "Subset of alg1,alg2,ukf,mdf");

  auto* report = app.add_subcommand("report", "Render tables from a report JSONL");
  report->add_option("--in", jsonl_path, "Report JSONL path")->required();

  auto* grid = app.add_subcommand("make-grid", "Expand a base spec into the manoeuvre grid");
  grid->add_option("--base", spec_path, "Manoeuvre-free base spec JSON")->required();

  auto* dump = app.add_subcommand("dump-config", "Print the default configuration");

  CLI11_PARSE(app, argc, argv);
  g.seed_set = seed_opt->count() > 0;

  try {
    if (simulate->parsed()) return cmd_simulate(g, spec_path);
    if (fit->parsed()) return cmd_fit(g, track_path, order);
    if (ukf->parsed()) return cmd_filter(g, spec_path, false);
    if (mdf->parsed()) return cmd_filter(g, spec_path, true);
    if (a1->parsed()) return cmd_detect(g, state_path, track_path, false, truth_label);
    if (a2->parsed()) return cmd_detect(g, state_path, track_path, true, truth_label);
    if (campaign->parsed()) return cmd_campaign(g, spec_dir, detectors);
    if (report->parsed()) return cmd_report(g, jsonl_path);
    if (grid->parsed()) return cmd_make_grid(g, spec_path);
    if (dump->parsed()) {
      std::cout << config_to_json(effective_config(g)) << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
