// Copyright 2026 The TLR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tlr/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "tlr/curation.hpp"
#include "tlr/curation_server.hpp"
#include "tlr/error.hpp"
#include "tlr/evaluation.hpp"
#include "tlr/log.hpp"
#include "tlr/mapping.hpp"
#include "tlr/recognition.hpp"
#include "tlr/remote_detector.hpp"
#include "tlr/replay.hpp"

namespace tlr {

using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

// A failure of something the process talks to rather than of its input.
struct ServiceFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

// Camera and detector noise come from a truth file when given, otherwise from
// standalone JSON files; the standalone files win.
struct SensorSetup {
  std::optional<Truth> truth;
  std::optional<CameraModel> camera;
  NoiseModel noise;
};

struct SensorFlags {
  std::string truth;
  std::string camera;
  std::string noise;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App* cmd, bool with_seed = true) {
    cmd->add_option("--truth", truth, "Truth file from `simulate` (camera, detector noise, route)")
        ->envname("TLR_TRUTH");
    cmd->add_option("--camera", camera, "Camera model JSON")->envname("TLR_CAMERA");
    cmd->add_option("--detector-noise", noise, "Scripted detector noise model JSON")->envname("TLR_DETECTOR_NOISE");
    if (with_seed) cmd->add_option("--seed", seed, "Overrides the scripted detector seed")->envname("TLR_SEED");
  }

  SensorSetup load(bool need_camera = true) const {
    SensorSetup s;
    if (!truth.empty()) {
      s.truth = load_truth(truth);
      s.camera = s.truth->camera;
      s.noise = s.truth->detector_noise;
    }
    if (!camera.empty()) s.camera = camera_from_json(load_json_file(camera));
    if (!noise.empty()) s.noise = noise_model_from_json(load_json_file(noise));
    if (seed) s.noise.rng_seed = *seed;
    if (need_camera && !s.camera) throw InvalidArgument("a camera is required: pass --camera or --truth");
    return s;
  }
};

struct DetectorFlags {
  std::string url;
  double timeout_ms = 0.0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--detector-url", url, "Remote detector base URL; the scripted detector is used when empty")
        ->envname("TLR_DETECTOR_URL");
    cmd->add_option("--detector-timeout-ms", timeout_ms, "Remote detector timeout (default TLR_DETECTOR_TIMEOUT_MS or 500)")
        ->check(CLI::PositiveNumber);
  }

  std::unique_ptr<Detector> make(const SensorSetup& s, std::span<const LogFrame> log, double tau,
                                 const std::filesystem::path& log_path) const {
    const CameraModel& cam = *s.camera;
    if (!url.empty()) {
      auto timeout = timeout_ms > 0 ? std::chrono::milliseconds(static_cast<long>(timeout_ms))
                                    : RemoteDetector::timeout_from_env();
      return std::make_unique<RemoteDetector>(url, cam.width, cam.height, tau, timeout, log_path.parent_path());
    }
    return std::make_unique<ScriptedDetector>(s.noise, cam.width, cam.height, gt_size_pool(log));
  }
};

std::pair<std::string, int> parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw InvalidArgument("--bind must be host:port");
  const std::string host = bind.substr(0, colon);
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(bind.substr(colon + 1), &used);
    if (used != bind.size() - colon - 1) port = -1;
  } catch (const std::exception&) {
  }
  if (host.empty() || port < 0 || port > 65535) throw InvalidArgument("--bind must be host:port");
  return {host, port};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic-light recognition toolkit: prior-map building, curation, online recognition and evaluation",
               "tlr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", [] {
    return json{{"name", "tlr"}, {"version", kVersion}, {"log_format", kLogFormatVersion},
                {"map_format", kPriorMapVersion}}
        .dump();
  });

  // simulate ------------------------------------------------------------------
  std::string sim_scenario, sim_log, sim_truth;
  std::optional<std::uint64_t> sim_seed;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic log and its ground truth from a scenario");
  simulate->add_option("scenario", sim_scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--log", sim_log, "Output log (JSONL)")->required()->envname("TLR_LOG");
  simulate->add_option("--truth", sim_truth, "Output truth JSON")->required()->envname("TLR_TRUTH");
  simulate->add_option("--seed", sim_seed, "Overrides the scenario seed")->envname("TLR_SEED");

  // build-map -----------------------------------------------------------------
  std::string bm_log, bm_out, bm_map_out, bm_route;
  bool bm_auto = false;
  MappingConfig bm_cfg;
  SensorFlags bm_sensor;
  DetectorFlags bm_det;
  auto* build = app.add_subcommand("build-map", "Cluster box-gated LiDAR returns of a log into light candidates");
  build->add_option("log", bm_log, "Input log (JSONL)")->required()->check(CLI::ExistingFile);
  build->add_option("--out", bm_out, "Output candidate file")->required()->envname("TLR_CANDIDATES");
  build->add_flag("--auto-accept", bm_auto, "Accept every candidate and link groups automatically")
      ->envname("TLR_AUTO_ACCEPT");
  build->add_option("--map-out", bm_map_out, "Prior map written by --auto-accept")->envname("TLR_MAP");
  build->add_option("--route", bm_route, "Route id (default: from --truth, else \"route\")")->envname("TLR_ROUTE");
  build->add_option("--tau", bm_cfg.tau, "Detection confidence threshold")->capture_default_str()->envname("TLR_TAU");
  build->add_option("--eps", bm_cfg.dbscan_eps, "DBSCAN radius (m)")->capture_default_str()->envname("TLR_DBSCAN_EPS");
  build->add_option("--min-pts", bm_cfg.dbscan_min_pts, "DBSCAN core size")->capture_default_str()->envname("TLR_DBSCAN_MIN_PTS");
  build->add_option("--flush-gap", bm_cfg.flush_gap_frames, "Empty frames before clustering")->capture_default_str()
      ->envname("TLR_FLUSH_GAP");
  build->add_option("--link-radius", bm_cfg.group_link_radius, "Grouping radius (m)")->capture_default_str()
      ->envname("TLR_LINK_RADIUS");
  build->add_option("--shrink", bm_cfg.tight_bbox_shrink, "Box shrink fraction before gating")->capture_default_str()
      ->envname("TLR_BBOX_SHRINK");
  bm_sensor.add_to(build);
  bm_det.add_to(build);

  // curate --------------------------------------------------------------------
  std::string cu_cands, cu_map, cu_bind = "127.0.0.1:8080", cu_log, cu_journal;
  double cu_link = 20.0;
  SensorFlags cu_sensor;
  auto* curate = app.add_subcommand("curate", "Serve the curation API over a candidate file until interrupted");
  curate->add_option("candidates", cu_cands, "Candidate file from build-map")->required()->check(CLI::ExistingFile);
  curate->add_option("map", cu_map, "Prior map written on save")->required();
  curate->add_option("--bind", cu_bind, "host:port to listen on")->capture_default_str()->envname("TLR_BIND");
  curate->add_option("--log", cu_log, "Source log, enables overlays and manual candidates")
      ->check(CLI::ExistingFile)
      ->envname("TLR_LOG");
  curate->add_option("--journal", cu_journal, "Decision journal (default: <map>.journal.jsonl)")
      ->envname("TLR_JOURNAL");
  curate->add_option("--link-radius", cu_link, "Grouping radius (m)")->capture_default_str()->envname("TLR_LINK_RADIUS");
  cu_sensor.add_to(curate, false);

  // run -----------------------------------------------------------------------
  std::string rn_log, rn_map, rn_out;
  RecognizerConfig rn_cfg;
  std::optional<double> rn_range;
  SensorFlags rn_sensor;
  DetectorFlags rn_det;
  auto* run = app.add_subcommand("run", "Recognize the relevant light state on every frame of a log");
  run->add_option("log", rn_log, "Input log (JSONL)")->required()->check(CLI::ExistingFile);
  run->add_option("map", rn_map, "Prior map")->required();
  run->add_option("--out", rn_out, "Output verdict stream (JSONL)")->required()->envname("TLR_VERDICTS");
  run->add_option("--tau", rn_cfg.tau, "Detection confidence threshold")->capture_default_str()->envname("TLR_TAU");
  run->add_option("--gate-radius", rn_cfg.gate_radius, "Gate sphere radius (m)")->capture_default_str()->envname("TLR_GATE_RADIUS");
  run->add_option("--activation-range", rn_range, "Activation range (m); default from --truth, else 100")
      ->envname("TLR_ACTIVATION_RANGE");
  rn_sensor.add_to(run);
  rn_det.add_to(run);

  // eval ----------------------------------------------------------------------
  std::string ev_truth, ev_report, ev_text, ev_timeline, ev_log;
  std::vector<std::string> ev_verdicts;
  EvalConfig ev_cfg;
  std::optional<std::uint64_t> ev_seed;
  auto* eval = app.add_subcommand("eval", "Score verdict streams against ground truth");
  eval->add_option("--truth", ev_truth, "Truth file from `simulate`")->required()->envname("TLR_TRUTH");
  eval->add_option("--verdicts", ev_verdicts, "Verdict stream as LABEL=PATH (repeatable; bare PATH uses its stem)")
      ->required();
  eval->add_option("--report", ev_report, "Output JSON report")->envname("TLR_REPORT");
  eval->add_option("--text", ev_text, "Output text tables (default: stdout)");
  eval->add_option("--timeline", ev_timeline, "Output per-frame CSV timeline");
  eval->add_option("--log", ev_log, "Log to score the scripted detector on (adds AP / precision / recall)")
      ->check(CLI::ExistingFile);
  eval->add_option("--iou", ev_cfg.iou_threshold, "IoU threshold for a true positive")->capture_default_str()->envname("TLR_IOU");
  eval->add_option("--tau", ev_cfg.tau, "Confidence threshold for precision/recall")->capture_default_str()->envname("TLR_TAU");
  eval->add_option("--seed", ev_seed, "Overrides the scripted detector seed")->envname("TLR_SEED");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*simulate) {
      Scenario sc = load_scenario(sim_scenario);
      if (sim_seed) sc.rng_seed = *sim_seed;
      const GeneratedRun g = generate(sc);
      write_log(g.log, sim_log);
      save_truth(g.truth, sim_truth);
      out << "simulated " << g.log.size() << " frames, " << g.truth.map.lights.size() << " lights\n";
      return kExitOk;
    }

    if (*build) {
      if (bm_auto && bm_map_out.empty()) throw InvalidArgument("--auto-accept needs --map-out");
      bm_cfg.validate();
      const SensorSetup s = bm_sensor.load();
      const std::string route = !bm_route.empty() ? bm_route : s.truth ? s.truth->map.route_id : "route";
      const auto log = read_log(bm_log);
      auto detector = bm_det.make(s, log, bm_cfg.tau, bm_log);
      MapBuilder builder(*s.camera, bm_cfg);
      for (const auto& frame : log) builder.process(frame, detector->detect(frame));
      CandidateSet set{route, builder.finish()};
      save_candidates(set, bm_out);
      out << set.candidates.size() << " candidates written to " << bm_out << '\n';
      if (bm_auto) {
        const PriorMap map = auto_accept(set.candidates, route, bm_cfg.group_link_radius);
        save_prior_map(map, bm_map_out);
        out << map.lights.size() << " lights in " << map.groups.size() << " groups written to " << bm_map_out
            << '\n';
      }
      return kExitOk;
    }

    if (*curate) {
      const auto [host, port] = parse_bind(cu_bind);
      const SensorSetup s = cu_sensor.load(false);
      CandidateSet set = load_candidates(cu_cands);
      CurationOptions opts;
      opts.route_id = set.route_id;
      opts.map_path = cu_map;
      opts.journal_path = cu_journal.empty() ? std::filesystem::path(cu_map + ".journal.jsonl")
                                             : std::filesystem::path(cu_journal);
      if (!cu_log.empty()) opts.log = std::make_shared<const std::vector<LogFrame>>(read_log(cu_log));
      opts.camera = s.camera;
      opts.link_radius = cu_link;
      std::unique_ptr<CurationSession> session;
      try {
        session = std::make_unique<CurationSession>(std::move(set), opts);
      } catch (const SessionLocked& e) {
        throw ServiceFailure(e.what());
      }
      CurationServer server(*session);
      int bound = 0;
      try {
        bound = server.start(host, port);
      } catch (const IoError& e) {
        throw ServiceFailure(e.what());
      }
      out << "curation service listening on http://" << host << ':' << bound << "/api/v1" << std::endl;
      g_stop = false;
      auto prev_int = std::signal(SIGINT, on_signal);
      auto prev_term = std::signal(SIGTERM, on_signal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      std::signal(SIGINT, prev_int);
      std::signal(SIGTERM, prev_term);
      return kExitOk;
    }

    if (*run) {
      const SensorSetup s = rn_sensor.load();
      rn_cfg.activation_range = rn_range ? *rn_range : s.truth ? s.truth->activation_range : 100.0;
      rn_cfg.validate();
      const PriorMap map = load_prior_map(rn_map);
      const auto log = read_log(rn_log);
      auto detector = rn_det.make(s, log, rn_cfg.tau, rn_log);
      std::vector<TimedVerdict> verdicts;
      try {
        verdicts = run_log(log, map, *detector, *s.camera, rn_cfg);
      } catch (const DetectorUnavailable& e) {
        throw ServiceFailure(e.what());
      }
      std::vector<VerdictRecord> records;
      records.reserve(verdicts.size());
      for (const auto& v : verdicts) records.push_back(to_record(v));
      write_verdicts(records, rn_out);
      out << records.size() << " verdicts written to " << rn_out << '\n';
      return kExitOk;
    }

    if (*eval) {
      ev_cfg.validate();
      const Truth truth = load_truth(ev_truth);
      std::vector<SystemRun> runs;
      for (const auto& spec : ev_verdicts) {
        const auto eq = spec.find('=');
        SystemRun r;
        std::filesystem::path path;
        if (eq == std::string::npos) {
          path = spec;
          r.label = path.stem().string();
        } else {
          r.label = spec.substr(0, eq);
          path = spec.substr(eq + 1);
        }
        if (r.label.empty()) throw InvalidArgument("empty label in --verdicts " + spec);
        for (const auto& v : read_verdicts(path)) r.predicted.push_back(v.state);
        runs.push_back(std::move(r));
      }
      std::vector<SystemReport> reports;
      for (const auto& r : runs) reports.push_back(evaluate_system(r, truth.frames));

      std::optional<DetectionMetrics> det;
      if (!ev_log.empty()) {
        const auto log = read_log(ev_log);
        NoiseModel noise = truth.detector_noise;
        if (ev_seed) noise.rng_seed = *ev_seed;
        ScriptedDetector detector(noise, truth.camera.width, truth.camera.height, gt_size_pool(log));
        std::vector<std::vector<Detection>> dets;
        std::vector<std::vector<GtDetection>> gts;
        for (const auto& f : log) {
          dets.push_back(detector.detect(f));
          gts.push_back(f.gt_detections);
        }
        det = evaluate_detections(dets, gts, ev_cfg);
      }

      const std::string text = format_text_report(reports, det ? &*det : nullptr);
      if (ev_text.empty())
        out << text;
      else
        write_text(ev_text, text);
      if (!ev_report.empty()) {
        json j = {{"systems", json::array()}};
        for (const auto& r : reports) j["systems"].push_back(to_json(r));
        j["detection"] = det ? to_json(*det) : json(nullptr);
        write_text(ev_report, j.dump(2) + "\n");
      }
      if (!ev_timeline.empty()) write_text(ev_timeline, timeline_csv(truth.frames, runs));
      return kExitOk;
    }
  } catch (const ServiceFailure& e) {
    err << "tlr: " << e.what() << '\n';
    return kExitService;
  } catch (const InvalidArgument& e) {
    err << "tlr: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "tlr: " << e.code() << ": " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "tlr: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace tlr
