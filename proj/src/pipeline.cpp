#include "eep/pipeline.hpp"

#include "eep/camera_calibration.hpp"
#include "eep/dataset.hpp"
#include "eep/effector_solver.hpp"
#include "eep/evaluation.hpp"
#include "eep/text_table.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <set>
#include <sstream>

namespace eep {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const std::vector<std::string>& subcommand_names() {
  static const std::vector<std::string> names{"calibrate", "render",   "detect",   "track",
                                              "simulate",  "train",    "estimate", "evaluate"};
  return names;
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex64(fnv1a64(bytes));
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Turns validation failures of module configs into config errors.
template <typename T>
T checked(T value) {
  try {
    value.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return value;
}

}  // namespace

RigGeometry rig_geometry(const PipelineConfig& cfg) {
  RigGeometry g;
  g.cameras = static_cast<int>(cfg.integer("rig.cameras"));
  g.distance = cfg.number("rig.distance_mm");
  g.elevation = cfg.number("rig.elevation_deg") * kDeg;
  g.intrinsics.focal_px = cfg.number("rig.focal_px");
  if (g.cameras < 2 || !(g.distance > 0)) throw ConfigError("rig needs >= 2 cameras at a positive distance");
  try {
    g.intrinsics.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return g;
}

MarkerRigSpec marker_rig(const PipelineConfig& cfg) {
  MarkerRigSpec r{cfg.number("rig.ball_distance_mm"), cfg.number("rig.ball_radius_mm")};
  if (!(r.d > 0 && r.ball_radius > 0)) throw ConfigError("ball distance and radius must be positive");
  return r;
}

DetectorConfig detector_config(const PipelineConfig& cfg) {
  DetectorConfig d;
  d.hough.para1 = cfg.number("detect.canny_high");
  d.hough.blur_sigma = cfg.number("detect.blur_sigma");
  d.max_blur_sigma = cfg.number("detect.max_blur_sigma");
  d.expected_radius = cfg.number("detect.expected_radius_px");
  checked(d.hough);
  if (!(d.expected_radius > 0 && d.max_blur_sigma >= d.hough.blur_sigma)) {
    throw ConfigError("detector radius and blur limits are inconsistent");
  }
  return d;
}

TrackerConfig tracker_config(const PipelineConfig& cfg) {
  TrackerConfig t;
  t.motion_threshold = cfg.number("track.motion_threshold_px");
  t.reinstate_frames = static_cast<int>(cfg.integer("track.reinstate_frames"));
  t.radius_window = cfg.number("track.radius_window");
  t.d_min_factor = cfg.number("track.d_min_factor");
  t.consistency_threshold = cfg.number("track.consistency_mm");
  t.restart_skip = static_cast<int>(cfg.integer("track.restart_skip"));
  t.tolerance_growth = cfg.number("track.tolerance_growth");
  return checked(t);
}

SimConfig sim_config(const PipelineConfig& cfg) {
  SimConfig s;
  s.rate_hz = cfg.number("sim.rate_hz");
  s.record_every = static_cast<int>(cfg.integer("sim.record_every"));
  if (!(s.rate_hz > 0) || s.record_every < 1) throw ConfigError("simulation rate and cadence must be positive");
  const CableErrorModel d = CableErrorModel::defaults();
  s.cable.sag_gain = cfg.number("sim.sag_scale") * d.sag_gain;
  s.cable.backlash = cfg.number("sim.backlash_scale") * d.backlash;
  s.cable.noise_sigma = cfg.number("sim.noise_scale") * d.noise_sigma;
  s.cable.static_offset = cfg.number("sim.offset_scale") * d.static_offset;
  s.noise_seed = derive_seed(static_cast<std::uint64_t>(cfg.integer("seed")), "simulate-noise");
  checked(s.cable);
  return s;
}

SplitSpec split_spec(const PipelineConfig& cfg) {
  SplitSpec s;
  s.train = cfg.number("split.train");
  s.val = cfg.number("split.val");
  s.test = cfg.number("split.test");
  s.seed = derive_seed(static_cast<std::uint64_t>(cfg.integer("seed")), "split");
  const std::string& mode = cfg.text("split.mode");
  if (mode != "trajectory" && mode != "random") throw ConfigError("split.mode must be trajectory or random");
  return checked(s);
}

TrainingConfig training_config(const PipelineConfig& cfg) {
  TrainingConfig t;
  t.hidden = cfg.int_list("train.hidden");
  try {
    t.activation = parse_activation(cfg.text("train.activation"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  t.batch_norm = cfg.flag("train.batch_norm");
  t.learning_rate = cfg.number("train.learning_rate");
  const std::string& mode = cfg.text("train.lr_mode");
  if (mode != "auto" && mode != "fixed") throw ConfigError("train.lr_mode must be auto or fixed");
  t.auto_scale_lr = mode == "auto";
  t.lr_scale = cfg.number("train.lr_scale");
  t.stagnation_epochs = static_cast<int>(cfg.integer("train.stagnation_epochs"));
  t.epochs = static_cast<int>(cfg.integer("train.epochs"));
  t.batch_size = static_cast<int>(cfg.integer("train.batch_size"));
  t.l1_rate = cfg.number("train.l1");
  t.beta1 = cfg.number("train.beta1");
  t.beta2 = cfg.number("train.beta2");
  t.adam_epsilon = cfg.number("train.epsilon");
  t.patience = static_cast<int>(cfg.integer("train.patience"));
  t.time_budget_s = cfg.number("train.time_budget_s");
  t.seed = derive_seed(static_cast<std::uint64_t>(cfg.integer("seed")), "train");
  return checked(t);
}

namespace {

struct Stage {
  std::string name;
  const PipelineConfig& cfg;
  fs::path out;
  std::ostream& log;
  std::uint64_t seed;
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;
  json metrics = json::object();

  // Path from a path.* key, relative to the output directory unless absolute.
  [[nodiscard]] fs::path path(const std::string& key) const {
    const fs::path p = cfg.text(key);
    return p.is_absolute() ? p : out / p;
  }

  fs::path input(const std::string& key) {
    if (cfg.text(key).empty()) throw ConfigError(key + " is empty");
    const fs::path p = path(key);
    if (!fs::exists(p)) throw ConfigError(key + ": " + p.string() + " does not exist");
    inputs.push_back(p);
    return p;
  }

  fs::path output(const std::string& key) {
    const fs::path p = path(key);
    outputs.push_back(p);
    return p;
  }

  fs::path output_file(const std::string& name) {
    outputs.push_back(out / name);
    return out / name;
  }

  void write_manifest() const {
    json j;
    j["stage"] = name;
    j["versions"] = {{"eep", std::string(kToolVersion)},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"feature_layout", kFeatureLayoutVersion}};
    j["config_hash"] = hex64(cfg.hash());
    j["seed"] = cfg.integer("seed");
    j["stage_seed"] = hex64(seed);
    j["config"] = cfg.values();
    auto digests = [this](const std::vector<fs::path>& files) {
      json arr = json::array();
      for (const auto& f : files) {
        const std::string rel = fs::relative(f, out).generic_string();
        if (fs::is_directory(f)) {
          std::vector<fs::path> entries;
          for (const auto& e : fs::directory_iterator(f)) entries.push_back(e.path());
          std::sort(entries.begin(), entries.end());
          for (const auto& e : entries) {
            arr.push_back({{"file", fs::relative(e, out).generic_string()}, {"fnv1a64", file_digest(e)}});
          }
        } else {
          arr.push_back({{"file", rel}, {"fnv1a64", file_digest(f)}});
        }
      }
      return arr;
    };
    j["inputs"] = digests(inputs);
    j["outputs"] = digests(outputs);
    j["metrics"] = metrics;
    std::ofstream f(out / (name + ".manifest.json"));
    f << j.dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write the manifest for " + name);
  }
};

std::map<int, CameraModel> load_cameras(const fs::path& path, const PipelineConfig& cfg) {
  const auto poses = read_pose_file(path);
  Intrinsics intr = rig_geometry(cfg).intrinsics;
  std::map<int, CameraModel> cams;
  for (const auto& [id, p] : poses) cams[id] = CameraModel{p, intr};
  if (cams.size() < 2) throw std::runtime_error("at least two calibrated cameras are required");
  return cams;
}

void run_calibrate(Stage& s) {
  const RigGeometry geo = rig_geometry(s.cfg);
  const auto nominal = make_camera_rig(geo);
  Rng rng(s.seed);
  MarkerSet markers;
  std::map<int, Pose> priors;
  const bool synthetic = s.cfg.text("path.markers").empty();
  if (synthetic) {
    markers = observe_markers(nominal, default_marker_layout(s.cfg.number("rig.marker_ring_mm")),
                              s.cfg.number("calibrate.pixel_noise"), rng);
    write_marker_file(s.output_file("markers.txt"), markers);
    for (const auto& [id, cam] : nominal) {
      priors[id] = perturb_pose(cam.pose, s.cfg.number("calibrate.prior_position_mm"),
                                s.cfg.number("calibrate.prior_rotation_deg") * kDeg, rng);
    }
  } else {
    markers = read_marker_file(s.input("path.markers"));
    for (const auto& [id, pts] : markers.image_points) {
      if (!nominal.count(id)) throw ConfigError("marker file names camera " + std::to_string(id) + " not in the rig");
      priors[id] = nominal.at(id).pose;
    }
  }

  std::map<int, Pose> refined;
  json cams = json::array();
  for (const auto& [id, prior] : priors) {
    const auto obs = markers.observations(id);
    const RefinedPose r = refine_camera_pose(ChessboardPrior{prior}, geo.intrinsics, obs);
    refined[id] = r.pose;
    json c = {{"camera", id},
              {"markers", obs.size()},
              {"prior_rms_px", r.prior_rms_px},
              {"refined_rms_px", r.refined_rms_px},
              {"iterations", r.iterations}};
    if (synthetic) {
      c["position_error_mm"] = (r.pose.position - nominal.at(id).pose.position).norm();
      c["rotation_error_rad"] = rotation_distance(r.pose.orientation, nominal.at(id).pose.orientation);
    }
    s.log << "camera " << id << ": reprojection rms " << r.prior_rms_px << " -> " << r.refined_rms_px << " px\n";
    cams.push_back(c);
  }
  write_pose_file(s.output_file("cameras_prior.txt"), priors);
  write_pose_file(s.output("path.cameras"), refined);
  s.metrics["synthetic_markers"] = synthetic;
  s.metrics["cameras"] = cams;
}

std::string frame_file(int frame, int cam) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "frame_%05d_cam%d.ppm", frame, cam);
  return buf;
}

void run_render(Stage& s) {
  const auto cams_map = make_camera_rig(rig_geometry(s.cfg));
  const auto cams = camera_list(cams_map);
  const MarkerRigSpec rig = marker_rig(s.cfg);
  const int frames = static_cast<int>(s.cfg.integer("render.frames"));
  const double fps = s.cfg.number("render.fps");
  if (frames < 1 || !(fps > 0)) throw ConfigError("render.frames and render.fps must be positive");
  SceneOptions opt;
  opt.occluder_probability = s.cfg.number("render.occluder_probability");
  opt.max_occlusion = s.cfg.number("render.max_occlusion");
  const double step = s.cfg.number("render.step_mm");

  const fs::path dir = s.output("path.frames");
  fs::create_directories(dir);
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".ppm") fs::remove(e.path());
  }
  Rng rng(s.seed);
  RenderOptions ropt;
  ropt.pixel_noise = s.cfg.number("render.image_noise");
  std::vector<GroundTruthSample> truth;
  SceneFrame frame = random_scene_frame(cams, rig, opt, rng);
  int occluded_views = 0;
  for (int f = 0; f < frames; ++f) {
    if (f > 0) frame = next_scene_frame(frame, cams, rig, opt, step, 0.03, rng);
    ropt.noise_seed = static_cast<unsigned>(s.seed) + 97u * static_cast<unsigned>(f);
    const auto views = render_scene(cams, frame.balls, rig.ball_radius, ropt, frame.occluders);
    for (std::size_t k = 0; k < views.size(); ++k) {
      write_ppm(dir / frame_file(f, std::next(cams_map.begin(), static_cast<std::ptrdiff_t>(k))->first),
                views[k].image);
      if (!frame.occluders[k].empty()) ++occluded_views;
    }
    truth.push_back({f / fps, frame.truth});
  }
  write_ground_truth(s.output("path.scene_truth"), truth);
  s.metrics["frames"] = frames;
  s.metrics["views_with_clutter"] = occluded_views;
}

struct DetectionRow {
  int frame = 0;
  int camera = 0;
  BallColor color = BallColor::red;
  BallDetection det;
};

void run_detect(Stage& s) {
  const auto cams = load_cameras(s.input("path.cameras"), s.cfg);
  const fs::path dir = s.input("path.frames");
  std::map<int, std::set<int>> frames;
  for (const auto& e : fs::directory_iterator(dir)) {
    int f = 0, c = 0;
    if (std::sscanf(e.path().filename().string().c_str(), "frame_%d_cam%d.ppm", &f, &c) == 2) frames[f].insert(c);
  }
  if (frames.empty()) throw ConfigError("path.frames: no frame_*_cam*.ppm images in " + dir.string());

  const DetectorConfig base = detector_config(s.cfg);
  FrameTracker tracker(cams, tracker_config(s.cfg));
  TextTable t;
  t.header = {"frame", "camera", "color",      "found",       "u",     "v",       "r",
              "score", "para2",  "blur_sigma", "escalations", "color_fraction", "color_ok"};
  int found = 0, total = 0, passed = 0;
  for (const auto& [f, cam_ids] : frames) {
    std::vector<FrameTracker::FrameInput> inputs;
    for (const int c : cam_ids) {
      if (!cams.count(c)) throw std::runtime_error("image for uncalibrated camera " + std::to_string(c));
      const RasterImage img = read_ppm(dir / frame_file(f, c));
      for (const auto color : kBallColors) {
        DetectorConfig dc = base;
        const SearchBounds b = tracker.next_bounds(c, color);
        dc.hough.r_min = b.r_min;
        dc.hough.r_max = b.r_max;
        dc.hough.d_min = b.d_min;
        const BallDetection d = detect_ball(img, color, dc);
        ++total;
        if (d.circle) ++found;
        if (d.check.passed) ++passed;
        inputs.push_back({c, color, d.circle, d.check.passed});
        const bool has = d.circle.has_value();
        auto num = [&](double v) { return has ? format_double(v) : std::string("nan"); };
        t.rows.push_back({std::to_string(f), std::to_string(c), std::string(color_name(color)), has ? "1" : "0",
                          num(has ? d.circle->center.x() : 0), num(has ? d.circle->center.y() : 0),
                          num(has ? d.circle->radius : 0), num(has ? d.circle->accumulator_score : 0),
                          format_double(d.para2), format_double(d.blur_sigma), std::to_string(d.escalations),
                          format_double(d.check.fraction), d.check.passed ? "1" : "0"});
      }
    }
    tracker.process(inputs);
  }
  write_table(s.output("path.detections"), t, {"circle detections; u, v, r in px"});
  s.metrics["frames"] = frames.size();
  s.metrics["searches"] = total;
  s.metrics["found"] = found;
  s.metrics["color_check_passed"] = passed;
  s.log << "detected " << found << " of " << total << " balls\n";
}

void run_track(Stage& s) {
  const auto cams = load_cameras(s.input("path.cameras"), s.cfg);
  const TextTable det = read_table(s.input("path.detections"));
  const MarkerRigSpec rig = marker_rig(s.cfg);
  const double fps = s.cfg.number("render.fps");
  if (!(fps > 0)) throw ConfigError("render.fps must be positive");

  std::map<int, std::vector<FrameTracker::FrameInput>> frames;
  for (std::size_t i = 0; i < det.rows.size(); ++i) {
    FrameTracker::FrameInput in;
    in.camera_id = static_cast<int>(det.integer(i, "camera"));
    in.color = parse_color(det.text(i, "color"));
    if (det.integer(i, "found") == 1) {
      DetectedCircle c;
      c.center = {det.number(i, "u"), det.number(i, "v")};
      c.radius = det.number(i, "r");
      c.color = in.color;
      c.accumulator_score = det.number(i, "score");
      in.detection = c;
    }
    in.color_ok = det.integer(i, "color_ok") == 1;
    frames[static_cast<int>(det.integer(i, "frame"))].push_back(in);
  }

  FrameTracker tracker(cams, tracker_config(s.cfg));
  std::vector<TrackLogRow> log_rows;
  std::vector<BallEstimateRow> ball_rows;
  std::vector<GroundTruthSample> gt;
  int skipped = 0, solve_failures = 0;
  for (const auto& [f, inputs] : frames) {
    const auto r = tracker.process(inputs);
    if (r.skipped) ++skipped;
    for (const auto& t : r.tracks) {
      std::optional<DetectedCircle> d;
      for (const auto& in : inputs) {
        if (in.camera_id == t.camera_id && in.color == t.color) d = in.detection;
      }
      log_rows.push_back({f, t, d});
    }
    for (const auto& [color, b] : r.balls) ball_rows.push_back({f, b});
    if (r.balls.size() == 3) {
      const RigCenters centers{r.balls.at(BallColor::green).center_w, r.balls.at(BallColor::yellow).center_w,
                               r.balls.at(BallColor::red).center_w};
      try {
        gt.push_back({f / fps, solve_effector_pose(centers, rig)});
      } catch (const std::runtime_error& e) {
        ++solve_failures;
        s.log << "frame " << f << ": no pose (" << e.what() << ")\n";
      }
    }
  }
  write_track_log(s.output_file("track_log.txt"), log_rows);
  write_ball_estimates(s.output_file("balls.txt"), ball_rows);
  write_ground_truth(s.output("path.ground_truth"), gt);
  s.metrics["frames"] = frames.size();
  s.metrics["poses"] = gt.size();
  s.metrics["skipped_frames"] = skipped;
  s.metrics["restarts"] = tracker.restarts();
  s.metrics["solve_failures"] = solve_failures;

  // Measurement accuracy against the rendered truth, when available.
  const fs::path truth_path = s.path("path.scene_truth");
  if (!fs::exists(truth_path)) return;
  s.inputs.push_back(truth_path);
  std::map<double, EffectorPose> truth;
  for (const auto& t : read_ground_truth(truth_path)) truth[t.timestamp] = t.pose;
  std::vector<Vec3> ball_err, eff_err;
  for (const auto& row : ball_rows) {
    const auto it = truth.find(row.frame / fps);
    if (it == truth.end()) continue;
    const RigCenters c = rig_forward(it->second, rig);
    const Vec3& want = row.ball.color == BallColor::green ? c.green : row.ball.color == BallColor::yellow ? c.yellow : c.red;
    ball_err.push_back(row.ball.center_w - want);
  }
  for (const auto& g : gt) {
    const auto it = truth.find(g.timestamp);
    if (it != truth.end()) eff_err.push_back(g.pose.position - it->second.position);
  }
  if (ball_err.size() >= 2 && eff_err.size() >= 2) {
    const ErrorReport rb = compute_report(ball_err, "ball");
    const ErrorReport re = compute_report(eff_err, "effector");
    write_reports(s.output_file("measurement_report.txt"), {rb, re});
    s.metrics["ball_rms_3d_mm"] = rb.rms_3d;
    s.metrics["effector_rms_3d_mm"] = re.rms_3d;
  }
}

void run_simulate(Stage& s) {
  const int count = static_cast<int>(s.cfg.integer("sim.trajectories"));
  const double duration = s.cfg.number("sim.duration_s");
  if (count < 1 || !(duration > 0)) throw ConfigError("sim.trajectories and sim.duration_s must be positive");
  const SimConfig sc = sim_config(s.cfg);
  const auto trajs = generate_teleop_trajectories(count, duration, s.seed);
  const Dataset ds = simulate_dataset(trajs, sc);
  write_dataset(s.output("path.dataset"), ds);
  if (s.cfg.flag("sim.export_csv")) export_csv(s.output_file("dataset.csv"), ds);
  std::vector<Vec3> err;
  for (std::size_t i = 0; i < ds.size(); ++i) err.push_back(-ds.label(i));
  const ErrorReport r = compute_report(err, "reported");
  s.metrics["records"] = ds.size();
  s.metrics["trajectories"] = count;
  s.metrics["reported_rms_3d_mm"] = r.rms_3d;
  s.metrics["coverage"] = workspace_coverage(ds);
  s.log << ds.size() << " records, reported 3D RMS " << r.rms_3d << " mm\n";
}

void run_train(Stage& s) {
  const Dataset ds = read_dataset(s.input("path.dataset"));
  const SplitSpec spec = split_spec(s.cfg);
  const TrainingConfig tc = training_config(s.cfg);
  const bool by_trajectory = s.cfg.text("split.mode") == "trajectory";
  const DatasetSplit split = by_trajectory ? split_by_trajectory(ds, spec) : split_random_points(ds, spec);
  write_split_file(s.output("path.split"), split.assignment);
  const TrainingResult r = train(split.train, split.val, tc, [&](const EpochRecord& e) {
    s.log << "epoch " << e.epoch << " train " << e.train_loss << " val " << e.val_loss << " val_rms " << e.val_rms_mm
          << " mm lr " << e.learning_rate << "\n";
  });
  write_model(s.output("path.model"), r.model);
  write_history(s.output_file("history.txt"), r.history);
  s.metrics["split_mode"] = s.cfg.text("split.mode");
  s.metrics["train_records"] = split.train.size();
  s.metrics["val_records"] = split.val.size();
  s.metrics["test_records"] = split.test.size();
  s.metrics["epochs_run"] = r.history.size();
  s.metrics["best_epoch"] = r.best_epoch;
  s.metrics["best_val_rms_mm"] = r.history.at(static_cast<std::size_t>(r.best_epoch - 1)).val_rms_mm;
  s.metrics["parameters"] = r.model.parameter_count();
  s.log << "training took " << r.seconds << " s\n";
}

void run_estimate(Stage& s) {
  const MLPModel model = read_model(s.input("path.model"));
  const Dataset ds = read_dataset(s.input("path.dataset"));
  const Eigen::MatrixXd pred = predict_errors(model, ds.features);
  TextTable t;
  t.header = {"timestamp", "trajectory", "x", "y", "z"};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Vec3 c = ds.reported_position(i) + pred.row(static_cast<Eigen::Index>(i)).transpose();
    t.rows.push_back({format_double(ds.timestamps[i]), std::to_string(ds.trajectory[i]), format_double(c.x()),
                      format_double(c.y()), format_double(c.z())});
  }
  write_table(s.output("path.corrected"), t, {"corrected end-effector positions, mm"});
  s.metrics["records"] = ds.size();
}

void run_evaluate(Stage& s) {
  const Dataset ds = read_dataset(s.input("path.dataset"));
  const TextTable corr = read_table(s.input("path.corrected"));
  if (corr.rows.size() != ds.size()) throw std::runtime_error("corrected stream and dataset differ in length");
  const std::string& subset = s.cfg.text("evaluate.subset");
  if (subset != "test" && subset != "all") throw ConfigError("evaluate.subset must be test or all");
  std::set<int> keep;
  if (subset == "test") {
    for (const auto& [id, role] : read_split_file(s.input("path.split"))) {
      if (role == SplitRole::test) keep.insert(id);
    }
    if (keep.empty()) throw ConfigError("split file has no test trajectories; use evaluate.subset = all");
  }

  std::vector<Vec3> before, after;
  std::vector<TracePoint> trace;
  int trace_id = -1;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (!keep.empty() && !keep.count(ds.trajectory[i])) continue;
    if (corr.number(i, "timestamp") != ds.timestamps[i]) {
      throw std::runtime_error("corrected stream is not aligned with the dataset at record " + std::to_string(i));
    }
    const Vec3 truth = ds.true_position(i);
    const Vec3 reported = ds.reported_position(i);
    const Vec3 corrected{corr.number(i, "x"), corr.number(i, "y"), corr.number(i, "z")};
    before.push_back(reported - truth);
    after.push_back(corrected - truth);
    if (trace_id < 0) trace_id = ds.trajectory[i];
    if (ds.trajectory[i] == trace_id) trace.push_back({ds.timestamps[i], truth, reported, corrected});
  }
  if (before.size() < 2) throw std::runtime_error("fewer than two records to evaluate");
  const ErrorReport rb = compute_report(before, "reported");
  const ErrorReport ra = compute_report(after, "corrected");
  const Improvement imp = improvement_summary(rb, ra);
  write_reports(s.output_file("report.txt"), {rb, ra});
  write_plot_data(s.output_file("plot.txt"), trace);

  s.metrics["records"] = before.size();
  s.metrics["reported_rms_3d_mm"] = rb.rms_3d;
  s.metrics["corrected_rms_3d_mm"] = ra.rms_3d;
  s.metrics["reported_sd_3d_mm"] = rb.sd_signed;
  s.metrics["corrected_sd_3d_mm"] = ra.sd_signed;
  s.metrics["rms_reduction_pct"] = imp.rms_reduction_pct;
  s.metrics["sd_reduction_pct"] = imp.sd_reduction_pct;
  s.metrics["sd_norm_reduction_pct"] = imp.sd_norm_reduction_pct;
  s.log << "3D RMS " << rb.rms_3d << " -> " << ra.rms_3d << " mm (" << imp.rms_reduction_pct << "%), SD "
        << rb.sd_signed << " -> " << ra.sd_signed << " mm (" << imp.sd_reduction_pct << "%)\n";

  std::vector<std::string> violations;
  if (imp.rms_reduction_pct < s.cfg.number("evaluate.min_rms_reduction_pct")) violations.push_back("rms reduction");
  if (imp.sd_reduction_pct < s.cfg.number("evaluate.min_sd_reduction_pct")) violations.push_back("sd reduction");
  const double cap = s.cfg.number("evaluate.max_corrected_rms_mm");
  if (cap > 0 && ra.rms_3d > cap) violations.push_back("corrected rms");
  s.metrics["thresholds_met"] = violations.empty();
  if (!violations.empty()) {
    std::string msg = "acceptance thresholds violated:";
    for (const auto& v : violations) msg += " " + v;
    s.write_manifest();
    throw ThresholdFailure(msg);
  }
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c == '\n' ? ' ' : c);
  }
  return out + "\"";
}

}  // namespace

int run_subcommand(const std::string& name, const PipelineConfig& cfg, const fs::path& out_dir, std::ostream& log,
                   std::ostream& err) {
  auto fail = [&](const char* kind, int code, const std::string& what) {
    err << "eep: error stage=" << name << " kind=" << kind << " code=" << code << " message=" << quoted(what) << "\n";
    return code;
  };
  try {
    const auto& names = subcommand_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw ConfigError("unknown subcommand '" + name + "'");
    }
    fs::create_directories(out_dir);
    Stage s{name, cfg, out_dir, log, derive_seed(static_cast<std::uint64_t>(cfg.integer("seed")), name), {}, {}};
    if (name == "calibrate") run_calibrate(s);
    if (name == "render") run_render(s);
    if (name == "detect") run_detect(s);
    if (name == "track") run_track(s);
    if (name == "simulate") run_simulate(s);
    if (name == "train") run_train(s);
    if (name == "estimate") run_estimate(s);
    if (name == "evaluate") run_evaluate(s);
    s.write_manifest();
    return kExitOk;
  } catch (const ConfigError& e) {
    return fail("config", kExitConfig, e.what());
  } catch (const ThresholdFailure& e) {
    return fail("threshold", kExitThreshold, e.what());
  } catch (const std::exception& e) {
    return fail("runtime", kExitRuntime, e.what());
  }
}

}  // namespace eep
