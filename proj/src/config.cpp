#include "eep/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace eep {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"seed", "42", "top-level seed; stage seeds are derived from it"},
      // File names, relative to the output directory.
      {"path.markers", "", "marker file (camera_id, marker_id, x_w, y_w, z_w, u_px, v_px); empty: synthesize"},
      {"path.cameras", "cameras.txt", "refined camera poses"},
      {"path.frames", "frames", "rendered image directory"},
      {"path.scene_truth", "scene_truth.txt", "rendered end-effector poses"},
      {"path.detections", "detections.txt", "per-frame circle detections"},
      {"path.ground_truth", "ground_truth.txt", "measured end-effector poses"},
      {"path.dataset", "dataset.bin", "simulated robot dataset"},
      {"path.model", "model.bin", "trained network"},
      {"path.split", "split.txt", "trajectory split assignment"},
      {"path.corrected", "corrected.txt", "corrected position stream"},
      // Camera rig and markers.
      {"rig.cameras", "4", "number of cameras"},
      {"rig.distance_mm", "700", "camera distance to the workspace center"},
      {"rig.elevation_deg", "25", "camera elevation above the horizontal"},
      {"rig.focal_px", "500", "focal length"},
      {"rig.marker_ring_mm", "300", "radius of the marker ring"},
      {"rig.ball_distance_mm", "38", "end-effector point to ball center"},
      {"rig.ball_radius_mm", "20", "ball radius"},
      {"calibrate.prior_position_mm", "40", "prior pose position error"},
      {"calibrate.prior_rotation_deg", "5", "prior pose rotation error"},
      {"calibrate.pixel_noise", "0.5", "marker pixel noise (synthesized markers only)"},
      // Rendering.
      {"render.frames", "30", "frames to render"},
      {"render.fps", "30", "frame rate, sets measurement timestamps"},
      {"render.image_noise", "2", "Gaussian image noise, 8-bit levels"},
      {"render.occluder_probability", "0.3", "chance of a clutter bar per view"},
      {"render.max_occlusion", "0.3", "largest hidden border fraction per ball"},
      {"render.step_mm", "2", "largest end-effector move per frame"},
      // Detection and tracking.
      {"detect.canny_high", "100", "high Canny threshold (low is half)"},
      {"detect.blur_sigma", "1.5", "initial edge blur"},
      {"detect.max_blur_sigma", "4", "largest edge blur before giving up"},
      {"detect.expected_radius_px", "14", "expected ball radius, sets the color blur"},
      {"track.motion_threshold_px", "25", "largest center move of an effective circle"},
      {"track.reinstate_frames", "5", "good frames a suspended circle must exceed"},
      {"track.radius_window", "0.3", "relative radius search window"},
      {"track.d_min_factor", "0.5", "d_min as a fraction of the closest center pair"},
      {"track.consistency_mm", "10", "ray to ball distance for reinstatement"},
      {"track.restart_skip", "3", "frames skipped before a restart"},
      {"track.tolerance_growth", "1.5", "search window growth per restart"},
      // Robot simulation.
      {"sim.trajectories", "72", "number of teleoperation trajectories"},
      {"sim.duration_s", "85", "duration of each trajectory"},
      {"sim.rate_hz", "1000", "control loop rate"},
      {"sim.record_every", "170", "control steps per recorded pair"},
      {"sim.sag_scale", "1", "multiplier on the default cable sag gains"},
      {"sim.backlash_scale", "1", "multiplier on the default backlash"},
      {"sim.noise_scale", "1", "multiplier on the default joint noise"},
      {"sim.offset_scale", "1", "multiplier on the default static Cartesian offset"},
      {"sim.export_csv", "false", "also write the dataset as delimited text"},
      // Splits and training.
      {"split.mode", "trajectory", "trajectory | random"},
      {"split.train", "0.8", "training fraction"},
      {"split.val", "0.1", "validation fraction"},
      {"split.test", "0.1", "test fraction"},
      {"train.hidden", "600,500,400", "hidden layer sizes"},
      {"train.activation", "sigmoid", "sigmoid | relu | elu"},
      {"train.batch_norm", "true", "batch normalization on hidden layers"},
      {"train.learning_rate", "1e-8", "Adam learning rate"},
      {"train.lr_mode", "auto", "auto (scale up after stagnation) | fixed"},
      {"train.lr_scale", "1000", "learning rate multiplier in auto mode"},
      {"train.stagnation_epochs", "200", "epochs without progress before scaling"},
      {"train.epochs", "10000", "epoch limit"},
      {"train.batch_size", "1024", "minibatch size"},
      {"train.l1", "5e-6", "L1 rate on weights"},
      {"train.beta1", "0.9", "Adam first moment decay"},
      {"train.beta2", "0.999", "Adam second moment decay"},
      {"train.epsilon", "1e-8", "Adam epsilon"},
      {"train.patience", "0", "early stopping patience in epochs; 0 disables"},
      {"train.time_budget_s", "0", "wall-clock cap; 0 disables (a cap makes the model timing dependent)"},
      // Evaluation thresholds.
      {"evaluate.subset", "test", "test | all"},
      {"evaluate.min_rms_reduction_pct", "80", "required 3D RMS reduction"},
      {"evaluate.min_sd_reduction_pct", "50", "required 3D SD reduction"},
      {"evaluate.max_corrected_rms_mm", "0", "largest corrected 3D RMS; 0 disables"},
  };
  return keys;
}

PipelineConfig::PipelineConfig() {
  for (const auto& k : config_keys()) values_[k.key] = k.default_value;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  PipelineConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    try {
      cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

void PipelineConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const std::string& PipelineConfig::text(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double PipelineConfig::number(const std::string& key) const {
  const std::string& s = text(key);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError(key + ": '" + s + "' is not a number");
  return v;
}

long PipelineConfig::integer(const std::string& key) const {
  const std::string& s = text(key);
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError(key + ": '" + s + "' is not an integer");
  return v;
}

bool PipelineConfig::flag(const std::string& key) const {
  const std::string& s = text(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key + ": '" + s + "' is not a boolean");
}

std::vector<int> PipelineConfig::int_list(const std::string& key) const {
  const std::string& s = text(key);
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    int v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || p != t.data() + t.size()) {
      throw ConfigError(key + ": '" + s + "' is not a comma-separated integer list");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

std::string PipelineConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t PipelineConfig::hash() const { return fnv1a64(canonical()); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t derive_seed(std::uint64_t top, std::string_view stage) {
  std::uint64_t z = top ^ fnv1a64(stage);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace eep
