#pragma once

// The eight pipeline stages behind the eep command. Each stage reads and
// writes files in one output directory and leaves <stage>.manifest.json
// with the configuration hash, seeds, versions and artifact digests.

#include "eep/config.hpp"
#include "eep/image_pipeline.hpp"
#include "eep/nn_estimator.hpp"
#include "eep/robot_sim.hpp"
#include "eep/scene.hpp"
#include "eep/tracking.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace eep {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitConfig = 2, kExitThreshold = 3 };

class ThresholdFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::vector<std::string>& subcommand_names();

/// Runs one stage; errors become exit codes and one "eep: error ..." line on `err`.
int run_subcommand(const std::string& name, const PipelineConfig& cfg, const std::filesystem::path& out_dir,
                   std::ostream& log, std::ostream& err);

// Module configurations as the pipeline derives them from the key-value file.
RigGeometry rig_geometry(const PipelineConfig& cfg);
MarkerRigSpec marker_rig(const PipelineConfig& cfg);
DetectorConfig detector_config(const PipelineConfig& cfg);
TrackerConfig tracker_config(const PipelineConfig& cfg);
SimConfig sim_config(const PipelineConfig& cfg);
SplitSpec split_spec(const PipelineConfig& cfg);
TrainingConfig training_config(const PipelineConfig& cfg);

/// Digest of a file's bytes (FNV-1a 64).
std::string file_digest(const std::filesystem::path& path);

}  // namespace eep
