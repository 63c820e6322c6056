#pragma once

// Paired robot-state / position-error records grouped by trajectory.
//
// Binary file (little-endian):
//   "EEPDATA\0", u32 format version, u32 feature layout version,
//   u32 feature count, u32 label count, u64 record count,
//   u32 trajectory count, then per trajectory {i32 id, u64 begin, u64 end},
//   then records of f64 [timestamp, features..., labels...].

#include "eep/geometry.hpp"
#include "eep/ravenstate.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <vector>

namespace eep {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrajectorySpan {
  int id = 0;
  std::size_t begin = 0;
  std::size_t end = 0;  // one past the last record
};

/// Labels are true minus reported end-effector position, mm.
struct Dataset {
  std::vector<double> timestamps;
  RowMatrix features{0, kFeatureCount};
  RowMatrix labels{0, kLabelCount};
  std::vector<int> trajectory;  // per record

  [[nodiscard]] std::size_t size() const { return timestamps.size(); }
  [[nodiscard]] Vec3 reported_position(std::size_t i) const;
  [[nodiscard]] Vec3 label(std::size_t i) const;
  [[nodiscard]] Vec3 true_position(std::size_t i) const { return reported_position(i) + label(i); }
  /// Maximal runs of consecutive records sharing a trajectory id.
  [[nodiscard]] std::vector<TrajectorySpan> spans() const;
  /// Record count per trajectory id.
  [[nodiscard]] std::map<int, std::size_t> trajectory_sizes() const;

  void validate() const;
  void append(const Dataset& other);
  [[nodiscard]] Dataset select(const std::vector<std::size_t>& rows) const;
  [[nodiscard]] Dataset select_trajectories(const std::vector<int>& ids) const;
};

void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);
/// Delimited text: timestamp, trajectory, every feature by name, err_x, err_y, err_z.
void export_csv(const std::filesystem::path& path, const Dataset& ds);

enum class SplitRole { train, val, test };
std::string_view split_role_name(SplitRole r);

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;
  double tolerance = 0.05;  // allowed deviation of realized sample fractions

  void validate() const;
};

struct DatasetSplit {
  Dataset train;
  Dataset val;
  Dataset test;
  std::map<int, SplitRole> assignment;  // trajectory splits only
};

/// Whole trajectories are assigned to splits in shuffled order. Needs at least 10 trajectories.
DatasetSplit split_by_trajectory(const Dataset& ds, const SplitSpec& spec);
/// Individual records are shuffled and dealt out; trajectories straddle splits.
DatasetSplit split_random_points(const Dataset& ds, const SplitSpec& spec);

/// Rows: trajectory, split.
void write_split_file(const std::filesystem::path& path, const std::map<int, SplitRole>& assignment);
std::map<int, SplitRole> read_split_file(const std::filesystem::path& path);

}  // namespace eep
