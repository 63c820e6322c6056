#include "eep/dataset.hpp"

#include "eep/text_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

namespace eep {

namespace {

constexpr char kMagic[8] = {'E', 'E', 'P', 'D', 'A', 'T', 'A', '\0'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DatasetError(path.string() + ": truncated header");
  return v;
}

}  // namespace

Vec3 Dataset::reported_position(std::size_t i) const {
  return {features(i, rs::reported_pos), features(i, rs::reported_pos + 1), features(i, rs::reported_pos + 2)};
}

Vec3 Dataset::label(std::size_t i) const { return {labels(i, 0), labels(i, 1), labels(i, 2)}; }

std::vector<TrajectorySpan> Dataset::spans() const {
  std::vector<TrajectorySpan> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (out.empty() || out.back().id != trajectory[i]) out.push_back({trajectory[i], i, i});
    out.back().end = i + 1;
  }
  return out;
}

std::map<int, std::size_t> Dataset::trajectory_sizes() const {
  std::map<int, std::size_t> out;
  for (const int id : trajectory) ++out[id];
  return out;
}

void Dataset::validate() const {
  const auto n = static_cast<Eigen::Index>(size());
  if (features.rows() != n || features.cols() != kFeatureCount || labels.rows() != n ||
      labels.cols() != kLabelCount || trajectory.size() != size()) {
    throw DatasetError("dataset arrays have inconsistent shapes");
  }
  std::set<int> closed;
  for (const auto& s : spans()) {
    if (!closed.insert(s.id).second) {
      throw DatasetError("trajectory " + std::to_string(s.id) + " is not contiguous");
    }
  }
}

void Dataset::append(const Dataset& other) {
  const auto n = features.rows();
  const auto m = other.features.rows();
  timestamps.insert(timestamps.end(), other.timestamps.begin(), other.timestamps.end());
  trajectory.insert(trajectory.end(), other.trajectory.begin(), other.trajectory.end());
  features.conservativeResize(n + m, Eigen::NoChange);
  labels.conservativeResize(n + m, Eigen::NoChange);
  features.bottomRows(m) = other.features;
  labels.bottomRows(m) = other.labels;
}

Dataset Dataset::select(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
  out.labels.resize(static_cast<Eigen::Index>(rows.size()), kLabelCount);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = rows[k];
    out.timestamps.push_back(timestamps.at(i));
    out.trajectory.push_back(trajectory[i]);
    out.features.row(static_cast<Eigen::Index>(k)) = features.row(static_cast<Eigen::Index>(i));
    out.labels.row(static_cast<Eigen::Index>(k)) = labels.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

Dataset Dataset::select_trajectories(const std::vector<int>& ids) const {
  const std::set<int> want(ids.begin(), ids.end());
  std::vector<std::size_t> rows;
  for (const auto& s : spans()) {
    if (!want.count(s.id)) continue;
    for (std::size_t i = s.begin; i < s.end; ++i) rows.push_back(i);
  }
  return select(rows);
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  ds.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint32_t>(out, kFeatureLayoutVersion);
  put<std::uint32_t>(out, kFeatureCount);
  put<std::uint32_t>(out, kLabelCount);
  put<std::uint64_t>(out, ds.size());
  const auto spans = ds.spans();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spans.size()));
  for (const auto& s : spans) {
    put<std::int32_t>(out, s.id);
    put<std::uint64_t>(out, s.begin);
    put<std::uint64_t>(out, s.end);
  }
  std::vector<double> rec(1 + kFeatureCount + kLabelCount);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    rec[0] = ds.timestamps[i];
    for (int j = 0; j < kFeatureCount; ++j) rec[1 + j] = ds.features(r, j);
    for (int j = 0; j < kLabelCount; ++j) rec[1 + kFeatureCount + j] = ds.labels(r, j);
    out.write(reinterpret_cast<const char*>(rec.data()), static_cast<std::streamsize>(rec.size() * sizeof(double)));
  }
  if (!out) throw DatasetError("write failed for " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw DatasetError(path.string() + ": not a dataset file");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kFormatVersion) throw DatasetError(path.string() + ": unsupported format version " + std::to_string(version));
  const auto layout = get<std::uint32_t>(in, path);
  const auto nf = get<std::uint32_t>(in, path);
  const auto nl = get<std::uint32_t>(in, path);
  if (layout != kFeatureLayoutVersion || nf != kFeatureCount || nl != kLabelCount) {
    throw DatasetError(path.string() + ": feature layout does not match this build");
  }
  const auto n = get<std::uint64_t>(in, path);
  const auto nspans = get<std::uint32_t>(in, path);
  Dataset ds;
  ds.trajectory.resize(n);
  std::uint64_t covered = 0;
  for (std::uint32_t k = 0; k < nspans; ++k) {
    const auto id = get<std::int32_t>(in, path);
    const auto b = get<std::uint64_t>(in, path);
    const auto e = get<std::uint64_t>(in, path);
    if (b != covered || e <= b || e > n) throw DatasetError(path.string() + ": bad trajectory table");
    std::fill(ds.trajectory.begin() + static_cast<std::ptrdiff_t>(b), ds.trajectory.begin() + static_cast<std::ptrdiff_t>(e), id);
    covered = e;
  }
  if (covered != n) throw DatasetError(path.string() + ": trajectory table does not cover all records");
  ds.timestamps.resize(n);
  ds.features.resize(static_cast<Eigen::Index>(n), kFeatureCount);
  ds.labels.resize(static_cast<Eigen::Index>(n), kLabelCount);
  std::vector<double> rec(1 + kFeatureCount + kLabelCount);
  for (std::uint64_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(rec.data()), static_cast<std::streamsize>(rec.size() * sizeof(double)));
    if (!in) throw DatasetError(path.string() + ": truncated records");
    const auto r = static_cast<Eigen::Index>(i);
    ds.timestamps[i] = rec[0];
    for (int j = 0; j < kFeatureCount; ++j) ds.features(r, j) = rec[1 + j];
    for (int j = 0; j < kLabelCount; ++j) ds.labels(r, j) = rec[1 + kFeatureCount + j];
  }
  ds.validate();
  return ds;
}

void export_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write " + path.string());
  out << "timestamp,trajectory";
  for (const auto& name : feature_names()) out << ',' << name;
  out << ",err_x,err_y,err_z\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << format_double(ds.timestamps[i]) << ',' << ds.trajectory[i];
    for (int j = 0; j < kFeatureCount; ++j) out << ',' << format_double(ds.features(r, j));
    for (int j = 0; j < kLabelCount; ++j) out << ',' << format_double(ds.labels(r, j));
    out << '\n';
  }
  if (!out) throw DatasetError("write failed for " + path.string());
}

std::string_view split_role_name(SplitRole r) {
  switch (r) {
    case SplitRole::train: return "train";
    case SplitRole::val: return "val";
    case SplitRole::test: return "test";
  }
  return "?";
}

void SplitSpec::validate() const {
  if (!(train > 0 && val > 0 && test > 0)) throw std::invalid_argument("split fractions must be positive");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw std::invalid_argument("split fractions must sum to 1");
  if (!(tolerance > 0)) throw std::invalid_argument("split tolerance must be positive");
}

DatasetSplit split_by_trajectory(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  const auto sizes = ds.trajectory_sizes();
  if (sizes.size() < 10) throw DatasetError("trajectory split needs at least 10 trajectories");
  std::vector<int> ids;
  for (const auto& [id, n] : sizes) ids.push_back(id);
  std::mt19937_64 rng(spec.seed);
  std::shuffle(ids.begin(), ids.end(), rng);

  const double total = static_cast<double>(ds.size());
  std::vector<int> test, val, train;
  std::size_t pos = 0;
  // Take trajectories while each one moves the count closer to the target.
  auto fill = [&](std::vector<int>& dst, double fraction) {
    const double target = fraction * total;
    double count = 0;
    while (pos < ids.size()) {
      const double next = count + static_cast<double>(sizes.at(ids[pos]));
      if (!dst.empty() && std::abs(next - target) >= std::abs(count - target)) break;
      dst.push_back(ids[pos++]);
      count = next;
    }
  };
  fill(test, spec.test);
  fill(val, spec.val);
  train.assign(ids.begin() + static_cast<std::ptrdiff_t>(pos), ids.end());
  if (train.empty()) throw DatasetError("no trajectories left for training");

  DatasetSplit out;
  for (const int id : train) out.assignment[id] = SplitRole::train;
  for (const int id : val) out.assignment[id] = SplitRole::val;
  for (const int id : test) out.assignment[id] = SplitRole::test;
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  std::sort(test.begin(), test.end());
  out.train = ds.select_trajectories(train);
  out.val = ds.select_trajectories(val);
  out.test = ds.select_trajectories(test);

  auto check = [&](const Dataset& part, double target, const char* name) {
    const double realized = static_cast<double>(part.size()) / total;
    if (std::abs(realized - target) > spec.tolerance) {
      throw DatasetError(std::string("cannot meet the ") + name + " fraction with whole trajectories (" +
                         std::to_string(realized) + " vs " + std::to_string(target) + ")");
    }
  };
  check(out.train, spec.train, "train");
  check(out.val, spec.val, "val");
  check(out.test, spec.test, "test");
  return out;
}

DatasetSplit split_random_points(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(spec.seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(spec.test * static_cast<double>(ds.size())));
  const auto n_val = static_cast<std::size_t>(std::llround(spec.val * static_cast<double>(ds.size())));
  std::vector<std::size_t> test(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> val(idx.begin() + static_cast<std::ptrdiff_t>(n_test),
                               idx.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), idx.end());
  for (auto* v : {&test, &val, &train}) std::sort(v->begin(), v->end());
  DatasetSplit out;
  out.train = ds.select(train);
  out.val = ds.select(val);
  out.test = ds.select(test);
  return out;
}

void write_split_file(const std::filesystem::path& path, const std::map<int, SplitRole>& assignment) {
  TextTable t;
  t.header = {"trajectory", "split"};
  for (const auto& [id, role] : assignment) t.rows.push_back({std::to_string(id), std::string(split_role_name(role))});
  write_table(path, t, {"trajectory-level split assignment"});
}

std::map<int, SplitRole> read_split_file(const std::filesystem::path& path) {
  const TextTable t = read_table(path);
  std::map<int, SplitRole> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::string s = t.text(i, "split");
    SplitRole r;
    if (s == "train") {
      r = SplitRole::train;
    } else if (s == "val") {
      r = SplitRole::val;
    } else if (s == "test") {
      r = SplitRole::test;
    } else {
      throw FormatError(path.string() + ": unknown split '" + s + "'");
    }
    out[static_cast<int>(t.integer(i, "trajectory"))] = r;
  }
  return out;
}

}  // namespace eep
