#pragma once

// Key-value pipeline configuration.
//
// File syntax: one "key = value" per line, '#' starts a comment. Every key
// must be one of config_keys(); unknown keys are rejected. Command-line
// overrides use the same "key=value" form and are applied after the file.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eep {

inline constexpr std::string_view kToolVersion = "0.1.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigKey {
  std::string key;
  std::string default_value;
  std::string help;
};

const std::vector<ConfigKey>& config_keys();

class PipelineConfig {
 public:
  /// Every key at its default.
  PipelineConfig();

  static PipelineConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  /// "key=value"
  void apply_override(const std::string& assignment);

  [[nodiscard]] const std::string& text(const std::string& key) const;
  [[nodiscard]] double number(const std::string& key) const;
  [[nodiscard]] long integer(const std::string& key) const;
  [[nodiscard]] bool flag(const std::string& key) const;
  [[nodiscard]] std::vector<int> int_list(const std::string& key) const;

  [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }
  /// Sorted "key=value" lines.
  [[nodiscard]] std::string canonical() const;
  [[nodiscard]] std::uint64_t hash() const;

 private:
  std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);
/// Per-stage seed from the top-level seed and the stage name.
std::uint64_t derive_seed(std::uint64_t top, std::string_view stage);

}  // namespace eep
