#pragma once

// Comma-delimited text tables with a single header line.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace eep {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws FormatError when absent.
  [[nodiscard]] std::size_t column(const std::string& name) const;
  [[nodiscard]] double number(std::size_t row, const std::string& name) const;
  [[nodiscard]] long integer(std::size_t row, const std::string& name) const;
  [[nodiscard]] const std::string& text(std::size_t row, const std::string& name) const;
};

/// Lines starting with '#' are comments. The first other line is the header.
TextTable read_table(const std::filesystem::path& path);
void write_table(const std::filesystem::path& path, const TextTable& table,
                 const std::vector<std::string>& comments = {});

/// Round-trip exact decimal formatting of a double.
std::string format_double(double v);

}  // namespace eep
