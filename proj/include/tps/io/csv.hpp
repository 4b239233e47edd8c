#pragma once

#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace tps::io {

/// Comma-separated writer; numbers use the shortest round-trip form.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }
  /// Flushes and throws IoError if any write failed.
  void close();

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t columns_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Numeric CSV with one header line. IoError if unreadable, ConfigError on
/// malformed content.
CsvTable read_csv(const std::string& path);

}  // namespace tps::io
