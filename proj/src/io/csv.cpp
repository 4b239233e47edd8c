#include "tps/io/csv.hpp"

#include <charconv>
#include <sstream>

#include <fmt/format.h>

#include "tps/error.hpp"

namespace tps::io {

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), out_(path), columns_(header.size()) {
  if (!out_) throw IoError("cannot write " + path);
  out_ << fmt::format("{}\n", fmt::join(header, ","));
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != columns_) throw InvalidInput("CSV row width does not match the header of " + path_);
  out_ << fmt::format("{}\n", fmt::join(values, ","));
}

void CsvWriter::close() {
  out_.flush();
  if (!out_) throw IoError("failed writing " + path_);
  out_.close();
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  table.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw ConfigError(fmt::format("{}:{}: expected {} columns, found {}", path, line_no, table.header.size(),
                                    cells.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const char* first = cells[i].data();
      const char* last = first + cells[i].size();
      const auto [ptr, ec] = std::from_chars(first, last, values[i]);
      if (ec != std::errc() || ptr != last) {
        throw ConfigError(fmt::format("{}:{}: column {} is not a number", path, line_no, table.header[i]));
      }
    }
    table.rows.push_back(std::move(values));
  }
  if (in.bad()) throw IoError("failed reading " + path);
  return table;
}

}  // namespace tps::io
