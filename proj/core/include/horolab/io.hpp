#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

namespace horolab {

/// Shortest text that reads back to the same double ("%.17g" with trimming).
std::string format_double(double v);
std::string format_double(long double v);

/// One CSV field; quoted only when it holds a comma, quote or newline.
std::string csv_field(const std::string& s);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(const char* s) { return cell(std::string(s)); }
  CsvWriter& cell(double v) { return cell(format_double(v)); }
  CsvWriter& cell(long double v) { return cell(format_double(v)); }
  CsvWriter& cell(bool v) { return cell(std::string(v ? "true" : "false")); }
  template <typename I>
    requires std::is_integral_v<I>
  CsvWriter& cell(I v) {
    return cell(std::to_string(v));
  }
  CsvWriter& empty() { return cell(std::string()); }
  /// Ends the row; throws InvariantViolation on a column-count mismatch.
  void end();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t columns_;
  std::vector<std::string> row_;
};

/// Long-format plot data: whitespace separated (series, x, y, y_err).
class PlotData {
 public:
  void add(const std::string& series, double x, double y, double y_err = 0.0);
  void write(const std::filesystem::path& path) const;
  std::size_t size() const { return rows_.size(); }

 private:
  struct Row {
    std::string series;
    double x, y, y_err;
  };
  std::vector<Row> rows_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// Throws ResourceError when the file cannot be opened.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace horolab
