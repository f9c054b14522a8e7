#include "horolab/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "horolab/errors.hpp"

namespace horolab {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  // Fewest digits that round-trip.
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string format_double(long double v) { return format_double(static_cast<double>(v)); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ResourceError("cannot open " + path.string() + " for writing");
  return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(open_output(path)), path_(path), columns_(header.size()) {
  row_ = header;
  end();
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  row_.push_back(s);
  return *this;
}

void CsvWriter::end() {
  if (row_.size() != columns_) {
    throw InvariantViolation(path_.filename().string() + ": row has " + std::to_string(row_.size()) +
                             " cells, header has " + std::to_string(columns_));
  }
  for (std::size_t i = 0; i < row_.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_field(row_[i]);
  }
  out_ << '\n';
  row_.clear();
}

void PlotData::add(const std::string& series, double x, double y, double y_err) {
  rows_.push_back({series, x, y, y_err});
}

void PlotData::write(const std::filesystem::path& path) const {
  auto out = open_output(path);
  out << "# series x y y_err\n";
  for (const auto& r : rows_) {
    out << r.series << ' ' << format_double(r.x) << ' ' << format_double(r.y) << ' ' << format_double(r.y_err)
        << '\n';
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = open_output(path);
  out << doc.dump(2) << '\n';
}

}  // namespace horolab
