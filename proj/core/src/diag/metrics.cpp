#include "sadq/diag/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "sadq/common/error.hpp"

namespace sadq {

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols = {
      "wall_clock", "env_steps",     "grad_steps",    "eval_return_mean",         "eval_return_std",
      "q_loss",     "model_loss",    "epsilon",       "q_discrepancy",            "target_variance_estimate",
      "model_steps", "eval_success_rate"};
  return cols;
}

std::string metrics_header() {
  std::string h;
  for (const auto& c : metrics_columns()) h += (h.empty() ? "" : ",") + c;
  return h;
}

std::string format_value(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string format_metrics_row(const MetricsRow& r) {
  const std::vector<std::string> cells = {
      format_value(r.wall_clock),     std::to_string(r.env_steps),      std::to_string(r.grad_steps),
      format_value(r.eval_return_mean), format_value(r.eval_return_std), format_value(r.q_loss),
      format_value(r.model_loss),     format_value(r.epsilon),          format_value(r.q_discrepancy),
      format_value(r.target_variance_estimate), std::to_string(r.model_steps), format_value(r.eval_success_rate)};
  std::string line;
  for (const auto& c : cells) line += (line.empty() ? "" : ",") + c;
  return line;
}

MetricsWriter::MetricsWriter(const std::string& path, bool append) : path_(path) {
  const bool has_content = append && std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!out_) fail(ErrorKind::kIoError, "cannot open metrics file " + path);
  if (!has_content) {
    out_ << metrics_header() << '\n';
    out_.flush();
  }
}

void MetricsWriter::write(const MetricsRow& row) {
  out_ << format_metrics_row(row) << '\n';
  out_.flush();
  if (!out_) fail(ErrorKind::kIoError, "write failed on metrics file " + path_);
}

void emit_metrics(const std::vector<MetricsRow>& rows, const std::string& path) {
  if (rows.empty()) fail(ErrorKind::kEmptyVector, "no metrics rows to write");
  MetricsWriter w(path, false);
  for (const auto& r : rows) w.write(r);
}

std::size_t CsvTable::column(const std::string& key) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == key) return i;
  }
  fail(ErrorKind::kMissingKey, "column '" + key + "' not present");
}

std::vector<double> CsvTable::values(const std::string& key) const {
  const auto c = column(key);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(c < r.size() ? r[c] : MetricsRow::kNaN);
  return out;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIoError, "cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kParseError, path + ": missing header");
  t.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      if (cell == "nan") {
        row.push_back(MetricsRow::kNaN);
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        fail(ErrorKind::kParseError, path + " line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void truncate_csv_after(const std::string& path, const std::string& key, double limit) {
  if (!std::filesystem::exists(path)) return;
  std::ifstream in(path);
  std::string header;
  if (!std::getline(in, header)) return;
  const auto cols = split(header);
  std::size_t k = cols.size();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == key) k = i;
  }
  if (k == cols.size()) fail(ErrorKind::kMissingKey, path + ": column '" + key + "' not present");
  std::string kept = header + "\n";
  std::string line;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    if (cells.size() > k && std::strtod(cells[k].c_str(), nullptr) <= limit) kept += line + "\n";
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  out << kept;
  if (!out) fail(ErrorKind::kIoError, "cannot rewrite " + path);
}

}  // namespace sadq
