#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace sadq {

/// One evaluation-interval row of a training log. Unavailable values are NaN
/// and are written as the literal "nan".
struct MetricsRow {
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  double wall_clock = kNaN;
  std::uint64_t env_steps = 0;
  std::uint64_t grad_steps = 0;
  double eval_return_mean = kNaN;
  double eval_return_std = kNaN;
  double q_loss = kNaN;
  double model_loss = kNaN;
  double epsilon = kNaN;
  double q_discrepancy = kNaN;
  double target_variance_estimate = kNaN;
  std::uint64_t model_steps = 0;
  double eval_success_rate = kNaN;
};

/// Column order of the metrics file.
const std::vector<std::string>& metrics_columns();
std::string metrics_header();
std::string format_metrics_row(const MetricsRow& row);
/// %.9g, or "nan".
std::string format_value(double x);

/// Line-buffered CSV writer: every row is flushed as soon as it is written.
class MetricsWriter {
 public:
  /// append = false truncates and writes the header; append = true continues
  /// an existing file (writing the header only when it is empty).
  MetricsWriter(const std::string& path, bool append);
  void write(const MetricsRow& row);

 private:
  std::ofstream out_;
  std::string path_;
};

/// Writes header plus rows to path in one go. IoError when unwritable;
/// EmptyVector when rows is empty.
void emit_metrics(const std::vector<MetricsRow>& rows, const std::string& path);

/// Numeric CSV as read back from disk ("nan" parses to NaN).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// MissingKey when the column is absent.
  std::size_t column(const std::string& key) const;
  std::vector<double> values(const std::string& key) const;
};

CsvTable read_csv(const std::string& path);

/// Keeps the header and the rows whose value in `key` is <= limit, rewriting
/// the file in place. Used when a run resumes from a checkpoint.
void truncate_csv_after(const std::string& path, const std::string& key, double limit);

}  // namespace sadq
