#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sadq/train/config.hpp"

namespace sadq {

/// Empty lists keep the base configuration's value.
struct SweepGrid {
  std::vector<double> alphas;
  std::vector<double> betas;
  std::vector<std::size_t> ks;  // model updates per collect
  std::vector<std::uint64_t> seeds;
};

struct SweepRun {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::string dir;
  bool ok = false;
  std::string error;
};

/// Summary row recomputed from files on disk.
struct SweepSummaryRow {
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t k = 0;
  std::size_t runs = 0;     // seeds with a metrics file
  std::size_t failed = 0;   // seeds that left an error.txt
  double final_return = 0.0;  // mean over seeds of the last eval_return_mean
  double best_return = 0.0;   // mean over seeds of the best eval_return_mean
};

/// Trains every grid cell and seed under out_dir/<cell>/seed_<n>, with at
/// most `workers` runs in flight. A failing run records error.txt in its
/// directory and does not stop the sweep. Writes out_dir/summary.csv.
std::vector<SweepRun> sweep(const TrainConfig& base, const SweepGrid& grid, const std::string& out_dir,
                            std::size_t workers = 1);

/// Scans out_dir for cell directories and rebuilds the summary from each
/// run's config.ini and metrics.csv.
std::vector<SweepSummaryRow> summarize_sweep(const std::string& out_dir);
void write_sweep_summary(const std::vector<SweepSummaryRow>& rows, const std::string& path);

std::string cell_name(double alpha, double beta, std::size_t k);

}  // namespace sadq
