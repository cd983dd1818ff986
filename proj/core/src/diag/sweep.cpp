#include "sadq/diag/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "sadq/common/error.hpp"
#include "sadq/diag/metrics.hpp"
#include "sadq/train/trainer.hpp"

namespace sadq {

namespace fs = std::filesystem;

std::string cell_name(double alpha, double beta, std::size_t k) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "alpha%g_beta%g_k%zu", alpha, beta, k);
  return buf;
}

std::vector<SweepRun> sweep(const TrainConfig& base, const SweepGrid& grid, const std::string& out_dir,
                            std::size_t workers) {
  const auto or_base = [](auto list, auto value) {
    using T = typename decltype(list)::value_type;
    if (list.empty()) list.push_back(static_cast<T>(value));
    return list;
  };
  const auto alphas = or_base(grid.alphas, base.alpha);
  const auto betas = or_base(grid.betas, base.beta);
  const auto ks = or_base(grid.ks, base.model_updates_per_collect);
  const auto seeds = grid.seeds.empty() ? base.seeds : grid.seeds;

  std::vector<SweepRun> runs;
  for (double a : alphas) {
    for (double b : betas) {
      for (std::size_t k : ks) {
        for (auto s : seeds) {
          SweepRun r{a, b, k, s, (fs::path(out_dir) / cell_name(a, b, k) / ("seed_" + std::to_string(s))).string()};
          runs.push_back(r);
        }
      }
    }
  }
  fs::create_directories(out_dir);

  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      SweepRun& r = runs[i];
      try {
        TrainConfig c = base;
        c.alpha = r.alpha;
        c.beta = r.beta;
        c.model_updates_per_collect = r.k;
        c.seeds = {r.seed};
        c.validate();
        fs::remove(fs::path(r.dir) / "error.txt");
        Trainer(c, r.seed, r.dir).run();
        r.ok = true;
      } catch (const std::exception& e) {
        r.error = e.what();
        fs::create_directories(r.dir);
        std::ofstream(fs::path(r.dir) / "error.txt") << e.what() << "\n";
      }
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(workers, runs.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  write_sweep_summary(summarize_sweep(out_dir), (fs::path(out_dir) / "summary.csv").string());
  return runs;
}

std::vector<SweepSummaryRow> summarize_sweep(const std::string& out_dir) {
  struct Acc {
    SweepSummaryRow row;
    double final_sum = 0.0;
    double best_sum = 0.0;
  };
  std::map<std::tuple<double, double, std::size_t>, Acc> cells;
  if (!fs::exists(out_dir)) fail(ErrorKind::kIoError, "sweep directory " + out_dir + " does not exist");
  std::vector<fs::path> cell_dirs;
  for (const auto& e : fs::directory_iterator(out_dir)) {
    if (e.is_directory()) cell_dirs.push_back(e.path());
  }
  std::sort(cell_dirs.begin(), cell_dirs.end());
  for (const auto& cell : cell_dirs) {
    std::vector<fs::path> seed_dirs;
    for (const auto& e : fs::directory_iterator(cell)) {
      if (e.is_directory() && fs::exists(e.path() / "config.ini")) seed_dirs.push_back(e.path());
    }
    std::sort(seed_dirs.begin(), seed_dirs.end());
    for (const auto& dir : seed_dirs) {
      const TrainConfig c = load_config((dir / "config.ini").string());
      Acc& acc = cells[{c.alpha, c.beta, c.model_updates_per_collect}];
      acc.row.alpha = c.alpha;
      acc.row.beta = c.beta;
      acc.row.k = c.model_updates_per_collect;
      if (fs::exists(dir / "error.txt")) {
        ++acc.row.failed;
        continue;
      }
      if (!fs::exists(dir / "metrics.csv")) continue;
      const auto returns = read_csv((dir / "metrics.csv").string()).values("eval_return_mean");
      if (returns.empty()) continue;
      ++acc.row.runs;
      acc.final_sum += returns.back();
      acc.best_sum += *std::max_element(returns.begin(), returns.end());
    }
  }
  std::vector<SweepSummaryRow> out;
  for (auto& [key, acc] : cells) {
    const double n = static_cast<double>(acc.row.runs);
    acc.row.final_return = acc.row.runs ? acc.final_sum / n : MetricsRow::kNaN;
    acc.row.best_return = acc.row.runs ? acc.best_sum / n : MetricsRow::kNaN;
    out.push_back(acc.row);
  }
  return out;
}

void write_sweep_summary(const std::vector<SweepSummaryRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path);
  out << "alpha,beta,k,runs,failed,final_return,best_return\n";
  for (const auto& r : rows) {
    out << format_value(r.alpha) << ',' << format_value(r.beta) << ',' << r.k << ',' << r.runs << ',' << r.failed
        << ',' << format_value(r.final_return) << ',' << format_value(r.best_return) << '\n';
  }
}

}  // namespace sadq
