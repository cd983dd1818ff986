#include <gtest/gtest.h>

#include <filesystem>

#include "expect_error.hpp"
#include "sadq/diag/metrics.hpp"
#include "sadq/diag/sweep.hpp"
#include "sadq/train/trainer.hpp"
#include "temp_dir.hpp"

namespace sadq {
namespace {

using sadq::testing::read_file;
using sadq::testing::TempDir;
namespace fs = std::filesystem;

TrainConfig small_run() {
  TrainConfig c = preset("cartpole");
  c.q_hidden = {16};
  c.model_hidden = {16};
  c.q_batch = 16;
  c.model_batch = 16;
  c.model_updates_per_collect = 1;
  c.replay_frequency = 100;
  c.total_steps = 600;
  c.eval_interval = 300;
  c.eval_episodes = 2;
  c.target_update_interval = 200;
  c.buffer_size = 1000;
  c.seeds = {4};
  return c;
}

TEST(Sweep, CellName) {
  EXPECT_EQ(cell_name(0.5, 0.0, 10), "alpha0.5_beta0_k10");
  EXPECT_EQ(cell_name(1, 0.25, 1), "alpha1_beta0.25_k1");
}

TEST(Sweep, SingleCellMatchesPlainRun) {
  TempDir dir;
  const auto base = small_run();
  const auto runs = sweep(base, {}, dir.file("sw"));
  ASSERT_EQ(runs.size(), 1u);
  ASSERT_TRUE(runs[0].ok) << runs[0].error;

  Trainer(base, 4, dir.file("plain")).run();
  EXPECT_EQ(read_file(runs[0].dir + "/metrics.csv"), read_file(dir.file("plain") + "/metrics.csv"));
  EXPECT_EQ(read_file(runs[0].dir + "/checkpoint.bin"), read_file(dir.file("plain") + "/checkpoint.bin"));
}

TEST(Sweep, GridAndSummary) {
  TempDir dir;
  SweepGrid grid;
  grid.alphas = {0.5, 1.0};
  grid.seeds = {1, 2};
  const auto out = dir.file("sw");
  const auto runs = sweep(small_run(), grid, out, 2);
  ASSERT_EQ(runs.size(), 4u);
  for (const auto& r : runs) EXPECT_TRUE(r.ok) << r.error;
  EXPECT_TRUE(fs::exists(fs::path(out) / cell_name(0.5, small_run().beta, 1) / "seed_2" / "metrics.csv"));

  const auto rows = summarize_sweep(out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].alpha, 0.5);
  EXPECT_EQ(rows[1].alpha, 1.0);
  for (const auto& row : rows) {
    EXPECT_EQ(row.runs, 2u);
    EXPECT_EQ(row.failed, 0u);
    EXPECT_GE(row.best_return, row.final_return);
  }
  // Oracle: mean of the last eval_return_mean over the two seed files.
  double sum = 0.0;
  for (int s : {1, 2}) {
    const auto path = (fs::path(out) / cell_name(1.0, small_run().beta, 1) / ("seed_" + std::to_string(s)) /
                       "metrics.csv").string();
    sum += read_csv(path).values("eval_return_mean").back();
  }
  EXPECT_DOUBLE_EQ(rows[1].final_return, sum / 2.0);

  const auto summary = read_csv(out + "/summary.csv");
  EXPECT_EQ(summary.values("runs").size(), 2u);
}

TEST(Sweep, FailingRunIsRecorded) {
  TempDir dir;
  auto base = small_run();
  base.q_lr = 1e300;
  const auto runs = sweep(base, {}, dir.file("sw"));
  ASSERT_EQ(runs.size(), 1u);
  EXPECT_FALSE(runs[0].ok);
  EXPECT_TRUE(fs::exists(runs[0].dir + "/error.txt"));
  const auto rows = summarize_sweep(dir.file("sw"));
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].failed, 1u);
}

TEST(Sweep, MissingDirectory) {
  TempDir dir;
  EXPECT_SADQ_ERROR(summarize_sweep(dir.file("absent")), ErrorKind::kIoError);
}

}  // namespace
}  // namespace sadq
