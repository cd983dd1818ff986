// Command-line front end: train, eval, sweep, verify-theory, plot.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sadq/common/alloc.hpp"
#include "sadq/common/error.hpp"
#include "sadq/diag/metrics.hpp"
#include "sadq/diag/plot.hpp"
#include "sadq/diag/sweep.hpp"
#include "sadq/diag/tabular.hpp"
#include "sadq/train/checkpoint.hpp"
#include "sadq/train/config.hpp"
#include "sadq/train/trainer.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kRunFailure = 2;
constexpr int kCheckFailure = 3;

struct ConfigArgs {
  std::string config_path;
  std::string preset;
  std::vector<std::string> overrides;
  std::vector<std::uint64_t> seeds;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  auto* cfg = cmd->add_option("--config", args.config_path, "Run file (INI)")->check(CLI::ExistingFile);
  cmd->add_option("--preset", args.preset, "Built-in hyperparameters: cartpole, acrobot, bitflip, ocloud")
      ->excludes(cfg);
  cmd->add_option("--set", args.overrides, "Override one field, e.g. --set agent.alpha=0.5 (repeatable)");
  cmd->add_option("--seed", args.seeds, "Run seed (repeatable; replaces schedule.seeds)");
}

sadq::TrainConfig resolve_config(const ConfigArgs& args) {
  sadq::TrainConfig c;
  if (!args.preset.empty()) c = sadq::preset(args.preset);
  if (!args.config_path.empty()) c = sadq::load_config(args.config_path);
  for (const auto& o : args.overrides) sadq::apply_override(c, o);
  if (!args.seeds.empty()) c.seeds = args.seeds;
  c.validate();
  return c;
}

std::string seed_dir(const std::string& out, std::uint64_t seed, std::size_t seed_count) {
  if (seed_count == 1) return out;
  return (std::filesystem::path(out) / ("seed_" + std::to_string(seed))).string();
}

void print_row(const sadq::MetricsRow& r) {
  std::printf("env_steps=%llu grad_steps=%llu return=%s success=%s q_loss=%s model_loss=%s\n",
              static_cast<unsigned long long>(r.env_steps), static_cast<unsigned long long>(r.grad_steps),
              sadq::format_value(r.eval_return_mean).c_str(), sadq::format_value(r.eval_success_rate).c_str(),
              sadq::format_value(r.q_loss).c_str(), sadq::format_value(r.model_loss).c_str());
  std::fflush(stdout);
}

int cmd_train(const ConfigArgs& args, const std::string& out, const std::string& resume,
              std::optional<std::uint64_t> stop_at, bool dump, bool quiet) {
  if (!resume.empty()) {
    auto t = sadq::Trainer::resume(resume, out);
    std::size_t printed = 0;
    const bool done = t->run(stop_at);
    if (!quiet) {
      for (; printed < t->rows().size(); ++printed) print_row(t->rows()[printed]);
    }
    std::printf("%s at env_steps=%llu\n", done ? "finished" : "stopped",
                static_cast<unsigned long long>(t->env_steps()));
    return kOk;
  }
  const sadq::TrainConfig c = resolve_config(args);
  if (dump) {
    std::cout << sadq::to_ini(c);
    return kOk;
  }
  for (auto seed : c.seeds) {
    const std::string dir = seed_dir(out, seed, c.seeds.size());
    sadq::Trainer t(c, seed, dir);
    std::size_t printed = 0;
    if (!quiet) {
      t.on_grad_step = [&printed](const sadq::Trainer& tr) {
        for (; printed < tr.rows().size(); ++printed) print_row(tr.rows()[printed]);
      };
    }
    const bool done = t.run(stop_at);
    if (!quiet) {
      for (; printed < t.rows().size(); ++printed) print_row(t.rows()[printed]);
    }
    std::printf("seed %llu %s: env_steps=%llu grad_steps=%llu model_steps=%llu -> %s\n",
                static_cast<unsigned long long>(seed), done ? "finished" : "stopped",
                static_cast<unsigned long long>(t.env_steps()), static_cast<unsigned long long>(t.grad_steps()),
                static_cast<unsigned long long>(t.model_steps()), dir.c_str());
  }
  return kOk;
}

int cmd_eval(const std::string& checkpoint, std::size_t episodes, std::uint64_t seed) {
  auto t = sadq::Trainer::resume(checkpoint, "");
  const auto r = sadq::evaluate(t->agent(), t->config().env, episodes, seed);
  std::printf("episodes=%zu return_mean=%s return_std=%s success_rate=%s q_discrepancy=%s\n", r.episodes,
              sadq::format_value(r.return_mean).c_str(), sadq::format_value(r.return_std).c_str(),
              sadq::format_value(r.success_rate).c_str(), sadq::format_value(r.q_discrepancy).c_str());
  return kOk;
}

int cmd_sweep(const ConfigArgs& args, const sadq::SweepGrid& grid_in, const std::string& out, std::size_t workers) {
  const sadq::TrainConfig c = resolve_config(args);
  sadq::SweepGrid grid = grid_in;
  if (!args.seeds.empty()) grid.seeds = args.seeds;
  const auto runs = sadq::sweep(c, grid, out, workers);
  std::size_t failed = 0;
  for (const auto& r : runs) {
    if (!r.ok) {
      ++failed;
      std::fprintf(stderr, "run %s failed: %s\n", r.dir.c_str(), r.error.c_str());
    }
  }
  std::printf("alpha,beta,k,runs,failed,final_return,best_return\n");
  for (const auto& s : sadq::summarize_sweep(out)) {
    std::printf("%s,%s,%zu,%zu,%zu,%s,%s\n", sadq::format_value(s.alpha).c_str(), sadq::format_value(s.beta).c_str(),
                s.k, s.runs, s.failed, sadq::format_value(s.final_return).c_str(),
                sadq::format_value(s.best_return).c_str());
  }
  return failed == 0 ? kOk : kRunFailure;
}

int cmd_verify_theory(const sadq::TheoryCheckConfig& cfg, const std::string& report_path) {
  const auto res = sadq::run_theory_checks(cfg);
  std::printf("variance bound: %zu/%zu pairs (%.2f%%, need %.0f%%) %s\n", res.variance_holds, res.variance_pairs,
              100.0 * res.variance_fraction(), 100.0 * cfg.required_fraction, res.variance_ok(cfg) ? "PASS" : "FAIL");
  std::printf("  largest |Cov| / Var_original: %.4f\n", res.max_mean_covariance_ratio);
  std::printf("bias preservation: %zu/%zu on-policy pairs within %.1f standard errors %s\n", res.bias_within,
              res.bias_tested, cfg.bias_se_multiple, res.bias_ok() ? "PASS" : "FAIL");
  std::printf("  largest |bias_modified - bias_original|: %.6g\n", res.max_abs_bias_difference);
  double literal = 0.0;
  std::size_t n = 0;
  for (const auto& b : res.bias) {
    if (b.on_policy) {
      literal += b.bias_argmax_all;
      ++n;
    }
  }
  if (n > 0) std::printf("  best-of-all-actions selection, mean bias: %.6g (diagnostic)\n", literal / n);

  if (!report_path.empty()) {
    std::FILE* f = std::fopen(report_path.c_str(), "w");
    if (f == nullptr) sadq::fail(sadq::ErrorKind::kIoError, "cannot write " + report_path);
    std::fprintf(f, "kind,s,a,alpha,var_original,var_selected,var_modified,covariance,bound,holds,"
                    "on_policy,bias_original,bias_modified,difference_se,bias_argmax_all\n");
    for (const auto& v : res.variance) {
      std::fprintf(f, "variance,%zu,%zu,%g,%.9g,%.9g,%.9g,%.9g,%.9g,%d,,,,,\n", v.s, v.a, v.alpha, v.var_original,
                   v.var_selected, v.var_modified, v.covariance, v.bound, v.holds() ? 1 : 0);
    }
    for (const auto& b : res.bias) {
      std::fprintf(f, "bias,%zu,%zu,%g,,,,,,,%d,%.9g,%.9g,%.9g,%.9g\n", b.s, b.a, b.alpha, b.on_policy ? 1 : 0,
                   b.bias_original, b.bias_modified, b.difference_se, b.bias_argmax_all);
    }
    std::fclose(f);
  }
  return res.variance_ok(cfg) && res.bias_ok() ? kOk : kCheckFailure;
}

std::vector<sadq::PlotSeries> parse_series(const std::vector<std::string>& specs, const std::vector<std::string>& files) {
  std::vector<sadq::PlotSeries> out;
  for (const auto& spec : specs) {
    sadq::PlotSeries s;
    const auto eq = spec.find('=');
    std::string list = spec;
    if (eq != std::string::npos) {
      s.label = spec.substr(0, eq);
      list = spec.substr(eq + 1);
    }
    std::size_t start = 0;
    while (start <= list.size()) {
      const auto comma = list.find(',', start);
      const auto item = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!item.empty()) s.files.push_back(item);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (s.label.empty()) s.label = s.files.empty() ? "run" : s.files.front();
    out.push_back(std::move(s));
  }
  for (const auto& f : files) out.push_back({f, {f}});
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  sadq::tune_allocator();
  CLI::App app{"SADQ: DQN with a learned Gaussian successor model"};
  app.require_subcommand(1);

  ConfigArgs train_args;
  std::string train_out = "runs/train";
  std::string resume;
  std::optional<std::uint64_t> stop_at;
  bool dump = false;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train an agent");
  add_config_options(train, train_args);
  train->add_option("--out", train_out, "Output directory (per-seed subdirectories when several seeds)");
  train->add_option("--resume", resume, "Continue from a checkpoint file")->check(CLI::ExistingFile);
  train->add_option("--stop-at", stop_at, "Stop (and checkpoint) once this many env steps are done");
  train->add_flag("--dump-config", dump, "Print the resolved run file and exit");
  train->add_flag("--quiet", quiet, "Only print the final line per seed");

  std::string eval_ckpt;
  std::size_t eval_episodes = 20;
  std::uint64_t eval_seed = 0;
  auto* eval = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
  eval->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--episodes", eval_episodes, "Number of episodes")->check(CLI::PositiveNumber);
  eval->add_option("--seed", eval_seed, "Evaluation seed");

  ConfigArgs sweep_args;
  sadq::SweepGrid grid;
  std::string sweep_out = "runs/sweep";
  std::size_t workers = 1;
  auto* sweep = app.add_subcommand("sweep", "Grid over alpha, beta and k, times seeds");
  add_config_options(sweep, sweep_args);
  sweep->add_option("--alpha", grid.alphas, "Alpha values")->delimiter(',');
  sweep->add_option("--beta", grid.betas, "Beta values")->delimiter(',');
  sweep->add_option("--k", grid.ks, "Model updates per collect")->delimiter(',');
  sweep->add_option("--out", sweep_out, "Sweep directory");
  sweep->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);

  sadq::TheoryCheckConfig theory;
  std::string theory_report;
  auto* verify = app.add_subcommand("verify-theory", "Bias and variance checks on random tabular MDPs");
  verify->add_option("--mdps", theory.mdp_count, "Number of random MDPs")->check(CLI::PositiveNumber);
  verify->add_option("--states", theory.n_states, "States per MDP")->check(CLI::PositiveNumber);
  verify->add_option("--actions", theory.n_actions, "Actions per MDP")->check(CLI::PositiveNumber);
  verify->add_option("--gamma", theory.gamma, "Discount")->check(CLI::Range(0.0, 0.999999));
  verify->add_option("--alpha", theory.alphas, "Trade-off factors")->delimiter(',');
  verify->add_option("--samples", theory.n_samples, "Draws per (s, a)")->check(CLI::Range(2, 100000000));
  verify->add_option("--seed", theory.seed, "Seed");
  verify->add_option("--report", theory_report, "Write per-pair results as CSV");

  std::vector<std::string> plot_series;
  std::vector<std::string> plot_files;
  std::vector<std::string> plot_keys;
  std::string plot_out = "plot.svg";
  sadq::PlotOptions plot_opts;
  auto* plot = app.add_subcommand("plot", "SVG chart of metrics files");
  plot->add_option("--series", plot_series, "label=file1,file2,... (one line with a min-max band)");
  plot->add_option("files", plot_files, "Metrics files, one line each");
  plot->add_option("--key", plot_keys, "Column(s) to plot")->required();
  plot->add_option("--x", plot_opts.x_key, "Column for the x axis");
  plot->add_flag("--log", plot_opts.log_scale, "Logarithmic y axis");
  plot->add_option("--title", plot_opts.title, "Chart title");
  plot->add_option("--out", plot_out, "Output SVG path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train) return cmd_train(train_args, train_out, resume, stop_at, dump, quiet);
    if (*eval) return cmd_eval(eval_ckpt, eval_episodes, eval_seed);
    if (*sweep) return cmd_sweep(sweep_args, grid, sweep_out, workers);
    if (*verify) return cmd_verify_theory(theory, theory_report);
    if (*plot) {
      sadq::emit_plot(parse_series(plot_series, plot_files), plot_keys, plot_out, plot_opts);
      std::printf("wrote %s\n", plot_out.c_str());
      return kOk;
    }
  } catch (const sadq::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", std::string(sadq::to_string(e.kind())).c_str(), e.what());
    return e.kind() == sadq::ErrorKind::kConfigInvalid ? kUsage : kRunFailure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRunFailure;
  }
  return kUsage;
}
