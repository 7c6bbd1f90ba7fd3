// saa — semi-supervised trainer with adaptive per-sample augmentation.
//
// Subcommands: train, eval, inspect-history, ablate, export-plots.
// Exit codes: 0 success, 1 runtime failure, 2 bad configuration or usage.

#include <cstdio>
#include <exception>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "saa/commands.hpp"
#include "saa/errors.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::vector<std::string> sets;  // raw key=value pairs
  // named convenience flags, applied after --set so they win
  std::string seed, epochs, policy, warmup, dataset, out_dir, threads;
  bool patchwise = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "config file (key = value lines)")
      ->required();
  cmd->add_option("--set", f.sets, "override any config key, e.g. --set lambda=0.5");
  cmd->add_option("--seed", f.seed, "run seed");
  cmd->add_option("--epochs", f.epochs, "total epochs");
  cmd->add_option("--policy", f.policy, "naive-sample selection policy");
  cmd->add_option("--warmup", f.warmup, "warm-up epochs before diverse dispatch");
  cmd->add_option("--dataset", f.dataset, "dataset spec");
  cmd->add_option("--out-dir", f.out_dir, "run output directory");
  cmd->add_option("--threads", f.threads, "worker threads");
  cmd->add_flag("--patchwise", f.patchwise, "augment halves instead of whole images");
}

saa::Overrides collect_overrides(const CommonFlags& f) {
  saa::Overrides ov;
  for (const std::string& s : f.sets) {
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw saa::ConfigError("--set expects key=value, got '" + s + "'");
    ov.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!f.seed.empty()) ov.emplace_back("seed", f.seed);
  if (!f.epochs.empty()) ov.emplace_back("epochs", f.epochs);
  if (!f.policy.empty()) ov.emplace_back("policy", f.policy);
  if (!f.warmup.empty()) ov.emplace_back("warmup_epochs", f.warmup);
  if (!f.dataset.empty()) ov.emplace_back("dataset", f.dataset);
  if (!f.out_dir.empty()) ov.emplace_back("out_dir", f.out_dir);
  if (!f.threads.empty()) ov.emplace_back("threads", f.threads);
  if (f.patchwise) ov.emplace_back("patchwise", "true");
  return ov;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-supervised training with sample-adaptive augmentation"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  std::string resume_from;
  CLI::App* train = app.add_subcommand("train", "run training");
  add_common(train, train_flags);
  train->add_option("--resume", resume_from, "checkpoint to continue from");

  CommonFlags eval_flags;
  std::string eval_checkpoint;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint's EMA model");
  add_common(eval, eval_flags);
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();

  std::string inspect_dir;
  CLI::App* inspect = app.add_subcommand("inspect-history", "dump per-sample history CSV");
  inspect->add_option("--run-dir", inspect_dir, "run directory")->required();

  CommonFlags ablate_flags;
  std::string policies_arg;
  CLI::App* ablate = app.add_subcommand("ablate", "train once per selection policy");
  add_common(ablate, ablate_flags);
  ablate->add_option("--policies", policies_arg, "comma-separated policy list")->required();

  std::string plots_dir;
  CLI::App* plots = app.add_subcommand("export-plots", "re-export curves from metrics.csv");
  plots->add_option("--run-dir", plots_dir, "run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a configuration problem
  }

  try {
    if (train->parsed()) {
      saa::TrainConfig cfg =
          saa::resolve_config(train_flags.config_path, collect_overrides(train_flags));
      saa::TrainResult r = saa::run_train(cfg, resume_from);
      std::printf("final_acc %.17g\nbest_acc %.17g\nrun_dir %s\n", r.final_acc, r.best_acc,
                  r.run_dir.c_str());
    } else if (eval->parsed()) {
      saa::TrainConfig cfg =
          saa::resolve_config(eval_flags.config_path, collect_overrides(eval_flags));
      std::printf("accuracy %.17g\n", saa::run_eval(cfg, eval_checkpoint));
    } else if (inspect->parsed()) {
      std::printf("history %s\n", saa::run_inspect_history(inspect_dir).c_str());
    } else if (ablate->parsed()) {
      saa::TrainConfig cfg =
          saa::resolve_config(ablate_flags.config_path, collect_overrides(ablate_flags));
      std::vector<std::string> policies;
      std::istringstream ss(policies_arg);
      for (std::string tok; std::getline(ss, tok, ',');)
        if (!tok.empty()) policies.push_back(tok);
      std::printf("table %s\n", saa::run_ablate(cfg, policies).c_str());
    } else if (plots->parsed()) {
      saa::run_export_plots(plots_dir);
      std::printf("plots %s/plots\n", plots_dir.c_str());
    }
  } catch (const saa::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
