#pragma once

// The pipelines behind each CLI subcommand, callable as a library so every
// behavior stays testable without a process boundary.

#include <string>
#include <utility>
#include <vector>

#include "saa/config.hpp"
#include "saa/data.hpp"

namespace saa {

using Overrides = std::vector<std::pair<std::string, std::string>>;

// Config file + overrides resolved into a validated config (flags beat file).
TrainConfig resolve_config(const std::string& config_path, const Overrides& overrides);

// Datasets named by the config's dataset spec.
struct RunData {
  Dataset labeled, unlabeled, test;
};
RunData build_datasets(const TrainConfig& cfg);

// Empty out_dir becomes $SAA_OUT_DIR/default (or runs/default).
std::string resolve_out_dir(const std::string& configured);

struct TrainResult {
  std::string run_dir;
  double final_acc = 0.0;
  double best_acc = 0.0;
};

// Full training run: writes manifest.txt, metrics.csv (rewritten per epoch),
// checkpoints, and the plot exports into the run directory. A nonempty
// resume_from restores that checkpoint before training continues.
TrainResult run_train(const TrainConfig& cfg, const std::string& resume_from = "");

// Accuracy of a checkpoint's EMA model on the config's test set.
double run_eval(const TrainConfig& cfg, const std::string& checkpoint_path);

// Dump (sample_id, h, f, observed) from the run's final checkpoint to
// <run_dir>/history.csv; returns that path.
std::string run_inspect_history(const std::string& run_dir);

// One training run per policy, same seed, under <out_dir>/<policy>; writes
// <out_dir>/ablate.csv with a (policy, final_acc, best_acc) row each. A
// policy entry may carry a "+patchwise" suffix.
std::string run_ablate(const TrainConfig& base, const std::vector<std::string>& policies);

// Re-export series CSVs and PPM plots from <run_dir>/metrics.csv.
void run_export_plots(const std::string& run_dir);

} // namespace saa
