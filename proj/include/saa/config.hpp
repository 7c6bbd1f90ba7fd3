#pragma once

// Flat key=value run configuration. The serialized form is the run manifest,
// and is itself a loadable config, so any run can be re-executed from its
// manifest alone.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "saa/augment.hpp"
#include "saa/history.hpp"

namespace saa {

struct TrainConfig {
  // batch shapes and loss weights
  int batch_labeled = 8;        // |B_x|
  int unlabeled_ratio = 7;      // |B_u| = ratio * |B_x|
  double lambda = 1.0;          // unsupervised loss weight
  double confidence = 0.95;     // pseudo-label acceptance threshold

  // history and naive-sample selection
  double history_decay = 0.95;
  int otsu_bins = 256;
  std::string policy = "otsu";  // otsu | fixed:T | prop:P | all | none | random:P
  int warmup_epochs = 12;       // plain consistency training before dispatch
  int epochs = 120;
  int iters_per_epoch = 64;

  // optimizer
  double base_lr = 0.03;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double ema_decay = 0.999;

  // run
  std::uint64_t seed = 1;
  std::string dataset = "synthetic";  // synthetic | cifar10:DIR
                                      // | mnist:TRAIN_IMG:TRAIN_LBL:TEST_IMG:TEST_LBL
  int labels_per_class = 4;
  std::string out_dir;
  int threads = 1;
  bool patchwise = false;       // halve-then-augment comparison mode
  int checkpoint_every = 0;     // epochs between checkpoints; 0 = final only
  std::string precision = "float";  // float | double

  // augmentation
  int aug_ops_per_draw = 2;
  bool cutout = true;
  double cutout_fraction = 0.5;
  std::string aug_ops;          // comma-separated op subset; empty = full set

  // synthetic dataset shape
  int synth_classes = 4;
  int synth_side = 16;
  int synth_train = 2000;
  int synth_test = 1000;
  int synth_noise = 25;

  void validate() const;  // throws ConfigError on any broken invariant
  SelectionPolicy selection_policy() const { return SelectionPolicy::parse(policy); }
  AugmentPolicy augment_policy() const;
};

// Parse `key = value` lines; blank lines and #-comments are skipped. Errors
// carry path:line.
TrainConfig load_config(const std::string& path);

// Apply one key=value pair (CLI flags funnel through this; flag beats file).
void apply_override(TrainConfig& cfg, const std::string& key, const std::string& value);

// Every key in fixed order, parseable by load_config.
std::string serialize_config(const TrainConfig& cfg);

} // namespace saa
