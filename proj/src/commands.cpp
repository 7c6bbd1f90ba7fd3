#include "saa/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "saa/checkpoint.hpp"
#include "saa/errors.hpp"
#include "saa/metrics.hpp"
#include "saa/plots.hpp"
#include "saa/trainer.hpp"

#ifndef SAA_BUILD_ID
#define SAA_BUILD_ID "unversioned"
#endif

namespace saa {

namespace fs = std::filesystem;

TrainConfig resolve_config(const std::string& config_path, const Overrides& overrides) {
  TrainConfig cfg = load_config(config_path);
  for (const auto& [key, value] : overrides) apply_override(cfg, key, value);
  cfg.validate();
  return cfg;
}

RunData build_datasets(const TrainConfig& cfg) {
  Dataset train, test;
  if (cfg.dataset == "synthetic") {
    train = gen_synthetic(cfg.seed, cfg.synth_classes, cfg.synth_train, cfg.synth_side, 0,
                          cfg.synth_noise);
    test = gen_synthetic(cfg.seed, cfg.synth_classes, cfg.synth_test, cfg.synth_side, 1,
                         cfg.synth_noise);
  } else if (cfg.dataset.rfind("cifar10:", 0) == 0) {
    TrainTest tt = load_cifar10_binary(cfg.dataset.substr(8));
    train = std::move(tt.train);
    test = std::move(tt.test);
  } else if (cfg.dataset.rfind("mnist:", 0) == 0) {
    std::vector<std::string> parts;
    std::string rest = cfg.dataset.substr(6);
    for (std::size_t pos = 0;;) {
      std::size_t colon = rest.find(':', pos);
      parts.push_back(rest.substr(pos, colon - pos));
      if (colon == std::string::npos) break;
      pos = colon + 1;
    }
    if (parts.size() != 4)
      throw ConfigError("dataset: expected mnist:TRAIN_IMG:TRAIN_LBL:TEST_IMG:TEST_LBL");
    train = load_mnist_idx(parts[0], parts[1]);
    test = load_mnist_idx(parts[2], parts[3]);
  } else {
    throw ConfigError("unknown dataset spec: " + cfg.dataset);
  }

  LabeledSplit split = split_labels(train, {cfg.labels_per_class, cfg.seed});
  return {std::move(split.labeled), std::move(split.unlabeled), std::move(test)};
}

std::string resolve_out_dir(const std::string& configured) {
  if (!configured.empty()) return configured;
  const char* env = std::getenv("SAA_OUT_DIR");
  return std::string(env && *env ? env : "runs") + "/default";
}

namespace {

void write_manifest(const std::string& run_dir, const TrainConfig& cfg) {
  std::string text = "# build = ";
  text += SAA_BUILD_ID;
  text += "\n";
  text += serialize_config(cfg);
  write_text_file(run_dir + "/manifest.txt", text);
}

void export_plots_from(const std::string& run_dir, const std::vector<MetricsRow>& rows) {
  fs::create_directories(run_dir + "/plots");
  for (const char* column : {"test_acc", "naive_fraction"}) {
    auto series = metrics_series(rows, column);
    write_series_csv(run_dir + "/plots/" + column + ".csv", column, series);
    render_series_ppm(run_dir + "/plots/" + column + ".ppm", series);
  }
}

template <typename T>
TrainResult run_train_t(const TrainConfig& cfg, const std::string& resume_from) {
  RunData data = build_datasets(cfg);
  std::string run_dir = resolve_out_dir(cfg.out_dir);
  fs::create_directories(run_dir);

  TrainConfig recorded = cfg;
  recorded.out_dir = run_dir;
  write_manifest(run_dir, recorded);

  Trainer<T> trainer(cfg, std::move(data.labeled), std::move(data.unlabeled),
                     std::move(data.test));
  if (!resume_from.empty()) trainer.restore(resume_from);

  TrainResult result;
  result.run_dir = run_dir;
  trainer.run([&](const MetricsRow& row) {
    write_metrics(run_dir + "/metrics.csv", trainer.records());
    if (cfg.checkpoint_every > 0 && (row.epoch + 1) % cfg.checkpoint_every == 0)
      trainer.save(run_dir + "/ckpt-epoch" + std::to_string(row.epoch) + ".bin");
    result.final_acc = row.test_acc;
    result.best_acc = std::max(result.best_acc, row.test_acc);
    std::printf("epoch %llu/%d acc %.4f sup %.4f unsup %.4f mask %.2f naive %.2f\n",
                static_cast<unsigned long long>(row.epoch), cfg.epochs, row.test_acc,
                row.sup_loss, row.unsup_loss, row.mask_rate, row.naive_fraction);
    std::fflush(stdout);
  });
  trainer.save(run_dir + "/ckpt-final.bin");
  export_plots_from(run_dir, trainer.records());
  return result;
}

template <typename T>
double run_eval_t(const TrainConfig& cfg, const std::string& checkpoint_path) {
  RunData data = build_datasets(cfg);
  ArchConfig arch;
  arch.channels = data.test.channels;
  arch.height = data.test.height;
  arch.width = data.test.width;
  arch.classes = data.test.classes;
  arch.validate();
  Checkpoint<T> ck = load_checkpoint<T>(checkpoint_path, arch, cfg.history_decay);
  NetWorkspace<T> ws;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.test.size(); ++i)
    if (predict_class(arch, ck.ema, data.test.image(i), ws) ==
        static_cast<std::size_t>(data.test.labels[i]))
      ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.test.size());
}

} // namespace

TrainResult run_train(const TrainConfig& cfg, const std::string& resume_from) {
  return cfg.precision == "double" ? run_train_t<double>(cfg, resume_from)
                                   : run_train_t<float>(cfg, resume_from);
}

double run_eval(const TrainConfig& cfg, const std::string& checkpoint_path) {
  return cfg.precision == "double" ? run_eval_t<double>(cfg, checkpoint_path)
                                   : run_eval_t<float>(cfg, checkpoint_path);
}

std::string run_inspect_history(const std::string& run_dir) {
  TrainConfig cfg = load_config(run_dir + "/manifest.txt");
  cfg.validate();
  std::string ckpt = run_dir + "/ckpt-final.bin";
  if (!fs::exists(ckpt)) throw IoError(ckpt + ": no final checkpoint in run directory");

  RunData data = build_datasets(cfg);
  ArchConfig arch;
  arch.channels = data.unlabeled.channels;
  arch.height = data.unlabeled.height;
  arch.width = data.unlabeled.width;
  arch.classes = data.labeled.classes;

  SampleHistory hist;
  if (cfg.precision == "double")
    hist = load_checkpoint<double>(ckpt, arch, cfg.history_decay).history;
  else
    hist = load_checkpoint<float>(ckpt, arch, cfg.history_decay).history;

  std::string text = "sample_id,h,f,observed\n";
  char buf[160];
  for (std::size_t i = 0; i < hist.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%d,%llu\n", i, hist.h[i], int(hist.f[i]),
                  static_cast<unsigned long long>(hist.observed[i]));
    text += buf;
  }
  std::string path = run_dir + "/history.csv";
  write_text_file(path, text);
  return path;
}

std::string run_ablate(const TrainConfig& base, const std::vector<std::string>& policies) {
  if (policies.empty()) throw ConfigError("ablate: no policies given");
  std::string out_dir = resolve_out_dir(base.out_dir);
  fs::create_directories(out_dir);

  std::string table = "policy,final_acc,best_acc\n";
  for (const std::string& entry : policies) {
    TrainConfig cfg = base;
    std::string policy = entry;
    const std::string suffix = "+patchwise";
    if (policy.size() > suffix.size() &&
        policy.compare(policy.size() - suffix.size(), suffix.size(), suffix) == 0) {
      cfg.patchwise = true;
      policy = policy.substr(0, policy.size() - suffix.size());
    }
    cfg.policy = policy;
    SelectionPolicy::parse(policy);  // reject unknown names before running

    std::string tag = entry;
    for (char& c : tag)
      if (c == ':' || c == '+' || c == '.') c = '_';
    cfg.out_dir = out_dir + "/" + tag;

    std::printf("== policy %s ==\n", entry.c_str());
    TrainResult r = run_train(cfg);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g\n", entry.c_str(), r.final_acc,
                  r.best_acc);
    table += buf;
  }
  std::string path = out_dir + "/ablate.csv";
  write_text_file(path, table);
  return path;
}

void run_export_plots(const std::string& run_dir) {
  std::vector<MetricsRow> rows = read_metrics(run_dir + "/metrics.csv");
  if (rows.empty()) throw IoError(run_dir + "/metrics.csv: no rows to plot");
  export_plots_from(run_dir, rows);
}

} // namespace saa
