#include "saa/config.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "saa/errors.hpp"

namespace saa {

namespace {

long long parse_int(const std::string& s) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected an integer, got '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("expected an integer, got '" + s + "'");
  return v;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected a number, got '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v))
    throw ConfigError("expected a finite number, got '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("expected true/false, got '" + s + "'");
}

std::uint64_t parse_u64(const std::string& s) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("expected an unsigned integer, got '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("expected an unsigned integer, got '" + s + "'");
  return v;
}

using Setter = std::function<void(TrainConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"batch_labeled", [](TrainConfig& c, const std::string& v) { c.batch_labeled = static_cast<int>(parse_int(v)); }},
      {"unlabeled_ratio", [](TrainConfig& c, const std::string& v) { c.unlabeled_ratio = static_cast<int>(parse_int(v)); }},
      {"lambda", [](TrainConfig& c, const std::string& v) { c.lambda = parse_double(v); }},
      {"confidence", [](TrainConfig& c, const std::string& v) { c.confidence = parse_double(v); }},
      {"history_decay", [](TrainConfig& c, const std::string& v) { c.history_decay = parse_double(v); }},
      {"otsu_bins", [](TrainConfig& c, const std::string& v) { c.otsu_bins = static_cast<int>(parse_int(v)); }},
      {"policy", [](TrainConfig& c, const std::string& v) { c.policy = v; }},
      {"warmup_epochs", [](TrainConfig& c, const std::string& v) { c.warmup_epochs = static_cast<int>(parse_int(v)); }},
      {"epochs", [](TrainConfig& c, const std::string& v) { c.epochs = static_cast<int>(parse_int(v)); }},
      {"iters_per_epoch", [](TrainConfig& c, const std::string& v) { c.iters_per_epoch = static_cast<int>(parse_int(v)); }},
      {"base_lr", [](TrainConfig& c, const std::string& v) { c.base_lr = parse_double(v); }},
      {"momentum", [](TrainConfig& c, const std::string& v) { c.momentum = parse_double(v); }},
      {"weight_decay", [](TrainConfig& c, const std::string& v) { c.weight_decay = parse_double(v); }},
      {"ema_decay", [](TrainConfig& c, const std::string& v) { c.ema_decay = parse_double(v); }},
      {"seed", [](TrainConfig& c, const std::string& v) { c.seed = parse_u64(v); }},
      {"dataset", [](TrainConfig& c, const std::string& v) { c.dataset = v; }},
      {"labels_per_class", [](TrainConfig& c, const std::string& v) { c.labels_per_class = static_cast<int>(parse_int(v)); }},
      {"out_dir", [](TrainConfig& c, const std::string& v) { c.out_dir = v; }},
      {"threads", [](TrainConfig& c, const std::string& v) { c.threads = static_cast<int>(parse_int(v)); }},
      {"patchwise", [](TrainConfig& c, const std::string& v) { c.patchwise = parse_bool(v); }},
      {"checkpoint_every", [](TrainConfig& c, const std::string& v) { c.checkpoint_every = static_cast<int>(parse_int(v)); }},
      {"precision", [](TrainConfig& c, const std::string& v) { c.precision = v; }},
      {"aug_ops_per_draw", [](TrainConfig& c, const std::string& v) { c.aug_ops_per_draw = static_cast<int>(parse_int(v)); }},
      {"cutout", [](TrainConfig& c, const std::string& v) { c.cutout = parse_bool(v); }},
      {"cutout_fraction", [](TrainConfig& c, const std::string& v) { c.cutout_fraction = parse_double(v); }},
      {"aug_ops", [](TrainConfig& c, const std::string& v) { c.aug_ops = v; }},
      {"synth_classes", [](TrainConfig& c, const std::string& v) { c.synth_classes = static_cast<int>(parse_int(v)); }},
      {"synth_side", [](TrainConfig& c, const std::string& v) { c.synth_side = static_cast<int>(parse_int(v)); }},
      {"synth_train", [](TrainConfig& c, const std::string& v) { c.synth_train = static_cast<int>(parse_int(v)); }},
      {"synth_test", [](TrainConfig& c, const std::string& v) { c.synth_test = static_cast<int>(parse_int(v)); }},
      {"synth_noise", [](TrainConfig& c, const std::string& v) { c.synth_noise = static_cast<int>(parse_int(v)); }},
  };
  return table;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

} // namespace

void apply_override(TrainConfig& cfg, const std::string& key, const std::string& value) {
  auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
  try {
    it->second(cfg, value);
  } catch (const ConfigError& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

TrainConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  TrainConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
    try {
      apply_override(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
  if (batch_labeled < 1) fail("batch_labeled must be >= 1");
  if (unlabeled_ratio < 1) fail("unlabeled_ratio must be >= 1");
  if (lambda < 0.0) fail("lambda must be >= 0");
  if (confidence < 0.0) fail("confidence must be >= 0");
  if (!(history_decay >= 0.0 && history_decay < 1.0)) fail("history_decay must be in [0,1)");
  if (otsu_bins < 2) fail("otsu_bins must be >= 2");
  if (warmup_epochs < 0) fail("warmup_epochs must be >= 0");
  if (epochs < 1) fail("epochs must be >= 1");
  if (warmup_epochs > epochs) fail("warmup_epochs must be <= epochs");
  if (iters_per_epoch < 1) fail("iters_per_epoch must be >= 1");
  if (base_lr <= 0.0) fail("base_lr must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must be in [0,1)");
  if (weight_decay < 0.0) fail("weight_decay must be >= 0");
  if (!(ema_decay >= 0.0 && ema_decay < 1.0)) fail("ema_decay must be in [0,1)");
  if (labels_per_class < 1) fail("labels_per_class must be >= 1");
  if (threads < 1) fail("threads must be >= 1");
  if (checkpoint_every < 0) fail("checkpoint_every must be >= 0");
  if (precision != "float" && precision != "double") fail("precision must be float or double");
  if (aug_ops_per_draw < 0) fail("aug_ops_per_draw must be >= 0");
  if (!(cutout_fraction >= 0.0 && cutout_fraction <= 1.0))
    fail("cutout_fraction must be in [0,1]");
  if (synth_classes < 2 || synth_classes > 16) fail("synth_classes must be in [2,16]");
  if (synth_side < 4 || synth_side % 4 != 0) fail("synth_side must be a multiple of 4");
  if (synth_train < 1 || synth_test < 1) fail("synthetic set sizes must be >= 1");
  if (synth_noise < 0) fail("synth_noise must be >= 0");
  SelectionPolicy::parse(policy);
  augment_policy();
}

AugmentPolicy TrainConfig::augment_policy() const {
  AugmentPolicy p;
  p.ops_per_draw = aug_ops_per_draw;
  p.cutout_enabled = cutout;
  p.cutout_fraction = static_cast<float>(cutout_fraction);
  if (!aug_ops.empty()) {
    p.ops.clear();
    std::istringstream ss(aug_ops);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (!tok.empty()) p.ops.push_back(aug_op_from_name(tok));
    }
    if (p.ops.empty()) throw ConfigError("aug_ops: no ops given");
  }
  return p;
}

std::string serialize_config(const TrainConfig& c) {
  char buf[8192];
  std::snprintf(
      buf, sizeof buf,
      "batch_labeled = %d\n"
      "unlabeled_ratio = %d\n"
      "lambda = %.17g\n"
      "confidence = %.17g\n"
      "history_decay = %.17g\n"
      "otsu_bins = %d\n"
      "policy = %s\n"
      "warmup_epochs = %d\n"
      "epochs = %d\n"
      "iters_per_epoch = %d\n"
      "base_lr = %.17g\n"
      "momentum = %.17g\n"
      "weight_decay = %.17g\n"
      "ema_decay = %.17g\n"
      "seed = %" PRIu64 "\n"
      "dataset = %s\n"
      "labels_per_class = %d\n"
      "out_dir = %s\n"
      "threads = %d\n"
      "patchwise = %s\n"
      "checkpoint_every = %d\n"
      "precision = %s\n"
      "aug_ops_per_draw = %d\n"
      "cutout = %s\n"
      "cutout_fraction = %.17g\n"
      "aug_ops = %s\n"
      "synth_classes = %d\n"
      "synth_side = %d\n"
      "synth_train = %d\n"
      "synth_test = %d\n"
      "synth_noise = %d\n",
      c.batch_labeled, c.unlabeled_ratio, c.lambda, c.confidence, c.history_decay,
      c.otsu_bins, c.policy.c_str(), c.warmup_epochs, c.epochs, c.iters_per_epoch,
      c.base_lr, c.momentum, c.weight_decay, c.ema_decay, c.seed, c.dataset.c_str(),
      c.labels_per_class, c.out_dir.c_str(), c.threads, c.patchwise ? "true" : "false",
      c.checkpoint_every, c.precision.c_str(), c.aug_ops_per_draw,
      c.cutout ? "true" : "false", c.cutout_fraction, c.aug_ops.c_str(), c.synth_classes,
      c.synth_side, c.synth_train, c.synth_test, c.synth_noise);
  return buf;
}

} // namespace saa
