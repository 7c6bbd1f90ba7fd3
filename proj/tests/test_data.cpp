#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "saa/checkpoint.hpp"
#include "saa/config.hpp"
#include "saa/data.hpp"
#include "saa/errors.hpp"
#include "saa/metrics.hpp"
#include "saa/rng.hpp"

using namespace saa;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "saa_data_tests";
  fs::create_directories(dir);
  return dir;
}

std::string scratch(const std::string& name) { return (scratch_dir() / name).string(); }

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
}

void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

ArchConfig tiny_arch() {
  ArchConfig a;
  a.channels = 1;
  a.height = 4;
  a.width = 4;
  a.classes = 2;
  a.conv1 = 2;
  a.conv2 = 2;
  a.hidden = 3;
  return a;
}

} // namespace

TEST_CASE("synthetic generator: determinism and parameter validation") {
  Dataset a = gen_synthetic(5, 4, 40, 16, 0);
  Dataset b = gen_synthetic(5, 4, 40, 16, 0);
  CHECK(a.pixels == b.pixels);
  CHECK(a.labels == b.labels);
  CHECK(a.channels == 1);
  CHECK(a.height == 16);
  CHECK(a.classes == 4);
  CHECK(a.size() == 40);

  // Labels cycle through the classes, so every class has 10 of 40.
  std::vector<int> counts(4, 0);
  for (int l : a.labels) counts[l]++;
  for (int c : counts) CHECK(c == 10);

  Dataset other_seed = gen_synthetic(6, 4, 40, 16, 0);
  CHECK(other_seed.pixels != a.pixels);
  Dataset other_split = gen_synthetic(5, 4, 40, 16, 1);
  CHECK(other_split.pixels != a.pixels);

  CHECK_THROWS_AS(gen_synthetic(5, 1, 40, 16, 0), ConfigError);
  CHECK_THROWS_AS(gen_synthetic(5, 17, 40, 16, 0), ConfigError);
  CHECK_THROWS_AS(gen_synthetic(5, 4, 0, 16, 0), ConfigError);
  CHECK_THROWS_AS(gen_synthetic(5, 4, 40, 15, 0), ConfigError);
  CHECK_THROWS_AS(gen_synthetic(5, 4, 40, 16, 0, -1), ConfigError);
}

TEST_CASE("synthetic generator: noiseless classes collapse to their template") {
  Dataset d = gen_synthetic(9, 4, 32, 16, 0, /*noise=*/0);
  // All images of one class are identical.
  for (std::size_t i = 4; i < d.size(); ++i) REQUIRE(d.pixels[i] == d.pixels[i % 4]);
  // And template matching recovers every label.
  for (std::size_t i = 0; i < d.size(); ++i) REQUIRE(nearest_template(d, i) == d.labels[i]);
}

TEST_CASE("synthetic generator: template matching survives the default noise") {
  Dataset d = gen_synthetic(11, 4, 200, 16, 0, 25);
  int hits = 0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (nearest_template(d, i) == d.labels[i]) ++hits;
  CHECK(hits == 200);  // +-25 jitter is far below the template separation
}

TEST_CASE("cifar loader: crafted two-record file reads back exactly") {
  std::vector<std::uint8_t> bytes;
  for (int rec = 0; rec < 2; ++rec) {
    bytes.push_back(static_cast<std::uint8_t>(rec == 0 ? 3 : 9));  // label
    for (int i = 0; i < 3072; ++i)
      bytes.push_back(static_cast<std::uint8_t>((rec * 41 + i * 7) % 256));
  }
  std::string path = scratch("cifar_two.bin");
  write_bytes(path, bytes);

  Dataset d = load_cifar10_file(path);
  CHECK(d.size() == 2);
  CHECK(d.channels == 3);
  CHECK(d.height == 32);
  CHECK(d.width == 32);
  CHECK(d.classes == 10);
  CHECK(d.labels == std::vector<int>{3, 9});
  for (int i = 0; i < 3072; ++i) {
    REQUIRE(d.pixels[0][i] == static_cast<std::uint8_t>((i * 7) % 256));
    REQUIRE(d.pixels[1][i] == static_cast<std::uint8_t>((41 + i * 7) % 256));
  }
}

TEST_CASE("cifar loader: rejects truncated files and bad labels") {
  std::vector<std::uint8_t> bytes(3073, 0);
  bytes.resize(3000);  // not a whole record
  std::string trunc = scratch("cifar_trunc.bin");
  write_bytes(trunc, bytes);
  CHECK_THROWS_AS(load_cifar10_file(trunc), IoError);

  std::vector<std::uint8_t> bad(3073, 0);
  bad[0] = 10;  // label out of range
  std::string badpath = scratch("cifar_badlabel.bin");
  write_bytes(badpath, bad);
  CHECK_THROWS_AS(load_cifar10_file(badpath), IoError);

  CHECK_THROWS_AS(load_cifar10_file(scratch("missing.bin")), IoError);
}

TEST_CASE("idx loader: crafted one-image pair reads back exactly") {
  std::vector<std::uint8_t> img;
  push_be32(img, 0x803);
  push_be32(img, 1);   // count
  push_be32(img, 4);   // rows
  push_be32(img, 4);   // cols
  for (int i = 0; i < 16; ++i) img.push_back(static_cast<std::uint8_t>(10 * i));
  std::string ipath = scratch("idx_images.bin");
  write_bytes(ipath, img);

  std::vector<std::uint8_t> lbl;
  push_be32(lbl, 0x801);
  push_be32(lbl, 1);
  lbl.push_back(7);
  std::string lpath = scratch("idx_labels.bin");
  write_bytes(lpath, lbl);

  Dataset d = load_mnist_idx(ipath, lpath);
  CHECK(d.size() == 1);
  CHECK(d.channels == 1);
  CHECK(d.height == 4);
  CHECK(d.width == 4);
  CHECK(d.classes == 10);
  CHECK(d.labels == std::vector<int>{7});
  for (int i = 0; i < 16; ++i) REQUIRE(d.pixels[0][i] == static_cast<std::uint8_t>(10 * i));
}

TEST_CASE("idx loader: rejects bad magics, count mismatches, truncation") {
  std::vector<std::uint8_t> img;
  push_be32(img, 0x777);  // wrong magic
  push_be32(img, 1);
  push_be32(img, 4);
  push_be32(img, 4);
  img.resize(img.size() + 16, 0);
  std::string badmagic = scratch("idx_badmagic.bin");
  write_bytes(badmagic, img);

  std::vector<std::uint8_t> lbl;
  push_be32(lbl, 0x801);
  push_be32(lbl, 1);
  lbl.push_back(3);
  std::string lpath = scratch("idx_l.bin");
  write_bytes(lpath, lbl);
  CHECK_THROWS_AS(load_mnist_idx(badmagic, lpath), IoError);

  std::vector<std::uint8_t> good;
  push_be32(good, 0x803);
  push_be32(good, 2);  // declares 2 images but labels file has 1
  push_be32(good, 4);
  push_be32(good, 4);
  good.resize(good.size() + 32, 0);
  std::string ipath = scratch("idx_i2.bin");
  write_bytes(ipath, good);
  CHECK_THROWS_AS(load_mnist_idx(ipath, lpath), IoError);

  std::vector<std::uint8_t> short_img;
  push_be32(short_img, 0x803);
  push_be32(short_img, 1);
  push_be32(short_img, 4);
  push_be32(short_img, 4);
  short_img.resize(short_img.size() + 10, 0);  // 10 of 16 pixel bytes
  std::string spath = scratch("idx_short.bin");
  write_bytes(spath, short_img);
  CHECK_THROWS_AS(load_mnist_idx(spath, lpath), IoError);
}

TEST_CASE("label split: balanced labeled subset, full unlabeled pool") {
  Dataset train = gen_synthetic(3, 3, 30, 8, 0);
  SplitSpec spec;
  spec.labels_per_class = 2;
  spec.seed = 17;
  LabeledSplit s = split_labels(train, spec);

  CHECK(s.labeled.size() == 6);
  std::vector<int> counts(3, 0);
  for (int l : s.labeled.labels) counts[l]++;
  for (int c : counts) CHECK(c == 2);

  // The unlabeled pool is the whole train set, labels stripped, order kept.
  CHECK(s.unlabeled.size() == train.size());
  CHECK_FALSE(s.unlabeled.labeled());
  CHECK(s.unlabeled.pixels == train.pixels);
  CHECK(s.unlabeled.classes == train.classes);

  // Deterministic in the seed; a different seed picks a different subset.
  LabeledSplit again = split_labels(train, spec);
  CHECK(again.labeled.pixels == s.labeled.pixels);
  SplitSpec other = spec;
  other.seed = 18;
  LabeledSplit diff = split_labels(train, other);
  CHECK(diff.labeled.pixels != s.labeled.pixels);

  SplitSpec greedy;
  greedy.labels_per_class = 11;  // only 10 per class exist
  CHECK_THROWS_AS(split_labels(train, greedy), ConfigError);
  Dataset unlabeled = s.unlabeled;
  CHECK_THROWS_AS(split_labels(unlabeled, spec), ConfigError);
}

TEST_CASE("metrics: csv round-trip is exact") {
  std::vector<MetricsRow> rows(3);
  rows[0] = {0, 64, 1.0 / 3.0, 2.3025850929940459, 0.0, 0.0, 0.25, 0.03, 1234};
  rows[1] = {1, 128, 0.5, 1e-17, 0.7071067811865476, 0.125, 1.0 / 7.0, 0.029, 981};
  rows[2] = {2, 192, 0.97, 0.1, 2.2250738585072014e-308, 1.0, 0.0, 5e-324, 0};

  std::string path = scratch("metrics.csv");
  write_metrics(path, rows);
  std::vector<MetricsRow> back = read_metrics(path);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].epoch == rows[i].epoch);
    CHECK(back[i].iteration == rows[i].iteration);
    CHECK(back[i].test_acc == rows[i].test_acc);
    CHECK(back[i].sup_loss == rows[i].sup_loss);
    CHECK(back[i].unsup_loss == rows[i].unsup_loss);
    CHECK(back[i].mask_rate == rows[i].mask_rate);
    CHECK(back[i].naive_fraction == rows[i].naive_fraction);
    CHECK(back[i].lr == rows[i].lr);
    CHECK(back[i].wall_ms == rows[i].wall_ms);
  }

  std::string csv = metrics_to_csv(rows);
  CHECK(csv.substr(0, csv.find('\n')) == kMetricsHeader);
}

TEST_CASE("metrics: header is enforced and wall time strips cleanly") {
  std::string path = scratch("metrics_bad.csv");
  write_text_file(path, "epoch,other\n1,2\n");
  CHECK_THROWS_AS(read_metrics(path), IoError);

  std::vector<MetricsRow> rows(2);
  rows[0].epoch = 0;
  rows[0].wall_ms = 111;
  rows[1].epoch = 1;
  rows[1].wall_ms = 222;
  std::string stripped = strip_wall_column(metrics_to_csv(rows));
  CHECK(stripped.find("wall_ms") == std::string::npos);
  CHECK(stripped.find("111") == std::string::npos);
  CHECK(stripped.find("222") == std::string::npos);
  // Same rows with different wall times compare equal once stripped.
  std::vector<MetricsRow> rows2 = rows;
  rows2[0].wall_ms = 999;
  CHECK(strip_wall_column(metrics_to_csv(rows2)) == stripped);
}

TEST_CASE("checkpoint: round-trip restores every block bit for bit") {
  ArchConfig a = tiny_arch();
  Checkpoint<float> ck;
  ck.epoch = 7;
  ck.iteration = 448;
  ck.params = NetParams<float>(a);
  ck.ema = NetParams<float>(a);
  ck.velocity = NetParams<float>(a);
  float v = 0.0f;
  for (auto& [name, t] : ck.params.named())
    for (float& x : *t) x = (v += 0.125f);
  for (auto& [name, t] : ck.ema.named())
    for (float& x : *t) x = (v -= 0.0625f);
  for (auto& [name, t] : ck.velocity.named())
    for (float& x : *t) x = (v *= -1.0f);
  ck.history = SampleHistory(5, 0.95);
  ck.history.h = {0.5, 0.25, 0.0, 1.5, 2.25};
  ck.history.f = {1, 0, 0, 1, 1};
  ck.history.observed = {3, 1, 0, 9, 2};

  std::string path = scratch("ckpt.bin");
  save_checkpoint(path, a, ck);
  Checkpoint<float> back = load_checkpoint<float>(path, a, 0.95);

  CHECK(back.epoch == 7);
  CHECK(back.iteration == 448);
  auto cmp = [](const NetParams<float>& x, const NetParams<float>& y) {
    auto nx = x.named();
    auto ny = y.named();
    for (std::size_t t = 0; t < nx.size(); ++t)
      for (std::size_t i = 0; i < nx[t].second->numel(); ++i)
        if ((*nx[t].second)[i] != (*ny[t].second)[i]) return false;
    return true;
  };
  CHECK(cmp(back.params, ck.params));
  CHECK(cmp(back.ema, ck.ema));
  CHECK(cmp(back.velocity, ck.velocity));
  CHECK(back.history.h == ck.history.h);
  CHECK(back.history.f == ck.history.f);
  CHECK(back.history.observed == ck.history.observed);
  CHECK(back.history.decay == 0.95);
}

TEST_CASE("checkpoint: corruption and mismatches are rejected") {
  ArchConfig a = tiny_arch();
  Checkpoint<float> ck;
  ck.params = NetParams<float>(a);
  ck.ema = NetParams<float>(a);
  ck.velocity = NetParams<float>(a);
  ck.params.fill(1.0f);
  ck.ema.fill(2.0f);
  ck.velocity.fill(0.0f);
  ck.history = SampleHistory(2, 0.9);
  std::string path = scratch("ckpt_base.bin");
  save_checkpoint(path, a, ck);

  // Wrong precision.
  CHECK_THROWS_AS(load_checkpoint<double>(path, a, 0.9), IoError);

  // Wrong architecture.
  ArchConfig other = a;
  other.hidden = 4;
  CHECK_THROWS_AS(load_checkpoint<float>(path, other, 0.9), IoError);

  std::string blob = read_text_file(path);
  std::string corrupt = blob;
  corrupt[0] = 'X';  // magic
  std::string cpath = scratch("ckpt_magic.bin");
  write_text_file(cpath, corrupt);
  CHECK_THROWS_AS(load_checkpoint<float>(cpath, a, 0.9), IoError);

  corrupt = blob;
  corrupt[8] = static_cast<char>(99);  // version field
  std::string vpath = scratch("ckpt_version.bin");
  write_text_file(vpath, corrupt);
  CHECK_THROWS_AS(load_checkpoint<float>(vpath, a, 0.9), IoError);

  std::string truncated = blob.substr(0, blob.size() - 3);
  std::string tpath = scratch("ckpt_trunc.bin");
  write_text_file(tpath, truncated);
  CHECK_THROWS_AS(load_checkpoint<float>(tpath, a, 0.9), IoError);

  std::string padded = blob + "zz";
  std::string ppath = scratch("ckpt_pad.bin");
  write_text_file(ppath, padded);
  CHECK_THROWS_AS(load_checkpoint<float>(ppath, a, 0.9), IoError);

  CHECK_THROWS_AS(load_checkpoint<float>(scratch("ckpt_missing.bin"), a, 0.9), IoError);
}

TEST_CASE("config: file parsing with comments, overrides, line-precise errors") {
  std::string path = scratch("train.cfg");
  write_text_file(path,
                  "# comment line\n"
                  "\n"
                  "epochs = 5\n"
                  "policy = prop:0.3\n"
                  "base_lr = 0.05\n"
                  "patchwise = true\n");
  TrainConfig cfg = load_config(path);
  CHECK(cfg.epochs == 5);
  CHECK(cfg.policy == "prop:0.3");
  CHECK(cfg.base_lr == 0.05);
  CHECK(cfg.patchwise);
  CHECK(cfg.batch_labeled == 8);  // untouched default

  apply_override(cfg, "epochs", "9");
  CHECK(cfg.epochs == 9);
  CHECK_THROWS_AS(apply_override(cfg, "no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "epochs", "three"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "epochs", "3x"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "patchwise", "maybe"), ConfigError);

  // Comments are whole-line only; trailing text on a numeric line is an error.
  std::string inline_comment = scratch("inline.cfg");
  write_text_file(inline_comment, "epochs = 5 # not supported here\n");
  CHECK_THROWS_AS(load_config(inline_comment), ConfigError);

  std::string bad = scratch("bad.cfg");
  write_text_file(bad, "epochs = 5\nnot a kv line\n");
  try {
    load_config(bad);
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  CHECK_THROWS_AS(load_config(scratch("missing.cfg")), ConfigError);
}

TEST_CASE("config: validation catches each broken invariant") {
  TrainConfig good;
  good.validate();

  auto expect_bad = [](auto&& mutate) {
    TrainConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  expect_bad([](TrainConfig& c) { c.batch_labeled = 0; });
  expect_bad([](TrainConfig& c) { c.unlabeled_ratio = 0; });
  expect_bad([](TrainConfig& c) { c.lambda = -0.5; });
  expect_bad([](TrainConfig& c) { c.history_decay = 1.0; });
  expect_bad([](TrainConfig& c) { c.warmup_epochs = c.epochs + 1; });
  expect_bad([](TrainConfig& c) { c.epochs = 0; });
  expect_bad([](TrainConfig& c) { c.base_lr = 0.0; });
  expect_bad([](TrainConfig& c) { c.momentum = 1.0; });
  expect_bad([](TrainConfig& c) { c.ema_decay = 1.5; });
  expect_bad([](TrainConfig& c) { c.threads = 0; });
  expect_bad([](TrainConfig& c) { c.precision = "half"; });
  expect_bad([](TrainConfig& c) { c.policy = "sideways"; });
  expect_bad([](TrainConfig& c) { c.cutout_fraction = 1.5; });
  expect_bad([](TrainConfig& c) { c.synth_side = 9; });
  expect_bad([](TrainConfig& c) { c.aug_ops = "rotate,swirl"; });

  // Warm-up may equal the horizon: dispatch then never fires.
  TrainConfig edge;
  edge.warmup_epochs = edge.epochs;
  edge.validate();
}

TEST_CASE("config: serialization round-trips through the parser") {
  TrainConfig cfg;
  cfg.epochs = 11;
  cfg.lambda = 0.75;
  cfg.policy = "fixed:0.125";
  cfg.aug_ops = "rotate,solarize";
  cfg.precision = "double";
  cfg.seed = 123456789012345ULL;

  std::string text = serialize_config(cfg);
  std::string path = scratch("roundtrip.cfg");
  write_text_file(path, text);
  TrainConfig back = load_config(path);
  CHECK(serialize_config(back) == text);
  CHECK(back.epochs == 11);
  CHECK(back.lambda == 0.75);
  CHECK(back.policy == "fixed:0.125");
  CHECK(back.aug_ops == "rotate,solarize");
  CHECK(back.seed == 123456789012345ULL);
}

TEST_CASE("config: augment policy assembles the requested op subset") {
  TrainConfig cfg;
  cfg.aug_ops = "rotate, solarize ,posterize";
  cfg.aug_ops_per_draw = 3;
  cfg.cutout = false;
  AugmentPolicy p = cfg.augment_policy();
  REQUIRE(p.ops.size() == 3);
  CHECK(p.ops[0] == AugOp::Rotate);
  CHECK(p.ops[1] == AugOp::Solarize);
  CHECK(p.ops[2] == AugOp::Posterize);
  CHECK(p.ops_per_draw == 3);
  CHECK_FALSE(p.cutout_enabled);

  TrainConfig full;
  CHECK(full.augment_policy().ops.size() == 13);

  TrainConfig junk;
  junk.aug_ops = " , ,";
  CHECK_THROWS_AS(junk.augment_policy(), ConfigError);
}
