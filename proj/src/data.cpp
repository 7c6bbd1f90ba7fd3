#include "saa/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "saa/errors.hpp"
#include "saa/rng.hpp"

namespace saa {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::uint8_t> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

double template_value(int cls, int side, int y, int x) {
  double freq = 1.5 + 2.0 * (cls / 2);
  double center = (side - 1) / 2.0;
  double d = (cls % 2 == 0 ? x : y) - center;
  return 127.5 + 100.0 * std::cos(2.0 * kPi * freq * d / side);
}

} // namespace

Image Dataset::image(std::size_t i) const {
  return image_from_bytes(channels, height, width, pixels[i].data());
}

Dataset gen_synthetic(std::uint64_t seed, int classes, std::size_t count, int side,
                      std::uint64_t split_tag, int noise) {
  if (classes < 2 || classes > 16) throw ConfigError("synthetic: classes must be in [2,16]");
  if (side < 4 || side % 4 != 0) throw ConfigError("synthetic: side must be a multiple of 4");
  if (count == 0) throw ConfigError("synthetic: empty dataset");
  if (noise < 0) throw ConfigError("synthetic: negative noise amplitude");

  Dataset d;
  d.channels = 1;
  d.height = d.width = side;
  d.classes = classes;
  d.pixels.reserve(count);
  d.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    int cls = static_cast<int>(i % classes);
    auto stream = rng::stream(seed, rng::Stream::SyntheticNoise, split_tag, i);
    std::uniform_int_distribution<int> jitter(-noise, noise);
    std::vector<std::uint8_t> px(static_cast<std::size_t>(side) * side);
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x) {
        int v = static_cast<int>(std::lround(template_value(cls, side, y, x)));
        if (noise > 0) v += jitter(stream);
        px[static_cast<std::size_t>(y) * side + x] =
            static_cast<std::uint8_t>(std::clamp(v, 0, 255));
      }
    d.pixels.push_back(std::move(px));
    d.labels.push_back(cls);
  }
  return d;
}

int nearest_template(const Dataset& d, std::size_t i) {
  int best = 0;
  double best_dist = 0.0;
  for (int cls = 0; cls < d.classes; ++cls) {
    double dist = 0.0;
    for (int y = 0; y < d.height; ++y)
      for (int x = 0; x < d.width; ++x) {
        double diff = d.pixels[i][static_cast<std::size_t>(y) * d.width + x] -
                      template_value(cls, d.width, y, x);
        dist += diff * diff;
      }
    if (cls == 0 || dist < best_dist) {
      best_dist = dist;
      best = cls;
    }
  }
  return best;
}

Dataset load_cifar10_file(const std::string& path) {
  constexpr std::size_t kRecord = 1 + 3 * 32 * 32;
  std::vector<std::uint8_t> bytes = read_all(path);
  if (bytes.empty() || bytes.size() % kRecord != 0)
    throw IoError(path + ": size is not a whole number of 3073-byte records");
  Dataset d;
  d.channels = 3;
  d.height = d.width = 32;
  d.classes = 10;
  std::size_t n = bytes.size() / kRecord;
  d.pixels.reserve(n);
  d.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = bytes.data() + i * kRecord;
    if (rec[0] >= 10) throw IoError(path + ": label byte out of range in record " +
                                    std::to_string(i));
    d.labels.push_back(rec[0]);
    d.pixels.emplace_back(rec + 1, rec + kRecord);
  }
  return d;
}

TrainTest load_cifar10_binary(const std::string& dir) {
  TrainTest out;
  for (int b = 1; b <= 5; ++b) {
    Dataset part = load_cifar10_file(dir + "/data_batch_" + std::to_string(b) + ".bin");
    if (b == 1) {
      out.train = std::move(part);
    } else {
      out.train.pixels.insert(out.train.pixels.end(), part.pixels.begin(), part.pixels.end());
      out.train.labels.insert(out.train.labels.end(), part.labels.begin(), part.labels.end());
    }
  }
  out.test = load_cifar10_file(dir + "/test_batch.bin");
  return out;
}

Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path) {
  std::vector<std::uint8_t> img = read_all(images_path);
  std::vector<std::uint8_t> lbl = read_all(labels_path);
  if (img.size() < 16 || be32(img.data()) != 0x00000803)
    throw IoError(images_path + ": bad IDX image magic");
  if (lbl.size() < 8 || be32(lbl.data()) != 0x00000801)
    throw IoError(labels_path + ": bad IDX label magic");
  std::size_t n = be32(img.data() + 4);
  std::size_t rows = be32(img.data() + 8), cols = be32(img.data() + 12);
  if (be32(lbl.data() + 4) != n)
    throw IoError(labels_path + ": label count differs from image count");
  if (img.size() != 16 + n * rows * cols)
    throw IoError(images_path + ": size mismatch for declared dimensions");
  if (lbl.size() != 8 + n) throw IoError(labels_path + ": truncated labels");

  Dataset d;
  d.channels = 1;
  d.height = static_cast<int>(rows);
  d.width = static_cast<int>(cols);
  d.classes = 10;
  d.pixels.reserve(n);
  d.labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* p = img.data() + 16 + i * rows * cols;
    d.pixels.emplace_back(p, p + rows * cols);
    if (lbl[8 + i] >= 10) throw IoError(labels_path + ": label out of range");
    d.labels.push_back(lbl[8 + i]);
  }
  return d;
}

LabeledSplit split_labels(const Dataset& train, const SplitSpec& spec) {
  if (!train.labeled()) throw ConfigError("split_labels: train set has no labels");
  if (spec.labels_per_class < 1) throw ConfigError("split_labels: labels_per_class < 1");

  std::vector<std::size_t> chosen;
  for (int cls = 0; cls < train.classes; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < train.size(); ++i)
      if (train.labels[i] == cls) members.push_back(i);
    if (members.size() < static_cast<std::size_t>(spec.labels_per_class))
      throw ConfigError("split_labels: class " + std::to_string(cls) + " has only " +
                        std::to_string(members.size()) + " members");
    auto stream = rng::stream(spec.seed, rng::Stream::LabelSplit, static_cast<std::uint64_t>(cls));
    std::shuffle(members.begin(), members.end(), stream);
    chosen.insert(chosen.end(), members.begin(), members.begin() + spec.labels_per_class);
  }
  std::sort(chosen.begin(), chosen.end());

  LabeledSplit out;
  out.labeled.channels = out.unlabeled.channels = train.channels;
  out.labeled.height = out.unlabeled.height = train.height;
  out.labeled.width = out.unlabeled.width = train.width;
  out.labeled.classes = out.unlabeled.classes = train.classes;
  for (std::size_t i : chosen) {
    out.labeled.pixels.push_back(train.pixels[i]);
    out.labeled.labels.push_back(train.labels[i]);
  }
  out.unlabeled.pixels = train.pixels;  // full pool, labels stripped
  return out;
}

} // namespace saa
