#pragma once

// Dataset storage and ingestion. Pixels live as raw bytes; Image (float)
// views are materialized per access so augmentation always starts from the
// stored intensities.

#include <cstdint>
#include <string>
#include <vector>

#include "saa/image.hpp"

namespace saa {

struct Dataset {
  int channels = 0;
  int height = 0;
  int width = 0;
  int classes = 0;
  std::vector<std::vector<std::uint8_t>> pixels;  // channel-major, C*H*W each
  std::vector<int> labels;                        // empty for unlabeled sets

  std::size_t size() const { return pixels.size(); }
  bool labeled() const { return !labels.empty(); }
  Image image(std::size_t i) const;
};

// Class-k template: a centered cosine grating, orientation alternating with k
// (even k varies along x, odd along y) and frequency stepping every two
// classes, amplitude 100 around mid-gray. Per-pixel uniform integer noise in
// [-noise, +noise] on top, clamped to [0,255]. split_tag separates the
// train/test noise streams.
Dataset gen_synthetic(std::uint64_t seed, int classes, std::size_t count, int side,
                      std::uint64_t split_tag, int noise = 25);

// Nearest synthetic template by squared distance; ties to the lowest class.
int nearest_template(const Dataset& d, std::size_t i);

// One CIFAR-10 batch file: records of 1 label byte + 3072 pixel bytes
// (channel-major RGB, 32x32).
Dataset load_cifar10_file(const std::string& path);

// data_batch_1..5.bin concatenated as train, test_batch.bin as test.
struct TrainTest {
  Dataset train, test;
};
TrainTest load_cifar10_binary(const std::string& dir);

// IDX-format image + label files (magic 0x803 / 0x801, big-endian counts).
Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);

struct SplitSpec {
  int labels_per_class = 4;
  std::uint64_t seed = 1;
};

// labels_per_class examples per class, chosen by seeded shuffle, as the
// labeled subset; the unlabeled set is EVERY train image with labels
// stripped (labeled images stay in the pool).
struct LabeledSplit {
  Dataset labeled, unlabeled;
};
LabeledSplit split_labels(const Dataset& train, const SplitSpec& spec);

} // namespace saa
