#pragma once

#include <random>
#include <string>
#include <vector>

#include "saa/image.hpp"

namespace saa {

// Closed set of strong-augmentation primitives. Magnitude is always in [0, 1];
// the per-op parameter mapping is documented at apply_transform.
enum class AugOp {
  Identity,
  AutoContrast,
  Equalize,
  Rotate,
  Solarize,
  Posterize,
  Brightness,
  Contrast,
  Sharpness,
  ShearX,
  ShearY,
  TranslateX,
  TranslateY,
};

const std::vector<AugOp>& all_aug_ops();
const char* aug_op_name(AugOp op);
AugOp aug_op_from_name(const std::string& name);  // throws ConfigError

struct AugSpec {
  AugOp op = AugOp::Identity;
  float magnitude = 0.0f;
};

enum class Orientation { TopBottom, LeftRight };

struct AugmentPolicy {
  std::vector<AugOp> ops = all_aug_ops();
  int ops_per_draw = 2;
  bool cutout_enabled = true;
  float cutout_fraction = 0.5f;  // patch side as a fraction of min(H, W)
};

// ---- deterministic cores ------------------------------------------------
//
// Magnitude -> parameter mapping (m in [0,1], all outputs clamped to [0,255]):
//   identity      no-op
//   autocontrast  per-channel rescale of [min,max] to [0,255] (m ignored)
//   equalize      per-channel histogram equalization (m ignored)
//   rotate        angle = (2m-1) * 30 degrees about the image center
//   solarize      invert pixels >= 255*(1-m)
//   posterize     keep bits = 8 - round(7m) high bits of the rounded pixel
//   brightness    v' = v * (1 - 0.9m)
//   contrast      v' = mean_c + (v - mean_c) * (1 - 0.9m)
//   sharpness     v' = (1-0.9m)*v + 0.9m*smooth(v), 3x3 kernel [1 1 1;1 5 1;1 1 1]/13
//   shear-x       src_x = x + (2m-1)*0.3 * (y - cy)
//   shear-y       src_y = y + (2m-1)*0.3 * (x - cx)
//   translate-x   shift columns by round((2m-1) * 0.3 * W)
//   translate-y   shift rows    by round((2m-1) * 0.3 * H)
// Geometric ops resample nearest-neighbor with mirrored (reflect_index) reads.
Image apply_transform(const AugSpec& spec, const Image& img);

// Gray patch of side floor(fraction*min(H,W)) spanning
// [c - side/2 + 1, c + side/2 + 1) in each axis, clipped to bounds, fill 127.
Image cutout_at(const Image& img, int cx, int cy, float fraction);

Image weak_augment_with(const Image& img, bool flip, int dx, int dy);

// Top half / left half comes from `a`, the rest from `b`. Shapes must match
// and extents must be even.
Image regroup(const Image& a, const Image& b, Orientation o);

// ---- seeded wrappers -----------------------------------------------------
// Draw order is part of the contract so that runs replay exactly:
//   weak:   flip u01, dx, dy
//   strong: (op index, magnitude) x ops_per_draw, then cutout cx, cy
//   diverse: orientation u01, then two full strong sequences
//   patchwise: orientation u01, then one strong sequence per half

// Horizontal flip with probability 0.5, then translation up to 12.5% of each
// side with mirrored padding.
Image weak_augment(const Image& img, std::mt19937_64& rng);

Image strong_augment(const Image& img, const AugmentPolicy& policy, std::mt19937_64& rng);

struct DiverseResult {
  Image image;
  Orientation orientation;
};

// Two independent strong augmentations of the full image, halved and
// recombined along a random orientation.
DiverseResult diverse_augment_ex(const Image& img, const AugmentPolicy& policy,
                                 std::mt19937_64& rng);
Image diverse_augment(const Image& img, const AugmentPolicy& policy, std::mt19937_64& rng);

// Comparison baseline: halve first, strong-augment each half independently,
// reassemble in place.
DiverseResult patchwise_diverse_augment_ex(const Image& img, const AugmentPolicy& policy,
                                           std::mt19937_64& rng);
Image patchwise_diverse_augment(const Image& img, const AugmentPolicy& policy,
                                std::mt19937_64& rng);

} // namespace saa
