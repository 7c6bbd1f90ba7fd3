#include "saa/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "saa/errors.hpp"

namespace saa {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr float kEnhanceSpan = 0.9f;   // blend weight at magnitude 1
constexpr float kGeomSpan = 0.3f;      // max shear slope / translate fraction
constexpr float kMaxRotateDeg = 30.0f;
constexpr float kWeakShiftFraction = 0.125f;
constexpr float kCutoutFill = 127.0f;

int quantize(float v) {
  return static_cast<int>(std::clamp(std::lround(v), 0L, 255L));
}

Image autocontrast(const Image& img) {
  Image out = img;
  for (int c = 0; c < img.channels; ++c) {
    float lo = 255.0f, hi = 0.0f;
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        float v = img.at(c, y, x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    if (hi <= lo) continue;
    float scale = 255.0f / (hi - lo);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.at(c, y, x) = (img.at(c, y, x) - lo) * scale;
  }
  return out;
}

Image equalize(const Image& img) {
  Image out = img;
  for (int c = 0; c < img.channels; ++c) {
    std::array<std::int64_t, 256> hist{};
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) hist[quantize(img.at(c, y, x))]++;
    std::int64_t total = static_cast<std::int64_t>(img.height) * img.width;
    std::int64_t step = (total - hist[255]) / 255;
    if (step == 0) continue;
    std::array<std::uint8_t, 256> lut{};
    std::int64_t n = step / 2;
    for (int i = 0; i < 256; ++i) {
      lut[i] = static_cast<std::uint8_t>(std::clamp<std::int64_t>(n / step, 0, 255));
      n += hist[i];
    }
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.at(c, y, x) = static_cast<float>(lut[quantize(img.at(c, y, x))]);
  }
  return out;
}

// Inverse-map each destination pixel, round to the nearest source index and
// mirror it into bounds.
template <typename MapFn>
Image geometric(const Image& img, MapFn&& src_of) {
  Image out(img.channels, img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      auto [sx, sy] = src_of(x, y);
      int xi = reflect_index(static_cast<int>(std::lround(sx)), img.width);
      int yi = reflect_index(static_cast<int>(std::lround(sy)), img.height);
      for (int c = 0; c < img.channels; ++c) out.at(c, y, x) = img.at(c, yi, xi);
    }
  return out;
}

Image rotate(const Image& img, float degrees) {
  double rad = degrees * kPi / 180.0;
  double cs = std::cos(rad), sn = std::sin(rad);
  double cx = (img.width - 1) / 2.0, cy = (img.height - 1) / 2.0;
  return geometric(img, [&](int x, int y) {
    double dx = x - cx, dy = y - cy;
    return std::pair<double, double>{cx + cs * dx + sn * dy, cy - sn * dx + cs * dy};
  });
}

Image enhance_blend(const Image& img, const Image& degenerate, float weight) {
  Image out = img;
  for (std::size_t i = 0; i < img.px.size(); ++i)
    out.px[i] = (1.0f - weight) * img.px[i] + weight * degenerate.px[i];
  return out;
}

Image smooth3x3(const Image& img) {
  static constexpr float k[3][3] = {{1, 1, 1}, {1, 5, 1}, {1, 1, 1}};
  Image out(img.channels, img.height, img.width);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        float acc = 0.0f;
        for (int ky = 0; ky < 3; ++ky)
          for (int kx = 0; kx < 3; ++kx)
            acc += k[ky][kx] * img.at(c, reflect_index(y + ky - 1, img.height),
                                      reflect_index(x + kx - 1, img.width));
        out.at(c, y, x) = acc / 13.0f;
      }
  return out;
}

double u01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

} // namespace

const std::vector<AugOp>& all_aug_ops() {
  static const std::vector<AugOp> ops = {
      AugOp::Identity,   AugOp::AutoContrast, AugOp::Equalize,  AugOp::Rotate,
      AugOp::Solarize,   AugOp::Posterize,    AugOp::Brightness, AugOp::Contrast,
      AugOp::Sharpness,  AugOp::ShearX,       AugOp::ShearY,     AugOp::TranslateX,
      AugOp::TranslateY,
  };
  return ops;
}

const char* aug_op_name(AugOp op) {
  switch (op) {
    case AugOp::Identity: return "identity";
    case AugOp::AutoContrast: return "autocontrast";
    case AugOp::Equalize: return "equalize";
    case AugOp::Rotate: return "rotate";
    case AugOp::Solarize: return "solarize";
    case AugOp::Posterize: return "posterize";
    case AugOp::Brightness: return "brightness";
    case AugOp::Contrast: return "contrast";
    case AugOp::Sharpness: return "sharpness";
    case AugOp::ShearX: return "shear-x";
    case AugOp::ShearY: return "shear-y";
    case AugOp::TranslateX: return "translate-x";
    case AugOp::TranslateY: return "translate-y";
  }
  return "?";
}

AugOp aug_op_from_name(const std::string& name) {
  for (AugOp op : all_aug_ops())
    if (name == aug_op_name(op)) return op;
  throw ConfigError("unknown augmentation op: " + name);
}

Image apply_transform(const AugSpec& spec, const Image& img) {
  float m = std::clamp(spec.magnitude, 0.0f, 1.0f);
  Image out;
  switch (spec.op) {
    case AugOp::Identity:
      return img;
    case AugOp::AutoContrast:
      out = autocontrast(img);
      break;
    case AugOp::Equalize:
      out = equalize(img);
      break;
    case AugOp::Rotate:
      out = rotate(img, (2.0f * m - 1.0f) * kMaxRotateDeg);
      break;
    case AugOp::Solarize: {
      float threshold = 255.0f * (1.0f - m);
      out = img;
      for (float& v : out.px)
        if (v >= threshold) v = 255.0f - v;
      break;
    }
    case AugOp::Posterize: {
      int bits = 8 - static_cast<int>(std::lround(7.0f * m));
      int mask = 0xFF & ~((1 << (8 - bits)) - 1);
      out = img;
      for (float& v : out.px) v = static_cast<float>(quantize(v) & mask);
      break;
    }
    case AugOp::Brightness: {
      Image black(img.channels, img.height, img.width, 0.0f);
      out = enhance_blend(img, black, kEnhanceSpan * m);
      break;
    }
    case AugOp::Contrast: {
      Image gray = img;
      for (int c = 0; c < img.channels; ++c) {
        double sum = 0.0;
        for (int y = 0; y < img.height; ++y)
          for (int x = 0; x < img.width; ++x) sum += img.at(c, y, x);
        float mean = static_cast<float>(sum / (img.height * img.width));
        for (int y = 0; y < img.height; ++y)
          for (int x = 0; x < img.width; ++x) gray.at(c, y, x) = mean;
      }
      out = enhance_blend(img, gray, kEnhanceSpan * m);
      break;
    }
    case AugOp::Sharpness:
      out = enhance_blend(img, smooth3x3(img), kEnhanceSpan * m);
      break;
    case AugOp::ShearX: {
      double s = (2.0 * m - 1.0) * kGeomSpan;
      double cy = (img.height - 1) / 2.0;
      out = geometric(img, [&](int x, int y) {
        return std::pair<double, double>{x + s * (y - cy), static_cast<double>(y)};
      });
      break;
    }
    case AugOp::ShearY: {
      double s = (2.0 * m - 1.0) * kGeomSpan;
      double cx = (img.width - 1) / 2.0;
      out = geometric(img, [&](int x, int y) {
        return std::pair<double, double>{static_cast<double>(x), y + s * (x - cx)};
      });
      break;
    }
    case AugOp::TranslateX: {
      int dx = static_cast<int>(std::lround((2.0 * m - 1.0) * kGeomSpan * img.width));
      out = geometric(img, [&](int x, int y) {
        return std::pair<double, double>{static_cast<double>(x - dx), static_cast<double>(y)};
      });
      break;
    }
    case AugOp::TranslateY: {
      int dy = static_cast<int>(std::lround((2.0 * m - 1.0) * kGeomSpan * img.height));
      out = geometric(img, [&](int x, int y) {
        return std::pair<double, double>{static_cast<double>(x), static_cast<double>(y - dy)};
      });
      break;
    }
  }
  clamp_pixels(out);
  return out;
}

Image cutout_at(const Image& img, int cx, int cy, float fraction) {
  int side = static_cast<int>(fraction * std::min(img.height, img.width));
  if (side <= 0) return img;
  int half = side / 2;
  int x0 = std::max(0, cx - half + 1), x1 = std::min(img.width, cx + half + 1);
  int y0 = std::max(0, cy - half + 1), y1 = std::min(img.height, cy + half + 1);
  Image out = img;
  for (int c = 0; c < img.channels; ++c)
    for (int y = y0; y < y1; ++y)
      for (int x = x0; x < x1; ++x) out.at(c, y, x) = kCutoutFill;
  return out;
}

Image weak_augment_with(const Image& img, bool flip, int dx, int dy) {
  Image flipped = img;
  if (flip) {
    for (int c = 0; c < img.channels; ++c)
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
          flipped.at(c, y, x) = img.at(c, y, img.width - 1 - x);
  }
  if (dx == 0 && dy == 0) return flipped;
  Image out(img.channels, img.height, img.width);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y) {
      int sy = reflect_index(y - dy, img.height);
      for (int x = 0; x < img.width; ++x)
        out.at(c, y, x) = flipped.at(c, sy, reflect_index(x - dx, img.width));
    }
  return out;
}

Image weak_augment(const Image& img, std::mt19937_64& rng) {
  bool flip = u01(rng) < 0.5;
  int sx = static_cast<int>(kWeakShiftFraction * img.width);
  int sy = static_cast<int>(kWeakShiftFraction * img.height);
  int dx = uniform_int(rng, -sx, sx);
  int dy = uniform_int(rng, -sy, sy);
  return weak_augment_with(img, flip, dx, dy);
}

Image strong_augment(const Image& img, const AugmentPolicy& policy, std::mt19937_64& rng) {
  if (policy.ops.empty()) throw ConfigError("strong augmentation op set is empty");
  Image out = img;
  for (int i = 0; i < policy.ops_per_draw; ++i) {
    AugSpec spec;
    spec.op = policy.ops[uniform_int(rng, 0, static_cast<int>(policy.ops.size()) - 1)];
    spec.magnitude = static_cast<float>(u01(rng));
    out = apply_transform(spec, out);
  }
  if (policy.cutout_enabled) {
    int cx = uniform_int(rng, 0, img.width - 1);
    int cy = uniform_int(rng, 0, img.height - 1);
    out = cutout_at(out, cx, cy, policy.cutout_fraction);
  }
  return out;
}

Image regroup(const Image& a, const Image& b, Orientation o) {
  if (!a.same_shape(b)) throw ConfigError("regroup: shape mismatch");
  if (a.height % 2 != 0 || a.width % 2 != 0)
    throw ConfigError("regroup: extents must be even");
  Image out = b;
  if (o == Orientation::TopBottom) {
    for (int c = 0; c < a.channels; ++c)
      for (int y = 0; y < a.height / 2; ++y)
        for (int x = 0; x < a.width; ++x) out.at(c, y, x) = a.at(c, y, x);
  } else {
    for (int c = 0; c < a.channels; ++c)
      for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width / 2; ++x) out.at(c, y, x) = a.at(c, y, x);
  }
  return out;
}

DiverseResult diverse_augment_ex(const Image& img, const AugmentPolicy& policy,
                                 std::mt19937_64& rng) {
  Orientation o = u01(rng) < 0.5 ? Orientation::TopBottom : Orientation::LeftRight;
  Image first = strong_augment(img, policy, rng);
  Image second = strong_augment(img, policy, rng);
  return {regroup(first, second, o), o};
}

Image diverse_augment(const Image& img, const AugmentPolicy& policy, std::mt19937_64& rng) {
  return diverse_augment_ex(img, policy, rng).image;
}

DiverseResult patchwise_diverse_augment_ex(const Image& img, const AugmentPolicy& policy,
                                           std::mt19937_64& rng) {
  Orientation o = u01(rng) < 0.5 ? Orientation::TopBottom : Orientation::LeftRight;
  int hh = img.height / 2, hw = img.width / 2;
  Image out(img.channels, img.height, img.width);
  if (o == Orientation::TopBottom) {
    Image top(img.channels, hh, img.width), bottom(img.channels, hh, img.width);
    for (int c = 0; c < img.channels; ++c)
      for (int y = 0; y < hh; ++y)
        for (int x = 0; x < img.width; ++x) {
          top.at(c, y, x) = img.at(c, y, x);
          bottom.at(c, y, x) = img.at(c, y + hh, x);
        }
    top = strong_augment(top, policy, rng);
    bottom = strong_augment(bottom, policy, rng);
    for (int c = 0; c < img.channels; ++c)
      for (int y = 0; y < hh; ++y)
        for (int x = 0; x < img.width; ++x) {
          out.at(c, y, x) = top.at(c, y, x);
          out.at(c, y + hh, x) = bottom.at(c, y, x);
        }
  } else {
    Image left(img.channels, img.height, hw), right(img.channels, img.height, hw);
    for (int c = 0; c < img.channels; ++c)
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < hw; ++x) {
          left.at(c, y, x) = img.at(c, y, x);
          right.at(c, y, x) = img.at(c, y, x + hw);
        }
    left = strong_augment(left, policy, rng);
    right = strong_augment(right, policy, rng);
    for (int c = 0; c < img.channels; ++c)
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < hw; ++x) {
          out.at(c, y, x) = left.at(c, y, x);
          out.at(c, y, x + hw) = right.at(c, y, x);
        }
  }
  return {out, o};
}

Image patchwise_diverse_augment(const Image& img, const AugmentPolicy& policy,
                                std::mt19937_64& rng) {
  return patchwise_diverse_augment_ex(img, policy, rng).image;
}

} // namespace saa
