#pragma once

#include <cstdint>
#include <vector>

namespace saa {

// Pixels are 8-bit at rest (datasets) and float in [0, 255] while being
// transformed. Layout is channel-major, rows within a channel contiguous.
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> px;

  Image() = default;
  Image(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        px(static_cast<std::size_t>(c) * h * w, fill) {}

  float& at(int c, int y, int x) {
    return px[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return px[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  std::size_t size() const { return px.size(); }
  bool same_shape(const Image& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

// Mirror an index into [0, n) without repeating the edge sample
// (-1 -> 1, n -> n-2). Used by every geometric transform.
int reflect_index(int i, int n);

Image image_from_bytes(int c, int h, int w, const std::uint8_t* bytes);

// Rounds and clamps to the 8-bit range.
std::vector<std::uint8_t> image_to_bytes(const Image& img);

void clamp_pixels(Image& img);

} // namespace saa
