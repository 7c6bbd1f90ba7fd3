#include "saa/image.hpp"

#include <algorithm>
#include <cmath>

namespace saa {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

Image image_from_bytes(int c, int h, int w, const std::uint8_t* bytes) {
  Image img(c, h, w);
  for (std::size_t i = 0; i < img.px.size(); ++i)
    img.px[i] = static_cast<float>(bytes[i]);
  return img;
}

std::vector<std::uint8_t> image_to_bytes(const Image& img) {
  std::vector<std::uint8_t> out(img.px.size());
  for (std::size_t i = 0; i < img.px.size(); ++i) {
    float v = std::lround(img.px[i]);
    out[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0f, 255.0f));
  }
  return out;
}

void clamp_pixels(Image& img) {
  for (float& v : img.px) v = std::clamp(v, 0.0f, 255.0f);
}

} // namespace saa
