#pragma once

// Fixed small classifier with hand-written backprop:
//   conv 3x3 pad 1 -> relu -> maxpool 2 -> conv 3x3 pad 1 -> relu ->
//   maxpool 2 -> dense -> relu -> dense -> K logits
// Inputs normalized per pixel to [0,1]. Templated on the scalar so training
// runs in float and verification (finite differences) in double or better.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "saa/errors.hpp"
#include "saa/image.hpp"
#include "saa/tensor.hpp"

namespace saa {

struct ArchConfig {
  int channels = 1;
  int height = 16;
  int width = 16;
  int classes = 4;
  int conv1 = 16;
  int conv2 = 32;
  int hidden = 128;

  void validate() const {
    if (channels < 1 || height < 4 || width < 4 || classes < 2 || conv1 < 1 ||
        conv2 < 1 || hidden < 1)
      throw ConfigError("architecture: nonpositive extent");
    if (height % 4 != 0 || width % 4 != 0)
      throw ConfigError("architecture: height and width must be multiples of 4");
  }
  int flat() const { return conv2 * (height / 4) * (width / 4); }

  std::uint64_t hash() const {  // FNV-1a over the extents, for checkpoints
    std::uint64_t h = 1469598103934665603ULL;
    for (int v : {channels, height, width, classes, conv1, conv2, hidden}) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(v));
      h *= 1099511628211ULL;
    }
    return h;
  }
};

template <typename T>
struct NetParams {
  Tensor<T> conv1_w, conv1_b, conv2_w, conv2_b, fc1_w, fc1_b, fc2_w, fc2_b;

  NetParams() = default;
  explicit NetParams(const ArchConfig& a)
      : conv1_w({static_cast<std::size_t>(a.conv1), static_cast<std::size_t>(a.channels), 3, 3}),
        conv1_b({static_cast<std::size_t>(a.conv1)}),
        conv2_w({static_cast<std::size_t>(a.conv2), static_cast<std::size_t>(a.conv1), 3, 3}),
        conv2_b({static_cast<std::size_t>(a.conv2)}),
        fc1_w({static_cast<std::size_t>(a.hidden), static_cast<std::size_t>(a.flat())}),
        fc1_b({static_cast<std::size_t>(a.hidden)}),
        fc2_w({static_cast<std::size_t>(a.classes), static_cast<std::size_t>(a.hidden)}),
        fc2_b({static_cast<std::size_t>(a.classes)}) {}

  // Stable order; checkpoint block names come from here.
  std::vector<std::pair<std::string, Tensor<T>*>> named() {
    return {{"conv1_w", &conv1_w}, {"conv1_b", &conv1_b}, {"conv2_w", &conv2_w},
            {"conv2_b", &conv2_b}, {"fc1_w", &fc1_w},     {"fc1_b", &fc1_b},
            {"fc2_w", &fc2_w},     {"fc2_b", &fc2_b}};
  }
  std::vector<std::pair<std::string, const Tensor<T>*>> named() const {
    return {{"conv1_w", &conv1_w}, {"conv1_b", &conv1_b}, {"conv2_w", &conv2_w},
            {"conv2_b", &conv2_b}, {"fc1_w", &fc1_w},     {"fc1_b", &fc1_b},
            {"fc2_w", &fc2_w},     {"fc2_b", &fc2_b}};
  }

  void fill(T v) {
    for (auto& [name, t] : named()) t->fill(v);
  }
  void accumulate(const NetParams<T>& other) {
    auto mine = named();
    auto theirs = other.named();
    for (std::size_t i = 0; i < mine.size(); ++i)
      for (std::size_t j = 0; j < mine[i].second->numel(); ++j)
        (*mine[i].second)[j] += (*theirs[i].second)[j];
  }
  template <typename U>
  NetParams<U> cast() const {
    NetParams<U> out;
    out.conv1_w = conv1_w.template cast<U>();
    out.conv1_b = conv1_b.template cast<U>();
    out.conv2_w = conv2_w.template cast<U>();
    out.conv2_b = conv2_b.template cast<U>();
    out.fc1_w = fc1_w.template cast<U>();
    out.fc1_b = fc1_b.template cast<U>();
    out.fc2_w = fc2_w.template cast<U>();
    out.fc2_b = fc2_b.template cast<U>();
    return out;
  }
};

// Kaiming-uniform fan-in weights (bound sqrt(6/fan_in)), zero biases. Draws
// happen in double in declaration order (conv1_w, conv2_w, fc1_w, fc2_w,
// entry storage order) so float and double nets see the same values.
template <typename T>
NetParams<T> init_params(const ArchConfig& arch, std::mt19937_64& rng) {
  arch.validate();
  NetParams<T> p(arch);
  auto draw = [&](Tensor<T>& w, std::size_t fan_in) {
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (T& v : w) v = static_cast<T>(dist(rng));
  };
  draw(p.conv1_w, static_cast<std::size_t>(arch.channels) * 9);
  draw(p.conv2_w, static_cast<std::size_t>(arch.conv1) * 9);
  draw(p.fc1_w, static_cast<std::size_t>(arch.flat()));
  draw(p.fc2_w, static_cast<std::size_t>(arch.hidden));
  return p;
}

// Per-example activations, reused across calls. Relu outputs are stored
// post-activation (the > 0 mask survives), pools keep their argmax source.
template <typename T>
struct NetWorkspace {
  std::vector<T> x, a1, p1, a2, p2, h1, logits;
  std::vector<std::int32_t> i1, i2;
  std::vector<T> dlog, dh1, dp2, da2, dp1, da1;  // backward scratch

  void resize(const ArchConfig& a) {
    const std::size_t hw = static_cast<std::size_t>(a.height) * a.width;
    x.resize(static_cast<std::size_t>(a.channels) * hw);
    a1.resize(static_cast<std::size_t>(a.conv1) * hw);
    p1.resize(static_cast<std::size_t>(a.conv1) * hw / 4);
    i1.resize(p1.size());
    a2.resize(static_cast<std::size_t>(a.conv2) * hw / 4);
    p2.resize(static_cast<std::size_t>(a.conv2) * hw / 16);
    i2.resize(p2.size());
    h1.resize(static_cast<std::size_t>(a.hidden));
    logits.resize(static_cast<std::size_t>(a.classes));
    dlog.resize(logits.size());
    dh1.resize(h1.size());
    dp2.resize(p2.size());
    da2.resize(a2.size());
    dp1.resize(p1.size());
    da1.resize(a1.size());
  }
};

namespace detail {

// Zero-padded 3x3 convolution with fused relu. Inner loops run over
// contiguous x so they vectorize.
template <typename T>
void conv3x3_relu(const T* in, int cin, int h, int w, const T* weight, const T* bias,
                  int cout, T* out) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int o = 0; o < cout; ++o) {
    T* op = out + static_cast<std::size_t>(o) * plane;
    for (std::size_t i = 0; i < plane; ++i) op[i] = bias[o];
    for (int c = 0; c < cin; ++c) {
      const T* wp = weight + (static_cast<std::size_t>(o) * cin + c) * 9;
      const T* ip = in + static_cast<std::size_t>(c) * plane;
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          T wv = wp[ky * 3 + kx];
          int y0 = std::max(0, 1 - ky), y1 = std::min(h, h + 1 - ky);
          int x0 = std::max(0, 1 - kx), x1 = std::min(w, w + 1 - kx);
          for (int y = y0; y < y1; ++y) {
            T* orow = op + static_cast<std::size_t>(y) * w;
            const T* irow = ip + static_cast<std::size_t>(y + ky - 1) * w + (kx - 1);
            for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
          }
        }
    }
    for (std::size_t i = 0; i < plane; ++i)
      if (op[i] < T(0)) op[i] = T(0);
  }
}

template <typename T>
void maxpool2(const T* in, int c, int h, int w, T* out, std::int32_t* idx) {
  int oh = h / 2, ow = w / 2;
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x) {
        std::size_t base = (static_cast<std::size_t>(ch) * h + 2 * y) * w + 2 * x;
        std::size_t best = base;
        T bv = in[base];
        for (int ky = 0; ky < 2; ++ky)
          for (int kx = 0; kx < 2; ++kx) {
            std::size_t p = base + static_cast<std::size_t>(ky) * w + kx;
            if (in[p] > bv) {  // ties keep the first in scan order
              bv = in[p];
              best = p;
            }
          }
        std::size_t oi = (static_cast<std::size_t>(ch) * oh + y) * ow + x;
        out[oi] = bv;
        idx[oi] = static_cast<std::int32_t>(best);
      }
}

// Gradients for conv3x3_relu given dz = dLoss/d(pre-activation).
template <typename T>
void conv3x3_backward(const T* in, int cin, int h, int w, const T* weight, int cout,
                      const T* dz, T* dweight, T* dbias, T* din) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  if (din)
    for (std::size_t i = 0; i < static_cast<std::size_t>(cin) * plane; ++i) din[i] = T(0);
  for (int o = 0; o < cout; ++o) {
    const T* gp = dz + static_cast<std::size_t>(o) * plane;
    T bacc = T(0);
    for (std::size_t i = 0; i < plane; ++i) bacc += gp[i];
    dbias[o] += bacc;
    for (int c = 0; c < cin; ++c) {
      T* dwp = dweight + (static_cast<std::size_t>(o) * cin + c) * 9;
      const T* wp = weight + (static_cast<std::size_t>(o) * cin + c) * 9;
      const T* ip = in + static_cast<std::size_t>(c) * plane;
      T* dip = din ? din + static_cast<std::size_t>(c) * plane : nullptr;
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          T wv = wp[ky * 3 + kx];
          T wacc = T(0);
          int y0 = std::max(0, 1 - ky), y1 = std::min(h, h + 1 - ky);
          int x0 = std::max(0, 1 - kx), x1 = std::min(w, w + 1 - kx);
          for (int y = y0; y < y1; ++y) {
            const T* grow = gp + static_cast<std::size_t>(y) * w;
            const T* irow = ip + static_cast<std::size_t>(y + ky - 1) * w + (kx - 1);
            T* drow = dip ? dip + static_cast<std::size_t>(y + ky - 1) * w + (kx - 1) : nullptr;
            for (int x = x0; x < x1; ++x) wacc += grow[x] * irow[x];
            if (drow)
              for (int x = x0; x < x1; ++x) drow[x] += grow[x] * wv;
          }
          dwp[ky * 3 + kx] += wacc;
        }
    }
  }
}

} // namespace detail

template <typename T>
const std::vector<T>& forward(const ArchConfig& a, const NetParams<T>& p, const Image& img,
                              NetWorkspace<T>& ws) {
  if (img.channels != a.channels || img.height != a.height || img.width != a.width)
    throw ConfigError("forward: image shape does not match architecture");
  ws.resize(a);
  for (std::size_t i = 0; i < ws.x.size(); ++i)
    ws.x[i] = static_cast<T>(img.px[i]) / T(255);

  detail::conv3x3_relu(ws.x.data(), a.channels, a.height, a.width, p.conv1_w.begin(),
                       p.conv1_b.begin(), a.conv1, ws.a1.data());
  detail::maxpool2(ws.a1.data(), a.conv1, a.height, a.width, ws.p1.data(), ws.i1.data());
  int h2 = a.height / 2, w2 = a.width / 2;
  detail::conv3x3_relu(ws.p1.data(), a.conv1, h2, w2, p.conv2_w.begin(),
                       p.conv2_b.begin(), a.conv2, ws.a2.data());
  detail::maxpool2(ws.a2.data(), a.conv2, h2, w2, ws.p2.data(), ws.i2.data());

  for (int j = 0; j < a.hidden; ++j) {
    T acc = p.fc1_b[j];
    const T* wp = p.fc1_w.begin() + static_cast<std::size_t>(j) * ws.p2.size();
    for (std::size_t i = 0; i < ws.p2.size(); ++i) acc += wp[i] * ws.p2[i];
    ws.h1[j] = acc > T(0) ? acc : T(0);
  }
  for (int k = 0; k < a.classes; ++k) {
    T acc = p.fc2_b[k];
    const T* wp = p.fc2_w.begin() + static_cast<std::size_t>(k) * ws.h1.size();
    for (std::size_t i = 0; i < ws.h1.size(); ++i) acc += wp[i] * ws.h1[i];
    ws.logits[k] = acc;
  }
  return ws.logits;
}

// Accumulate d(loss)/d(params) into `grads` from d(loss)/d(logits), using the
// activations left in `ws` by the matching forward call.
template <typename T>
void backward(const ArchConfig& a, const NetParams<T>& p, NetWorkspace<T>& ws,
              const std::vector<T>& dlogits, NetParams<T>& grads) {
  for (int k = 0; k < a.classes; ++k) {
    T g = dlogits[k];
    grads.fc2_b[k] += g;
    T* dwp = grads.fc2_w.begin() + static_cast<std::size_t>(k) * ws.h1.size();
    for (std::size_t i = 0; i < ws.h1.size(); ++i) dwp[i] += g * ws.h1[i];
  }
  for (std::size_t j = 0; j < ws.h1.size(); ++j) {
    T acc = T(0);
    if (ws.h1[j] > T(0))
      for (int k = 0; k < a.classes; ++k)
        acc += dlogits[k] * p.fc2_w[static_cast<std::size_t>(k) * ws.h1.size() + j];
    ws.dh1[j] = acc;
  }
  for (std::size_t i = 0; i < ws.p2.size(); ++i) ws.dp2[i] = T(0);
  for (std::size_t j = 0; j < ws.h1.size(); ++j) {
    T g = ws.dh1[j];
    if (g == T(0)) continue;
    grads.fc1_b[j] += g;
    T* dwp = grads.fc1_w.begin() + j * ws.p2.size();
    const T* wp = p.fc1_w.begin() + j * ws.p2.size();
    for (std::size_t i = 0; i < ws.p2.size(); ++i) {
      dwp[i] += g * ws.p2[i];
      ws.dp2[i] += g * wp[i];
    }
  }

  for (std::size_t i = 0; i < ws.da2.size(); ++i) ws.da2[i] = T(0);
  for (std::size_t i = 0; i < ws.p2.size(); ++i)
    if (ws.a2[ws.i2[i]] > T(0)) ws.da2[ws.i2[i]] += ws.dp2[i];  // pool + relu gate

  int h2 = a.height / 2, w2 = a.width / 2;
  detail::conv3x3_backward(ws.p1.data(), a.conv1, h2, w2, p.conv2_w.begin(), a.conv2,
                           ws.da2.data(), grads.conv2_w.begin(), grads.conv2_b.begin(),
                           ws.dp1.data());

  for (std::size_t i = 0; i < ws.da1.size(); ++i) ws.da1[i] = T(0);
  for (std::size_t i = 0; i < ws.p1.size(); ++i)
    if (ws.a1[ws.i1[i]] > T(0)) ws.da1[ws.i1[i]] += ws.dp1[i];

  detail::conv3x3_backward(ws.x.data(), a.channels, a.height, a.width, p.conv1_w.begin(),
                           a.conv1, ws.da1.data(), grads.conv1_w.begin(),
                           grads.conv1_b.begin(), static_cast<T*>(nullptr));
}

template <typename T>
std::size_t predict_class(const ArchConfig& a, const NetParams<T>& p, const Image& img,
                          NetWorkspace<T>& ws) {
  const std::vector<T>& logits = forward(a, p, img, ws);
  std::size_t best = 0;
  for (std::size_t k = 1; k < logits.size(); ++k)
    if (logits[k] > logits[best]) best = k;
  return best;
}

} // namespace saa
