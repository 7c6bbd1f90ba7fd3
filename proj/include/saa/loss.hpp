#pragma once

// Consistency-training losses: confidence-masked pseudo-labeling on weak
// views, cross entropy on strong views, and the usual sup + lambda*unsup
// total. Templated so gradient checks can run the whole path in long double.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "saa/errors.hpp"

namespace saa {

inline constexpr double kProbFloor = 1e-7;  // clamp inside log

template <typename T>
std::vector<T> softmax(const std::vector<T>& logits) {
  T mx = *std::max_element(logits.begin(), logits.end());
  std::vector<T> p(logits.size());
  T sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (T& v : p) v /= sum;
  return p;
}

// -log p[target], clamped away from log(0)
template <typename T>
T cross_entropy(const std::vector<T>& probs, std::size_t target) {
  if (target >= probs.size()) throw TrainError("cross_entropy: target out of range");
  return -std::log(std::max(probs[target], static_cast<T>(kProbFloor)));
}

struct PseudoLabel {
  std::size_t cls = 0;
  double confidence = 0.0;
  bool accepted = false;  // confidence >= tau_c
};

template <typename T>
PseudoLabel pseudo_label(const std::vector<T>& p_weak, double tau_c) {
  if (p_weak.empty()) throw TrainError("pseudo_label: empty prediction");
  std::size_t cls = 0;
  for (std::size_t i = 1; i < p_weak.size(); ++i)
    if (p_weak[i] > p_weak[cls]) cls = i;  // ties keep the lowest index
  double conf = static_cast<double>(p_weak[cls]);
  return {cls, conf, conf >= tau_c};
}

template <typename T>
struct UnsupLoss {
  T loss = 0;                // mean over the FULL batch; masked samples add 0
  std::vector<T> raws;       // unmasked per-sample cross entropies
  double mask_rate = 0.0;    // accepted / batch size
};

template <typename T>
UnsupLoss<T> unsup_loss(const std::vector<std::vector<T>>& weak_preds,
                        const std::vector<std::vector<T>>& strong_preds, double tau_c) {
  if (weak_preds.size() != strong_preds.size())
    throw TrainError("unsup_loss: batch length mismatch");
  UnsupLoss<T> out;
  out.raws.reserve(weak_preds.size());
  std::size_t accepted = 0;
  T sum = 0;
  for (std::size_t i = 0; i < weak_preds.size(); ++i) {
    PseudoLabel pl = pseudo_label(weak_preds[i], tau_c);
    T raw = cross_entropy(strong_preds[i], pl.cls);
    out.raws.push_back(raw);
    if (pl.accepted) {
      sum += raw;
      ++accepted;
    }
  }
  if (!weak_preds.empty()) {
    out.loss = sum / static_cast<T>(weak_preds.size());
    out.mask_rate = static_cast<double>(accepted) / static_cast<double>(weak_preds.size());
  }
  return out;
}

template <typename T>
T sup_loss(const std::vector<std::vector<T>>& preds, const std::vector<std::size_t>& labels) {
  if (preds.size() != labels.size()) throw TrainError("sup_loss: batch length mismatch");
  if (preds.empty()) return 0;
  T sum = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) sum += cross_entropy(preds[i], labels[i]);
  return sum / static_cast<T>(preds.size());
}

template <typename T>
T total_loss(T sup, T unsup, double lambda) {
  return sup + static_cast<T>(lambda) * unsup;
}

} // namespace saa
