#include "saa/history.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "saa/errors.hpp"

namespace saa {

OtsuResult otsu_threshold(const std::vector<double>& values, int bins) {
  if (values.empty()) throw TrainError("otsu_threshold: empty input");
  if (bins < 2) throw TrainError("otsu_threshold: need at least 2 bins");
  auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
  double mn = *mn_it, mx = *mx_it;
  if (mn == mx) return {mn, true};

  double width = (mx - mn) / bins;
  std::vector<double> count(bins, 0.0);
  for (double v : values) {
    int b = std::min(bins - 1, static_cast<int>((v - mn) / width));
    count[b] += 1.0;
  }

  double total = static_cast<double>(values.size());
  double total_mass = 0.0;  // sum of count * bin center
  for (int b = 0; b < bins; ++b) total_mass += count[b] * (mn + (b + 0.5) * width);

  // Sweep split points left to right; split k puts bins [0..k] in class 0.
  double best = -1.0;
  int best_k = 0;
  double c0 = 0.0, m0 = 0.0;
  std::vector<double> score(bins - 1, 0.0);
  for (int k = 0; k + 1 < bins; ++k) {
    c0 += count[k];
    m0 += count[k] * (mn + (k + 0.5) * width);
    double c1 = total - c0;
    if (c0 == 0.0 || c1 == 0.0) continue;
    double mu0 = m0 / c0, mu1 = (total_mass - m0) / c1;
    double d = mu0 - mu1;
    score[k] = (c0 / total) * (c1 / total) * d * d;
    if (score[k] > best) {
      best = score[k];
      best_k = k;
    }
  }
  for (int k = 0; k < best_k; ++k) {
    if (score[k] >= best * (1.0 - 1e-10)) {
      best_k = k;
      break;
    }
  }
  return {mn + (best_k + 1) * width, false};
}

SelectionPolicy SelectionPolicy::parse(const std::string& text) {
  SelectionPolicy p;
  auto parse_param = [&](const std::string& s, double lo, double hi) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ConfigError("selection policy: bad number '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v) || v < lo || v > hi)
      throw ConfigError("selection policy: parameter out of range '" + s + "'");
    return v;
  };
  if (text == "otsu") {
    p.kind = Kind::Otsu;
  } else if (text == "all") {
    p.kind = Kind::All;
  } else if (text == "none") {
    p.kind = Kind::None;
  } else if (text.rfind("fixed:", 0) == 0) {
    p.kind = Kind::FixedThreshold;
    p.param = parse_param(text.substr(6), 0.0, std::numeric_limits<double>::max());
  } else if (text.rfind("prop:", 0) == 0) {
    p.kind = Kind::FixedProportion;
    p.param = parse_param(text.substr(5), 0.0, 1.0);
  } else if (text.rfind("random:", 0) == 0) {
    p.kind = Kind::RandomFraction;
    p.param = parse_param(text.substr(7), 0.0, 1.0);
  } else {
    throw ConfigError("unknown selection policy: " + text);
  }
  return p;
}

std::string SelectionPolicy::to_string() const {
  switch (kind) {
    case Kind::Otsu: return "otsu";
    case Kind::All: return "all";
    case Kind::None: return "none";
    case Kind::FixedThreshold: return "fixed:" + std::to_string(param);
    case Kind::FixedProportion: return "prop:" + std::to_string(param);
    case Kind::RandomFraction: return "random:" + std::to_string(param);
  }
  return "?";
}

SampleHistory::SampleHistory(std::size_t n, double decay_)
    : h(n, 0.0), f(n, 0), observed(n, 0), decay(decay_) {
  if (!(decay >= 0.0 && decay < 1.0)) throw ConfigError("history decay must be in [0,1)");
}

void SampleHistory::record(std::size_t id, double loss) {
  if (id >= h.size()) throw TrainError("history: unregistered sample id");
  if (!std::isfinite(loss) || loss < 0.0) throw TrainError("history: bad loss value");
  h[id] = observed[id] == 0 ? loss : decay * h[id] + (1.0 - decay) * loss;
  observed[id]++;
}

std::size_t update_markers(SampleHistory& store, const SelectionPolicy& policy,
                           std::mt19937_64& rng, int otsu_bins) {
  const std::size_t n = store.size();
  std::vector<std::size_t> seen;
  seen.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (store.observed[i] > 0) seen.push_back(i);

  using Kind = SelectionPolicy::Kind;
  switch (policy.kind) {
    case Kind::All:
      std::fill(store.f.begin(), store.f.end(), std::uint8_t{1});
      break;
    case Kind::None:
      std::fill(store.f.begin(), store.f.end(), std::uint8_t{0});
      break;
    case Kind::RandomFraction: {
      std::fill(store.f.begin(), store.f.end(), std::uint8_t{0});
      std::vector<std::size_t> ids(n);
      std::iota(ids.begin(), ids.end(), std::size_t{0});
      std::shuffle(ids.begin(), ids.end(), rng);
      std::size_t k = static_cast<std::size_t>(policy.param * n);
      for (std::size_t i = 0; i < k && i < n; ++i) store.f[ids[i]] = 1;
      break;
    }
    case Kind::Otsu: {
      if (!seen.empty()) {
        std::vector<double> vals;
        vals.reserve(seen.size());
        for (std::size_t i : seen) vals.push_back(store.h[i]);
        OtsuResult r = otsu_threshold(vals, otsu_bins);
        store.last_threshold = r.threshold;
        store.last_degenerate = r.degenerate;
        if (r.degenerate) {
          std::fill(store.f.begin(), store.f.end(), std::uint8_t{0});
        } else {
          for (std::size_t i : seen) store.f[i] = store.h[i] <= r.threshold ? 1 : 0;
        }
      }
      break;
    }
    case Kind::FixedThreshold:
      store.last_threshold = policy.param;
      store.last_degenerate = false;
      for (std::size_t i : seen) store.f[i] = store.h[i] <= policy.param ? 1 : 0;
      break;
    case Kind::FixedProportion: {
      std::sort(seen.begin(), seen.end(), [&](std::size_t a, std::size_t b) {
        return store.h[a] != store.h[b] ? store.h[a] < store.h[b] : a < b;
      });
      std::size_t k = static_cast<std::size_t>(policy.param * seen.size());
      for (std::size_t i = 0; i < seen.size(); ++i) store.f[seen[i]] = i < k ? 1 : 0;
      if (k > 0 && k <= seen.size()) store.last_threshold = store.h[seen[k - 1]];
      store.last_degenerate = false;
      break;
    }
  }
  return static_cast<std::size_t>(std::count(store.f.begin(), store.f.end(), std::uint8_t{1}));
}

double naive_fraction(const SampleHistory& store) {
  if (store.size() == 0) throw TrainError("naive_fraction: empty store");
  auto marked = std::count(store.f.begin(), store.f.end(), std::uint8_t{1});
  return static_cast<double>(marked) / static_cast<double>(store.size());
}

} // namespace saa
