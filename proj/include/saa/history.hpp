#pragma once

// Per-sample loss history and naive-sample selection.
//
// Each unlabeled sample keeps an EMA of its consistency loss (recorded
// pre-mask, so low-confidence samples are not conflated with easy ones).
// Once per epoch the trainer recomputes naive markers from the histories
// under a selection policy; marked samples get the diverse augmentation.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace saa {

struct OtsuResult {
  double threshold = 0.0;
  bool degenerate = false;  // all values equal; caller marks nothing
};

// Histogram `values` into `bins` equal-width bins over [min, max] and return
// the bin edge maximizing the between-class variance w0*w1*(mu0-mu1)^2, class
// means taken over bin centers. Plateaus (empty bins between clusters) are
// broken toward the lowest edge; scores within a 1e-10 relative band of the
// max count as tied so the choice is stable across summation orders.
OtsuResult otsu_threshold(const std::vector<double>& values, int bins = 256);

struct SelectionPolicy {
  enum class Kind { Otsu, FixedThreshold, FixedProportion, All, None, RandomFraction };
  Kind kind = Kind::Otsu;
  double param = 0.0;  // threshold for FixedThreshold, fraction for the others

  // "otsu" | "fixed:T" | "prop:P" | "all" | "none" | "random:P"
  static SelectionPolicy parse(const std::string& text);
  std::string to_string() const;
};

struct SampleHistory {
  std::vector<double> h;          // EMA of recorded losses, valid once observed > 0
  std::vector<std::uint8_t> f;    // naive marker
  std::vector<std::uint64_t> observed;
  double decay = 0.95;
  double last_threshold = 0.0;    // from the most recent marker update
  bool last_degenerate = false;

  SampleHistory() = default;
  SampleHistory(std::size_t n, double decay);

  std::size_t size() const { return h.size(); }

  // First observation sets h = loss, later ones h = decay*h + (1-decay)*loss.
  void record(std::size_t id, double loss);
};

// Recompute every marker from the current histories. Otsu/FixedThreshold mark
// h <= threshold; FixedProportion marks the floor(p*N) smallest (ties by id);
// All/None ignore h; RandomFraction marks a uniform random subset of size
// floor(p*N). Samples never observed keep their marker (policies that consult
// h cannot rank them). A degenerate Otsu clears all markers. Returns the
// number of marked samples.
std::size_t update_markers(SampleHistory& store, const SelectionPolicy& policy,
                           std::mt19937_64& rng, int otsu_bins = 256);

double naive_fraction(const SampleHistory& store);

} // namespace saa
