#pragma once

#include <cstdint>
#include <random>

namespace saa::rng {

// Every random decision in a run draws from its own stream, derived from
// (run seed, purpose tag, two free indices). Streams therefore never depend
// on scheduling, batch composition, or thread count, and any consumer can be
// replayed in isolation.
//
// Tag usage across the codebase:
//   WeightInit       (0, 0)                      parameter init draws
//   LabeledShuffle   (wrap count, 0)             labeled-order reshuffles
//   UnlabeledSample  (global iteration, 0)       with-replacement id draws
//   AugLabeled       (global iteration, slot)    weak augmentation, labeled
//   AugWeak          (global iteration, slot)    weak augmentation, unlabeled
//   AugStrong        (global iteration, slot)    strong / diverse augmentation
//   Markers          (epoch, 0)                  random-fraction selection
//   SyntheticNoise   (split id, image index)     synthetic dataset noise
//   LabelSplit       (class, 0)                  labeled/unlabeled split
enum class Stream : std::uint64_t {
  WeightInit = 1,
  LabeledShuffle,
  UnlabeledSample,
  AugLabeled,
  AugWeak,
  AugStrong,
  Markers,
  SyntheticNoise,
  LabelSplit,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t seed, Stream tag, std::uint64_t a = 0,
                         std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x5851f42d4c957f2dULL);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  h = splitmix64(h ^ a);
  return splitmix64(h ^ b);
}

inline std::mt19937_64 stream(std::uint64_t seed, Stream tag, std::uint64_t a = 0,
                              std::uint64_t b = 0) {
  return std::mt19937_64(mix(seed, tag, a, b));
}

} // namespace saa::rng
