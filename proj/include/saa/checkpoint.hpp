#pragma once

// Binary checkpoints: versioned header (magic, version, architecture hash,
// scalar width, epoch/iteration counters), then named tensor blocks
// (name length, name, rank, extents, raw little-endian scalars) for the
// parameters, their EMA, and the optimizer velocity, then the sample-history
// arrays in 64-bit. Every random stream is derived from (seed, purpose,
// counters), so counters plus these arrays are the complete run state.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "saa/errors.hpp"
#include "saa/history.hpp"
#include "saa/net.hpp"

namespace saa {

inline constexpr char kCheckpointMagic[8] = {'S', 'A', 'A', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
struct Checkpoint {
  std::uint64_t epoch = 0;
  std::uint64_t iteration = 0;
  NetParams<T> params, ema, velocity;
  SampleHistory history;
};

namespace detail {

template <typename V>
void put(std::string& out, V v) {
  char buf[sizeof v];
  std::memcpy(buf, &v, sizeof v);
  out.append(buf, sizeof v);
}

template <typename V>
V take(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(V) > in.size()) throw IoError("checkpoint: truncated file");
  V v;
  std::memcpy(&v, in.data() + pos, sizeof v);
  pos += sizeof v;
  return v;
}

template <typename T>
void put_tensor(std::string& out, const std::string& name, const Tensor<T>& t) {
  put(out, static_cast<std::uint32_t>(name.size()));
  out += name;
  put(out, static_cast<std::uint32_t>(t.shape.size()));
  for (std::size_t e : t.shape) put(out, static_cast<std::uint64_t>(e));
  const char* raw = reinterpret_cast<const char*>(t.data.data());
  out.append(raw, t.numel() * sizeof(T));
}

template <typename T>
void take_tensor(const std::string& in, std::size_t& pos, const std::string& want,
                 Tensor<T>& t) {
  std::uint32_t len = take<std::uint32_t>(in, pos);
  if (pos + len > in.size()) throw IoError("checkpoint: truncated name");
  std::string name(in.data() + pos, len);
  pos += len;
  if (name != want) throw IoError("checkpoint: expected tensor " + want + ", found " + name);
  std::uint32_t rank = take<std::uint32_t>(in, pos);
  if (rank != t.shape.size()) throw IoError("checkpoint: rank mismatch for " + want);
  for (std::size_t e : t.shape)
    if (take<std::uint64_t>(in, pos) != e)
      throw IoError("checkpoint: extent mismatch for " + want);
  std::size_t bytes = t.numel() * sizeof(T);
  if (pos + bytes > in.size()) throw IoError("checkpoint: truncated tensor " + want);
  std::memcpy(t.data.data(), in.data() + pos, bytes);
  pos += bytes;
}

} // namespace detail

template <typename T>
void save_checkpoint(const std::string& path, const ArchConfig& arch,
                     const Checkpoint<T>& ck) {
  std::string out;
  out.append(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put(out, kCheckpointVersion);
  detail::put(out, arch.hash());
  detail::put(out, static_cast<std::uint32_t>(sizeof(T)));
  detail::put(out, ck.epoch);
  detail::put(out, ck.iteration);

  const char* prefixes[] = {"p.", "e.", "v."};
  const NetParams<T>* blocks[] = {&ck.params, &ck.ema, &ck.velocity};
  std::uint32_t count = 0;
  for (const NetParams<T>* b : blocks) count += static_cast<std::uint32_t>(b->named().size());
  detail::put(out, count);
  for (int i = 0; i < 3; ++i)
    for (const auto& [name, tensor] : blocks[i]->named())
      detail::put_tensor(out, prefixes[i] + name, *tensor);

  detail::put(out, static_cast<std::uint64_t>(ck.history.size()));
  for (double v : ck.history.h) detail::put(out, v);
  for (std::uint8_t v : ck.history.f) detail::put(out, v);
  for (std::uint64_t v : ck.history.observed) detail::put(out, v);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for " + path);
}

template <typename T>
Checkpoint<T> load_checkpoint(const std::string& path, const ArchConfig& arch,
                              double history_decay) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;

  if (in.size() < sizeof kCheckpointMagic ||
      std::memcmp(in.data(), kCheckpointMagic, sizeof kCheckpointMagic) != 0)
    throw IoError(path + ": not a checkpoint file");
  pos += sizeof kCheckpointMagic;
  if (detail::take<std::uint32_t>(in, pos) != kCheckpointVersion)
    throw IoError(path + ": unsupported checkpoint version");
  if (detail::take<std::uint64_t>(in, pos) != arch.hash())
    throw IoError(path + ": checkpoint was written for a different architecture");
  if (detail::take<std::uint32_t>(in, pos) != sizeof(T))
    throw IoError(path + ": checkpoint scalar width differs from this run's precision");

  Checkpoint<T> ck;
  ck.epoch = detail::take<std::uint64_t>(in, pos);
  ck.iteration = detail::take<std::uint64_t>(in, pos);
  ck.params = NetParams<T>(arch);
  ck.ema = NetParams<T>(arch);
  ck.velocity = NetParams<T>(arch);

  std::uint32_t count = detail::take<std::uint32_t>(in, pos);
  const char* prefixes[] = {"p.", "e.", "v."};
  NetParams<T>* blocks[] = {&ck.params, &ck.ema, &ck.velocity};
  std::uint32_t seen = 0;
  for (int i = 0; i < 3; ++i)
    for (auto& [name, tensor] : blocks[i]->named()) {
      detail::take_tensor(in, pos, prefixes[i] + name, *tensor);
      ++seen;
    }
  if (seen != count) throw IoError(path + ": unexpected tensor count");

  std::uint64_t n = detail::take<std::uint64_t>(in, pos);
  ck.history = SampleHistory(static_cast<std::size_t>(n), history_decay);
  for (std::uint64_t i = 0; i < n; ++i) ck.history.h[i] = detail::take<double>(in, pos);
  for (std::uint64_t i = 0; i < n; ++i) ck.history.f[i] = detail::take<std::uint8_t>(in, pos);
  for (std::uint64_t i = 0; i < n; ++i)
    ck.history.observed[i] = detail::take<std::uint64_t>(in, pos);
  if (pos != in.size()) throw IoError(path + ": trailing bytes");
  return ck;
}

} // namespace saa
