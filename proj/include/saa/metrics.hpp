#pragma once

// Per-epoch metrics rows and their CSV round-trip. Floats are written with
// %.17g so read-back reproduces the exact doubles.

#include <cstdint>
#include <string>
#include <vector>

namespace saa {

struct MetricsRow {
  std::uint64_t epoch = 0;
  std::uint64_t iteration = 0;  // global iteration count at the epoch boundary
  double test_acc = 0.0;
  double sup_loss = 0.0;
  double unsup_loss = 0.0;
  double mask_rate = 0.0;
  double naive_fraction = 0.0;
  double lr = 0.0;
  std::int64_t wall_ms = 0;
};

extern const char* const kMetricsHeader;

std::string metrics_to_csv(const std::vector<MetricsRow>& rows);
void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics(const std::string& path);

// CSV text with the wall_ms column removed; wall time is the one column two
// identical runs may legitimately disagree on.
std::string strip_wall_column(const std::string& csv);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace saa
