#pragma once

// Training-curve exports: (iteration, value) series CSVs pulled from the
// metrics table, plus a dependency-free PPM line render of each.

#include <string>
#include <vector>

#include "saa/metrics.hpp"

namespace saa {

struct SeriesPoint {
  std::uint64_t iteration = 0;
  double value = 0.0;
};

std::vector<SeriesPoint> metrics_series(const std::vector<MetricsRow>& rows,
                                        const std::string& column);  // test_acc | naive_fraction | ...

void write_series_csv(const std::string& path, const std::string& column,
                      const std::vector<SeriesPoint>& series);

// Binary P6 PPM, white background, axes box, connected polyline.
void render_series_ppm(const std::string& path, const std::vector<SeriesPoint>& series,
                       int width = 640, int height = 400);

} // namespace saa
