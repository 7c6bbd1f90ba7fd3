#include "saa/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "saa/errors.hpp"

namespace saa {

std::vector<SeriesPoint> metrics_series(const std::vector<MetricsRow>& rows,
                                        const std::string& column) {
  std::vector<SeriesPoint> out;
  out.reserve(rows.size());
  for (const MetricsRow& r : rows) {
    double v = 0.0;
    if (column == "test_acc") v = r.test_acc;
    else if (column == "sup_loss") v = r.sup_loss;
    else if (column == "unsup_loss") v = r.unsup_loss;
    else if (column == "mask_rate") v = r.mask_rate;
    else if (column == "naive_fraction") v = r.naive_fraction;
    else if (column == "lr") v = r.lr;
    else throw ConfigError("unknown metrics column: " + column);
    out.push_back({r.iteration, v});
  }
  return out;
}

void write_series_csv(const std::string& path, const std::string& column,
                      const std::vector<SeriesPoint>& series) {
  std::string text = "iteration," + column + "\n";
  char buf[128];
  for (const SeriesPoint& p : series) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g\n",
                  static_cast<unsigned long long>(p.iteration), p.value);
    text += buf;
  }
  write_text_file(path, text);
}

namespace {

struct Canvas {
  int w, h;
  std::vector<std::uint8_t> px;  // rgb
  Canvas(int w_, int h_) : w(w_), h(h_), px(static_cast<std::size_t>(w_) * h_ * 3, 255) {}
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (x < 0 || x >= w || y < 0 || y >= h) return;
    std::size_t i = (static_cast<std::size_t>(y) * w + x) * 3;
    px[i] = r;
    px[i + 1] = g;
    px[i + 2] = b;
  }
  void line(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1, err = dx + dy;
    for (;;) {
      set(x0, y0, r, g, b);
      if (x0 == x1 && y0 == y1) break;
      int e2 = 2 * err;
      if (e2 >= dy) { err += dy; x0 += sx; }
      if (e2 <= dx) { err += dx; y0 += sy; }
    }
  }
};

} // namespace

void render_series_ppm(const std::string& path, const std::vector<SeriesPoint>& series,
                       int width, int height) {
  if (series.empty()) throw ConfigError("render_series_ppm: empty series");
  Canvas cv(width, height);
  const int ml = 50, mr = 15, mt = 15, mb = 35;  // margins
  int pw = width - ml - mr, ph = height - mt - mb;

  double x_lo = static_cast<double>(series.front().iteration);
  double x_hi = static_cast<double>(series.back().iteration);
  double y_lo = series.front().value, y_hi = y_lo;
  for (const SeriesPoint& p : series) {
    y_lo = std::min(y_lo, p.value);
    y_hi = std::max(y_hi, p.value);
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1;
  if (y_hi <= y_lo) y_hi = y_lo + 1;

  auto px_of = [&](double x) {
    return ml + static_cast<int>(std::lround((x - x_lo) / (x_hi - x_lo) * pw));
  };
  auto py_of = [&](double y) {
    return mt + ph - static_cast<int>(std::lround((y - y_lo) / (y_hi - y_lo) * ph));
  };

  cv.line(ml, mt, ml, mt + ph, 0, 0, 0);
  cv.line(ml, mt + ph, ml + pw, mt + ph, 0, 0, 0);
  for (int tick = 0; tick <= 4; ++tick) {  // horizontal guides
    int y = mt + ph - tick * ph / 4;
    for (int x = ml; x <= ml + pw; x += 4) cv.set(x, y, 210, 210, 210);
  }

  for (std::size_t i = 1; i < series.size(); ++i)
    cv.line(px_of(static_cast<double>(series[i - 1].iteration)), py_of(series[i - 1].value),
            px_of(static_cast<double>(series[i].iteration)), py_of(series[i].value),
            30, 70, 180);
  if (series.size() == 1)
    cv.set(px_of(static_cast<double>(series[0].iteration)), py_of(series[0].value), 30, 70, 180);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "P6\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(cv.px.data()),
            static_cast<std::streamsize>(cv.px.size()));
  if (!out) throw IoError("write failed for " + path);
}

} // namespace saa
