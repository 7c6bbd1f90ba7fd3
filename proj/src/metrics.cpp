#include "saa/metrics.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "saa/errors.hpp"

namespace saa {

const char* const kMetricsHeader =
    "epoch,iteration,test_acc,sup_loss,unsup_loss,mask_rate,naive_fraction,lr,wall_ms";

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
  std::string out = kMetricsHeader;
  out += '\n';
  char buf[512];
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%" PRIu64 ",%" PRIu64 ",%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%" PRId64 "\n",
                  r.epoch, r.iteration, r.test_acc, r.sup_loss, r.unsup_loss, r.mask_rate,
                  r.naive_fraction, r.lr, r.wall_ms);
    out += buf;
  }
  return out;
}

void write_metrics(const std::string& path, const std::vector<MetricsRow>& rows) {
  write_text_file(path, metrics_to_csv(rows));
}

std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader)
    throw IoError(path + ": missing or unexpected metrics header");
  std::vector<MetricsRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    MetricsRow r;
    if (std::sscanf(line.c_str(),
                    "%" SCNu64 ",%" SCNu64 ",%lg,%lg,%lg,%lg,%lg,%lg,%" SCNd64, &r.epoch,
                    &r.iteration, &r.test_acc, &r.sup_loss, &r.unsup_loss, &r.mask_rate,
                    &r.naive_fraction, &r.lr, &r.wall_ms) != 9)
      throw IoError(path + ":" + std::to_string(lineno) + ": malformed metrics row");
    rows.push_back(r);
  }
  return rows;
}

std::string strip_wall_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string out, line;
  while (std::getline(in, line)) {
    std::size_t comma = line.rfind(',');
    out += comma == std::string::npos ? line : line.substr(0, comma);
    out += '\n';
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

} // namespace saa
