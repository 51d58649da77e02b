#include "frontctrl/csv.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>

#include "frontctrl/errors.hpp"

namespace frontctrl {

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) {
  std::string line;
  for (std::size_t k = 0; k < header.size(); ++k) line += (k ? "," : "") + header[k];
  raw(line);
}

void CsvWriter::comment(const std::string& text) { raw("# " + text); }

void CsvWriter::row(const std::vector<double>& values) {
  std::string line;
  for (std::size_t k = 0; k < values.size(); ++k) line += (k ? "," : "") + format_number(values[k]);
  raw(line);
}

void CsvWriter::raw(const std::string& line) {
  payload_ += line;
  payload_ += '\n';
}

std::string CsvWriter::text() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "# checksum=%016" PRIx64 "\n", checksum());
  return payload_ + buf;
}

void CsvWriter::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Config, "cannot write " + path);
  out << text();
  if (!out) fail(ErrorCode::Config, "cannot write " + path);
}

ChecksumCheck check_csv_checksum(const std::string& text) {
  ChecksumCheck r;
  const std::string key = "# checksum=";
  std::size_t start = text.rfind(key);
  if (start == std::string::npos || (start > 0 && text[start - 1] != '\n')) return r;
  r.present = std::sscanf(text.c_str() + start + key.size(), "%" SCNx64, &r.recorded) == 1;
  r.computed = fnv1a64(std::string_view(text).substr(0, start));
  r.matches = r.present && r.recorded == r.computed;
  return r;
}

}  // namespace frontctrl
