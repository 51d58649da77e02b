#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace frontctrl {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

/// Shortest round-trip-stable decimal used in every output file.
std::string format_number(double v);

/// CSV text whose last line is `# checksum=<fnv64 of everything above>`.
class CsvWriter {
 public:
  CsvWriter() = default;
  explicit CsvWriter(const std::vector<std::string>& header);

  void comment(const std::string& text);
  void row(const std::vector<double>& values);
  void raw(const std::string& line);

  const std::string& payload() const { return payload_; }
  std::uint64_t checksum() const { return fnv1a64(payload_); }
  std::string text() const;
  /// Writes text(); throws a config error when the file cannot be written.
  void write(const std::string& path) const;

 private:
  std::string payload_;
};

/// Payload and recorded checksum of a file produced by CsvWriter.
struct ChecksumCheck {
  bool present = false;
  bool matches = false;
  std::uint64_t recorded = 0;
  std::uint64_t computed = 0;
};

ChecksumCheck check_csv_checksum(const std::string& text);

}  // namespace frontctrl
