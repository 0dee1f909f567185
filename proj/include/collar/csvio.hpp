#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace collar {

// CRC-32 (IEEE, reflected) of a byte string.
std::uint32_t crc32(const std::string& bytes);

// Deterministic shortest round-trip formatting of a double (no locale,
// no platform drift), so output files are byte-identical across runs.
std::string format_number(double v);

// Minimal CSV emitter: header row, data rows, LF line endings, and a final
// "# checksum: XXXXXXXX" comment line carrying the CRC-32 of everything above.
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header);
    void add_row(const std::vector<double>& values);
    void add_row(const std::vector<std::string>& values);
    // Writes the file (including the checksum trailer); throws on I/O failure.
    void write(const std::string& path) const;
    const std::string& body() const { return body_; }

  private:
    std::size_t n_cols_ = 0;
    std::string body_;
};

}  // namespace collar
