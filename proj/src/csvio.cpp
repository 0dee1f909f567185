#include "collar/csvio.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace collar {

std::uint32_t crc32(const std::string& bytes) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (unsigned char ch : bytes) crc = table[(crc ^ ch) & 0xFFu] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

std::string format_number(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (res.ec != std::errc{}) throw std::runtime_error("format_number failed");
    return {buf.data(), res.ptr};
}

CsvWriter::CsvWriter(std::vector<std::string> header) : n_cols_(header.size()) {
    if (header.empty()) throw std::invalid_argument("CsvWriter: empty header");
    add_row(header);
}

void CsvWriter::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    add_row(cells);
}

void CsvWriter::add_row(const std::vector<std::string>& values) {
    if (values.size() != n_cols_)
        throw std::invalid_argument("CsvWriter: row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) body_ += ',';
        body_ += values[i];
    }
    body_ += '\n';
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("CsvWriter: cannot open " + path);
    char hex[16];
    std::snprintf(hex, sizeof(hex), "%08x", crc32(body_));
    out << body_ << "# checksum: " << hex << '\n';
    if (!out) throw std::runtime_error("CsvWriter: write failed for " + path);
}

}  // namespace collar
