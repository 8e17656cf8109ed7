#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace catmmv {

// Shortest decimal string that round-trips the exact binary64 value.
std::string format_double(double value);

// Minimal CSV assembly: header once, then rows of pre-formatted fields.
class CsvBuilder {
public:
    explicit CsvBuilder(std::vector<std::string> header);
    void add_row(const std::vector<double>& values);
    const std::string& str() const { return out_; }

private:
    std::string out_;
    std::size_t n_cols_;
};

// Writes content to path atomically (temp file + rename); no partial outputs.
void atomic_write_file(const std::string& path, const std::string& content);

// FNV-1a 64-bit content digest, hex encoded.
std::string fnv1a64_hex(const std::string& content);

}  // namespace catmmv
