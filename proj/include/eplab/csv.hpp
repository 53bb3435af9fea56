#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "eplab/errors.hpp"

namespace eplab {

// 17 significant digits, locale-independent, via to_chars. All CSV output
// goes through this so reruns are byte-identical.
inline std::string format_sig17(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::scientific, 16);
    if (res.ec != std::errc())
        throw SolverError("failed to format double");
    return std::string(buf, res.ptr);
}

// Comma-separated, '.' decimal, LF line endings, header row.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot open output file: " + path);
        for (std::size_t k = 0; k < header.size(); ++k) {
            if (k) out_ << ',';
            out_ << header[k];
        }
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (k) out_ << ',';
            out_ << format_sig17(values[k]);
        }
        out_ << '\n';
    }

    // Mixed row: raw cells are written verbatim (labels, integers).
    void raw_row(const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) out_ << ',';
            out_ << cells[k];
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

} // namespace eplab
