// csv.hpp — minimal CSV writer with full-precision numeric columns.

#pragma once

#include <charconv>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qbm/errors.hpp"

namespace qbm {

// 17 significant digits: round-trips every double.
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x,
                             std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline void write_csv(std::ostream& os,
                      std::span<const std::string> header,
                      std::span<const std::vector<double>> columns) {
    if (header.size() != columns.size())
        throw DomainError("write_csv: header/column count mismatch");
    for (std::size_t j = 0; j < header.size(); ++j)
        os << (j ? "," : "") << header[j];
    os << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns[0].size();
    for (const auto& c : columns)
        if (c.size() != rows)
            throw DomainError("write_csv: ragged columns");
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j)
            os << (j ? "," : "") << format_double(columns[j][i]);
        os << '\n';
    }
}

inline void write_csv_file(const std::string& path,
                           std::span<const std::string> header,
                           std::span<const std::vector<double>> columns) {
    std::ofstream f(path);
    if (!f) throw DomainError("write_csv_file: cannot open " + path);
    write_csv(f, header, columns);
}

} // namespace qbm
