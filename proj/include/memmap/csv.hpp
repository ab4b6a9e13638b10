#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "memmap/errors.hpp"
#include "memmap/linalg.hpp"

namespace memmap {

/// Comma-separated numeric table; '.' decimal point, no locale handling.
/// Throws ParseError with a 1-based line number on malformed rows.
inline Matrix read_csv(const std::string& path, bool skip_header = false) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (skip_header && lineno == 1) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            std::size_t consumed = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &consumed);
            } catch (const std::exception&) {
                throw ParseError(path + ": line " + std::to_string(lineno) +
                                 ": cannot parse \"" + cell + "\" as a number");
            }
            while (consumed < cell.size() &&
                   (cell[consumed] == ' ' || cell[consumed] == '\t')) {
                ++consumed;
            }
            if (consumed != cell.size()) {
                throw ParseError(path + ": line " + std::to_string(lineno) +
                                 ": trailing junk in \"" + cell + "\"");
            }
            row.push_back(v);
        }
        if (row.empty()) {
            throw ParseError(path + ": line " + std::to_string(lineno) +
                             ": empty row");
        }
        if (width == 0) width = row.size();
        if (row.size() != width) {
            throw ParseError(path + ": line " + std::to_string(lineno) + ": has " +
                             std::to_string(row.size()) + " columns, expected " +
                             std::to_string(width));
        }
        rows.push_back(std::move(row));
    }
    Matrix m(static_cast<Eigen::Index>(rows.size()),
             static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j];
        }
    }
    return m;
}

inline void write_csv(const Matrix& m, const std::string& path,
                      const std::vector<std::string>& header = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    if (!header.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j != 0) out << ',';
            out << header[j];
        }
        out << '\n';
    }
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j != 0) out << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace memmap
