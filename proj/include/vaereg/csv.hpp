#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vaereg/dataset.hpp"
#include "vaereg/errors.hpp"
#include "vaereg/util.hpp"

namespace vaereg {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline bool parse_cell(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto res = std::from_chars(b, e, out);
    // from_chars accepts "inf"/"nan"; data cells must be finite numbers.
    return res.ec == std::errc() && res.ptr == e && std::isfinite(out);
}

}  // namespace detail

// Comma-separated numeric table with a header row; the named target column
// becomes c, every other column a feature (header order preserved).
inline Dataset load_csv(const std::filesystem::path& path, const std::string& target_column) {
    std::ifstream in(path);
    if (!in) throw DataError("missing file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty file: " + path.string());
    const std::vector<std::string> header = detail::split_csv_line(line);
    for (std::size_t j = 0; j < header.size(); ++j)
        for (std::size_t k = j + 1; k < header.size(); ++k)
            if (header[j] == header[k])
                throw DataError("duplicate column '" + header[j] + "' in " + path.string());
    std::size_t target_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j] == target_column) target_idx = j;
    if (target_idx == header.size())
        throw DataError("missing target column '" + target_column + "' in " + path.string());

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw DataError("row " + std::to_string(line_no - 1) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(header.size()));
        std::vector<double> vals(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (!detail::parse_cell(cells[j], vals[j]))
                throw DataError("non-numeric cell at (row " + std::to_string(line_no - 1) + ", col \"" +
                                header[j] + "\"): '" + cells[j] + "'");
        }
        rows.push_back(std::move(vals));
    }
    if (rows.size() < 2) throw DataError("dataset needs at least 2 data rows: " + path.string());

    Dataset d;
    d.provenance = Provenance::csv;
    d.target_name = target_column;
    const std::size_t dims = header.size() - 1;
    d.X = Tensor::matrix(rows.size(), dims);
    d.c.resize(rows.size());
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != target_idx) d.feature_names.push_back(header[j]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t f = 0;
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j == target_idx)
                d.c[i] = rows[i][j];
            else
                d.X(i, f++) = rows[i][j];
        }
    }
    d.validate();

    // Globally constant columns can never be standardized; reject early.
    for (std::size_t j = 0; j < dims; ++j) {
        bool constant = true;
        for (std::size_t i = 1; i < rows.size() && constant; ++i)
            constant = d.X(i, j) == d.X(0, j);
        if (constant)
            throw DataError("constant feature '" + d.feature_names[j] + "' in " + path.string());
    }
    return d;
}

inline std::string to_csv(const Dataset& d) {
    std::ostringstream out;
    for (std::size_t j = 0; j < d.feature_names.size(); ++j) out << d.feature_names[j] << ',';
    out << d.target_name << '\n';
    for (std::size_t i = 0; i < d.n(); ++i) {
        for (std::size_t j = 0; j < d.dims(); ++j) out << format_double(d.X(i, j)) << ',';
        out << format_double(d.c[i]) << '\n';
    }
    return out.str();
}

inline void write_csv(const std::filesystem::path& path, const Dataset& d) { write_file(path, to_csv(d)); }

// Reorders columns of `d` to match `names`; predictions must not depend on
// the column order of the incoming file.
inline Dataset align_features(const Dataset& d, const std::vector<std::string>& names) {
    std::vector<std::size_t> index(names.size());
    for (std::size_t j = 0; j < names.size(); ++j) {
        bool found = false;
        for (std::size_t k = 0; k < d.feature_names.size(); ++k) {
            if (d.feature_names[k] == names[j]) {
                index[j] = k;
                found = true;
                break;
            }
        }
        if (!found) throw DataError("dataset is missing expected feature '" + names[j] + "'");
    }
    Dataset out = d;
    out.feature_names = names;
    out.X = Tensor::matrix(d.n(), names.size());
    for (std::size_t i = 0; i < d.n(); ++i)
        for (std::size_t j = 0; j < names.size(); ++j) out.X(i, j) = d.X(i, index[j]);
    return out;
}

}  // namespace vaereg
