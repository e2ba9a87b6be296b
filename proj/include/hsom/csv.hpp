#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hsom/dataset.hpp"
#include "hsom/errors.hpp"

namespace hsom {

struct CsvOptions {
    std::optional<std::string> label_column;  // default: last column
    char delimiter = ',';
    /// Label values mapped to 0. With an empty `one_labels`, every other
    /// value maps to 1; otherwise unlisted values are rejected.
    std::vector<std::string> zero_labels = {"0", "benign", "BENIGN", "normal", "Normal"};
    std::vector<std::string> one_labels = {};
    /// Accept a header-only (or empty) file and return a zero-row dataset.
    bool allow_empty = false;
    /// Treat every column as a feature candidate (labels all read as 0);
    /// for prediction inputs that carry no label column.
    bool no_label_column = false;
};

struct CsvLoadResult {
    LabeledDataset data;
    std::size_t dropped_rows = 0;  // rows removed for non-finite feature values
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split_line(std::string_view line, char delimiter) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(trim(line.substr(start)));
            break;
        }
        out.emplace_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

/// Strict full-cell parse. Empty cells and trailing garbage fail.
inline bool parse_double(std::string_view cell, double& out) {
    if (cell.empty()) return false;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (*first == '+') ++first;  // from_chars rejects a leading plus
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace detail

/// Load a labeled dataset from a delimited text file. The first line is a
/// required header. Feature columns are the non-label columns in which
/// every cell parses as a number; columns with any textual cell are
/// skipped. Rows carrying a non-finite value in a kept column are dropped
/// and counted in the result.
inline CsvLoadResult load_csv(const std::filesystem::path& path, const CsvOptions& options = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) {
        if (options.allow_empty) return {};
        throw InvalidInput(path.string() + ": empty file (header row required)");
    }
    const std::vector<std::string> header = detail::split_line(line, options.delimiter);
    const std::size_t n_cols = header.size();

    std::size_t label_col = n_cols;  // one past the end == no label column
    if (!options.no_label_column) {
        label_col = n_cols - 1;
        if (options.label_column) {
            auto it = std::find(header.begin(), header.end(), *options.label_column);
            if (it == header.end())
                throw InvalidInput(path.string() + ": label column '" + *options.label_column +
                                   "' not found in header");
            label_col = static_cast<std::size_t>(it - header.begin());
        }
    }

    const auto label_for = [&](const std::string& cell) -> std::uint8_t {
        for (const std::string& z : options.zero_labels)
            if (cell == z) return 0;
        if (options.one_labels.empty()) return 1;
        for (const std::string& o : options.one_labels)
            if (cell == o) return 1;
        throw InvalidInput(path.string() + ": unmappable label value '" + cell + "'");
    };

    // One pass: parse everything, remember which columns stay numeric.
    std::vector<bool> numeric(n_cols, true);
    if (label_col < n_cols) numeric[label_col] = false;
    std::vector<double> values;  // row-major over all non-label columns
    std::vector<std::uint8_t> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const std::vector<std::string> cells = detail::split_line(line, options.delimiter);
        if (cells.size() != n_cols)
            throw InvalidInput(path.string() + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(n_cols) + " columns, found " +
                               std::to_string(cells.size()));
        labels.push_back(label_col < n_cols ? label_for(cells[label_col]) : 0);
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (c == label_col) continue;
            double v = std::numeric_limits<double>::quiet_NaN();
            if (!detail::parse_double(cells[c], v)) numeric[c] = false;
            values.push_back(v);
        }
    }

    if (labels.empty()) {
        if (options.allow_empty) return {};
        throw InvalidInput(path.string() + ": no data rows");
    }

    std::vector<std::size_t> kept_cols;  // positions within the non-label columns
    std::vector<std::string> kept_names;
    for (std::size_t c = 0, pos = 0; c < n_cols; ++c) {
        if (c == label_col) continue;
        if (numeric[c]) {
            kept_cols.push_back(pos);
            kept_names.push_back(header[c]);
        }
        ++pos;
    }
    if (kept_cols.empty()) throw InvalidInput(path.string() + ": no numeric feature columns");

    const std::size_t stride = label_col < n_cols ? n_cols - 1 : n_cols;
    const std::size_t n_rows = labels.size();
    CsvLoadResult result;
    result.data.features = Matrix(n_rows, kept_cols.size());
    result.data.feature_names = std::move(kept_names);

    std::size_t out_row = 0;
    for (std::size_t r = 0; r < n_rows; ++r) {
        const double* src = values.data() + r * stride;
        bool finite = true;
        for (std::size_t c : kept_cols)
            if (!std::isfinite(src[c])) {
                finite = false;
                break;
            }
        if (!finite) {
            ++result.dropped_rows;
            continue;
        }
        auto dst = result.data.features.row(out_row);
        for (std::size_t i = 0; i < kept_cols.size(); ++i) dst[i] = src[kept_cols[i]];
        result.data.labels.push_back(labels[r]);
        ++out_row;
    }
    if (out_row == 0 && !options.allow_empty)
        throw InvalidInput(path.string() + ": every row was dropped for non-finite values");

    // shrink the feature matrix to the surviving rows
    if (out_row < n_rows) {
        Matrix trimmed(out_row, kept_cols.size());
        for (std::size_t r = 0; r < out_row; ++r) {
            auto src = result.data.features.row(r);
            auto dst = trimmed.row(r);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        result.data.features = std::move(trimmed);
    }
    return result;
}

namespace detail {

inline void append_double(std::string& out, double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip form
    out.append(buf, ptr);
}

}  // namespace detail

/// Write a dataset back out as CSV (features, then the label column).
/// Values use the shortest representation that reloads exactly.
inline void save_csv(const LabeledDataset& ds, const std::filesystem::path& path,
                     char delimiter = ',') {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());

    std::string buf;
    for (std::size_t c = 0; c < ds.feature_dim(); ++c) {
        buf += (c < ds.feature_names.size() && !ds.feature_names[c].empty())
                   ? ds.feature_names[c]
                   : "f" + std::to_string(c);
        buf += delimiter;
    }
    buf += "label\n";
    for (std::size_t r = 0; r < ds.size(); ++r) {
        auto row = ds.features.row(r);
        for (double v : row) {
            detail::append_double(buf, v);
            buf += delimiter;
        }
        buf += ds.labels[r] ? '1' : '0';
        buf += '\n';
    }
    out << buf;
    if (!out) throw IoError("failed while writing " + path.string());
}

}  // namespace hsom
