// Copyright 2026 The pcsq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Tabular datasets: synthetic 2D generators, uniform-bin discretization and
// CSV ingestion with optional per-column standardization.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pcsq/errors.hpp"
#include "pcsq/linalg.hpp"
#include "pcsq/random.hpp"

namespace pcsq {

enum class ColumnKind { Continuous, Discrete };

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::Continuous;
    int states = 0;  // discrete only
    bool standardized = false;
    double mean = 0.0;  // standardization: stored = (raw - mean) / stddev
    double stddev = 1.0;
};

struct Dataset {
    std::vector<Column> columns;
    Matrix rows;
    std::vector<std::size_t> train, val, test;

    std::size_t size() const { return rows.rows(); }
    std::size_t variable_count() const { return columns.size(); }

    Matrix split(const std::vector<std::size_t> &idx) const {
        Matrix out(idx.size(), rows.cols());
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t c = 0; c < rows.cols(); ++c) out(r, c) = rows(idx[r], c);
        return out;
    }
    Matrix train_rows() const { return split(train); }
    Matrix val_rows() const { return split(val); }
    Matrix test_rows() const { return split(test); }
};

namespace detail {

inline void synthetic_point(const std::string &name, Rng &rng, double &x1, double &x2) {
    if (name == "rings") {
        const double r = (rng.uniform() < 0.5 ? 1.0 : 2.0) + rng.normal(0.0, 0.1);
        const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
        x1 = r * std::cos(a);
        x2 = r * std::sin(a);
    } else if (name == "cosine") {
        x1 = rng.uniform(-4.0, 4.0);
        x2 = 2.0 * std::cos(x1) + rng.normal(0.0, 0.35);
    } else if (name == "funnel") {
        x1 = rng.normal();
        x2 = rng.normal(0.0, std::exp(x1 / 2.0));
    } else if (name == "banana") {
        const double z1 = rng.normal(), z2 = rng.normal();
        x1 = z1;
        x2 = z2 + 0.5 * z1 * z1 - 1.0;
    } else {
        throw InvalidArgument("unknown synthetic dataset '" + name + "'");
    }
}

}  // namespace detail

/// Uniform bins over each continuous column's range; values become integer
/// bin indices in [0, bins).
inline void discretize(Dataset &d, int bins) {
    if (bins < 1) throw InvalidArgument("discretize: bins must be >= 1");
    for (std::size_t c = 0; c < d.columns.size(); ++c) {
        if (d.columns[c].kind == ColumnKind::Discrete) continue;
        double lo = d.rows(0, c), hi = d.rows(0, c);
        for (std::size_t r = 0; r < d.size(); ++r) {
            lo = std::min(lo, d.rows(r, c));
            hi = std::max(hi, d.rows(r, c));
        }
        const double w = hi > lo ? (hi - lo) / bins : 1.0;
        for (std::size_t r = 0; r < d.size(); ++r) {
            const double k = std::floor((d.rows(r, c) - lo) / w);
            d.rows(r, c) = std::clamp(k, 0.0, static_cast<double>(bins - 1));
        }
        d.columns[c].kind = ColumnKind::Discrete;
        d.columns[c].states = bins;
    }
}

/// Seeded 2D toy data (rings, cosine, funnel, banana); rows are generated in
/// train, validation, test order.
inline Dataset generate_synthetic(const std::string &name, std::size_t n_train, std::size_t n_val, std::size_t n_test,
                                  std::uint64_t seed, std::optional<int> bins = std::nullopt) {
    if (n_train < 1 || n_val < 1 || n_test < 1) throw InvalidArgument("generate_synthetic: split sizes must be >= 1");
    Dataset d;
    d.columns = {Column{"x1"}, Column{"x2"}};
    const std::size_t n = n_train + n_val + n_test;
    d.rows = Matrix(n, 2);
    Rng rng(seed);
    for (std::size_t r = 0; r < n; ++r) detail::synthetic_point(name, rng, d.rows(r, 0), d.rows(r, 1));
    for (std::size_t r = 0; r < n; ++r) (r < n_train ? d.train : r < n_train + n_val ? d.val : d.test).push_back(r);
    if (bins) discretize(d, *bins);
    return d;
}

/// Column types, e.g. "continuous" or "discrete(32)", one per CSV column.
/// An empty schema treats every column as continuous.
struct CsvSchema {
    std::vector<Column> columns;
};

/// Parses "name:continuous,name:discrete(m),..." (names optional).
inline CsvSchema parse_schema(const std::string &text) {
    CsvSchema s;
    if (text.empty()) return s;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        Column c;
        const auto colon = item.find(':');
        std::string type = colon == std::string::npos ? item : item.substr(colon + 1);
        if (colon != std::string::npos) c.name = item.substr(0, colon);
        if (type == "continuous") {
            c.kind = ColumnKind::Continuous;
        } else if (type.rfind("discrete(", 0) == 0 && type.back() == ')') {
            c.kind = ColumnKind::Discrete;
            try {
                c.states = std::stoi(type.substr(9, type.size() - 10));
            } catch (const std::exception &) {
                throw ConfigError("bad schema entry '" + item + "'");
            }
            if (c.states < 1) throw ConfigError("bad schema entry '" + item + "'");
        } else {
            throw ConfigError("bad schema entry '" + item + "'");
        }
        s.columns.push_back(c);
    }
    return s;
}

struct CsvOptions {
    bool standardize = false;
    double val_fraction = 0.1;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    for (auto &s : out) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }
    return out;
}

}  // namespace detail

/// Reads a CSV with a header row. Rows are split into train/val/test by a
/// seeded shuffle; standardization uses train-split statistics.
inline Dataset ingest_csv(const std::string &path, const CsvSchema &schema, const CsvOptions &opt = {}) {
    std::ifstream f(path);
    if (!f) throw IngestError("cannot open " + path, 0);
    std::string line;
    if (!std::getline(f, line)) throw IngestError("missing header row", 1);
    const auto header = detail::split_csv_line(line);
    Dataset d;
    if (!schema.columns.empty() && schema.columns.size() != header.size())
        throw IngestError("schema has " + std::to_string(schema.columns.size()) + " columns, header has " + std::to_string(header.size()), 1);
    for (std::size_t c = 0; c < header.size(); ++c) {
        Column col = schema.columns.empty() ? Column{} : schema.columns[c];
        if (!col.name.empty() && col.name != header[c]) throw IngestError("column '" + header[c] + "' does not match schema name '" + col.name + "'", 1);
        col.name = header[c];
        d.columns.push_back(col);
    }
    std::vector<double> values;
    std::size_t lineno = 1, n = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw IngestError("expected " + std::to_string(header.size()) + " fields, found " + std::to_string(cells.size()), lineno);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double v = 0.0;
            const auto *b = cells[c].data(), *e = b + cells[c].size();
            const auto [p, ec] = std::from_chars(b, e, v);
            if (ec != std::errc() || p != e || cells[c].empty() || !std::isfinite(v))
                throw IngestError("cannot parse '" + cells[c] + "' in column '" + header[c] + "'", lineno);
            const Column &col = d.columns[c];
            if (col.kind == ColumnKind::Discrete && (v != std::floor(v) || v < 0 || v >= col.states))
                throw IngestError("value " + cells[c] + " outside {0, ..., " + std::to_string(col.states - 1) + "}", lineno);
            values.push_back(v);
        }
        ++n;
    }
    if (n == 0) throw IngestError("no data rows", lineno);
    d.rows = Matrix(n, header.size(), std::move(values));
    if (opt.val_fraction < 0 || opt.test_fraction < 0 || opt.val_fraction + opt.test_fraction >= 1.0)
        throw ConfigError("split fractions must be >= 0 and sum to < 1");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(opt.seed);
    rng.shuffle(order);
    const auto n_val = static_cast<std::size_t>(std::floor(opt.val_fraction * static_cast<double>(n)));
    const auto n_test = static_cast<std::size_t>(std::floor(opt.test_fraction * static_cast<double>(n)));
    for (std::size_t i = 0; i < n; ++i) (i < n - n_val - n_test ? d.train : i < n - n_test ? d.val : d.test).push_back(order[i]);
    if (opt.standardize) {
        for (std::size_t c = 0; c < d.columns.size(); ++c) {
            Column &col = d.columns[c];
            if (col.kind != ColumnKind::Continuous) continue;
            double mean = 0.0, sq = 0.0;
            for (auto r : d.train) mean += d.rows(r, c);
            mean /= static_cast<double>(d.train.size());
            for (auto r : d.train) sq += (d.rows(r, c) - mean) * (d.rows(r, c) - mean);
            double sd = std::sqrt(sq / static_cast<double>(d.train.size()));
            if (!(sd > 0)) sd = 1.0;
            for (std::size_t r = 0; r < n; ++r) d.rows(r, c) = (d.rows(r, c) - mean) / sd;
            col.standardized = true;
            col.mean = mean;
            col.stddev = sd;
        }
    }
    return d;
}

/// Writes rows with a header; values at full float-64 precision.
inline void write_csv(const std::string &path, const std::vector<std::string> &header, const Matrix &rows) {
    std::ofstream f(path);
    if (!f) throw InvalidArgument("cannot write " + path);
    f.precision(17);
    for (std::size_t c = 0; c < header.size(); ++c) f << (c ? "," : "") << header[c];
    f << '\n';
    for (std::size_t r = 0; r < rows.rows(); ++r) {
        for (std::size_t c = 0; c < rows.cols(); ++c) f << (c ? "," : "") << rows(r, c);
        f << '\n';
    }
}

}  // namespace pcsq
