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

// Run configuration: an INI-style document ("[section]" headers, "key =
// value" lines, '#' or ';' comments) flattened to dotted keys, plus
// "key=value" overrides. Every key must be known; unset keys keep defaults.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pcsq/errors.hpp"

namespace pcsq {

class Config {
   public:
    /// Defaults for every accepted key.
    static const std::map<std::string, std::string> &defaults() {
        static const std::map<std::string, std::string> d = {
            {"seed", "0"},
            // data
            {"data.source", "synthetic"},  // synthetic | csv
            {"data.name", "rings"},
            {"data.n_train", "10000"},
            {"data.n_val", "1000"},
            {"data.n_test", "2000"},
            {"data.bins", "0"},  // 0 keeps continuous values
            {"data.path", ""},
            {"data.schema", ""},
            {"data.standardize", "true"},
            {"data.val_fraction", "0.1"},
            {"data.test_fraction", "0.2"},
            // model
            {"model.kind", "squared-nonmonotonic"},
            {"model.region_graph", "lt"},
            {"model.width", "8"},
            {"model.product", "hadamard"},
            {"model.family", "spline"},  // continuous columns: gaussian | spline
            {"model.discrete_family", "categorical"},  // categorical | binomial | embedding
            {"model.spline_degree", "2"},
            {"model.spline_knots", "32"},
            {"model.spline_margin", "0.05"},
            {"model.components", "1"},
            {"model.path", ""},  // eval / sample / grid: model document to load
            // train
            {"train.batch_size", "256"},
            {"train.learning_rate", "0.001"},
            {"train.max_epochs", "100"},
            {"train.patience", "3"},
            {"train.optimizer", "adam"},
            {"train.init", "uniform(0,1)"},
            {"train.l2", "0"},
            {"train.chunk_size", "256"},
            // eval / sample / grid
            {"eval.split", "test"},  // train | val | test
            {"sample.count", "1000"},
            {"grid.resolution", "100"},
            {"grid.margin", "0.1"},
            // reductions
            {"psd.path", ""},
            {"psd.anchors", "5"},
            {"psd.dimensions", "2"},
            {"psd.bandwidth", "1"},
            {"psd.points", "100"},
            {"mps.path", ""},
            {"mps.variables", "4"},
            {"mps.states", "2"},
            {"mps.rank", "2"},
            {"mps.cp_rank", "0"},  // 0 selects min(r^2, m r)
            {"mps.restarts", "5"},
            {"mps.max_iterations", "2000"},
            {"mps.tolerance", "1e-10"},
            {"udisj.graph", ""},
            // bench
            {"bench.widths", "32,64,128"},
            {"bench.batch_sizes", "64,256,1024"},
            {"bench.steps", "3"},
            {"bench.log_variables", "2,4,8,16,32,64,128"},
            {"bench.log_width", "2"},
            {"bench.log_sigma", "0.0001"},
        };
        return d;
    }

    Config() : values_(defaults()) {}

    /// Reads an INI document; relative paths in *.path / *.graph keys are
    /// resolved against the document's directory.
    void load_file(const std::string &path) {
        boost::property_tree::ptree tree;
        try {
            boost::property_tree::ini_parser::read_ini(path, tree);
        } catch (const boost::property_tree::ini_parser_error &e) {
            throw ConfigError(e.what());
        }
        const auto base = std::filesystem::absolute(path).parent_path();
        for (const auto &[section, node] : tree) {
            if (node.empty()) {
                assign(section, node.data(), base);
                continue;
            }
            if (!node.data().empty()) throw ConfigError("config: '" + section + "' is both a section and a key");
            for (const auto &[key, leaf] : node) assign(section + "." + key, leaf.data(), base);
        }
    }

    /// Applies "key=value"; relative paths resolve against the working directory.
    void set(const std::string &assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
        assign(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), std::filesystem::current_path());
    }

    const std::string &str(const std::string &key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("config: unknown key '" + key + "'");
        return it->second;
    }

    long long integer(const std::string &key) const {
        const std::string &s = str(key);
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(s, &pos);
            if (pos == s.size()) return v;
        } catch (const std::exception &) {
        }
        throw ConfigError("config: '" + key + "' must be an integer, got '" + s + "'");
    }

    long long positive(const std::string &key) const {
        const long long v = integer(key);
        if (v < 1) throw ConfigError("config: '" + key + "' must be >= 1");
        return v;
    }

    std::uint64_t seed() const {
        const long long v = integer("seed");
        if (v < 0) throw ConfigError("config: 'seed' must be >= 0");
        return static_cast<std::uint64_t>(v);
    }

    double real(const std::string &key) const {
        const std::string &s = str(key);
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos == s.size()) return v;
        } catch (const std::exception &) {
        }
        throw ConfigError("config: '" + key + "' must be a number, got '" + s + "'");
    }

    bool flag(const std::string &key) const {
        const std::string &s = str(key);
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw ConfigError("config: '" + key + "' must be true or false, got '" + s + "'");
    }

    std::vector<long long> integer_list(const std::string &key) const {
        std::vector<long long> out;
        std::stringstream ss(str(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            try {
                std::size_t pos = 0;
                const long long v = std::stoll(item, &pos);
                if (pos != item.size() || v < 1) throw std::invalid_argument(item);
                out.push_back(v);
            } catch (const std::exception &) {
                throw ConfigError("config: '" + key + "' must be a comma-separated list of positive integers");
            }
        }
        if (out.empty()) throw ConfigError("config: '" + key + "' is empty");
        return out;
    }

    const std::map<std::string, std::string> &values() const { return values_; }

   private:
    static std::string trim(const std::string &s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static bool is_path_key(const std::string &key) {
        return key.ends_with(".path") || key == "udisj.graph";
    }

    void assign(const std::string &key, std::string value, const std::filesystem::path &base) {
        if (!values_.contains(key)) throw ConfigError("config: unknown key '" + key + "'");
        value = trim(value);
        if (is_path_key(key) && !value.empty()) value = (base / value).lexically_normal().string();
        values_[key] = value;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace pcsq
