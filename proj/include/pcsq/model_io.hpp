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

// JSON model document: parameter blocks, component circuits (layers and
// region graphs), the model kind and optional dataset column metadata.

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pcsq/dataset.hpp"
#include "pcsq/errors.hpp"
#include "pcsq/model.hpp"

namespace pcsq {

inline constexpr int kModelFormatVersion = 1;

struct ModelDocument {
    Model model;
    std::vector<Column> columns;
};

namespace detail {

using nlohmann::json;

inline json family_to_json(const FamilySpec &f) {
    return {{"kind", to_string(f.kind)}, {"states", f.states},  {"trials", f.trials},       {"spline_degree", f.spline_degree},
            {"spline_knots", f.spline_knots}, {"lower", f.lower}, {"upper", f.upper}, {"monotonic", f.monotonic}};
}

inline FamilySpec family_from_json(const json &j) {
    FamilySpec f;
    f.kind = family_from_string(j.at("kind").get<std::string>());
    f.states = j.at("states").get<int>();
    f.trials = j.at("trials").get<int>();
    f.spline_degree = j.at("spline_degree").get<int>();
    f.spline_knots = j.at("spline_knots").get<int>();
    f.lower = j.at("lower").get<double>();
    f.upper = j.at("upper").get<double>();
    f.monotonic = j.at("monotonic").get<bool>();
    return f;
}

inline json region_graph_to_json(const RegionGraph &rg) {
    json nodes = json::array();
    for (const auto &n : rg.nodes())
        nodes.push_back({{"kind", n.kind == RgNodeKind::Region ? "region" : "partition"}, {"scope", n.scope.vars()}, {"parent", n.parent}});
    return {{"variables", rg.variable_count()}, {"nodes", nodes}};
}

inline RegionGraph region_graph_from_json(const json &j) {
    RegionGraph rg(j.at("variables").get<int>());
    for (const auto &n : j.at("nodes")) {
        const std::string kind = n.at("kind").get<std::string>();
        const int parent = n.at("parent").get<int>();
        if (kind == "region") {
            rg.add_region(Scope(n.at("scope").get<std::vector<int>>()), parent);
        } else if (kind == "partition") {
            if (parent < 0 || parent >= static_cast<int>(rg.nodes().size())) throw InvalidArgument("model document: dangling partition");
            rg.add_partition(parent);
        } else {
            throw InvalidArgument("model document: unknown region graph node '" + kind + "'");
        }
    }
    return rg;
}

inline json circuit_to_json(const TensorizedCircuit &c) {
    json layers = json::array();
    for (const auto &l : c.layers()) {
        json o = {{"kind", to_string(l.kind)}, {"width", l.width}, {"inputs", l.inputs}, {"param", l.param},
                  {"squared", l.squared}, {"region", l.region}};
        if (l.kind == LayerKind::Input) {
            o["variable"] = l.variable;
            o["family"] = family_to_json(l.family.spec());
        }
        if (!l.permutation.empty()) o["permutation"] = l.permutation;
        layers.push_back(std::move(o));
    }
    json out = {{"variables", c.variable_count()}, {"output", c.output()}, {"layers", layers}};
    if (c.region_graph()) out["region_graph"] = region_graph_to_json(*c.region_graph());
    return out;
}

inline TensorizedCircuit circuit_from_json(const json &j, std::shared_ptr<ParameterStore> store) {
    TensorizedCircuit c(j.at("variables").get<int>(), std::move(store));
    for (const auto &o : j.at("layers")) {
        const LayerKind kind = layer_kind_from_string(o.at("kind").get<std::string>());
        const bool squared = o.at("squared").get<bool>();
        const auto inputs = o.at("inputs").get<std::vector<int>>();
        int id = -1;
        switch (kind) {
            case LayerKind::Input:
                id = c.add_input_with(o.at("variable").get<int>(), InputFamily(family_from_json(o.at("family"))), o.at("width").get<std::size_t>(),
                                      o.at("param").get<int>(), squared);
                break;
            case LayerKind::Sum:
                if (inputs.size() != 1) throw InvalidArgument("model document: sum layer needs one input");
                id = c.add_sum_with(inputs[0], o.at("param").get<int>(), squared);
                break;
            case LayerKind::Hadamard:
            case LayerKind::Kronecker:
                id = c.add_product(kind == LayerKind::Hadamard ? ProductKind::Hadamard : ProductKind::Kronecker, inputs, squared,
                                   o.value("permutation", std::vector<std::uint32_t>{}));
                break;
        }
        if (c.layer(id).width != o.at("width").get<std::size_t>()) throw InvalidArgument("model document: layer width mismatch");
        c.set_region(id, o.at("region").get<int>());
    }
    c.set_output(j.at("output").get<int>());
    if (j.contains("region_graph")) c.set_region_graph(region_graph_from_json(j.at("region_graph")));
    return c;
}

}  // namespace detail

inline nlohmann::json model_to_json(const Model &m, const std::vector<Column> &columns = {}) {
    using nlohmann::json;
    json blocks = json::array();
    const ParameterStore &s = m.params();
    for (int b = 0; b < static_cast<int>(s.blocks().size()); ++b) {
        const auto &blk = s.block(b);
        const auto v = s.free(b);
        blocks.push_back({{"rows", blk.rows}, {"cols", blk.cols}, {"reparam", to_string(blk.reparam)}, {"trainable", blk.trainable},
                          {"values", std::vector<double>(v.begin(), v.end())}});
    }
    json comps = json::array();
    for (const auto &c : m.components()) comps.push_back(detail::circuit_to_json(c));
    json cols = json::array();
    for (const auto &c : columns)
        cols.push_back({{"name", c.name}, {"kind", c.kind == ColumnKind::Continuous ? "continuous" : "discrete"}, {"states", c.states},
                        {"standardized", c.standardized}, {"mean", c.mean}, {"stddev", c.stddev}});
    return {{"format_version", kModelFormatVersion}, {"kind", to_string(m.kind())},       {"mixture_block", m.mixture_block()},
            {"head_block", m.head_block()},          {"parameters", blocks},              {"components", comps},
            {"columns", cols}};
}

inline ModelDocument model_from_json(const nlohmann::json &j) {
    try {
        if (j.at("format_version").get<int>() != kModelFormatVersion) throw InvalidArgument("model document: unsupported format_version");
        auto store = std::make_shared<ParameterStore>();
        std::vector<double> values;
        for (const auto &b : j.at("parameters")) {
            const auto v = b.at("values").get<std::vector<double>>();
            const auto rows = b.at("rows").get<std::size_t>(), cols = b.at("cols").get<std::size_t>();
            if (v.size() != rows * cols) throw InvalidArgument("model document: block size mismatch");
            store->add_block(rows, cols, reparam_from_string(b.at("reparam").get<std::string>()), b.at("trainable").get<bool>());
            values.insert(values.end(), v.begin(), v.end());
        }
        store->set_values(values);
        std::vector<TensorizedCircuit> comps;
        for (const auto &c : j.at("components")) comps.push_back(detail::circuit_from_json(c, store));
        ModelDocument doc;
        doc.model = Model(model_kind_from_string(j.at("kind").get<std::string>()), store, std::move(comps), j.at("mixture_block").get<int>(),
                          j.at("head_block").get<int>());
        for (const auto &c : j.value("columns", nlohmann::json::array())) {
            Column col;
            col.name = c.at("name").get<std::string>();
            col.kind = c.at("kind").get<std::string>() == "discrete" ? ColumnKind::Discrete : ColumnKind::Continuous;
            col.states = c.at("states").get<int>();
            col.standardized = c.at("standardized").get<bool>();
            col.mean = c.at("mean").get<double>();
            col.stddev = c.at("stddev").get<double>();
            doc.columns.push_back(std::move(col));
        }
        return doc;
    } catch (const nlohmann::json::exception &e) {
        throw InvalidArgument(std::string("model document: ") + e.what());
    }
}

inline void write_model(const std::string &path, const Model &m, const std::vector<Column> &columns = {}) {
    std::ofstream f(path);
    if (!f) throw InvalidArgument("cannot write " + path);
    f << model_to_json(m, columns).dump(1) << '\n';
}

inline ModelDocument read_model(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw IngestError("cannot open " + path, 0);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error &e) {
        throw IngestError(std::string("model document is not valid JSON: ") + e.what(), 0);
    }
    try {
        return model_from_json(j);
    } catch (const InvalidArgument &e) {
        throw IngestError(e.what(), 0);
    }
}

}  // namespace pcsq
