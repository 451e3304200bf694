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

// Command drivers behind the pcsq executable. Each command reads a Config,
// writes its artifacts under an output directory and reports through the
// exit code of the error it raised (0 on success).

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcsq/config.hpp"
#include "pcsq/dataset.hpp"
#include "pcsq/learning.hpp"
#include "pcsq/model.hpp"
#include "pcsq/model_io.hpp"
#include "pcsq/reductions.hpp"

namespace pcsq::cli {

inline const std::vector<std::string> &commands() {
    static const std::vector<std::string> c = {"train", "eval", "sample", "grid", "reduce-psd", "reduce-mps", "udisj", "bench"};
    return c;
}

/// Dataset described by the data.* keys.
inline Dataset load_dataset(const Config &cfg) {
    const std::string &source = cfg.str("data.source");
    Dataset d;
    if (source == "synthetic") {
        const long long bins = cfg.integer("data.bins");
        if (bins < 0) throw ConfigError("config: 'data.bins' must be >= 0");
        d = generate_synthetic(cfg.str("data.name"), static_cast<std::size_t>(cfg.positive("data.n_train")),
                               static_cast<std::size_t>(cfg.positive("data.n_val")), static_cast<std::size_t>(cfg.positive("data.n_test")),
                               cfg.seed(), bins > 0 ? std::optional<int>(static_cast<int>(bins)) : std::nullopt);
    } else if (source == "csv") {
        if (cfg.str("data.path").empty()) throw ConfigError("config: 'data.path' is required for csv data");
        CsvOptions opt;
        opt.standardize = cfg.flag("data.standardize");
        opt.val_fraction = cfg.real("data.val_fraction");
        opt.test_fraction = cfg.real("data.test_fraction");
        opt.seed = cfg.seed();
        d = ingest_csv(cfg.str("data.path"), parse_schema(cfg.str("data.schema")), opt);
    } else {
        throw ConfigError("config: 'data.source' must be synthetic or csv");
    }
    return d;
}

/// Model structure for a dataset: continuous columns use model.family, with
/// spline intervals spanning all rows plus model.spline_margin of the range on
/// each side; discrete columns use model.discrete_family over their states.
inline ModelSpec model_spec_for(const Dataset &d, const Config &cfg) {
    ModelSpec spec;
    spec.kind = model_kind_from_string(cfg.str("model.kind"));
    spec.region_graph = cfg.str("model.region_graph");
    spec.width = static_cast<std::size_t>(cfg.positive("model.width"));
    spec.product = product_from_string(cfg.str("model.product"));
    spec.components = static_cast<int>(cfg.positive("model.components"));
    const FamilyKind cont = family_from_string(cfg.str("model.family"));
    const FamilyKind disc = family_from_string(cfg.str("model.discrete_family"));
    if (cont != FamilyKind::Gaussian && cont != FamilyKind::Spline) throw ConfigError("config: 'model.family' must be gaussian or spline");
    if (disc == FamilyKind::Gaussian || disc == FamilyKind::Spline)
        throw ConfigError("config: 'model.discrete_family' must be categorical, binomial or embedding");
    const double margin = cfg.real("model.spline_margin");
    if (margin < 0) throw ConfigError("config: 'model.spline_margin' must be >= 0");
    spec.families.clear();
    for (std::size_t c = 0; c < d.columns.size(); ++c) {
        FamilySpec f;
        if (d.columns[c].kind == ColumnKind::Discrete) {
            f.kind = disc;
            f.states = d.columns[c].states;
            f.trials = d.columns[c].states - 1;
        } else {
            f.kind = cont;
            f.spline_degree = static_cast<int>(cfg.positive("model.spline_degree"));
            f.spline_knots = static_cast<int>(cfg.integer("model.spline_knots"));
            double lo = d.rows(0, c), hi = d.rows(0, c);
            for (std::size_t r = 0; r < d.size(); ++r) {
                lo = std::min(lo, d.rows(r, c));
                hi = std::max(hi, d.rows(r, c));
            }
            const double pad = std::max(hi - lo, 1e-6) * margin;
            f.lower = lo - pad;
            f.upper = hi + pad;
        }
        spec.families.push_back(f);
    }
    return spec;
}

inline TrainConfig train_config(const Config &cfg) {
    TrainConfig t;
    t.batch_size = static_cast<std::size_t>(cfg.positive("train.batch_size"));
    t.learning_rate = cfg.real("train.learning_rate");
    t.max_epochs = static_cast<int>(cfg.integer("train.max_epochs"));
    t.patience = static_cast<int>(cfg.integer("train.patience"));
    t.optimizer = optimizer_from_string(cfg.str("train.optimizer"));
    t.init = parse_init_scheme(cfg.str("train.init"));
    t.seed = cfg.seed();
    t.l2 = cfg.real("train.l2");
    t.chunk_size = static_cast<std::size_t>(cfg.positive("train.chunk_size"));
    try {
        t.validate();
    } catch (const InvalidArgument &e) {
        throw ConfigError(e.what());
    }
    return t;
}

inline std::vector<std::string> column_names(const std::vector<Column> &cols, int variables) {
    std::vector<std::string> out;
    for (int v = 0; v < variables; ++v)
        out.push_back(static_cast<std::size_t>(v) < cols.size() && !cols[static_cast<std::size_t>(v)].name.empty() ? cols[static_cast<std::size_t>(v)].name
                                                                                                                   : "x" + std::to_string(v + 1));
    return out;
}

inline ModelDocument load_model(const Config &cfg) {
    if (cfg.str("model.path").empty()) throw ConfigError("config: 'model.path' is required");
    return read_model(cfg.str("model.path"));
}

inline std::ofstream open_out(const std::filesystem::path &p) {
    std::ofstream f(p);
    if (!f) throw InvalidArgument("cannot write " + p.string());
    f.precision(17);
    return f;
}

struct LlSummary {
    double mean = 0.0;
    double two_se = 0.0;
};

/// Mean log-likelihood and two standard errors of the mean.
inline LlSummary summarize(const std::vector<double> &ll) {
    LlSummary s;
    const double n = static_cast<double>(ll.size());
    for (double v : ll) s.mean += v;
    s.mean /= n;
    double ss = 0.0;
    for (double v : ll) ss += (v - s.mean) * (v - s.mean);
    s.two_se = ll.size() > 1 ? 2.0 * std::sqrt(ss / (n - 1.0) / n) : 0.0;
    return s;
}

inline int cmd_train(const Config &cfg, const std::filesystem::path &out, std::ostream &log) {
    const Dataset d = load_dataset(cfg);
    const TrainConfig tc = train_config(cfg);
    Model m = build_model(static_cast<int>(d.variable_count()), model_spec_for(d, cfg), cfg.seed());
    const TrainReport rep = train(m, d.train_rows(), d.val_rows(), tc, [&](const EpochRecord &e) {
        log << "epoch " << e.epoch << " train_ll " << e.train_ll << " val_ll " << e.val_ll << '\n';
    });
    write_model((out / "model.json").string(), m, d.columns);
    rep.write_csv((out / "train_report.csv").string());
    log << "best epoch " << rep.best_epoch << " val_ll " << rep.best_val_ll << '\n';
    return 0;
}

inline const std::vector<std::size_t> &split_of(const Dataset &d, const std::string &name) {
    if (name == "train") return d.train;
    if (name == "val") return d.val;
    if (name == "test") return d.test;
    throw ConfigError("config: 'eval.split' must be train, val or test");
}

inline int cmd_eval(const Config &cfg, const std::filesystem::path &out, std::ostream &log) {
    const ModelDocument doc = load_model(cfg);
    const Dataset d = load_dataset(cfg);
    const std::string &split = cfg.str("eval.split");
    const Matrix rows = d.split(split_of(d, split));
    if (static_cast<int>(rows.cols()) != doc.model.variable_count()) throw InvalidArgument("eval: dataset and model variable counts differ");
    const LlSummary s = summarize(doc.model.log_density(rows));
    auto f = open_out(out / "metrics.csv");
    f << "split,rows,mean_ll,two_se\n" << split << ',' << rows.rows() << ',' << s.mean << ',' << s.two_se << '\n';
    log << split << " mean_ll " << s.mean << " +- " << s.two_se << '\n';
    return 0;
}

inline int cmd_sample(const Config &cfg, const std::filesystem::path &out, std::ostream &log) {
    const ModelDocument doc = load_model(cfg);
    Rng rng(cfg.seed());
    const Matrix s = doc.model.sample(static_cast<std::size_t>(cfg.positive("sample.count")), rng);
    write_csv((out / "samples.csv").string(), column_names(doc.columns, doc.model.variable_count()), s);
    log << "wrote " << s.rows() << " samples\n";
    return 0;
}

/// Interval covered along one variable: the spline interval, the state range
/// of a discrete family, or mean +- (3 sigma + margin) over Gaussian units.
inline std::pair<double, double> grid_range(const Model &m, int v, double margin) {
    const auto [lo, hi] = detail::variable_bracket(m.density(0), v);
    const Layer &l = detail::input_layer_of(m.components()[0], v);
    if (l.family.kind() != FamilyKind::Gaussian) return {lo, hi};
    const Matrix eff = m.params().effective(l.param);
    double a = eff(0, 0), b = eff(0, 0);
    for (std::size_t i = 0; i < eff.rows(); ++i) {
        a = std::min(a, eff(i, 0) - 3.0 * std::exp(eff(i, 1)));
        b = std::max(b, eff(i, 0) + 3.0 * std::exp(eff(i, 1)));
    }
    const double pad = (b - a) * margin;
    return {a - pad, b + pad};
}

inline int cmd_grid(const Config &cfg, const std::filesystem::path &out, std::ostream &log) {
    const ModelDocument doc = load_model(cfg);
    const Model &m = doc.model;
    if (m.variable_count() != 2) throw ConfigError("grid: the model must have exactly two variables");
    const auto res = static_cast<std::size_t>(cfg.positive("grid.resolution"));
    const double margin = cfg.real("grid.margin");
    std::vector<std::vector<double>> axes(2);
    for (int v = 0; v < 2; ++v) {
        const Layer &l = detail::input_layer_of(m.components()[0], v);
        if (l.family.discrete()) {
            for (int k = 0; k < l.family.support_size(); ++k) axes[static_cast<std::size_t>(v)].push_back(static_cast<double>(k));
            continue;
        }
        const auto [lo, hi] = grid_range(m, v, margin);
        for (std::size_t i = 0; i < res; ++i)
            axes[static_cast<std::size_t>(v)].push_back(res == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(res - 1));
    }
    Matrix pts(axes[0].size() * axes[1].size(), 3);
    Matrix x(pts.rows(), 2);
    for (std::size_t i = 0; i < axes[0].size(); ++i)
        for (std::size_t j = 0; j < axes[1].size(); ++j) {
            x(i * axes[1].size() + j, 0) = axes[0][i];
            x(i * axes[1].size() + j, 1) = axes[1][j];
        }
    // Rows where the density vanishes get -inf instead of aborting.
    const double lz = m.log_normalizer();
    const auto lp = m.log_mixture_weights();
    std::vector<double> ld(x.rows(), kNegInf);
    for (std::size_t c = 0; c < m.components().size(); ++c) {
        const SignedLogTensor y = evaluate(m.density(c), x);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const auto v = y.at(r, 0);
            if (v.sign > 0) ld[r] = detail::log_sum_exp({ld[r], lp[c] + v.log_mag});
        }
    }
    for (std::size_t r = 0; r < x.rows(); ++r) {
        pts(r, 0) = x(r, 0);
        pts(r, 1) = x(r, 1);
        pts(r, 2) = ld[r] - lz;
    }
    auto names = column_names(doc.columns, 2);
    names.push_back("log_density");
    write_csv((out / "grid.csv").string(), names, pts);
    log << "wrote " << pts.rows() << " grid points\n";
    return 0;
}

/// PSD model from psd.path (JSON {"anchors": [[..]..], "bandwidth": h,
/// "A": [[..]..]}) or a seeded random one: standard normal anchors and
/// A = L L^T with standard normal L.
inline PsdModel psd_model(const Config &cfg) {
    PsdModel p;
    if (!cfg.str("psd.path").empty()) {
        std::ifstream f(cfg.str("psd.path"));
        if (!f) throw IngestError("cannot open " + cfg.str("psd.path"), 0);
        try {
            const auto j = nlohmann::json::parse(f);
            const auto anchors = j.at("anchors").get<std::vector<std::vector<double>>>();
            const auto a = j.at("A").get<std::vector<std::vector<double>>>();
            if (anchors.empty() || anchors[0].empty()) throw IngestError("psd: no anchors", 0);
            p.anchors = Matrix(anchors.size(), anchors[0].size());
            for (std::size_t i = 0; i < anchors.size(); ++i) {
                if (anchors[i].size() != p.anchors.cols()) throw IngestError("psd: ragged anchors", 0);
                for (std::size_t k = 0; k < anchors[i].size(); ++k) p.anchors(i, k) = anchors[i][k];
            }
            p.a = Matrix(a.size(), a.empty() ? 0 : a[0].size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (a[i].size() != p.a.cols()) throw IngestError("psd: ragged A", 0);
                for (std::size_t k = 0; k < a[i].size(); ++k) p.a(i, k) = a[i][k];
            }
            p.bandwidth = j.at("bandwidth").get<double>();
        } catch (const nlohmann::json::exception &e) {
            throw IngestError(std::string("psd: ") + e.what(), 0);
        }
        return p;
    }
    const auto d = static_cast<std::size_t>(cfg.positive("psd.anchors"));
    const auto D = static_cast<std::size_t>(cfg.positive("psd.dimensions"));
    Rng rng(derive_seed(cfg.seed(), 1));
    p.anchors = Matrix(d, D);
    for (double &v : p.anchors.values()) v = rng.normal();
    Matrix l(d, d);
    for (double &v : l.values()) v = rng.normal();
    p.a = matmul_nt(l.view(), l.view());
    p.bandwidth = cfg.real("psd.bandwidth");
    return p;
}

inline int cmd_reduce_psd(const Config &cfg, const std::filesystem::path &out, std::ostream &log) {
    const PsdModel p = psd_model(cfg);
    const PsdReduction red = psd_to_circuit(p);
    const std::size_t D = p.anchors.cols();
    const auto n = static_cast<std::size_t>(cfg.positive("psd.points"));
    Rng rng(derive_seed(cfg.seed(), 2));
    Matrix x(n, D);
    for (double &v : x.values()) v = rng.normal();
    const double lz = red.model.log_normalizer();
    const auto ld = red.model.log_density(x);
    auto f = open_out(out / "verification.csv");
    f << "point,direct,circuit,rel_error\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double direct = psd_value(p, std::span<const double>(&x(i, 0), D));
        const double circ = std::exp(ld[i] + lz);
        const double rel = std::abs(circ - direct) / std::abs(direct);
        worst = std::max(worst, rel);
        f << i << ',' << direct << ',' << circ << ',' << rel << '\n';
    }
    write_model((out / "model.json").string(), red.model);
    log << "rank " << red.rank << " max rel error " << worst << '\n';
    return 0;
}

inline int cmd_reduce_mps(const Config &cfg, const std::filesystem::path &out, std::ostream &log) {
    const MpsFactorization mps =
        cfg.str("mps.path").empty()
            ? MpsFactorization::random(static_cast<std::size_t>(cfg.positive("mps.variables")), static_cast<std::size_t>(cfg.positive("mps.states")),
                                       static_cast<std::size_t>(cfg.positive("mps.rank")), derive_seed(cfg.seed(), 1))
            : read_mps(cfg.str("mps.path"));
    CpConfig cp;
    cp.restarts = static_cast<int>(cfg.positive("mps.restarts"));
    cp.max_iterations = static_cast<int>(cfg.positive("mps.max_iterations"));
    cp.tolerance = cfg.real("mps.tolerance");
    cp.seed = derive_seed(cfg.seed(), 2);
    const long long k = cfg.integer("mps.cp_rank");
    if (k < 0) throw ConfigError("config: 'mps.cp_rank' must be >= 0");
    MpsReduction red = mps_to_circuit(mps, static_cast<std::size_t>(k), cp);
    const SquaredCircuit born = square(red.circuit);
    // Every assignment when there are at most 2^16, otherwise 2^16 random ones.
    const double total = std::pow(static_cast<double>(mps.m), static_cast<double>(mps.d));
    const bool exhaustive = total <= 65536.0;
    const std::size_t n = exhaustive ? static_cast<std::size_t>(total) : 65536;
    Matrix x(n, mps.d);
    Rng rng(derive_seed(cfg.seed(), 3));
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t code = i;
        for (std::size_t v = mps.d; v-- > 0;) {
            x(i, v) = exhaustive ? static_cast<double>(code % mps.m) : static_cast<double>(rng.index(mps.m));
            code /= mps.m;
        }
    }
    const SignedLogTensor c = evaluate(red.circuit, x), c2 = evaluate(born, x);
    auto f = open_out(out / "verification.csv");
    f << "assignment,direct,circuit,abs_error,born_direct,born_circuit\n";
    double worst = 0.0;
    std::vector<int> xi(mps.d);
    for (std::size_t i = 0; i < n; ++i) {
        std::string label;
        for (std::size_t v = 0; v < mps.d; ++v) {
            xi[v] = static_cast<int>(x(i, v));
            label += (v ? " " : "") + std::to_string(xi[v]);
        }
        const double t = mps_value(mps, xi), ci = c.at(i, 0).value();
        worst = std::max(worst, std::abs(t - ci));
        f << label << ',' << t << ',' << ci << ',' << std::abs(t - ci) << ',' << t * t << ',' << c2.at(i, 0).value() << '\n';
    }
    const Model m(ModelKind::SquaredNonMonotonic, red.circuit.store_ptr(), {red.circuit});
    write_model((out / "model.json").string(), m);
    log << "max abs error " << worst;
    for (double e : red.cp_errors) log << " cp " << e;
    log << '\n';
    return 0;
}

inline std::string bits(const std::vector<int> &a) {
    std::string s;
    for (int b : a) s += static_cast<char>('0' + b);
    return s;
}

inline int cmd_udisj(const Config &cfg, const std::filesystem::path &out, std::ostream &log) {
    if (cfg.str("udisj.graph").empty()) throw ConfigError("config: 'udisj.graph' is required");
    const Graph g = read_graph(cfg.str("udisj.graph"));
    if (g.vertices > 16) throw ConfigError("udisj: communication matrix limited to 16 vertices");
    const auto [c, sq] = udisj_circuit(g);
    const CommunicationMatrix cm = communication_matrix(sq.circuit);
    auto f = open_out(out / "communication_matrix.csv");
    f << "Y\\Z";
    for (const auto &z : cm.col_labels) f << ',' << bits(z);
    f << '\n';
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < cm.row_labels.size(); ++i) {
        f << bits(cm.row_labels[i]);
        for (std::size_t j = 0; j < cm.col_labels.size(); ++j) {
            const double v = cm.values(i, j);
            f << ',' << static_cast<long long>(std::llround(v));
            zeros += v == 0.0;
        }
        f << '\n';
    }
    log << cm.row_labels.size() << "x" << cm.col_labels.size() << " matrix, " << zeros << " zeros\n";
    return 0;
}

inline long peak_rss_kb() {
    rusage u{};
    getrusage(RUSAGE_SELF, &u);
    return u.ru_maxrss;
}

struct LogspaceRow {
    int variables = 0;
    double log_z = 0.0;
    double linear_z = 0.0;
    bool overflow = false;
};

/// Squared Gaussian circuit over a binary-tree region graph of depth
/// ceil(log2 V): log Z in signed log-space against the float-64 linear path.
inline LogspaceRow logspace_point(int variables, std::size_t width, double sigma, std::uint64_t seed) {
    CircuitOptions opt;
    opt.width = width;
    opt.families = {FamilySpec{FamilyKind::Gaussian}};
    TensorizedCircuit c = from_region_graph(build_binary_tree(variables, seed), opt);
    init_parameters(c.params(), InitScheme{InitScheme::Kind::Uniform, 0.0, 1.0}, derive_seed(seed, 1));
    for (const auto &l : c.layers()) {
        if (l.kind != LayerKind::Input) continue;
        auto p = c.params().mutable_free(l.param);
        for (std::size_t i = 0; i < l.width; ++i) p[i * 2 + 1] = std::log(sigma);
    }
    const SquaredCircuit sq = square(c);
    LogspaceRow row;
    row.variables = variables;
    const std::vector<char> all(static_cast<std::size_t>(variables), 1);
    row.log_z = forward(sq.circuit, Matrix(1, static_cast<std::size_t>(variables)), all).output().at(0, 0).log_mag;
    row.linear_z = evaluate_linear(sq.circuit, Matrix(1, static_cast<std::size_t>(variables)), all)(0, 0);
    row.overflow = !std::isfinite(row.linear_z);
    return row;
}

inline int cmd_bench(const Config &cfg, const std::filesystem::path &out, std::ostream &log) {
    const Dataset d = load_dataset(cfg);
    const ModelSpec base = model_spec_for(d, cfg);
    TrainConfig tc = train_config(cfg);
    const long long steps = cfg.positive("bench.steps");
    const Matrix rows = d.train_rows();
    auto f = open_out(out / "bench.csv");
    f << "width,batch_size,steps,seconds_per_step,z_evaluations_per_step,peak_rss_kb\n";
    for (long long k : cfg.integer_list("bench.widths")) {
        for (long long b : cfg.integer_list("bench.batch_sizes")) {
            ModelSpec spec = base;
            spec.width = static_cast<std::size_t>(k);
            Model m = build_model(static_cast<int>(d.variable_count()), spec, cfg.seed());
            init_parameters(m.params(), tc.init, derive_seed(cfg.seed(), 0));
            tc.batch_size = static_cast<std::size_t>(b);
            Optimizer opt(tc.optimizer, tc.learning_rate);
            const std::uint64_t z0 = m.z_evaluations();
            const auto t0 = std::chrono::steady_clock::now();
            for (long long s = 0; s < steps; ++s) {
                std::vector<std::size_t> idx(static_cast<std::size_t>(b));
                for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = (static_cast<std::size_t>(s * b) + i) % rows.rows();
                train_step(m, detail::gather_rows(rows, idx, 0, idx.size()), opt, tc);
            }
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            const double zps = static_cast<double>(m.z_evaluations() - z0) / static_cast<double>(steps);
            f << k << ',' << b << ',' << steps << ',' << secs / static_cast<double>(steps) << ',' << zps << ',' << peak_rss_kb() << '\n';
            log << "K=" << k << " B=" << b << " " << secs / static_cast<double>(steps) << " s/step, Z evaluations/step " << zps << '\n';
        }
    }
    auto g = open_out(out / "bench_logspace.csv");
    g << "variables,depth,log_z,linear_z,linear_overflow\n";
    int crossover = -1;
    for (long long v : cfg.integer_list("bench.log_variables")) {
        const LogspaceRow r = logspace_point(static_cast<int>(v), static_cast<std::size_t>(cfg.positive("bench.log_width")), cfg.real("bench.log_sigma"),
                                             derive_seed(cfg.seed(), 3));
        if (r.overflow && crossover < 0) crossover = r.variables;
        g << r.variables << ',' << static_cast<int>(std::ceil(std::log2(static_cast<double>(v)))) << ',' << r.log_z << ',' << r.linear_z << ','
          << (r.overflow ? 1 : 0) << '\n';
    }
    log << "linear-space overflow from V=" << crossover << '\n';
    return 0;
}

/// Runs one command; errors propagate as exceptions.
inline int run(const std::string &command, const Config &cfg, const std::filesystem::path &out, std::ostream &log) {
    std::filesystem::create_directories(out);
    if (command == "train") return cmd_train(cfg, out, log);
    if (command == "eval") return cmd_eval(cfg, out, log);
    if (command == "sample") return cmd_sample(cfg, out, log);
    if (command == "grid") return cmd_grid(cfg, out, log);
    if (command == "reduce-psd") return cmd_reduce_psd(cfg, out, log);
    if (command == "reduce-mps") return cmd_reduce_mps(cfg, out, log);
    if (command == "udisj") return cmd_udisj(cfg, out, log);
    if (command == "bench") return cmd_bench(cfg, out, log);
    throw ConfigError("unknown command '" + command + "'");
}

/// run() with errors mapped to exit codes and reported on `err`.
inline int run_guarded(const std::string &command, const Config &cfg, const std::filesystem::path &out, std::ostream &log, std::ostream &err) {
    try {
        return run(command, cfg, out, log);
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace pcsq::cli
