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

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pcsq/cli.hpp"
#include "pcsq/pcsq.hpp"

using namespace pcsq;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / ("pcsq_test_cli_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

void write_file(const fs::path &p, const std::string &text) {
    std::ofstream f(p);
    f << text;
}

std::string read_file(const fs::path &p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::string> lines(const fs::path &p) {
    std::vector<std::string> out;
    std::ifstream f(p);
    for (std::string l; std::getline(f, l);) out.push_back(l);
    return out;
}

/// Runs the pcsq binary and returns its exit status.
int pcsq_cli(const std::string &args) {
    const std::string cmd = std::string(PCSQ_CLI_PATH) + " " + args + " > " + (workdir() / "stdout.txt").string() + " 2> " +
                            (workdir() / "stderr.txt").string();
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char *kSmallTrain = R"([data]
name = rings
n_train = 400
n_val = 100
n_test = 100

[model]
width = 3
spline_knots = 8

[train]
max_epochs = 3
batch_size = 64
learning_rate = 0.01
)";

}  // namespace

TEST(Config, DefaultsAndTypedAccess) {
    Config c;
    EXPECT_EQ(c.str("model.kind"), "squared-nonmonotonic");
    EXPECT_EQ(c.integer("model.width"), 8);
    EXPECT_DOUBLE_EQ(c.real("train.learning_rate"), 1e-3);
    EXPECT_TRUE(c.flag("data.standardize"));
    EXPECT_EQ(c.integer_list("bench.batch_sizes"), (std::vector<long long>{64, 256, 1024}));
    EXPECT_EQ(c.seed(), 0u);
    EXPECT_THROW(c.str("model.depth"), ConfigError);
}

TEST(Config, IniFileOverridesAndPaths) {
    const fs::path p = workdir() / "cfg" / "a.ini";
    fs::create_directories(p.parent_path());
    write_file(p, "seed = 7\n[model]\nwidth = 16\npath = models/m.json\n[udisj]\ngraph = g.txt\n");
    Config c;
    c.load_file(p.string());
    EXPECT_EQ(c.seed(), 7u);
    EXPECT_EQ(c.integer("model.width"), 16);
    EXPECT_EQ(c.str("model.path"), (fs::absolute(p).parent_path() / "models/m.json").lexically_normal().string());
    EXPECT_EQ(c.str("udisj.graph"), (fs::absolute(p).parent_path() / "g.txt").lexically_normal().string());
    c.set("model.width = 4");
    EXPECT_EQ(c.integer("model.width"), 4);
    c.set("model.path=/abs/m.json");
    EXPECT_EQ(c.str("model.path"), "/abs/m.json");
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    const fs::path p = workdir() / "bad.ini";
    write_file(p, "[model]\ndepth = 3\n");
    Config c;
    EXPECT_THROW(c.load_file(p.string()), ConfigError);
    write_file(p, "[model\nwidth = 3\n");
    EXPECT_THROW(c.load_file(p.string()), ConfigError);
    EXPECT_THROW(c.set("model.width"), ConfigError);
    EXPECT_THROW(c.set("nonsense=1"), ConfigError);
    c.set("model.width=abc");
    EXPECT_THROW(c.integer("model.width"), ConfigError);
    c.set("model.width=0");
    EXPECT_THROW(c.positive("model.width"), ConfigError);
    c.set("train.learning_rate=1e-2x");
    EXPECT_THROW(c.real("train.learning_rate"), ConfigError);
    c.set("data.standardize=maybe");
    EXPECT_THROW(c.flag("data.standardize"), ConfigError);
    c.set("bench.widths=32,,64");
    EXPECT_THROW(c.integer_list("bench.widths"), ConfigError);
    c.set("seed=-1");
    EXPECT_THROW(c.seed(), ConfigError);
}

TEST(Dataset, CsvIngestion) {
    const fs::path p = workdir() / "toy.csv";
    write_file(p, "a,b\n1.5,0\n-2,1\n3,2\n");
    const Dataset d = ingest_csv(p.string(), parse_schema("a:continuous,b:discrete(3)"), CsvOptions{false, 0.0, 0.0, 0});
    EXPECT_EQ(d.size(), 3u);
    EXPECT_EQ(d.columns[1].kind, ColumnKind::Discrete);
    EXPECT_EQ(d.columns[1].states, 3);
    EXPECT_EQ(d.train.size(), 3u);
    write_file(p, "a,b\n1.5,x\n");
    try {
        ingest_csv(p.string(), CsvSchema{});
        FAIL() << "expected IngestError";
    } catch (const IngestError &e) {
        EXPECT_EQ(e.line(), 2);
    }
    write_file(p, "a,b\n1,2\n3\n");
    try {
        ingest_csv(p.string(), CsvSchema{});
        FAIL() << "expected IngestError";
    } catch (const IngestError &e) {
        EXPECT_EQ(e.line(), 3);
    }
    write_file(p, "a,b\n1,5\n");
    EXPECT_THROW(ingest_csv(p.string(), parse_schema("continuous,discrete(3)")), IngestError);
    EXPECT_THROW(parse_schema("a:ordinal"), ConfigError);
}

TEST(Dataset, StandardizationUsesTrainStatistics) {
    const fs::path p = workdir() / "std.csv";
    std::ostringstream s;
    s << "x,y\n";
    Rng rng(3);
    for (int i = 0; i < 200; ++i) s << 5.0 + 3.0 * rng.normal() << ',' << -1.0 + 0.1 * rng.normal() << '\n';
    write_file(p, s.str());
    const Dataset d = ingest_csv(p.string(), CsvSchema{}, CsvOptions{true, 0.1, 0.2, 4});
    EXPECT_EQ(d.train.size() + d.val.size() + d.test.size(), 200u);
    for (std::size_t c = 0; c < 2; ++c) {
        double mean = 0.0, sq = 0.0;
        for (auto r : d.train) mean += d.rows(r, c);
        mean /= static_cast<double>(d.train.size());
        for (auto r : d.train) sq += (d.rows(r, c) - mean) * (d.rows(r, c) - mean);
        EXPECT_NEAR(mean, 0.0, 1e-12);
        EXPECT_NEAR(std::sqrt(sq / static_cast<double>(d.train.size())), 1.0, 1e-12);
    }
}

TEST(Summary, MeanAndTwoStandardErrors) {
    const auto s = cli::summarize({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_NEAR(s.two_se, 2.0 * std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(ModelDocument, RoundTripIsBitExact) {
    const Dataset d = generate_synthetic("banana", 300, 50, 50, 5);
    const Dataset disc = generate_synthetic("rings", 300, 50, 50, 5, 6);
    struct Case {
        const Dataset *data;
        ModelSpec spec;
    };
    std::vector<Case> cases;
    for (ModelKind kind : {ModelKind::Monotonic, ModelKind::SquaredMonotonic, ModelKind::SquaredNonMonotonic}) {
        ModelSpec s;
        s.kind = kind;
        s.width = 3;
        s.families = {FamilySpec{FamilyKind::Spline, 2, 31, 2, 6, -6.0, 6.0}, FamilySpec{FamilyKind::Spline, 2, 31, 2, 6, -6.0, 6.0}};
        cases.push_back({&d, s});
    }
    ModelSpec g;
    g.region_graph = "bt";
    g.product = ProductKind::Kronecker;
    g.width = 2;
    g.components = 3;
    g.families = {FamilySpec{FamilyKind::Gaussian}};
    cases.push_back({&d, g});
    ModelSpec b;
    b.width = 4;
    b.families = {FamilySpec{FamilyKind::Binomial, 6, 5}, FamilySpec{FamilyKind::Categorical, 6}};
    cases.push_back({&disc, b});
    int i = 0;
    for (const auto &c : cases) {
        Model m = build_model(2, c.spec, 9);
        Rng rng(static_cast<std::uint64_t>(i));
        for (double &v : m.params().mutable_values()) v = rng.normal(0.0, 0.5);
        Matrix rows = c.data->test_rows();
        if (c.spec.families[0].kind == FamilyKind::Spline)
            for (double &v : rows.values()) v = std::clamp(v, -6.0, 6.0);
        const fs::path p = workdir() / ("model" + std::to_string(i++) + ".json");
        write_model(p.string(), m, c.data->columns);
        const ModelDocument back = read_model(p.string());
        EXPECT_EQ(back.model.kind(), m.kind());
        EXPECT_EQ(back.columns.size(), 2u);
        EXPECT_EQ(back.model.log_density(rows), m.log_density(rows)) << p;
        EXPECT_EQ(back.model.log_normalizer(), m.log_normalizer());
        EXPECT_EQ(model_to_json(back.model, back.columns).dump(), model_to_json(m, c.data->columns).dump());
    }
}

TEST(ModelDocument, MalformedDocumentsAreIngestErrors) {
    const fs::path p = workdir() / "broken.json";
    write_file(p, "{ not json");
    EXPECT_THROW(read_model(p.string()), IngestError);
    write_file(p, R"({"format_version": 99})");
    EXPECT_THROW(read_model(p.string()), IngestError);
    EXPECT_THROW(read_model((workdir() / "absent.json").string()), IngestError);
}

TEST(Commands, TrainEvalSampleGridAreReproducible) {
    const fs::path cfg = workdir() / "train.ini";
    write_file(cfg, kSmallTrain);
    const fs::path a = workdir() / "run_a", b = workdir() / "run_b";
    ASSERT_EQ(pcsq_cli("train --config " + cfg.string() + " --out " + a.string()), 0) << read_file(workdir() / "stderr.txt");
    ASSERT_EQ(pcsq_cli("train --config " + cfg.string() + " --out " + b.string()), 0);
    EXPECT_EQ(read_file(a / "model.json"), read_file(b / "model.json"));
    const auto report = lines(a / "train_report.csv");
    ASSERT_GE(report.size(), 2u);
    EXPECT_EQ(report[0], "epoch,train_ll,val_ll,seconds");
    const auto strip_time = [](const std::vector<std::string> &ls) {
        std::vector<std::string> out;
        for (const auto &l : ls) out.push_back(l.substr(0, l.rfind(',')));
        return out;
    };
    EXPECT_EQ(strip_time(report), strip_time(lines(b / "train_report.csv")));
    for (std::size_t r = 1; r < report.size(); ++r) {
        std::stringstream ss(report[r]);
        std::string cell;
        std::getline(ss, cell, ',');
        std::getline(ss, cell, ',');
        std::getline(ss, cell, ',');
        EXPECT_TRUE(std::isfinite(std::stod(cell)));
    }

    const std::string model = " --set model.path=" + (a / "model.json").string();
    for (const fs::path &out : {a, b}) {
        ASSERT_EQ(pcsq_cli("eval --config " + cfg.string() + model + " --out " + out.string()), 0) << read_file(workdir() / "stderr.txt");
        ASSERT_EQ(pcsq_cli("sample --config " + cfg.string() + model + " --set sample.count=20 --out " + out.string()), 0);
        ASSERT_EQ(pcsq_cli("grid --config " + cfg.string() + model + " --set grid.resolution=12 --out " + out.string()), 0);
    }
    for (const char *f : {"metrics.csv", "samples.csv", "grid.csv"}) EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
    const auto metrics = lines(a / "metrics.csv");
    ASSERT_EQ(metrics.size(), 2u);
    EXPECT_EQ(metrics[0], "split,rows,mean_ll,two_se");
    EXPECT_EQ(metrics[1].rfind("test,100,", 0), 0u);
    EXPECT_EQ(lines(a / "samples.csv").size(), 21u);
    EXPECT_EQ(lines(a / "samples.csv")[0], "x1,x2");
    const auto grid = lines(a / "grid.csv");
    EXPECT_EQ(grid.size(), 145u);
    EXPECT_EQ(grid[0], "x1,x2,log_density");

    // The eval value matches the in-memory model.
    const ModelDocument doc = read_model((a / "model.json").string());
    Config c;
    c.load_file(cfg.string());
    const Dataset d = cli::load_dataset(c);
    const auto s = cli::summarize(doc.model.log_density(d.test_rows()));
    std::ostringstream expect;
    expect.precision(17);
    expect << "test,100," << s.mean << ',' << s.two_se;
    EXPECT_EQ(metrics[1], expect.str());
}

TEST(Commands, DiscreteTrainingAndSampling) {
    const fs::path cfg = workdir() / "disc.ini";
    write_file(cfg, "seed = 3\n[data]\nn_train = 300\nn_val = 50\nn_test = 50\nbins = 5\n[model]\nwidth = 2\ndiscrete_family = binomial\n[train]\nmax_epochs = 2\n");
    const fs::path out = workdir() / "disc";
    ASSERT_EQ(pcsq_cli("train --config " + cfg.string() + " --out " + out.string()), 0) << read_file(workdir() / "stderr.txt");
    ASSERT_EQ(pcsq_cli("sample --config " + cfg.string() + " --set model.path=" + (out / "model.json").string() + " --set sample.count=50 --out " + out.string()), 0);
    const auto s = lines(out / "samples.csv");
    ASSERT_EQ(s.size(), 51u);
    for (std::size_t r = 1; r < s.size(); ++r) {
        std::stringstream ss(s[r]);
        for (std::string cell; std::getline(ss, cell, ',');) {
            const double v = std::stod(cell);
            EXPECT_EQ(v, std::floor(v));
            EXPECT_GE(v, 0.0);
            EXPECT_LT(v, 5.0);
        }
    }
}

TEST(Commands, UdisjDumpsTheCommunicationMatrix) {
    const fs::path g = workdir() / "matching.txt";
    write_file(g, "6\n0 3\n1 4\n2 5\n");
    const fs::path out = workdir() / "udisj";
    ASSERT_EQ(pcsq_cli("udisj --set udisj.graph=" + g.string() + " --out " + out.string()), 0) << read_file(workdir() / "stderr.txt");
    const auto m = lines(out / "communication_matrix.csv");
    ASSERT_EQ(m.size(), 9u);
    EXPECT_EQ(m[0], "Y\\Z,000,100,010,001,110,101,011,111");
    EXPECT_EQ(m[1], "000,1,1,1,1,1,1,1,1");
    EXPECT_EQ(m[8], "111,1,0,0,0,1,1,1,4");
}

TEST(Commands, ReductionsWriteVerificationReports) {
    const fs::path out = workdir() / "red";
    ASSERT_EQ(pcsq_cli("reduce-psd --set psd.points=20 --out " + out.string()), 0) << read_file(workdir() / "stderr.txt");
    auto v = lines(out / "verification.csv");
    ASSERT_EQ(v.size(), 21u);
    EXPECT_EQ(v[0], "point,direct,circuit,rel_error");
    for (std::size_t r = 1; r < v.size(); ++r) EXPECT_LT(std::stod(v[r].substr(v[r].rfind(',') + 1)), 1e-8);
    EXPECT_TRUE(fs::exists(out / "model.json"));
    EXPECT_NO_THROW(read_model((out / "model.json").string()));

    const MpsFactorization f = MpsFactorization::random(4, 2, 2, 21);
    const fs::path cores = workdir() / "cores.bin";
    write_mps(cores.string(), f);
    ASSERT_EQ(pcsq_cli("reduce-mps --set mps.path=" + cores.string() + " --out " + out.string()), 0) << read_file(workdir() / "stderr.txt");
    v = lines(out / "verification.csv");
    ASSERT_EQ(v.size(), 17u);
    EXPECT_EQ(v[0], "assignment,direct,circuit,abs_error,born_direct,born_circuit");
    for (std::size_t r = 1; r < v.size(); ++r) {
        std::vector<std::string> cells;
        std::stringstream ss(v[r]);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        ASSERT_EQ(cells.size(), 6u);
        EXPECT_LT(std::stod(cells[3]), 1e-6);
        std::vector<int> x;
        std::stringstream xs(cells[0]);
        for (int s; xs >> s;) x.push_back(s);
        ASSERT_EQ(x.size(), 4u);
        EXPECT_NEAR(std::stod(cells[1]), mps_value(f, x), 1e-12);
    }
}

TEST(Commands, BenchCountsOnePartitionFunctionPerStep) {
    const fs::path out = workdir() / "bench";
    ASSERT_EQ(pcsq_cli("bench --set bench.widths=4,8 --set bench.batch_sizes=16,32 --set bench.steps=2 --set bench.log_variables=2,8,128 "
                       "--out " + out.string()),
              0)
        << read_file(workdir() / "stderr.txt");
    const auto b = lines(out / "bench.csv");
    ASSERT_EQ(b.size(), 5u);
    EXPECT_EQ(b[0], "width,batch_size,steps,seconds_per_step,z_evaluations_per_step,peak_rss_kb");
    for (std::size_t r = 1; r < b.size(); ++r) {
        std::vector<std::string> cells;
        std::stringstream ss(b[r]);
        for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
        EXPECT_EQ(cells[4], "1");
    }
    const auto l = lines(out / "bench_logspace.csv");
    ASSERT_EQ(l.size(), 4u);
    EXPECT_EQ(l[0], "variables,depth,log_z,linear_z,linear_overflow");
    EXPECT_EQ(l[3].rfind("128,7,", 0), 0u);
    EXPECT_EQ(l[3].substr(l[3].rfind(',') + 1), "1");
}

TEST(Commands, ErrorsMapToExitCodes) {
    const fs::path out = workdir() / "errors";
    EXPECT_EQ(pcsq_cli("train --set model.depth=3 --out " + out.string()), 2);
    EXPECT_EQ(pcsq_cli("frobnicate"), 2);
    EXPECT_EQ(pcsq_cli("train --config " + (workdir() / "missing.ini").string()), 2);
    EXPECT_EQ(pcsq_cli("train --set train.learning_rate=-1 --out " + out.string()), 2);
    EXPECT_EQ(pcsq_cli("train --set data.source=csv --set data.path=" + (workdir() / "none.csv").string() + " --out " + out.string()), 3);
    EXPECT_EQ(pcsq_cli("eval --out " + out.string()), 2);
    EXPECT_EQ(pcsq_cli("udisj --set udisj.graph=" + (workdir() / "none.txt").string() + " --out " + out.string()), 3);
    const fs::path p = workdir() / "zero.json";
    write_file(p, R"({"anchors": [[0.0], [1.0]], "bandwidth": 1.0, "A": [[0.0, 0.0], [0.0, 0.0]]})");
    EXPECT_EQ(pcsq_cli("reduce-psd --set psd.path=" + p.string() + " --out " + out.string()), 5);
}
