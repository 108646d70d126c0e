#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "ccsp/experiment.hpp"
#include "support.hpp"

namespace ccsp {
namespace {

TEST(Io, LedgerJsonFields) {
    Clique net(4);
    net.exchange(std::vector<Message>{Message::make(0, 1, {7})});
    net.charge(primitive::kRoute, 2);
    auto j = ledger_json(net.ledger());
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"rounds", "charged_rounds", "primitives", "peak_pair_load"}));
    EXPECT_EQ(j["rounds"], 1);
    EXPECT_EQ(j["charged_rounds"], 3);
    EXPECT_EQ(j["primitives"]["route"], 1);
    EXPECT_EQ(j["peak_pair_load"], 1);
}

template <class S>
void round_trip(std::uint64_t seed) {
    auto m = random_matrix<S>(9, 2, seed);
    std::stringstream s;
    write_matrix(s, m);
    EXPECT_EQ(read_matrix<S>(s), m);
}

TEST(Io, MatrixRoundTrip) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        round_trip<MinPlus>(seed);
        round_trip<AugMinPlus>(seed);
        round_trip<Boolean>(seed);
    }
}

TEST(Io, MatrixParseErrors) {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_matrix<MinPlus>(in);
    };
    EXPECT_THROW(parse(""), ParseError);
    EXPECT_THROW(parse("3 1\n0 3 1\n"), ParseError);
    EXPECT_THROW(parse("3 2\n0 1 1\n"), ParseError);
    EXPECT_THROW(parse("3 1\n0 1 1\n1 2 1\n"), ParseError);
    EXPECT_THROW(parse("3 2\n0 1 1\n0 1 2\n"), ParseError);
    EXPECT_THROW(parse("3 1\n0 1 1 9\n"), ParseError);
    EXPECT_EQ(parse("# comment\n3 1\n\n2 0 5\n").at(2, 0), 5u);
}

TEST(Io, HopsetAndPairCsv) {
    std::ostringstream h;
    std::vector<HopEdge> e{{0, 3, 7, 0}, {1, 2, 4, 2}};
    write_hopset(h, e);
    EXPECT_EQ(h.str(), "# u v w level\n0 3 7 0\n1 2 4 2\n");
    std::ostringstream c;
    std::vector<PairError> p{{0, 1, 2, 3}, {0, 2, kInf, kInf}};
    write_pair_csv(c, p);
    EXPECT_EQ(c.str(), "u,v,exact,estimate,ratio\n0,1,2,3,1.5\n0,2,inf,inf,1\n");
}

TEST(Generate, Examples) {
    auto path = generate({"path", 4, 0, 1, 0});
    ASSERT_EQ(path.edges().size(), 3u);
    for (const Edge& e : path.edges()) EXPECT_EQ(e.w, 1u);
    auto star = generate({"star", 5, 0, 1, 0});
    ASSERT_EQ(star.edges().size(), 4u);
    for (const Edge& e : star.edges()) EXPECT_EQ(e.u, 0u);
    EXPECT_EQ(generate({"gnp", 16, 0.5, 1, 7}), generate({"gnp", 16, 0.5, 1, 7}));
    EXPECT_THROW(generate({"hypercube", 8, 0, 1, 0}), InvalidSpec);
}

ExperimentConfig config(std::string algorithm, std::string family, std::size_t n, Word max_w = 1, std::uint64_t seed = 1) {
    ExperimentConfig c;
    c.algorithm = std::move(algorithm);
    c.graph = {std::move(family), n, 0.2, max_w, seed};
    return c;
}

const BoundCheck& find_check(const ExperimentReport& r, const std::string& name) {
    for (const BoundCheck& c : r.checks)
        if (c.name == name) return c;
    throw std::runtime_error("no check " + name);
}

TEST(Experiment, CycleNineUnweighted) {
    auto r = run_experiment(config("apsp-u", "cycle", 9));
    const auto& s = find_check(r, "stretch");
    EXPECT_EQ(s.status, "pass");
    EXPECT_LE(s.realized, 2.5);
    EXPECT_EQ(exit_code(r), 0);
}

TEST(Experiment, SsspPathExact) {
    auto r = run_experiment(config("sssp", "path", 8));
    EXPECT_EQ(find_check(r, "exact").status, "pass");
    EXPECT_EQ(find_check(r, "exact").violations, 0u);
    EXPECT_TRUE(r.passed());
}

TEST(Experiment, EmptySourcesIsStructuredError) {
    auto c = config("mssp", "path", 8);
    c.sources = 0;
    try {
        run_experiment(c);
        FAIL() << "expected EmptySources";
    } catch (const std::exception& e) {
        EXPECT_EQ(exit_code(e), 3);
        auto j = error_report(c, e);
        EXPECT_EQ(j["status"], "error");
        EXPECT_EQ(j["error"]["kind"], "precondition");
        EXPECT_EQ(j["error"]["type"], "EmptySources");
    }
}

TEST(Experiment, ExitCodes) {
    EXPECT_EQ(exit_code(InvalidSpec("x")), 3);
    EXPECT_EQ(exit_code(BandwidthViolation("x")), 4);
    EXPECT_EQ(exit_code(std::runtime_error("x")), 4);
    ExperimentReport r;
    r.checks.push_back({"a", "f", 2, 1, 1, "fail"});
    EXPECT_EQ(exit_code(r), 2);
    r.checks.back().status = "unchecked";
    EXPECT_EQ(exit_code(r), 0);
    EXPECT_THROW(run_experiment(config("sorting", "path", 4)), InvalidSpec);
}

TEST(Experiment, EveryAlgorithmPassesSmall) {
    for (const std::string& a : experiment_algorithms()) {
        const bool unit = a == "apsp-u" || a == "diameter";
        auto c = config(a, "connected", 14, unit ? 1 : 9, 3);
        c.dump = true;
        auto r = run_experiment(c);
        EXPECT_TRUE(r.passed()) << a << "\n" << r.to_json().dump(1);
        EXPECT_LE(r.ledger.peak_pair_load, 1u) << a;
        if (a != "oracle") {
            EXPECT_FALSE(r.checks.empty()) << a;
        }
        for (const BoundCheck& b : r.checks) EXPECT_NE(b.status, "unchecked") << a;
    }
}

TEST(Experiment, MatrixSemirings) {
    for (std::string s : {"min-plus", "augmented", "boolean"}) {
        auto c = config("mm", "gnp", 12);
        c.semiring = s;
        c.density = 3;
        EXPECT_TRUE(run_experiment(c).passed()) << s;
    }
    auto c = config("filtered-mm", "gnp", 12);
    c.semiring = "boolean";
    EXPECT_THROW(run_experiment(c), PreconditionError);
}

TEST(Experiment, OracleCapMarksUnchecked) {
    auto c = config("mssp", "path", 20);
    c.oracle_cap = 10;
    auto r = run_experiment(c);
    EXPECT_EQ(find_check(r, "stretch").status, "unchecked");
    EXPECT_TRUE(r.to_json()["bounds_checked"][0]["realized"].is_null());
}

TEST(Experiment, ReportRoundTripAndSchemaKeys) {
    auto r = run_experiment(config("hopset", "connected", 16, 8));
    const std::string text = r.to_json().dump();
    const Json back = Json::parse(text);
    EXPECT_EQ(back.dump(), text);
    std::ifstream f(std::string(CCSP_SOURCE_DIR) + "/docs/report.schema.json");
    ASSERT_TRUE(f);
    const Json schema = Json::parse(f);
    EXPECT_EQ(back["schema"], schema["$id"]);
    for (const auto& key : schema["$defs"]["run"]["required"]) EXPECT_TRUE(back.contains(key.get<std::string>())) << key;
    for (const auto& key : schema["$defs"]["ledger"]["required"]) EXPECT_TRUE(back["ledger"].contains(key.get<std::string>())) << key;
    for (const auto& check : back["bounds_checked"])
        for (const auto& key : schema["$defs"]["check"]["required"]) EXPECT_TRUE(check.contains(key.get<std::string>())) << key;
}

TEST(Experiment, GraphFileInput) {
    const std::string path = ::testing::TempDir() + "ccsp_graph.txt";
    {
        std::ofstream f(path);
        write_graph(f, generate({"connected", 10, 0.3, 5, 4}));
    }
    ExperimentConfig c;
    c.algorithm = "sssp";
    c.graph_file = path;
    EXPECT_TRUE(run_experiment(c).passed());
    c.graph_file = path + ".missing";
    EXPECT_THROW(run_experiment(c), PreconditionError);
}

TEST(Sweep, ConstantProgramIsFlat) {
    std::vector<std::size_t> ns{4, 8, 16};
    auto r = scaling_sweep("constant", ns, 2);
    EXPECT_TRUE(r.passed());
    for (const auto& p : r.points) EXPECT_DOUBLE_EQ(p.mean, 3.0);
    std::ostringstream csv;
    r.write_csv(csv);
    EXPECT_EQ(csv.str().substr(0, 21), "n,seed,charged_rounds");
}

TEST(Sweep, Preconditions) {
    std::vector<std::size_t> bad{16, 8};
    EXPECT_THROW(scaling_sweep("constant", bad, 1), PreconditionError);
    std::vector<std::size_t> ns{8};
    EXPECT_THROW(scaling_sweep("constant", ns, 0), PreconditionError);
    EXPECT_THROW(scaling_sweep("bogus", ns, 1), InvalidSpec);
}

}  // namespace
}  // namespace ccsp
