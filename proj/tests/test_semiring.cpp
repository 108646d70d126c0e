#include <gtest/gtest.h>

#include <sstream>

#include "ccsp/generate.hpp"
#include "ccsp/graph.hpp"
#include "ccsp/oracle.hpp"
#include "ccsp/semiring.hpp"
#include "ccsp/sparse_matrix.hpp"
#include "support.hpp"

namespace ccsp {
namespace {

constexpr AugWeight kZero = AugWeight::infinity();

TEST(AugCombine, Examples) {
    EXPECT_EQ(aug_combine(kZero, {5, 2}), (AugWeight{5, 2}));
    EXPECT_EQ(aug_combine({5, 2}, {5, 1}), (AugWeight{5, 1}));
    EXPECT_EQ(aug_combine({3, 9}, {4, 1}), (AugWeight{3, 9}));
}

TEST(AugExtend, Examples) {
    EXPECT_EQ(aug_extend({0, 0}, {7, 3}), (AugWeight{7, 3}));
    EXPECT_EQ(aug_extend({2, 1}, {3, 1}), (AugWeight{5, 2}));
    EXPECT_EQ(aug_extend(kZero, {3, 1}), kZero);
    EXPECT_EQ(aug_extend({kInf - 1, 1}, {5, 1}), kZero);
}

AugWeight sample(Rng& rng) {
    if (rng.uniform(0, 9) == 0) return kZero;
    return {rng.uniform(0, 20), rng.uniform(0, 5)};
}

TEST(AugSemiring, Axioms) {
    Rng rng(2024);
    for (int q = 0; q < 1000; ++q) {
        AugWeight x = sample(rng), y = sample(rng), z = sample(rng);
        EXPECT_EQ(aug_combine(aug_combine(x, y), z), aug_combine(x, aug_combine(y, z)));
        EXPECT_EQ(aug_combine(x, y), aug_combine(y, x));
        EXPECT_EQ(aug_extend(aug_extend(x, y), z), aug_extend(x, aug_extend(y, z)));
        EXPECT_EQ(aug_extend(x, aug_combine(y, z)), aug_combine(aug_extend(x, y), aug_extend(x, z)));
        EXPECT_EQ(aug_extend(aug_combine(y, z), x), aug_combine(aug_extend(y, x), aug_extend(z, x)));
        EXPECT_EQ(aug_combine(x, kZero), x);
        EXPECT_EQ(aug_extend(x, AugWeight::identity()), x);
        EXPECT_EQ(aug_extend(x, kZero), kZero);
        EXPECT_EQ(aug_combine(x, x), x);
        AugWeight m = aug_combine(x, y);
        EXPECT_TRUE(m == x || m == y);
        EXPECT_EQ(x.w == kInf, x.t == kInf);
    }
}

TEST(WeightMatrix, EmptyGraph) {
    auto w = weight_matrix(Graph(3));
    for (NodeId r = 0; r < 3; ++r)
        for (NodeId c = 0; c < 3; ++c) EXPECT_EQ(w.at(r, c), r == c ? AugWeight::identity() : kZero);
}

TEST(WeightMatrix, SingleEdge) {
    Graph g(2);
    g.add_edge(0, 1, 4);
    auto w = weight_matrix(g);
    EXPECT_EQ(w.at(0, 1), (AugWeight{4, 1}));
    EXPECT_EQ(w.at(1, 0), (AugWeight{4, 1}));
    w.validate();
}

TEST(WeightMatrix, PathSquare) {
    GraphSpec s{"path", 3, 0, 1, 0};
    auto w = weight_matrix(generate(s));
    auto w2 = oracle::brute_product(w, w);
    EXPECT_EQ(w2.at(0, 2), (AugWeight{2, 2}));
}

TEST(WeightMatrix, PowersAreHopBoundedDistances) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto g = testing::random_graph(10, seed, 6, seed % 2 == 0);
        auto w = weight_matrix(g);
        auto p = w;
        for (std::size_t d = 1; d <= 4; ++d) {
            for (NodeId s = 0; s < 10; ++s) {
                auto bf = oracle::bounded_hops(w, s, d);
                auto plain = oracle::bounded_hops(g, s, d);
                for (NodeId v = 0; v < 10; ++v) {
                    EXPECT_EQ(p.at(s, v), bf[v]);
                    EXPECT_EQ(p.at(s, v).w, plain[v]);
                }
            }
            p = oracle::brute_product(p, w);
        }
    }
}

TEST(Graph, ParseRoundTrip) {
    std::istringstream in("# comment\n3 2 0\n0 1 5\n\n1 2 7\n");
    Graph g = read_graph(in);
    EXPECT_EQ(g.size(), 3u);
    EXPECT_EQ(g.edges().size(), 2u);
    std::ostringstream out;
    write_graph(out, g);
    std::istringstream again(out.str());
    EXPECT_EQ(read_graph(again), g);
}

TEST(Graph, ParseErrorsCarryLine) {
    auto line_of = [](const std::string& text) -> std::size_t {
        std::istringstream in(text);
        try {
            read_graph(in);
        } catch (const ParseError& e) {
            return e.line();
        }
        return 0;
    };
    EXPECT_EQ(line_of("3 1 0\n0 0 1\n"), 2u);
    EXPECT_EQ(line_of("3 2 0\n0 1 1\n"), 2u);
    EXPECT_EQ(line_of("x\n"), 1u);
    EXPECT_EQ(line_of("3 1 0\n0 1 1 9\n"), 2u);
    EXPECT_EQ(line_of("3 1 0\n0 3 1\n"), 2u);
}

TEST(Graph, RejectsSelfLoop) {
    Graph g(2);
    EXPECT_THROW(g.add_edge(1, 1, 1), PreconditionError);
}

TEST(Oracle, DijkstraExamples) {
    Graph one(1);
    EXPECT_EQ(oracle::dijkstra(one, 0), std::vector<Word>{0});
    Graph g(3);
    g.add_edge(0, 1, 1);
    g.add_edge(1, 2, 2);
    auto d = oracle::dijkstra_aug(g, 0);
    EXPECT_EQ(d[2], (AugWeight{3, 2}));
}

TEST(Oracle, DijkstraMatchesFloydWarshall) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t n = 2 + seed % 63;
        auto g = testing::random_graph(n, seed, 1 + seed % 20, seed % 3 != 0);
        auto fw = oracle::floyd_warshall(g);
        for (NodeId s = 0; s < n; s += 7) EXPECT_EQ(oracle::dijkstra(g, s), fw[s]);
    }
}

TEST(Oracle, BoundedHops) {
    Graph g(3);
    g.add_edge(0, 1, 1);
    g.add_edge(1, 2, 2);
    g.add_edge(0, 2, 9);
    EXPECT_EQ(oracle::bounded_hops(g, 0, 0), (std::vector<Word>{0, kInf, kInf}));
    EXPECT_EQ(oracle::bounded_hops(g, 0, 1), (std::vector<Word>{0, 1, 9}));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto r = testing::random_graph(12, seed, 9, false);
        EXPECT_EQ(oracle::bounded_hops(r, 3, 11), oracle::dijkstra(r, 3));
    }
}

TEST(Oracle, BruteProductExamples) {
    auto id = SparseMatrix<Boolean>::identity(6);
    auto p = oracle::brute_product(id, id);
    EXPECT_EQ(p.values_only(), id);
    EXPECT_EQ(p.density(), 1u);
    auto s = testing::random_matrix<MinPlus>(6, 3, 1);
    EXPECT_EQ(oracle::brute_product(s, SparseMatrix<MinPlus>(6)).nz(), 0u);
}

TEST(Oracle, FilterAndNearest) {
    EXPECT_THROW(oracle::brute_filter(SparseMatrix<MinPlus>(3), 0), PreconditionError);
    auto g = testing::random_graph(8, 1, 5);
    auto all = oracle::brute_k_nearest(g, 8);
    for (NodeId v = 0; v < 8; ++v) {
        ASSERT_EQ(all[v].size(), 8u);
        EXPECT_EQ(all[v][0].node, v);
        EXPECT_TRUE(std::is_sorted(all[v].begin(), all[v].end(), near_less));
    }
}

}  // namespace
}  // namespace ccsp
