#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ccsp/generate.hpp"
#include "ccsp/hopset.hpp"
#include "ccsp/oracle.hpp"
#include "support.hpp"

namespace ccsp {
namespace {

using testing::random_graph;
using testing::within_factor;

bool hits_all(const std::vector<NodeId>& hit, const std::vector<std::vector<NodeId>>& fams) {
    for (const auto& f : fams)
        if (std::none_of(f.begin(), f.end(), [&](NodeId u) { return std::binary_search(hit.begin(), hit.end(), u); }))
            return false;
    return true;
}

TEST(HittingSet, AllFamiliesEqualV) {
    Clique net(5);
    std::vector<std::vector<NodeId>> fams(5, {0, 1, 2, 3, 4});
    EXPECT_EQ(hitting_set(net, fams, 5).size(), 1u);
    EXPECT_EQ(net.ledger().primitives.at("hitting_set"), 1u);
    EXPECT_EQ(net.ledger().charged_rounds, 3u);
}

TEST(HittingSet, DisjointFamilies) {
    Clique net(12);
    std::vector<std::vector<NodeId>> fams{{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {9, 10, 11}};
    auto hit = hitting_set(net, fams, 3);
    EXPECT_EQ(hit.size(), 4u);
    EXPECT_TRUE(hits_all(hit, fams));
}

TEST(HittingSet, TooSmall) {
    Clique net(4);
    EXPECT_THROW(hitting_set(net, {{0, 1}, {2}}, 2), FamilyTooSmall);
}

TEST(HittingSet, RandomNearestFamilies) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::size_t n = 16 + seed % 40;
        const std::size_t k = static_cast<std::size_t>(std::ceil(std::sqrt(double(n))));
        auto g = random_graph(n, seed, 5);
        auto near = oracle::brute_k_nearest(g, k);
        std::vector<std::vector<NodeId>> fams;
        for (const auto& l : near) {
            fams.emplace_back();
            for (const Near& x : l) fams.back().push_back(x.node);
        }
        Clique net(n);
        auto hit = hitting_set(net, fams, k);
        EXPECT_TRUE(hits_all(hit, fams));
        EXPECT_LE(double(hit.size()), 4.0 * double(n) / double(k) * double(ceil_log2(n)));
    }
}

TEST(Bunches, WholeSetHit) {
    auto g = random_graph(6, 2, 3);
    auto near = oracle::brute_k_nearest(g, 3);
    std::vector<char> all(6, 1);
    auto b = compute_bunches(near, all);
    for (NodeId v = 0; v < 6; ++v) {
        EXPECT_EQ(b[v].pivot, v);
        ASSERT_EQ(b[v].members.size(), 1u);
    }
    EXPECT_TRUE(bunch_edges(b, all).empty());
}

TEST(Bunches, PathMiddlePivot) {
    const std::size_t n = 7;
    auto g = generate({"path", n, 0, 1, 0});
    auto near = oracle::brute_k_nearest(g, n);
    std::vector<char> in(n, 0);
    in[3] = 1;
    auto b = compute_bunches(near, in);
    for (NodeId v = 0; v < n; ++v) {
        EXPECT_EQ(b[v].pivot, 3u);
        const Word dp = v > 3 ? v - 3 : 3 - v;
        std::size_t expect = 1;
        for (NodeId u = 0; u < n; ++u)
            if ((u > v ? u - v : v - u) < dp) ++expect;
        EXPECT_EQ(b[v].members.size(), expect) << v;
        for (const Near& m : b[v].members) EXPECT_EQ(m.dist.w, m.node > v ? m.node - v : v - m.node);
    }
}

TEST(Bunches, StarCenter) {
    auto g = generate({"star", 5, 0, 1, 0});
    auto near = oracle::brute_k_nearest(g, 5);
    std::vector<char> in{1, 0, 0, 0, 0};
    auto b = compute_bunches(near, in);
    for (NodeId v = 1; v < 5; ++v) {
        ASSERT_EQ(b[v].members.size(), 2u);  // itself at 0, then the center
        EXPECT_EQ(b[v].members[1].node, 0u);
        EXPECT_EQ(b[v].members[1].dist.w, 1u);
    }
    auto edges = bunch_edges(b, in);
    EXPECT_EQ(edges.size(), 4u);
}

TEST(Bunches, MissThrows) {
    auto near = oracle::brute_k_nearest(generate({"path", 4, 0, 1, 0}), 2);
    EXPECT_THROW(compute_bunches(near, std::vector<char>(4, 0)), HitFailure);
}

TEST(HopsetParams, Values) {
    auto p = hopset_params(64, 0.5);
    EXPECT_EQ(p.levels, 6u);
    EXPECT_EQ(p.beta, 144u);
    EXPECT_EQ(p.k, 48u);
    EXPECT_EQ(hopset_params(16, 0.25).beta, 192u);
    EXPECT_THROW(hopset_params(8, 1.0), PreconditionError);
}

// d <= beta-hop distance in G u H <= (1 + eps) d, for all pairs.
void check_stretch(const Graph& g, const Hopset& h, double eps, std::size_t beta) {
    const std::size_t n = g.size();
    auto gh = augmented_graph(g, h.edges);
    const std::uint64_t den = 1000000;
    const auto num = static_cast<std::uint64_t>(std::floor((1.0 + eps) * double(den)));
    for (NodeId s = 0; s < n; ++s) {
        auto d = oracle::dijkstra(g, s);
        auto b = oracle::bounded_hops(gh, s, beta);
        for (NodeId v = 0; v < n; ++v) {
            if (d[v] == kInf) {
                EXPECT_EQ(b[v], kInf);
                continue;
            }
            EXPECT_GE(b[v], d[v]);
            EXPECT_TRUE(within_factor(b[v], d[v], num, den)) << s << "->" << v << ": " << b[v] << " vs " << d[v];
        }
    }
}

void check_sound(const Graph& g, const Hopset& h) {
    for (const HopEdge& e : h.edges) {
        EXPECT_LT(e.u, e.v);
        EXPECT_GE(e.w, oracle::dijkstra(g, e.u)[e.v]);
    }
}

TEST(Hopset, CompleteGraph) {
    auto g = generate({"complete", 8, 0, 1, 0});
    Clique net(8);
    auto h = build_hopset(net, g, 0.5);
    check_sound(g, h);
    check_stretch(g, h, 0.0, h.params.beta);
}

TEST(Hopset, UnitPath) {
    auto g = generate({"path", 32, 0, 1, 0});
    Clique net(32);
    auto h = build_hopset(net, g, 0.5);
    check_sound(g, h);
    check_stretch(g, h, 0.5, h.params.beta);
    EXPECT_EQ(net.ledger().peak_pair_load, 1u);
}

TEST(Hopset, RandomWeightedSmallK) {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const std::size_t n = 16 + 8 * (seed % 3);
        auto g = random_graph(n, seed, 20, seed % 4 != 3);
        Clique net(n);
        auto h = build_hopset(net, g, 0.25, 2 + seed % 4);
        check_sound(g, h);
        check_stretch(g, h, 0.25, h.params.beta);
        EXPECT_LE(double(h.edges.size()), 4.0 * std::pow(double(n), 1.5) * std::log2(double(n)));
        ASSERT_EQ(h.ladder.size(), h.params.levels + 1);
        for (std::size_t l = 1; l < h.ladder.size(); ++l)
            for (const HopEdge& e : h.ladder[l - 1]) {
                auto it = std::find_if(h.ladder[l].begin(), h.ladder[l].end(),
                                       [&](const HopEdge& x) { return x.u == e.u && x.v == e.v; });
                ASSERT_NE(it, h.ladder[l].end());
                EXPECT_LE(it->w, e.w);
            }
    }
}

// Either the one-hop distance in G u H_0 is exact, or some hitting-set node is
// one hop away at no more than d(x, y).
TEST(Hopset, BunchEdgeClaim) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const std::size_t n = 12 + seed * 2;
        auto g = random_graph(n, seed, 9);
        Clique net(n);
        auto h = build_hopset(net, g, 0.5, 3);
        auto one = weight_matrix(augmented_graph(g, h.ladder[0]));
        std::vector<char> in(n, 0);
        for (NodeId a : h.hit) in[a] = 1;
        for (NodeId x = 0; x < n; ++x) {
            auto d = oracle::dijkstra(g, x);
            for (NodeId y = 0; y < n; ++y) {
                if (one.at(x, y).w == d[y]) continue;
                bool ok = false;
                for (NodeId z = 0; z < n && !ok; ++z) ok = in[z] && one.at(x, z).w <= d[y];
                EXPECT_TRUE(ok) << x << "," << y;
            }
        }
    }
}

TEST(Hopset, LadderLevels) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const std::size_t n = 24;
        auto g = random_graph(n, 100 + seed, 15);
        Clique net(n);
        auto h = build_hopset(net, g, 0.5, 3);
        const auto eps0 = h.params.eps0;
        const auto den = std::uint64_t{1000000};
        for (std::size_t l = 1; l <= std::min<std::size_t>(3, h.params.levels); ++l) {
            auto gh = augmented_graph(g, h.ladder[l]);
            const auto num = static_cast<std::uint64_t>(std::floor((1.0 + eps0 * double(l)) * double(den)));
            for (NodeId s = 0; s < n; ++s) {
                auto d = oracle::dijkstra_aug(g, s);
                auto b = oracle::bounded_hops(gh, s, h.params.beta);
                for (NodeId v = 0; v < n; ++v) {
                    if (!d[v].is_inf() && d[v].t <= (Word{1} << l)) {
                        EXPECT_TRUE(within_factor(b[v], d[v].w, num, den));
                    }
                }
            }
        }
    }
}

TEST(Hopset, RejectsDirected) {
    Clique net(4);
    EXPECT_THROW(build_hopset(net, Graph(4, true), 0.5), PreconditionError);
}

}  // namespace
}  // namespace ccsp
