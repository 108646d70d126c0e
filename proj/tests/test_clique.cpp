#include <gtest/gtest.h>

#include <algorithm>

#include "ccsp/clique.hpp"
#include "ccsp/errors.hpp"
#include "ccsp/generate.hpp"

namespace ccsp {
namespace {

struct HaltAtOnce {
    bool step(NodeId, std::uint64_t, std::span<const Message>, std::vector<Message>&) { return true; }
};

struct BroadcastFromZero {
    std::size_t n;
    std::vector<Word> got;
    bool step(NodeId v, std::uint64_t round, std::span<const Message> inbox, std::vector<Message>& out) {
        if (round == 0 && v == 0)
            for (NodeId u = 1; u < n; ++u) out.push_back(Message::make(0, u, {42}));
        for (const Message& m : inbox) got[v] = m[0];
        return true;
    }
};

struct Chatter {
    bool step(NodeId v, std::uint64_t, std::span<const Message>, std::vector<Message>& out) {
        out.push_back(Message::make(v, (v + 1) % 2, {1}));
        return false;
    }
};

TEST(Run, HaltImmediately) {
    Clique net(4);
    HaltAtOnce p;
    EXPECT_EQ(net.run(p), 0u);
    EXPECT_EQ(net.ledger().rounds, 0u);
}

TEST(Run, SingleBroadcast) {
    Clique net(5);
    BroadcastFromZero p{5, std::vector<Word>(5, 0)};
    EXPECT_EQ(net.run(p), 1u);
    EXPECT_EQ(net.ledger().rounds, 1u);
    EXPECT_EQ(net.ledger().messages, 4u);
    for (NodeId v = 1; v < 5; ++v) EXPECT_EQ(p.got[v], 42u);
}

TEST(Run, RoundCap) {
    Clique net(CliqueConfig{.n = 2, .round_cap = 7});
    Chatter p;
    EXPECT_THROW(net.run(p), NonTermination);
    EXPECT_EQ(net.ledger().rounds, 7u);
}

TEST(Run, DefaultRoundCap) {
    Clique net(3);
    Chatter p;
    EXPECT_THROW(net.run(p), NonTermination);
    EXPECT_EQ(net.ledger().rounds, 90u);
}

TEST(Clique, NeedsTwoNodes) { EXPECT_THROW(Clique(1), PreconditionError); }

TEST(Exchange, RejectsSecondMessageOnPair) {
    Clique net(3);
    std::vector<Message> m = {Message::make(0, 1, {1}), Message::make(0, 1, {2})};
    EXPECT_THROW(net.exchange(m), BandwidthViolation);
}

TEST(Exchange, RejectsWidePayload) {
    Clique net(3);
    std::vector<Message> m = {Message::make(0, 1, {1, 2, 3, 4})};
    EXPECT_THROW(net.exchange(m), BandwidthViolation);
}

TEST(Exchange, SelfDeliveryIsFree) {
    Clique net(3);
    std::vector<Message> m = {Message::make(1, 1, {5}), Message::make(1, 1, {6})};
    auto got = net.exchange(m);
    EXPECT_EQ(got[1].size(), 2u);
    EXPECT_EQ(net.ledger().messages, 0u);
}

TEST(Route, EmptyDemandStillCharged) {
    Clique net(4);
    net.route({});
    EXPECT_EQ(net.ledger().charged_rounds, 2u);
    EXPECT_EQ(net.ledger().primitives.at("route"), 1u);
    EXPECT_EQ(net.ledger().messages, 0u);
}

TEST(Route, Permutation) {
    const std::size_t n = 6;
    Clique net(n);
    std::vector<Message> d;
    for (NodeId i = 0; i < n; ++i) d.push_back(Message::make(i, (i + 1) % n, {i}));
    auto got = net.route(d);
    for (NodeId i = 0; i < n; ++i) {
        ASSERT_EQ(got[(i + 1) % n].size(), 1u);
        EXPECT_EQ(got[(i + 1) % n][0][0], i);
    }
}

TEST(Route, FanOutFromOneNode) {
    const std::size_t n = 7;
    Clique net(n);
    std::vector<Message> d;
    for (NodeId u = 1; u < n; ++u) d.push_back(Message::make(0, u, {100 + u}));
    auto got = net.route(d);
    for (NodeId u = 1; u < n; ++u) {
        ASSERT_EQ(got[u].size(), 1u);
        EXPECT_EQ(got[u][0][0], 100 + u);
    }
    EXPECT_TRUE(got[0].empty());
}

TEST(Route, DemandViolation) {
    Clique net(3);
    std::vector<Message> d;
    for (int q = 0; q < 4; ++q) d.push_back(Message::make(0, 1, {Word(q)}));
    EXPECT_THROW(net.route(d), DemandViolation);
    EXPECT_NO_THROW(net.route_batched(d));
}

TEST(Sort, AlreadySorted) {
    const std::size_t n = 4;
    Clique net(n);
    std::vector<std::vector<int>> e(n);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t q = 0; q < n; ++q) e[v].push_back(static_cast<int>(v * n + q));
    EXPECT_EQ(net.sort_global(e), e);
    EXPECT_EQ(net.ledger().primitives.at("sort"), 1u);
}

TEST(Sort, ReverseSorted) {
    const std::size_t n = 5;
    Clique net(n);
    std::vector<std::vector<int>> e(n);
    for (int k = static_cast<int>(n * n) - 1; k >= 0; --k) e[(n * n - 1 - k) / n].push_back(k);
    auto out = net.sort_global(e);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t q = 0; q < n; ++q) EXPECT_EQ(out[i][q], static_cast<int>(i * n + q));
}

TEST(Sort, ArityViolation) {
    Clique net(3);
    std::vector<std::vector<int>> e = {{1, 2, 3}, {1, 2}, {4, 5, 6}};
    EXPECT_THROW(net.sort_global(e), ArityViolation);
}

TEST(Sort, PreservesMultiset) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        Rng rng(seed);
        const std::size_t n = rng.uniform(2, 32);
        Clique net(n);
        std::vector<std::vector<Word>> e(n);
        std::vector<Word> all;
        for (auto& b : e)
            for (std::size_t q = 0; q < n; ++q) {
                b.push_back(rng.uniform(0, n));
                all.push_back(b.back());
            }
        auto out = net.sort_global(e);
        std::vector<Word> flat;
        for (const auto& b : out) {
            ASSERT_EQ(b.size(), n);
            flat.insert(flat.end(), b.begin(), b.end());
        }
        EXPECT_TRUE(std::is_sorted(flat.begin(), flat.end()));
        std::sort(all.begin(), all.end());
        EXPECT_EQ(flat, all);
    }
}

TEST(Broadcast, RoundsFollowLongestMessage) {
    Clique net(4);
    auto t = net.broadcast({{1, 2, 3, 4}, {}, {5}, {}});
    EXPECT_EQ(net.ledger().rounds, 2u);
    EXPECT_EQ(t[0].size(), 4u);
    EXPECT_EQ(net.ledger().peak_pair_load, 1u);
}

TEST(Ledger, Replay) {
    Clique net(4);
    auto before = net.ledger();
    net.route({});
    net.note("x");
    auto delta = net.ledger().since(before);
    net.replay(delta, 3);
    EXPECT_EQ(net.ledger().charged_rounds, 8u);
    EXPECT_EQ(net.ledger().primitives.at("route"), 4u);
    EXPECT_EQ(net.ledger().events.at("x"), 4u);
}

TEST(RouteBatched, DeliversEverything) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const std::size_t n = rng.uniform(2, 12);
        Clique net(n);
        std::vector<Message> d;
        const std::size_t cnt = rng.uniform(0, 4 * n * n);
        for (std::size_t q = 0; q < cnt; ++q)
            d.push_back(Message::make(static_cast<NodeId>(rng.uniform(0, n - 1)), static_cast<NodeId>(rng.uniform(0, n - 1)), {q}));
        auto got = net.route_batched(d);
        std::vector<Word> ids;
        for (NodeId v = 0; v < n; ++v)
            for (const Message& m : got[v]) {
                EXPECT_EQ(m.dst, v);
                ids.push_back(m[0]);
            }
        std::sort(ids.begin(), ids.end());
        ASSERT_EQ(ids.size(), cnt);
        for (std::size_t q = 0; q < cnt; ++q) EXPECT_EQ(ids[q], q);
    }
}

}  // namespace
}  // namespace ccsp
