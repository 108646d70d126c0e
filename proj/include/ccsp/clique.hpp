#pragma once

// Deterministic round-synchronous Congested Clique simulator.
//
// Every transfer between nodes goes through one of the entry points below,
// and every one of them is accounted in the RoundLedger:
//   exchange()       one synchronous round, at most one message per ordered pair
//   broadcast()      every node sends the same words to every other node
//   route()          one invocation of the O(1)-round routing primitive
//   route_batched()  arbitrary demands split into valid routing invocations
//   sort_global()    one invocation of the O(1)-round sorting primitive
//   charge()         centrally computed steps with a fixed round cost
//
// Routing and sorting are charged primitives: their preconditions are checked,
// their delivery is exact, but their internal schedule is not simulated.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ccsp/errors.hpp"

namespace ccsp {

using NodeId = std::uint32_t;
using Word = std::uint64_t;

inline constexpr std::size_t kMaxPayload = 4;

struct Message {
    NodeId src = 0;
    NodeId dst = 0;
    std::uint8_t len = 0;
    std::array<Word, kMaxPayload> payload{};

    static Message make(NodeId src, NodeId dst, std::initializer_list<Word> words) {
        Message m;
        m.src = src;
        m.dst = dst;
        if (words.size() > kMaxPayload) throw BandwidthViolation("message payload exceeds storage");
        for (Word w : words) m.payload[m.len++] = w;
        return m;
    }

    void push(Word w) {
        if (len == kMaxPayload) throw BandwidthViolation("message payload exceeds storage");
        payload[len++] = w;
    }

    std::span<const Word> words() const { return {payload.data(), len}; }
    Word operator[](std::size_t i) const { return payload[i]; }
};

using Inboxes = std::vector<std::vector<Message>>;

struct RoundLedger {
    std::uint64_t rounds = 0;          // synchronous rounds actually executed
    std::uint64_t charged_rounds = 0;  // rounds + primitive costs
    std::uint64_t messages = 0;
    std::uint64_t peak_pair_load = 0;  // max messages on one ordered pair in one round
    std::map<std::string, std::uint64_t> primitives;
    std::map<std::string, std::uint64_t> events;  // zero-cost bookkeeping (restarts, replays)

    /// Difference of monotone counters; peak load is carried as-is.
    RoundLedger since(const RoundLedger& before) const {
        RoundLedger d;
        d.rounds = rounds - before.rounds;
        d.charged_rounds = charged_rounds - before.charged_rounds;
        d.messages = messages - before.messages;
        d.peak_pair_load = peak_pair_load;
        for (const auto& [k, v] : primitives) {
            auto it = before.primitives.find(k);
            std::uint64_t b = it == before.primitives.end() ? 0 : it->second;
            if (v != b) d.primitives[k] = v - b;
        }
        for (const auto& [k, v] : events) {
            auto it = before.events.find(k);
            std::uint64_t b = it == before.events.end() ? 0 : it->second;
            if (v != b) d.events[k] = v - b;
        }
        return d;
    }

    void add(const RoundLedger& delta, std::uint64_t times = 1) {
        rounds += delta.rounds * times;
        charged_rounds += delta.charged_rounds * times;
        messages += delta.messages * times;
        peak_pair_load = std::max(peak_pair_load, delta.peak_pair_load);
        for (const auto& [k, v] : delta.primitives) primitives[k] += v * times;
        for (const auto& [k, v] : delta.events) events[k] += v * times;
    }

    bool operator==(const RoundLedger&) const = default;
};

struct CliqueConfig {
    std::size_t n = 2;
    std::size_t bandwidth = 3;  // words per message
    std::uint64_t cost_route = 2;
    std::uint64_t cost_sort = 2;
    std::uint64_t cost_hit = 3;
    std::uint64_t round_cap = 0;  // 0 means 10 n^2
};

namespace primitive {
inline constexpr std::string_view kRoute = "route";
inline constexpr std::string_view kSort = "sort";
inline constexpr std::string_view kHittingSet = "hitting_set";
}  // namespace primitive

class Clique {
public:
    explicit Clique(CliqueConfig cfg) : cfg_(cfg) {
        if (cfg_.n < 2) throw PreconditionError("clique needs at least two nodes");
        if (cfg_.bandwidth == 0 || cfg_.bandwidth > kMaxPayload)
            throw PreconditionError("bandwidth must be in [1, " + std::to_string(kMaxPayload) + "]");
        if (cfg_.round_cap == 0) cfg_.round_cap = 10 * cfg_.n * cfg_.n;
    }
    explicit Clique(std::size_t n) : Clique(CliqueConfig{.n = n}) {}

    std::size_t size() const noexcept { return cfg_.n; }
    std::size_t bandwidth() const noexcept { return cfg_.bandwidth; }
    const CliqueConfig& config() const noexcept { return cfg_; }
    const RoundLedger& ledger() const noexcept { return ledger_; }

    /// One synchronous round. Self-addressed messages are delivered for free.
    Inboxes exchange(std::span<const Message> msgs) {
        const std::size_t n = cfg_.n;
        std::vector<std::uint64_t> pairs;
        pairs.reserve(msgs.size());
        for (const Message& m : msgs) {
            validate_endpoints(m);
            if (m.src != m.dst) pairs.push_back(std::uint64_t{m.src} * n + m.dst);
        }
        std::sort(pairs.begin(), pairs.end());
        if (std::adjacent_find(pairs.begin(), pairs.end()) != pairs.end())
            throw BandwidthViolation("two messages on one ordered pair in one round");
        ledger_.rounds += 1;
        ledger_.charged_rounds += 1;
        ledger_.messages += pairs.size();
        if (!pairs.empty()) ledger_.peak_pair_load = std::max<std::uint64_t>(ledger_.peak_pair_load, 1);
        return deliver(msgs);
    }

    /// Node v sends words[v] to every other node; returns the table everyone
    /// now knows. Takes ceil(max_len / B) rounds with one message per ordered
    /// pair per round by construction, so messages are counted, not built.
    std::vector<std::vector<Word>> broadcast(std::vector<std::vector<Word>> words) {
        if (words.size() != cfg_.n) throw PreconditionError("broadcast needs one entry per node");
        std::size_t longest = 0;
        for (const auto& w : words) longest = std::max(longest, w.size());
        const std::uint64_t r = (longest + cfg_.bandwidth - 1) / cfg_.bandwidth;
        if (r > 0) {
            std::uint64_t senders = 0;
            for (const auto& w : words) senders += w.empty() ? 0 : (w.size() + cfg_.bandwidth - 1) / cfg_.bandwidth;
            ledger_.rounds += r;
            ledger_.charged_rounds += r;
            ledger_.messages += senders * (cfg_.n - 1);
            ledger_.peak_pair_load = std::max<std::uint64_t>(ledger_.peak_pair_load, 1);
        }
        return words;
    }

    /// Broadcast of a single word per node.
    std::vector<Word> broadcast_word(const std::vector<Word>& value) {
        std::vector<std::vector<Word>> w(cfg_.n);
        for (std::size_t v = 0; v < cfg_.n; ++v) w[v] = {value[v]};
        auto table = broadcast(std::move(w));
        std::vector<Word> out(cfg_.n);
        for (std::size_t v = 0; v < cfg_.n; ++v) out[v] = table[v][0];
        return out;
    }

    /// One routing invocation: every node sends and receives at most n messages.
    Inboxes route(std::span<const Message> demands) {
        const std::size_t n = cfg_.n;
        std::vector<std::size_t> sent(n, 0), recv(n, 0);
        std::uint64_t moved = 0;
        for (const Message& m : demands) {
            validate_endpoints(m);
            if (m.src == m.dst) continue;
            ++moved;
            if (++sent[m.src] > n) throw DemandViolation("node " + std::to_string(m.src) + " sends more than n messages");
            if (++recv[m.dst] > n) throw DemandViolation("node " + std::to_string(m.dst) + " receives more than n messages");
        }
        charge(primitive::kRoute, cfg_.cost_route);
        ledger_.messages += moved;
        return deliver(demands);
    }

    /// Splits arbitrary demands into routing invocations that each satisfy the
    /// n-send / n-receive precondition (first fit), and routes them in order.
    /// Uses at most 2 * ceil(max_load / n) invocations.
    Inboxes route_batched(std::span<const Message> demands) {
        const std::size_t n = cfg_.n;
        std::vector<std::vector<std::uint32_t>> send_load, recv_load;
        std::vector<std::vector<Message>> batches;
        std::vector<std::size_t> first_send(n, 0), first_recv(n, 0);
        Inboxes local(n);
        for (const Message& m : demands) {
            validate_endpoints(m);
            if (m.src == m.dst) {
                local[m.dst].push_back(m);
                continue;
            }
            std::size_t b = std::max(first_send[m.src], first_recv[m.dst]);
            while (b < batches.size() && (send_load[b][m.src] == n || recv_load[b][m.dst] == n)) ++b;
            if (b == batches.size()) {
                batches.emplace_back();
                send_load.emplace_back(n, 0);
                recv_load.emplace_back(n, 0);
            }
            batches[b].push_back(m);
            if (++send_load[b][m.src] == n && first_send[m.src] == b) ++first_send[m.src];
            if (++recv_load[b][m.dst] == n && first_recv[m.dst] == b) ++first_recv[m.dst];
        }
        Inboxes out = std::move(local);
        for (const auto& batch : batches) {
            Inboxes got = route(batch);
            for (std::size_t v = 0; v < n; ++v)
                out[v].insert(out[v].end(), got[v].begin(), got[v].end());
        }
        for (auto& box : out)
            std::stable_sort(box.begin(), box.end(), [](const Message& x, const Message& y) { return x.src < y.src; });
        return out;
    }

    /// Global sort: each node holds exactly n entries; afterwards node i holds
    /// the i-th batch of n entries of the global order.
    template <class T, class Less>
    std::vector<std::vector<T>> sort_global(std::vector<std::vector<T>> entries, Less less) {
        const std::size_t n = cfg_.n;
        if (entries.size() != n) throw ArityViolation("sort needs one batch per node");
        std::vector<T> all;
        all.reserve(n * n);
        for (std::size_t v = 0; v < n; ++v) {
            if (entries[v].size() != n)
                throw ArityViolation("node " + std::to_string(v) + " holds " + std::to_string(entries[v].size()) +
                                     " entries, expected " + std::to_string(n));
            all.insert(all.end(), entries[v].begin(), entries[v].end());
        }
        std::stable_sort(all.begin(), all.end(), less);
        charge(primitive::kSort, cfg_.cost_sort);
        ledger_.messages += n * n;
        std::vector<std::vector<T>> out(n);
        for (std::size_t v = 0; v < n; ++v)
            out[v].assign(all.begin() + static_cast<std::ptrdiff_t>(v * n),
                          all.begin() + static_cast<std::ptrdiff_t>((v + 1) * n));
        return out;
    }

    template <class T>
    std::vector<std::vector<T>> sort_global(std::vector<std::vector<T>> entries) {
        return sort_global(std::move(entries), std::less<T>{});
    }

    /// Charges one invocation of a named primitive.
    void charge(std::string_view name, std::uint64_t cost) {
        ledger_.primitives[std::string(name)] += 1;
        ledger_.charged_rounds += cost;
    }

    void note(std::string_view event, std::uint64_t count = 1) { ledger_.events[std::string(event)] += count; }

    /// Re-applies a ledger delta recorded from an identical computation.
    void replay(const RoundLedger& delta, std::uint64_t times) {
        if (times == 0) return;
        ledger_.add(delta, times);
    }

    /// Runs a node program in lockstep until every node has halted and no
    /// message is in flight. A halted node is woken when it receives mail.
    ///
    /// Program::step(NodeId v, uint64_t round, span<const Message> inbox,
    ///               vector<Message>& outbox) -> bool (true = halted)
    template <class Program>
    std::uint64_t run(Program& program) {
        const std::size_t n = cfg_.n;
        Inboxes inbox(n);
        std::vector<char> halted(n, 0);
        std::uint64_t executed = 0;
        for (std::uint64_t r = 0;; ++r) {
            std::vector<Message> out;
            bool all_halted = true;
            for (NodeId v = 0; v < n; ++v) {
                if (!halted[v] || !inbox[v].empty()) {
                    const std::size_t before = out.size();
                    halted[v] = program.step(v, r, std::span<const Message>(inbox[v]), out) ? 1 : 0;
                    for (std::size_t i = before; i < out.size(); ++i)
                        if (out[i].src != v) throw InvariantViolation("node program forged a sender id");
                }
                all_halted = all_halted && halted[v];
            }
            if (out.empty() && all_halted) return executed;
            if (executed >= cfg_.round_cap)
                throw NonTermination("node program exceeded the round cap of " + std::to_string(cfg_.round_cap));
            inbox = exchange(out);
            ++executed;
        }
    }

private:
    void validate_endpoints(const Message& m) const {
        if (m.src >= cfg_.n || m.dst >= cfg_.n) throw InvariantViolation("message endpoint outside the clique");
        if (m.len > cfg_.bandwidth)
            throw BandwidthViolation("payload of " + std::to_string(m.len) + " words exceeds B = " +
                                     std::to_string(cfg_.bandwidth));
    }

    Inboxes deliver(std::span<const Message> msgs) const {
        Inboxes box(cfg_.n);
        for (const Message& m : msgs) box[m.dst].push_back(m);
        for (auto& b : box)
            std::stable_sort(b.begin(), b.end(), [](const Message& x, const Message& y) { return x.src < y.src; });
        return box;
    }

    CliqueConfig cfg_;
    RoundLedger ledger_;
};

}  // namespace ccsp
