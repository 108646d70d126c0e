#pragma once

// Distance primitives on top of the matrix engine: k-nearest, source
// detection and distance through sets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccsp/clique.hpp"
#include "ccsp/errors.hpp"
#include "ccsp/graph.hpp"
#include "ccsp/matmul.hpp"
#include "ccsp/near.hpp"
#include "ccsp/sparse_matrix.hpp"

namespace ccsp {

inline std::size_t ceil_log2(std::size_t x) {
    std::size_t r = 0;
    while ((std::size_t{1} << r) < x) ++r;
    return r;
}

/// Rows of an augmented matrix as lists sorted by (weight, hops, id).
inline NearLists near_lists(const SparseMatrix<AugMinPlus>& m) {
    NearLists out(m.size());
    for (std::size_t r = 0; r < m.size(); ++r) {
        for (const auto& e : m.row(r)) out[r].push_back({e.col, e.val});
        std::sort(out[r].begin(), out[r].end(), near_less);
    }
    return out;
}

namespace detail {

// Runs `step` up to `iterations` times. Once an iteration leaves the values
// unchanged, every later one is identical, so its ledger cost is replayed
// instead of recomputed.
template <class Step>
std::size_t iterate_to_fixpoint(Clique& net, std::size_t iterations, SparseMatrix<AugMinPlus>& cur, Step&& step) {
    for (std::size_t i = 0; i < iterations; ++i) {
        const RoundLedger before = net.ledger();
        SparseMatrix<AugMinPlus> next = step(cur);
        const bool same = next.values_only() == cur.values_only();
        cur = std::move(next);
        if (same) {
            const std::size_t left = iterations - i - 1;
            net.replay(net.ledger().since(before), left);
            if (left > 0) net.note("fixpoint_replay", left);
            return i + 1;
        }
    }
    return iterations;
}

}  // namespace detail

struct KNearest {
    std::size_t k = 1;
    NearLists sets;                               // N_k(v), sorted by (weight, hops, id)
    std::vector<SparseMatrix<AugMinPlus>> levels; // filtered powers; witnesses index the level below

    /// Path from v to u in N_k(v) recovered by expanding witnesses.
    std::vector<NodeId> path(NodeId v, NodeId u) const { return walk(levels.size() - 1, v, u); }

private:
    std::vector<NodeId> walk(std::size_t level, NodeId v, NodeId u) const {
        if (v == u) return {v};
        const Entry<AugMinPlus>* e = levels[level].find(v, u);
        if (!e) throw InvariantViolation("witness chain leaves the stored levels");
        if (level == 0) return {v, u};
        const NodeId m = e->wit;
        if (m == kNoWitness) throw InvariantViolation("missing witness");
        auto left = walk(level - 1, v, m);
        auto right = walk(level - 1, m, u);
        left.insert(left.end(), right.begin() + 1, right.end());
        return left;
    }
};

/// Exact distances to the k nearest nodes of every node: the k lightest
/// entries of the weight matrix, squared ceil(log2 k) times with filter k.
inline KNearest k_nearest(Clique& net, const SparseMatrix<AugMinPlus>& w, std::size_t k) {
    const std::size_t n = net.size();
    if (k < 1) throw PreconditionError("k must be at least 1");
    if (w.size() != n) throw PreconditionError("matrix size differs from the clique size");
    k = std::min(k, n);
    KNearest out;
    out.k = k;
    SparseMatrix<AugMinPlus> cur = keep_smallest(w, k);
    out.levels.push_back(cur);
    const std::size_t squarings = ceil_log2(k);
    detail::iterate_to_fixpoint(net, squarings, cur, [&](const SparseMatrix<AugMinPlus>& x) {
        auto next = filtered_mm(net, x, x, k).product;
        out.levels.push_back(next);
        return next;
    });
    out.sets = near_lists(cur);
    return out;
}

inline KNearest k_nearest(Clique& net, const Graph& g, std::size_t k) { return k_nearest(net, weight_matrix(g), k); }

enum class SourceVariant { Auto, Filtered, Rectangular };

struct SourceDetection {
    NearLists tables;  // per node: the k nearest sources within d hops
    SourceVariant used = SourceVariant::Auto;
    std::size_t iterations = 0;  // products actually computed
};

/// Predicted round costs of the two variants, without constants.
inline std::pair<double, double> source_variant_costs(std::size_t n, std::uint64_t nz, std::size_t sources, std::size_t d,
                                                      std::size_t k) {
    const double m3 = std::cbrt(static_cast<double>(nz));
    const double dn = static_cast<double>(n);
    const double log_n = static_cast<double>(std::max<std::size_t>(1, ceil_log2(n)));
    const double filtered = (m3 * std::pow(static_cast<double>(k), 2.0 / 3.0) / dn + log_n) * static_cast<double>(d);
    const double rect = (m3 * std::pow(static_cast<double>(sources), 2.0 / 3.0) / dn + 1.0) * static_cast<double>(d);
    return {filtered, rect};
}

/// (S, d, k)-source detection over the augmented weight matrix w: for every
/// node the k sources with the smallest d-hop distance, ordered by
/// (weight, hops, id).
inline SourceDetection source_detection(Clique& net, const SparseMatrix<AugMinPlus>& w, std::vector<NodeId> sources,
                                        std::size_t d, std::size_t k, SourceVariant variant = SourceVariant::Auto) {
    const std::size_t n = net.size();
    if (w.size() != n) throw PreconditionError("matrix size differs from the clique size");
    if (sources.empty()) throw EmptySources("source set is empty");
    if (d < 1) throw PreconditionError("hop bound d must be at least 1");
    if (k < 1) throw PreconditionError("k must be at least 1");
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    for (NodeId s : sources)
        if (s >= n) throw PreconditionError("source outside [0, n)");
    const std::size_t m = sources.size();
    if (variant == SourceVariant::Filtered && k > m)
        throw PreconditionError("the filtered variant needs k <= |S|");
    if (variant == SourceVariant::Auto) {
        auto [c1, c2] = source_variant_costs(n, w.nz(), m, d, k);
        variant = k <= m && c1 <= c2 ? SourceVariant::Filtered : SourceVariant::Rectangular;
    }
    k = std::min(k, m);

    std::vector<char> is_source(n, 0);
    for (NodeId s : sources) is_source[s] = 1;
    SparseMatrix<AugMinPlus> cur(n);
    for (NodeId v = 0; v < n; ++v)
        for (const auto& e : w.row(v))
            if (is_source[e.col]) cur.row(v).push_back(e);

    SourceDetection out;
    out.used = variant;
    if (variant == SourceVariant::Filtered) {
        cur = keep_smallest(cur, k);
        out.iterations = detail::iterate_to_fixpoint(net, d - 1, cur, [&](const SparseMatrix<AugMinPlus>& x) {
            return filtered_mm(net, w, x, k).product;
        });
    } else {
        out.iterations = detail::iterate_to_fixpoint(net, d - 1, cur, [&](const SparseMatrix<AugMinPlus>& x) {
            return sparse_mm(net, w, x, static_cast<std::uint64_t>(m)).product;
        });
        cur = keep_smallest(cur, k);
    }
    out.tables = near_lists(cur);
    return out;
}

inline SourceDetection source_detection(Clique& net, const Graph& g, std::vector<NodeId> sources, std::size_t d,
                                        std::size_t k, SourceVariant variant = SourceVariant::Auto) {
    return source_detection(net, weight_matrix(g), std::move(sources), d, k, variant);
}

/// One member w of W_v with the owner's estimates d(v,w) and d(w,v).
struct ThroughEntry {
    NodeId via = 0;
    Word to_via = kInf;
    Word from_via = kInf;
};

using ThroughSets = std::vector<std::vector<ThroughEntry>>;

/// min over w in W_v and W_u of d(v,w) + d(w,u), with the minimizing w as
/// witness; absent entries are infinite. Every node u first hands d(w,u) to
/// each w in W_u (one round), then a min-plus product of the two tables.
inline SparseMatrix<MinPlus> distance_through_sets(Clique& net, const ThroughSets& sets) {
    const std::size_t n = net.size();
    if (sets.size() != n) throw PreconditionError("one set per node expected");
    SparseMatrix<MinPlus> left(n), right(n);
    std::vector<Message> msgs;
    for (NodeId v = 0; v < n; ++v)
        for (const ThroughEntry& e : sets[v]) {
            if (e.via >= n) throw PreconditionError("set member outside [0, n)");
            if (e.to_via == kInf || e.from_via == kInf) throw PreconditionError("set members need finite estimates");
            if (e.to_via < left.at(v, e.via)) left.set(v, e.via, e.to_via);
            msgs.push_back(Message::make(v, e.via, {e.from_via}));
        }
    std::sort(msgs.begin(), msgs.end(), [](const Message& x, const Message& y) {
        return std::tie(x.src, x.dst, x.payload[0]) < std::tie(y.src, y.dst, y.payload[0]);
    });
    msgs.erase(std::unique(msgs.begin(), msgs.end(), [](const Message& x, const Message& y) {
                   return x.src == y.src && x.dst == y.dst;
               }),
               msgs.end());
    Inboxes got = net.exchange(msgs);
    for (NodeId w = 0; w < n; ++w)
        for (const Message& m : got[w]) right.set(w, m.src, m[0]);
    return sparse_mm(net, left, right, static_cast<std::uint64_t>(n)).product;
}

}  // namespace ccsp
