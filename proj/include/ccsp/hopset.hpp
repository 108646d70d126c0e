#pragma once

// Deterministic hopset from bunches plus log n rounds of bounded source
// detection among the hitting-set nodes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "ccsp/clique.hpp"
#include "ccsp/dist_tools.hpp"
#include "ccsp/errors.hpp"
#include "ccsp/graph.hpp"
#include "ccsp/near.hpp"

namespace ccsp {

/// Greedy hitting set: repeatedly takes the node contained in the most
/// families not yet hit (smallest id on ties). Charged as one primitive.
/// Throws FamilyTooSmall when a family has fewer than k members.
inline std::vector<NodeId> hitting_set(Clique& net, const std::vector<std::vector<NodeId>>& families, std::size_t k) {
    const std::size_t n = net.size();
    for (std::size_t f = 0; f < families.size(); ++f) {
        if (families[f].size() < k)
            throw FamilyTooSmall("family " + std::to_string(f) + " has " + std::to_string(families[f].size()) +
                                 " members, fewer than k = " + std::to_string(k));
        for (NodeId u : families[f])
            if (u >= n) throw PreconditionError("family member outside [0, n)");
    }
    net.charge(primitive::kHittingSet, net.config().cost_hit);

    std::vector<std::vector<NodeId>> fams(families.size());
    std::vector<std::vector<std::size_t>> member_of(n);
    for (std::size_t f = 0; f < families.size(); ++f) {
        fams[f] = families[f];
        std::sort(fams[f].begin(), fams[f].end());
        fams[f].erase(std::unique(fams[f].begin(), fams[f].end()), fams[f].end());
        for (NodeId u : fams[f]) member_of[u].push_back(f);
    }
    std::vector<char> hit(families.size(), 0);
    std::vector<std::size_t> gain(n);
    for (NodeId u = 0; u < n; ++u) gain[u] = member_of[u].size();
    std::size_t left = families.size();
    std::vector<NodeId> chosen;
    while (left > 0) {
        NodeId best = 0;
        for (NodeId u = 1; u < n; ++u)
            if (gain[u] > gain[best]) best = u;
        if (gain[best] == 0) throw InvariantViolation("hitting set stalled on an empty family");
        chosen.push_back(best);
        for (std::size_t f : member_of[best]) {
            if (hit[f]) continue;
            hit[f] = 1;
            --left;
            for (NodeId u : fams[f]) --gain[u];
        }
    }
    std::sort(chosen.begin(), chosen.end());
    if (k > 0 && !families.empty()) {
        const double bound = 4.0 * static_cast<double>(n) / static_cast<double>(k) *
                             static_cast<double>(std::max<std::size_t>(1, ceil_log2(n)));
        if (static_cast<double>(chosen.size()) > bound)
            throw InvariantViolation("hitting set exceeds 4 (n/k) log n members");
    }
    return chosen;
}

struct HopsetParams {
    std::size_t n = 0;
    double eps = 0.5;
    std::size_t levels = 1;  // ceil(log2 n), at least 1
    double eps0 = 0.5;       // eps / levels
    double delta = 0.125;    // eps0 / 4
    std::size_t beta = 1;    // ceil(3 / delta) = ceil(12 levels / eps)
    std::size_t k = 1;       // bunch radius ceil(sqrt(n) log2 n), at most n
};

inline HopsetParams hopset_params(std::size_t n, double eps, std::optional<std::size_t> k_override = std::nullopt) {
    if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("eps must lie in (0, 1)");
    HopsetParams p;
    p.n = n;
    p.eps = eps;
    p.levels = std::max<std::size_t>(1, ceil_log2(n));
    p.eps0 = eps / static_cast<double>(p.levels);
    p.delta = p.eps0 / 4.0;
    // 12 L / eps computed directly; the guard absorbs rounding of the quotient
    p.beta = static_cast<std::size_t>(std::ceil(12.0 * static_cast<double>(p.levels) / eps - 1e-9));
    const double root = std::sqrt(static_cast<double>(n));
    const std::size_t k = static_cast<std::size_t>(std::ceil(root * static_cast<double>(std::max<std::size_t>(1, ceil_log2(n))) - 1e-9));
    p.k = std::clamp<std::size_t>(k_override.value_or(k), 1, n);
    return p;
}

struct HopEdge {
    NodeId u = 0;  // u < v
    NodeId v = 0;
    Word w = 0;
    std::size_t level = 0;  // 0 for bunch edges, else the first level that added the edge

    friend bool operator==(const HopEdge&, const HopEdge&) = default;
};

struct Bunch {
    NodeId pivot = 0;
    std::vector<Near> members;  // strictly closer than the pivot, plus the pivot
};

struct Hopset {
    HopsetParams params;
    std::vector<NodeId> hit;          // hitting set of the k-nearest families
    std::vector<Bunch> bunches;
    KNearest nearest;
    std::vector<HopEdge> edges;       // sorted by (u, v)
    std::vector<std::vector<HopEdge>> ladder;  // edge set after each level; ladder[0] = bunch edges
};

/// g with extra undirected edges (minimum weight per pair in the matrix form).
inline Graph augmented_graph(const Graph& g, std::span<const HopEdge> extra) {
    Graph h = g;
    for (const HopEdge& e : extra)
        if (e.u != e.v) h.add_edge(e.u, e.v, e.w);
    return h;
}

inline SparseMatrix<AugMinPlus> augmented_matrix(const Graph& g, std::span<const HopEdge> extra) {
    return weight_matrix(augmented_graph(g, extra));
}

namespace detail {

inline void merge_edge(std::map<std::pair<NodeId, NodeId>, HopEdge>& set, NodeId a, NodeId b, Word w, std::size_t level) {
    if (a == b) return;
    auto key = std::minmax(a, b);
    auto it = set.find(key);
    if (it == set.end())
        set[key] = {key.first, key.second, w, level};
    else
        it->second.w = std::min(it->second.w, w);
}

inline std::vector<HopEdge> edge_list(const std::map<std::pair<NodeId, NodeId>, HopEdge>& set) {
    std::vector<HopEdge> out;
    for (const auto& [k, e] : set) out.push_back(e);
    return out;
}

// Every node v broadcasts one bit: membership in `members`.
inline std::vector<char> announce_membership(Clique& net, const std::vector<NodeId>& members) {
    std::vector<Word> bit(net.size(), 0);
    for (NodeId a : members) bit[a] = 1;
    bit = net.broadcast_word(bit);
    return std::vector<char>(bit.begin(), bit.end());
}

// Endpoint notification: v tells every new neighbor u the weight of edge {v,u}.
inline void notify_endpoints(Clique& net, std::vector<Edge> arcs) {
    std::sort(arcs.begin(), arcs.end(), [](const Edge& x, const Edge& y) { return std::tie(x.u, x.v, x.w) < std::tie(y.u, y.v, y.w); });
    arcs.erase(std::unique(arcs.begin(), arcs.end(), [](const Edge& x, const Edge& y) { return x.u == y.u && x.v == y.v; }),
               arcs.end());
    std::vector<Message> msgs;
    for (const Edge& e : arcs) msgs.push_back(Message::make(e.u, e.v, {e.w}));
    net.exchange(msgs);
}

}  // namespace detail

/// Pivot p(v) = first member of N_k(v) in the hitting set; bunch = members
/// strictly closer than the pivot, plus the pivot. Throws HitFailure when
/// some N_k(v) misses the set.
inline std::vector<Bunch> compute_bunches(const NearLists& nearest, const std::vector<char>& in_hit) {
    std::vector<Bunch> out(nearest.size());
    for (NodeId v = 0; v < nearest.size(); ++v) {
        const auto& list = nearest[v];
        auto p = std::find_if(list.begin(), list.end(), [&](const Near& x) { return in_hit[x.node]; });
        if (p == list.end()) throw HitFailure("the k nearest nodes of node " + std::to_string(v) + " miss the hitting set");
        out[v].pivot = p->node;
        for (auto it = list.begin(); it != p; ++it)
            if (it->dist.w < p->dist.w) out[v].members.push_back(*it);
        out[v].members.push_back(*p);
    }
    return out;
}

/// Bunch edges {v,u} for v outside the hitting set and u in B(v).
inline std::vector<HopEdge> bunch_edges(const std::vector<Bunch>& bunches, const std::vector<char>& in_hit) {
    std::map<std::pair<NodeId, NodeId>, HopEdge> set;
    for (NodeId v = 0; v < bunches.size(); ++v) {
        if (in_hit[v]) continue;
        for (const Near& m : bunches[v].members) detail::merge_edge(set, v, m.node, m.dist.w, 0);
    }
    return detail::edge_list(set);
}

/// Hitting set for the k-nearest families. Families smaller than k (components
/// with fewer than k nodes) are hit by their smallest member instead.
inline std::vector<NodeId> hit_nearest_sets(Clique& net, const NearLists& nearest, std::size_t k) {
    std::vector<std::vector<NodeId>> full;
    std::vector<NodeId> extra;
    for (const auto& list : nearest) {
        std::vector<NodeId> fam;
        for (const Near& x : list) fam.push_back(x.node);
        if (fam.size() >= k)
            full.push_back(std::move(fam));
        else
            extra.push_back(*std::min_element(fam.begin(), fam.end()));
    }
    auto hit = hitting_set(net, full, k);
    hit.insert(hit.end(), extra.begin(), extra.end());
    std::sort(hit.begin(), hit.end());
    hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
    return hit;
}

/// (beta, eps)-hopset of an undirected graph.
inline Hopset build_hopset(Clique& net, const Graph& g, double eps, std::optional<std::size_t> k_override = std::nullopt) {
    const std::size_t n = net.size();
    if (g.size() != n) throw PreconditionError("graph size differs from the clique size");
    if (g.directed()) throw PreconditionError("hopsets need an undirected graph");
    Hopset hs;
    hs.params = hopset_params(n, eps, k_override);
    const std::size_t k = hs.params.k;

    hs.nearest = k_nearest(net, g, k);
    hs.hit = hit_nearest_sets(net, hs.nearest.sets, k);
    const std::vector<char> in_hit = detail::announce_membership(net, hs.hit);
    hs.bunches = compute_bunches(hs.nearest.sets, in_hit);

    std::map<std::pair<NodeId, NodeId>, HopEdge> set;
    std::vector<Edge> notify;
    for (const HopEdge& e : bunch_edges(hs.bunches, in_hit)) {
        set[{e.u, e.v}] = e;
        notify.push_back({e.u, e.v, e.w});
        notify.push_back({e.v, e.u, e.w});
    }
    detail::notify_endpoints(net, notify);
    hs.ladder.push_back(detail::edge_list(set));

    const std::size_t depth = 4 * hs.params.beta;
    for (std::size_t level = 1; level <= hs.params.levels; ++level) {
        const RoundLedger before = net.ledger();
        const auto current = detail::edge_list(set);
        auto w = augmented_matrix(g, current);
        auto sd = source_detection(net, w, hs.hit, depth, hs.hit.size());
        notify.clear();
        for (NodeId v : hs.hit)
            for (const Near& x : sd.tables[v]) {
                if (x.node == v) continue;
                detail::merge_edge(set, v, x.node, x.dist.w, level);
                notify.push_back({v, x.node, x.dist.w});
            }
        detail::notify_endpoints(net, notify);
        auto next = detail::edge_list(set);
        hs.ladder.push_back(next);
        if (next == current) {
            // later levels see the same graph and add nothing
            const std::size_t left = hs.params.levels - level;
            net.replay(net.ledger().since(before), left);
            if (left > 0) net.note("fixpoint_replay", left);
            for (std::size_t q = 0; q < left; ++q) hs.ladder.push_back(next);
            break;
        }
    }
    hs.edges = detail::edge_list(set);
    return hs;
}

}  // namespace ccsp
