#pragma once

// End-user algorithms: multi-source distances, weighted and unweighted
// all-pairs approximations, exact single-source distances and a diameter
// estimate.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccsp/clique.hpp"
#include "ccsp/dist_tools.hpp"
#include "ccsp/errors.hpp"
#include "ccsp/graph.hpp"
#include "ccsp/hopset.hpp"
#include "ccsp/near.hpp"

namespace ccsp {

/// Pipeline step that last improved an estimate.
enum class Step : std::uint8_t {
    None,
    Self,
    Edge,
    Nearest,
    ThroughNearest,
    HubDistances,
    ThroughHubs,
    LowNearest,
    LowThrough,
    LowHubDistances,
    Pivot,
    ThreeHop,
};

inline std::string_view step_name(Step s) {
    static constexpr std::array<std::string_view, 12> names{
        "none",         "self",          "edge",        "nearest",           "through_nearest", "hub_distances",
        "through_hubs", "low_nearest",   "low_through", "low_hub_distances", "pivot",           "three_hop"};
    return names[static_cast<std::size_t>(s)];
}

/// n x n table of distance estimates. Row v is held by node v; improvements
/// are made by the row owner and mirrored to the other endpoint at the next
/// symmetrize() barrier.
class DistanceEstimates {
public:
    DistanceEstimates() = default;
    explicit DistanceEstimates(std::size_t n) : n_(n), dist_(n * n, kInf), step_(n * n, Step::None), dirty_(n * n, 0) {
        for (NodeId v = 0; v < n; ++v) {
            dist_[idx(v, v)] = 0;
            step_[idx(v, v)] = Step::Self;
        }
    }

    std::size_t size() const noexcept { return n_; }
    Word at(NodeId u, NodeId v) const { return dist_[idx(u, v)]; }
    Step step(NodeId u, NodeId v) const { return step_[idx(u, v)]; }

    bool improve(NodeId u, NodeId v, Word value, Step s) {
        const std::size_t i = idx(u, v);
        if (value >= dist_[i]) return false;
        dist_[i] = value;
        step_[i] = s;
        dirty_[i] = 1;
        return true;
    }

    /// One round: every entry (u,v) improved since the last barrier is sent
    /// from u to v, and v keeps the smaller value.
    void symmetrize(Clique& net) {
        std::vector<Message> msgs;
        for (NodeId u = 0; u < n_; ++u)
            for (NodeId v = 0; v < n_; ++v)
                if (dirty_[idx(u, v)] && u != v) msgs.push_back(Message::make(u, v, {dist_[idx(u, v)]}));
        std::fill(dirty_.begin(), dirty_.end(), 0);
        Inboxes got = net.exchange(msgs);
        for (NodeId v = 0; v < n_; ++v)
            for (const Message& m : got[v]) {
                const std::size_t i = idx(v, m.src);
                if (m[0] < dist_[i]) {
                    dist_[i] = m[0];
                    step_[i] = step_[idx(m.src, v)];
                }
            }
    }

    bool symmetric() const {
        for (NodeId u = 0; u < n_; ++u)
            for (NodeId v = u + 1; v < n_; ++v)
                if (at(u, v) != at(v, u)) return false;
        return true;
    }

private:
    std::size_t idx(NodeId u, NodeId v) const { return static_cast<std::size_t>(u) * n_ + v; }

    std::size_t n_ = 0;
    std::vector<Word> dist_;
    std::vector<Step> step_;
    std::vector<char> dirty_;
};

inline std::size_t ceil_root(std::size_t n, double power) {
    const double x = std::pow(static_cast<double>(n), power);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(x - 1e-9)), 1, n);
}

inline void require_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("eps must lie in (0, 1)");
}

inline void require_undirected(Clique& net, const Graph& g) {
    if (g.size() != net.size()) throw PreconditionError("graph size differs from the clique size");
    if (g.directed()) throw PreconditionError("directed graphs are not supported");
}

// ---------------------------------------------------------------- MSSP

struct MsspResult {
    std::vector<NodeId> sources;         // sorted, distinct
    std::vector<std::vector<Word>> dist; // dist[i][v]: estimate between sources[i] and v
    std::size_t beta = 0;
    std::size_t hopset_edges = 0;

    Word at(std::size_t source_index, NodeId v) const { return dist[source_index][v]; }
};

/// (1+eps)-approximate distances from every source: source detection on
/// G plus a hopset, with hop bound beta and k = |S|. A prebuilt hopset for g
/// may be passed in.
inline MsspResult mssp(Clique& net, const Graph& g, std::vector<NodeId> sources, double eps,
                       const Hopset* prebuilt = nullptr) {
    require_undirected(net, g);
    require_eps(eps);
    if (sources.empty()) throw EmptySources("source set is empty");
    std::sort(sources.begin(), sources.end());
    sources.erase(std::unique(sources.begin(), sources.end()), sources.end());
    std::optional<Hopset> own;
    if (!prebuilt) own = build_hopset(net, g, eps);
    const Hopset& h = prebuilt ? *prebuilt : *own;

    MsspResult out;
    out.sources = sources;
    out.beta = h.params.beta;
    out.hopset_edges = h.edges.size();
    auto sd = source_detection(net, augmented_matrix(g, h.edges), sources, h.params.beta, sources.size());
    out.dist.assign(sources.size(), std::vector<Word>(net.size(), kInf));
    for (NodeId v = 0; v < net.size(); ++v)
        for (const Near& x : sd.tables[v]) {
            auto it = std::lower_bound(sources.begin(), sources.end(), x.node);
            out.dist[static_cast<std::size_t>(it - sources.begin())][v] = x.dist.w;
        }
    return out;
}

// ---------------------------------------------------------------- shared steps

namespace detail {

inline void seed_edges(DistanceEstimates& est, const Graph& g) {
    for (const Edge& e : g.edges()) {
        est.improve(e.u, e.v, e.w, Step::Edge);
        est.improve(e.v, e.u, e.w, Step::Edge);
    }
}

inline void take_nearest(DistanceEstimates& est, const NearLists& sets, Step s) {
    for (NodeId v = 0; v < sets.size(); ++v)
        for (const Near& x : sets[v]) est.improve(v, x.node, x.dist.w, s);
}

inline void through_nearest(Clique& net, DistanceEstimates& est, const NearLists& sets, Step s) {
    ThroughSets through(sets.size());
    for (NodeId v = 0; v < sets.size(); ++v)
        for (const Near& x : sets[v]) through[v].push_back({x.node, x.dist.w, x.dist.w});
    auto m = distance_through_sets(net, through);
    for (NodeId v = 0; v < m.size(); ++v)
        for (const auto& e : m.row(v)) est.improve(v, e.col, e.val, s);
}

inline void take_mssp(DistanceEstimates& est, const MsspResult& r, Step s) {
    for (std::size_t i = 0; i < r.sources.size(); ++i)
        for (NodeId v = 0; v < est.size(); ++v)
            if (r.dist[i][v] != kInf) est.improve(v, r.sources[i], r.dist[i][v], s);
}

struct PivotTable {
    std::vector<NodeId> pivot;
    std::vector<Word> dist;
};

// Every node broadcasts its pivot and the exact distance to it.
inline PivotTable announce_pivots(Clique& net, const std::vector<Bunch>& bunches) {
    std::vector<std::vector<Word>> words(bunches.size());
    for (NodeId v = 0; v < bunches.size(); ++v) words[v] = {bunches[v].pivot, bunches[v].members.back().dist.w};
    auto table = net.broadcast(std::move(words));
    PivotTable out;
    for (const auto& w : table) {
        out.pivot.push_back(static_cast<NodeId>(w[0]));
        out.dist.push_back(w[1]);
    }
    return out;
}

// Node v combines d(u, p(u)) with its own estimate to p(u), for every u.
inline void via_pivots(DistanceEstimates& est, const PivotTable& p) {
    const std::size_t n = est.size();
    for (NodeId v = 0; v < n; ++v)
        for (NodeId u = 0; u < n; ++u) {
            const Word to_pivot = est.at(v, p.pivot[u]);
            if (to_pivot == kInf || p.dist[u] == kInf) continue;
            est.improve(v, u, to_pivot + p.dist[u], Step::Pivot);
        }
}

}  // namespace detail

// ---------------------------------------------------------------- weighted APSP

struct WeightedApspOptions {
    bool sketch = false;                 // skip the through-N_k step: the plain (3+eps) variant
    std::optional<std::size_t> k;        // nearest-set size, default ceil(sqrt n)
};

struct ApspResult {
    DistanceEstimates estimates;
    std::size_t k = 0;
    std::vector<NodeId> hubs;            // hitting set whose distances were computed
    std::vector<NodeId> pivots;          // empty when the pipeline has no pivot step
    NearLists nearest;                   // the nearest sets used by the pivot step
    std::size_t low_k = 0;               // unweighted only: nearest-set size in the sparse part
    std::vector<NodeId> low_hubs;        // unweighted only
    std::vector<char> high_degree;       // unweighted only
};

/// Estimates with d <= delta <= (2+eps) d + (1+eps) W_uv (with the sketch
/// flag: delta <= (3+eps) d).
inline ApspResult apsp_weighted(Clique& net, const Graph& g, double eps, WeightedApspOptions opt = {}) {
    require_undirected(net, g);
    require_eps(eps);
    const std::size_t n = net.size();
    const double inner = eps / 2.0;
    ApspResult out;
    out.estimates = DistanceEstimates(n);
    auto& est = out.estimates;
    out.k = std::clamp<std::size_t>(opt.k.value_or(ceil_root(n, 0.5)), 1, n);

    detail::seed_edges(est, g);
    est.symmetrize(net);

    auto near = k_nearest(net, g, out.k);
    detail::take_nearest(est, near.sets, Step::Nearest);
    est.symmetrize(net);

    if (!opt.sketch) {
        detail::through_nearest(net, est, near.sets, Step::ThroughNearest);
        est.symmetrize(net);
    }

    out.hubs = hit_nearest_sets(net, near.sets, out.k);
    const auto in_hub = detail::announce_membership(net, out.hubs);

    auto far = mssp(net, g, out.hubs, inner);
    detail::take_mssp(est, far, Step::HubDistances);
    est.symmetrize(net);

    auto bunches = compute_bunches(near.sets, in_hub);
    auto table = detail::announce_pivots(net, bunches);
    out.pivots = table.pivot;
    detail::via_pivots(est, table);
    est.symmetrize(net);
    out.nearest = std::move(near.sets);
    return out;
}

// ---------------------------------------------------------------- unweighted APSP

struct UnweightedApspOptions {
    std::optional<std::size_t> k;      // degree threshold, default ceil(sqrt n)
    std::optional<std::size_t> low_k;  // nearest-set size in the sparse part, default ceil(n^(1/4))
};

/// Estimates with d <= delta <= (2+eps) d on unit-weight graphs. Paths
/// through a high-degree node are covered by distances from a hitting set
/// of the large neighborhoods; the rest live in the subgraph induced by the
/// low-degree nodes, where smaller nearest sets, a larger hub set and a
/// three-hop product finish the job.
inline ApspResult apsp_unweighted(Clique& net, const Graph& g, double eps, UnweightedApspOptions opt = {}) {
    require_undirected(net, g);
    require_eps(eps);
    if (!g.unit_weights()) throw WeightedInput("unweighted APSP needs unit edge weights");
    const std::size_t n = net.size();
    const double inner = eps / 2.0;
    ApspResult out;
    out.estimates = DistanceEstimates(n);
    auto& est = out.estimates;
    out.k = std::clamp<std::size_t>(opt.k.value_or(ceil_root(n, 0.5)), 1, n);
    out.low_k = std::clamp<std::size_t>(opt.low_k.value_or(ceil_root(n, 0.25)), 1, n);

    detail::seed_edges(est, g);
    est.symmetrize(net);

    // paths with a high-degree node: |N(v)| counts v itself
    const auto adj = g.adjacency();
    out.high_degree.assign(n, 0);
    std::vector<std::vector<NodeId>> hoods;
    for (NodeId v = 0; v < n; ++v) {
        if (adj[v].size() + 1 < out.k) continue;
        out.high_degree[v] = 1;
        hoods.push_back({v});
        for (const auto& a : adj[v]) hoods.back().push_back(a.to);
    }
    out.hubs = hitting_set(net, hoods, out.k);
    detail::announce_membership(net, out.hubs);
    if (!out.hubs.empty()) {
        auto far = mssp(net, g, out.hubs, inner);
        detail::take_mssp(est, far, Step::HubDistances);
        est.symmetrize(net);

        ThroughSets through(n);
        for (NodeId v = 0; v < n; ++v)
            for (NodeId a : out.hubs)
                if (est.at(v, a) != kInf) through[v].push_back({a, est.at(v, a), est.at(a, v)});
        auto m = distance_through_sets(net, through);
        for (NodeId v = 0; v < n; ++v)
            for (const auto& e : m.row(v)) est.improve(v, e.col, e.val, Step::ThroughHubs);
        est.symmetrize(net);
    }

    // the sparse part: subgraph induced by low-degree nodes
    std::vector<char> low(n);
    for (NodeId v = 0; v < n; ++v) low[v] = !out.high_degree[v];
    const Graph sparse = g.induced(low);

    auto near = k_nearest(net, sparse, out.low_k);
    detail::take_nearest(est, near.sets, Step::LowNearest);
    est.symmetrize(net);

    detail::through_nearest(net, est, near.sets, Step::LowThrough);
    est.symmetrize(net);

    out.low_hubs = hit_nearest_sets(net, near.sets, out.low_k);
    const auto in_low_hub = detail::announce_membership(net, out.low_hubs);
    net.note("low_hub_count", out.low_hubs.size());

    auto far = mssp(net, sparse, out.low_hubs, inner);
    detail::take_mssp(est, far, Step::LowHubDistances);
    est.symmetrize(net);

    auto bunches = compute_bunches(near.sets, in_low_hub);
    auto table = detail::announce_pivots(net, bunches);
    out.pivots = table.pivot;
    detail::via_pivots(est, table);
    est.symmetrize(net);

    // three-hop paths u -> u' (nearest) -> v' (sparse edge) -> v (nearest)
    SparseMatrix<MinPlus> left(n), mid(n), right(n);
    std::vector<Message> msgs;
    for (NodeId u = 0; u < n; ++u)
        for (const Near& x : near.sets[u]) {
            left.set(u, x.node, x.dist.w);
            if (x.node != u) msgs.push_back(Message::make(u, x.node, {x.dist.w}));
        }
    const Inboxes got = net.exchange(msgs);
    for (NodeId w = 0; w < n; ++w) {
        right.set(w, w, 0);
        for (const Message& m : got[w]) right.set(w, m.src, m[0]);
    }
    for (const Edge& e : sparse.edges()) {
        mid.set(e.u, e.v, 1);
        mid.set(e.v, e.u, 1);
    }
    auto first = sparse_mm(net, left, mid).product;
    auto paths = sparse_mm(net, first, right).product;
    for (NodeId u = 0; u < n; ++u)
        for (const auto& e : paths.row(u)) est.improve(u, e.col, e.val, Step::ThreeHop);
    est.symmetrize(net);
    out.nearest = std::move(near.sets);
    return out;
}

// ---------------------------------------------------------------- exact SSSP

/// g plus an edge from every node to each member of its nearest set,
/// weighted by the exact distance.
struct ShortcutGraph {
    Graph graph;
    std::size_t k = 0;
};

inline ShortcutGraph shortcut_graph(const Graph& g, const KNearest& near) {
    ShortcutGraph s{g, near.k};
    for (NodeId v = 0; v < near.sets.size(); ++v)
        for (const Near& x : near.sets[v])
            if (x.node != v) s.graph.add_edge(v, x.node, x.dist.w);
    return s;
}

struct SsspResult {
    NodeId source = 0;
    std::size_t k = 0;
    std::vector<Word> dist;
    std::vector<NodeId> parent;   // in the shortcut graph; kNoWitness at the source and unreachable nodes
    std::size_t iterations = 0;   // Bellman-Ford rounds that improved some distance
    std::size_t iteration_bound = 0;
    KNearest nearest;

    /// Path in the input graph, expanding shortcut edges.
    std::vector<NodeId> path_to(NodeId v) const {
        if (dist.at(v) == kInf) return {};
        std::vector<NodeId> hops{v};
        while (hops.back() != source) hops.push_back(parent[hops.back()]);
        std::reverse(hops.begin(), hops.end());
        std::vector<NodeId> out{source};
        for (std::size_t i = 0; i + 1 < hops.size(); ++i) {
            auto leg = expand(hops[i], hops[i + 1]);
            out.insert(out.end(), leg.begin() + 1, leg.end());
        }
        return out;
    }

private:
    std::vector<NodeId> expand(NodeId a, NodeId b) const {
        auto member = [&](NodeId owner, NodeId x) {
            return std::any_of(nearest.sets[owner].begin(), nearest.sets[owner].end(),
                               [&](const Near& y) { return y.node == x; });
        };
        if (member(a, b)) return nearest.path(a, b);
        if (member(b, a)) {
            auto p = nearest.path(b, a);
            std::reverse(p.begin(), p.end());
            return p;
        }
        return {a, b};
    }
};

namespace detail {

// Distributed Bellman-Ford: a node that improved sends its distance to every
// neighbor of the shortcut graph.
class BellmanFord {
public:
    BellmanFord(const Graph& g, NodeId source)
        : adj_(g.adjacency()), source_(source), dist_(g.size(), kInf), parent_(g.size(), kNoWitness) {}

    bool step(NodeId v, std::uint64_t round, std::span<const Message> inbox, std::vector<Message>& outbox) {
        bool improved = false;
        if (round == 0 && v == source_) {
            dist_[v] = 0;
            improved = true;
        }
        for (const Message& m : inbox) {
            const Word cand = m[0] + weight(v, m.src);
            if (cand < dist_[v]) {
                dist_[v] = cand;
                parent_[v] = m.src;
                improved = true;
            }
        }
        if (improved) {
            if (round > 0) last_ = std::max<std::size_t>(last_, round);
            for (const auto& a : adj_[v]) outbox.push_back(Message::make(v, a.to, {dist_[v]}));
        }
        return true;
    }

    const std::vector<Word>& dist() const { return dist_; }
    const std::vector<NodeId>& parent() const { return parent_; }
    std::size_t last_improvement() const { return last_; }

private:
    Word weight(NodeId v, NodeId u) const {
        auto it = std::lower_bound(adj_[v].begin(), adj_[v].end(), u,
                                   [](const Graph::Arc& a, NodeId x) { return a.to < x; });
        if (it == adj_[v].end() || it->to != u) throw InvariantViolation("message along a non-edge");
        return it->w;
    }

    std::vector<std::vector<Graph::Arc>> adj_;
    NodeId source_;
    std::vector<Word> dist_;
    std::vector<NodeId> parent_;
    std::size_t last_ = 0;
};

}  // namespace detail

/// Exact distances from source: nearest sets give a shortcut graph of small
/// shortest-path diameter, then Bellman-Ford runs on it until no distance
/// changes. Asserts fewer than ceil(4n/k) improving rounds.
inline SsspResult sssp_exact(Clique& net, const Graph& g, NodeId source, std::optional<std::size_t> k = std::nullopt) {
    require_undirected(net, g);
    const std::size_t n = net.size();
    if (source >= n) throw PreconditionError("source outside [0, n)");
    SsspResult out;
    out.source = source;
    out.k = std::clamp<std::size_t>(k.value_or(ceil_root(n, 5.0 / 6.0)), 1, n);
    out.iteration_bound = (4 * n + out.k - 1) / out.k;
    out.nearest = k_nearest(net, g, out.k);
    const ShortcutGraph sc = shortcut_graph(g, out.nearest);

    // the far endpoint of each shortcut learns its weight
    std::vector<Edge> notify;
    for (NodeId v = 0; v < n; ++v)
        for (const Near& x : out.nearest.sets[v])
            if (x.node != v) notify.push_back({v, x.node, x.dist.w});
    detail::notify_endpoints(net, notify);

    detail::BellmanFord bf(sc.graph, source);
    net.run(bf);
    out.dist = bf.dist();
    out.parent = bf.parent();
    out.iterations = bf.last_improvement();
    if (out.iterations >= out.iteration_bound)
        throw InvariantViolation("Bellman-Ford needed " + std::to_string(out.iterations) + " rounds, bound is " +
                                 std::to_string(out.iteration_bound));
    return out;
}

// ---------------------------------------------------------------- diameter

struct DiameterEstimate {
    Word value = 0;
    NodeId source = 0;  // the estimate is the distance between source and target
    NodeId target = 0;
    std::string_view step;  // "hubs" or "far_ball"
    NodeId far = 0;          // the node with the largest distance to its pivot
    std::size_t k = 0;
    std::vector<NodeId> hubs;
};

/// Estimate D' of the diameter D. Unweighted: writing D = 3h + z,
/// D' >= 2h + z (2h + 1 when z = 2) and D' <= (1+eps) D. Weighted:
/// floor(2D/3 - W) <= D' <= (1+eps) D.
inline DiameterEstimate diameter_approx(Clique& net, const Graph& g, double eps, std::optional<std::size_t> k = std::nullopt) {
    require_undirected(net, g);
    require_eps(eps);
    if (!g.connected()) throw Disconnected("the diameter of a disconnected graph is infinite");
    const std::size_t n = net.size();
    DiameterEstimate out;
    out.k = std::clamp<std::size_t>(k.value_or(ceil_root(n, 0.5)), 1, n);

    auto near = k_nearest(net, g, out.k);
    out.hubs = hit_nearest_sets(net, near.sets, out.k);
    const auto in_hub = detail::announce_membership(net, out.hubs);
    const Hopset h = build_hopset(net, g, eps);
    auto from_hubs = mssp(net, g, out.hubs, eps, &h);

    auto bunches = compute_bunches(near.sets, in_hub);
    std::vector<Word> radius(n);
    for (NodeId v = 0; v < n; ++v) radius[v] = bunches[v].members.back().dist.w;
    radius = net.broadcast_word(radius);
    out.far = static_cast<NodeId>(std::max_element(radius.begin(), radius.end()) - radius.begin());

    // the far node tells its nearest set, then members announce themselves
    std::vector<Message> tell;
    for (const Near& x : near.sets[out.far])
        if (x.node != out.far) tell.push_back(Message::make(out.far, x.node, {1}));
    net.exchange(tell);
    std::vector<NodeId> ball;
    for (const Near& x : near.sets[out.far]) ball.push_back(x.node);
    detail::announce_membership(net, ball);
    auto from_ball = mssp(net, g, ball, eps, &h);

    // each node reports its largest estimate; ties go to the first found
    std::vector<std::vector<Word>> best(n, std::vector<Word>{0, 0, 0, 0});
    for (NodeId v = 0; v < n; ++v) {
        auto consider = [&](const MsspResult& r, Word tag) {
            for (std::size_t i = 0; i < r.sources.size(); ++i)
                if (r.dist[i][v] != kInf && r.dist[i][v] > best[v][0]) best[v] = {r.dist[i][v], r.sources[i], v, tag};
        };
        best[v] = {0, v, v, 0};
        consider(from_hubs, 0);
        consider(from_ball, 1);
    }
    auto seen = net.broadcast(std::move(best));
    std::size_t pick = 0;
    for (std::size_t v = 1; v < n; ++v)
        if (seen[v][0] > seen[pick][0]) pick = v;
    out.value = seen[pick][0];
    out.source = static_cast<NodeId>(seen[pick][1]);
    out.target = static_cast<NodeId>(seen[pick][2]);
    out.step = seen[pick][3] == 0 ? "hubs" : "far_ball";
    return out;
}

/// The lower bound the estimate must reach for true diameter d:
/// 2h + z (2h + 1 when z = 2) with d = 3h + z; weighted graphs with heaviest
/// edge w use floor(2d/3 - w), clamped at zero.
inline Word diameter_lower_bound(Word d, Word heaviest_edge, bool weighted) {
    if (!weighted) {
        const Word h = d / 3, z = d % 3;
        return 2 * h + (z == 2 ? 1 : z);
    }
    const auto x = static_cast<long double>(2 * d) / 3.0L - static_cast<long double>(heaviest_edge);
    return x <= 0 ? 0 : static_cast<Word>(std::floor(x));
}

}  // namespace ccsp
