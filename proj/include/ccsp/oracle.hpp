#pragma once

// Sequential reference implementations. Nothing here touches the simulator;
// tests compare distributed results against these.

#include <algorithm>
#include <cstdint>
#include <queue>
#include <tuple>
#include <vector>

#include "ccsp/errors.hpp"
#include "ccsp/graph.hpp"
#include "ccsp/near.hpp"
#include "ccsp/semiring.hpp"
#include "ccsp/sparse_matrix.hpp"

namespace ccsp::oracle {

using DistMatrix = std::vector<std::vector<Word>>;

/// Lexicographic (weight, hops) distances from src. Word weights, kInf when unreachable.
inline std::vector<AugWeight> dijkstra_aug(const Graph& g, NodeId src) {
    const std::size_t n = g.size();
    const auto adj = g.adjacency();
    std::vector<AugWeight> dist(n, AugWeight::infinity());
    using Item = std::tuple<Word, Word, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[src] = AugWeight::identity();
    pq.push({0, 0, src});
    while (!pq.empty()) {
        auto [w, t, v] = pq.top();
        pq.pop();
        if (AugWeight{w, t} != dist[v]) continue;
        for (const auto& a : adj[v]) {
            AugWeight cand{w + a.w, t + 1};
            if (cand < dist[a.to]) {
                dist[a.to] = cand;
                pq.push({cand.w, cand.t, a.to});
            }
        }
    }
    return dist;
}

inline std::vector<Word> dijkstra(const Graph& g, NodeId src) {
    auto d = dijkstra_aug(g, src);
    std::vector<Word> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i].w;
    return out;
}

inline DistMatrix floyd_warshall(const Graph& g) {
    const std::size_t n = g.size();
    DistMatrix d(n, std::vector<Word>(n, kInf));
    for (std::size_t v = 0; v < n; ++v) d[v][v] = 0;
    for (const Edge& e : g.edges()) {
        d[e.u][e.v] = std::min(d[e.u][e.v], e.w);
        if (!g.directed()) d[e.v][e.u] = std::min(d[e.v][e.u], e.w);
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            if (d[i][k] == kInf) continue;
            for (std::size_t j = 0; j < n; ++j)
                if (d[k][j] != kInf && d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
        }
    return d;
}

inline std::vector<Word> bfs(const Graph& g, NodeId src) {
    const auto adj = g.adjacency();
    std::vector<Word> d(g.size(), kInf);
    std::queue<NodeId> q;
    d[src] = 0;
    q.push(src);
    while (!q.empty()) {
        NodeId v = q.front();
        q.pop();
        for (const auto& a : adj[v])
            if (d[a.to] == kInf) {
                d[a.to] = d[v] + 1;
                q.push(a.to);
            }
    }
    return d;
}

/// One row of the reference solution: lexicographic (weight, hops)
/// distances, the matching predecessor tree (smallest id among tight
/// predecessors) and, per target, the smallest possible heaviest edge over
/// all shortest paths.
struct OracleRow {
    std::vector<AugWeight> dist;
    std::vector<NodeId> parent;  // kNoWitness for the source and unreachable nodes
    std::vector<Word> heaviest;  // 0 for the source, kInf when unreachable
};

inline OracleRow shortest_path_row(const Graph& g, NodeId src) {
    const std::size_t n = g.size();
    const auto adj = g.adjacency();
    OracleRow row;
    row.dist = dijkstra_aug(g, src);
    row.parent.assign(n, kNoWitness);
    for (NodeId v = 0; v < n; ++v)
        for (const auto& a : adj[v])
            if (!row.dist[v].is_inf() && row.parent[a.to] == kNoWitness && a.to != src &&
                AugWeight{row.dist[v].w + a.w, row.dist[v].t + 1} == row.dist[a.to])
                row.parent[a.to] = v;
    // minimax over the subgraph of weight-tight arcs; every walk in it is a shortest path
    row.heaviest.assign(n, kInf);
    row.heaviest[src] = 0;
    using Item = std::pair<Word, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    pq.push({0, src});
    while (!pq.empty()) {
        auto [h, v] = pq.top();
        pq.pop();
        if (h != row.heaviest[v]) continue;
        for (const auto& a : adj[v]) {
            if (row.dist[a.to].is_inf() || row.dist[v].w + a.w != row.dist[a.to].w) continue;
            const Word cand = std::max(h, a.w);
            if (cand < row.heaviest[a.to]) {
                row.heaviest[a.to] = cand;
                pq.push({cand, a.to});
            }
        }
    }
    return row;
}

/// Lexicographically smallest (weight, hops) over walks of at most h hops
/// starting at src, in an arbitrary sparse matrix over the augmented semiring.
inline std::vector<AugWeight> bounded_hops(const SparseMatrix<AugMinPlus>& w, NodeId src, std::size_t h) {
    const std::size_t n = w.size();
    std::vector<AugWeight> d(n, AugWeight::infinity());
    d[src] = AugWeight::identity();
    for (std::size_t step = 0; step < h; ++step) {
        auto next = d;
        for (std::size_t u = 0; u < n; ++u) {
            if (d[u].is_inf()) continue;
            for (const auto& e : w.row(u)) next[e.col] = aug_combine(next[e.col], aug_extend(d[u], e.val));
        }
        if (next == d) break;
        d = std::move(next);
    }
    return d;
}

/// Plain (weight-only) h-hop distances from src.
inline std::vector<Word> bounded_hops(const Graph& g, NodeId src, std::size_t h) {
    const std::size_t n = g.size();
    std::vector<Word> d(n, kInf);
    d[src] = 0;
    for (std::size_t step = 0; step < h; ++step) {
        auto next = d;
        auto relax = [&](NodeId a, NodeId b, Word w) {
            if (d[a] != kInf) next[b] = std::min(next[b], d[a] + w);
        };
        for (const Edge& e : g.edges()) {
            relax(e.u, e.v, e.w);
            if (!g.directed()) relax(e.v, e.u, e.w);
        }
        if (next == d) break;
        d = std::move(next);
    }
    return d;
}

/// Dense triple loop; canonical witness = smallest middle index among the
/// terms attaining the minimum (for Boolean: smallest middle index).
template <class S>
SparseMatrix<S> brute_product(const SparseMatrix<S>& a, const SparseMatrix<S>& b) {
    const std::size_t n = a.size();
    SparseMatrix<S> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (NodeId j = 0; j < n; ++j) {
            bool found = false;
            typename S::value_type best = S::zero();
            NodeId wit = kNoWitness;
            for (NodeId k = 0; k < n; ++k) {
                auto x = a.at(i, k), y = b.at(k, j);
                if (S::is_zero(x) || S::is_zero(y)) continue;
                auto v = S::mul(x, y);
                if (S::is_zero(v)) continue;
                bool better = !found;
                if constexpr (S::kOrdered) better = better || S::less(v, best);
                if (better) {
                    best = v;
                    wit = k;
                    found = true;
                }
            }
            if (found) out.row(i).push_back({j, best, wit});
        }
    }
    return out;
}

/// Row-wise rho smallest by (value, column), by full sort.
template <class S>
    requires OrderedSemiring<S>
SparseMatrix<S> brute_filter(const SparseMatrix<S>& m, std::size_t rho) {
    if (rho == 0) throw PreconditionError("filter size must be positive");
    SparseMatrix<S> out(m.size());
    for (std::size_t r = 0; r < m.size(); ++r) {
        auto row = m.row(r);
        std::sort(row.begin(), row.end(), [](const Entry<S>& x, const Entry<S>& y) {
            return std::make_tuple(S::key(x.val), x.col) < std::make_tuple(S::key(y.val), y.col);
        });
        if (row.size() > rho) row.resize(rho);
        std::sort(row.begin(), row.end(), [](const Entry<S>& x, const Entry<S>& y) { return x.col < y.col; });
        out.row(r) = std::move(row);
    }
    return out;
}

/// The k nearest nodes of every node (itself included), by (weight, hops, id).
inline NearLists brute_k_nearest(const Graph& g, std::size_t k) {
    NearLists out(g.size());
    for (NodeId v = 0; v < g.size(); ++v) {
        auto d = dijkstra_aug(g, v);
        for (NodeId u = 0; u < g.size(); ++u)
            if (!d[u].is_inf()) out[v].push_back({u, d[u]});
        std::sort(out[v].begin(), out[v].end(), near_less);
        if (out[v].size() > k) out[v].resize(k);
    }
    return out;
}

/// For every node the k nearest sources by h-hop distance, ordered by
/// (weight, hops, id), in the augmented weight matrix w.
inline NearLists brute_source_detection(const SparseMatrix<AugMinPlus>& w,
                                                             const std::vector<NodeId>& sources, std::size_t h,
                                                             std::size_t k) {
    const std::size_t n = w.size();
    auto wt = w.transpose();
    NearLists out(n);
    for (NodeId s : sources) {
        // distance from v to s = walks v -> s = walks s -> v in the transpose
        auto d = bounded_hops(wt, s, h);
        for (NodeId v = 0; v < n; ++v)
            if (!d[v].is_inf()) out[v].push_back({s, d[v]});
    }
    for (auto& row : out) {
        std::sort(row.begin(), row.end(), near_less);
        if (row.size() > k) row.resize(k);
    }
    return out;
}

inline Word brute_diameter(const Graph& g) {
    if (!g.connected()) throw Disconnected("diameter of a disconnected graph");
    Word best = 0;
    for (const auto& row : floyd_warshall(g))
        for (Word x : row) best = std::max(best, x);
    return best;
}

}  // namespace ccsp::oracle
