#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ccsp/errors.hpp"
#include "ccsp/semiring.hpp"

namespace ccsp {

struct Edge {
    NodeId u = 0;
    NodeId v = 0;
    Word w = 1;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Weighted graph on nodes [0, n). Undirected graphs store each edge once.
class Graph {
public:
    Graph() = default;
    explicit Graph(std::size_t n, bool directed = false) : n_(n), directed_(directed) {}

    std::size_t size() const noexcept { return n_; }
    bool directed() const noexcept { return directed_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    void add_edge(NodeId u, NodeId v, Word w = 1) {
        if (u >= n_ || v >= n_) throw PreconditionError("edge endpoint outside [0, n)");
        if (u == v) throw PreconditionError("self-loops are not allowed");
        if (w >= kInf / 2) throw PreconditionError("edge weight does not fit a machine word");
        edges_.push_back({u, v, w});
    }

    bool unit_weights() const noexcept {
        return std::all_of(edges_.begin(), edges_.end(), [](const Edge& e) { return e.w == 1; });
    }

    Word max_weight() const noexcept {
        Word m = 0;
        for (const Edge& e : edges_) m = std::max(m, e.w);
        return m;
    }

    struct Arc {
        NodeId to;
        Word w;
    };

    /// Out-adjacency with parallel edges collapsed to their minimum weight,
    /// sorted by target.
    std::vector<std::vector<Arc>> adjacency() const {
        std::vector<std::vector<Arc>> adj(n_);
        auto put = [&](NodeId a, NodeId b, Word w) { adj[a].push_back({b, w}); };
        for (const Edge& e : edges_) {
            put(e.u, e.v, e.w);
            if (!directed_) put(e.v, e.u, e.w);
        }
        for (auto& row : adj) {
            std::sort(row.begin(), row.end(), [](const Arc& x, const Arc& y) {
                return x.to != y.to ? x.to < y.to : x.w < y.w;
            });
            row.erase(std::unique(row.begin(), row.end(), [](const Arc& x, const Arc& y) { return x.to == y.to; }),
                      row.end());
        }
        return adj;
    }

    /// Graph on the same node set keeping only edges with both ends in `keep`.
    Graph induced(const std::vector<char>& keep) const {
        Graph h(n_, directed_);
        for (const Edge& e : edges_)
            if (keep[e.u] && keep[e.v]) h.edges_.push_back(e);
        return h;
    }

    bool connected() const {
        if (n_ == 0) return true;
        std::vector<NodeId> parent(n_);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](NodeId x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        std::size_t comps = n_;
        for (const Edge& e : edges_) {
            NodeId a = find(e.u), b = find(e.v);
            if (a != b) {
                parent[a] = b;
                --comps;
            }
        }
        return comps == 1;
    }

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    std::size_t n_ = 0;
    bool directed_ = false;
    std::vector<Edge> edges_;
};

/// Text edge list: "n m directed" header, then m lines "u v w".
/// Blank lines and lines starting with '#' are skipped.
inline Graph read_graph(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            auto p = line.find_first_not_of(" \t\r");
            if (p == std::string::npos || line[p] == '#') continue;
            return true;
        }
        return false;
    };
    if (!next()) throw ParseError(lineno, "missing header");
    std::istringstream head(line);
    long long n = -1, m = -1;
    int dir = 0;
    if (!(head >> n >> m >> dir) || n < 1 || m < 0 || (dir != 0 && dir != 1))
        throw ParseError(lineno, "expected header \"n m directed\" with directed in {0,1}");
    std::string rest;
    if (head >> rest) throw ParseError(lineno, "trailing tokens in header");
    Graph g(static_cast<std::size_t>(n), dir == 1);
    for (long long i = 0; i < m; ++i) {
        if (!next()) throw ParseError(lineno, "expected " + std::to_string(m) + " edges, found " + std::to_string(i));
        std::istringstream row(line);
        long long u = -1, v = -1, w = -1;
        if (!(row >> u >> v >> w)) throw ParseError(lineno, "expected \"u v w\"");
        if (row >> rest) throw ParseError(lineno, "trailing tokens");
        if (u < 0 || v < 0 || u >= n || v >= n) throw ParseError(lineno, "endpoint outside [0, n)");
        if (u == v) throw ParseError(lineno, "self-loop");
        if (w < 0) throw ParseError(lineno, "negative weight");
        g.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v), static_cast<Word>(w));
    }
    if (next()) throw ParseError(lineno, "more edge lines than declared");
    return g;
}

inline void write_graph(std::ostream& out, const Graph& g) {
    out << g.size() << ' ' << g.edges().size() << ' ' << (g.directed() ? 1 : 0) << '\n';
    for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << ' ' << e.w << '\n';
}

}  // namespace ccsp
