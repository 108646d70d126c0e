#pragma once

// Seeded graph generators.
//
// PRNG: std::mt19937_64 seeded with the 64-bit seed (the engine's output
// sequence is fixed by the C++ standard). Reductions, so that another
// language can reproduce the same graphs:
//   uniform integer in [lo, hi]  rejection: draw x until x < 2^64 - (2^64 mod r),
//                                return lo + x mod r, where r = hi - lo + 1
//   Bernoulli(p)                 (x >> 11) * 2^-53 < p
// Candidate pairs are visited in lexicographic order (u < v).

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "ccsp/errors.hpp"
#include "ccsp/graph.hpp"
#include "ccsp/sparse_matrix.hpp"

namespace ccsp {

inline constexpr std::string_view kGeneratorVersion = "mt19937_64/v1";

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
        if (lo > hi) throw PreconditionError("empty range");
        const std::uint64_t r = hi - lo + 1;
        if (r == 0) return next();  // full 64-bit range
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    (std::numeric_limits<std::uint64_t>::max() % r + 1) % r;
        std::uint64_t x;
        do x = next();
        while (x > limit);
        return lo + x % r;
    }

    bool bernoulli(double p) { return static_cast<double>(next() >> 11) * 0x1.0p-53 < p; }

private:
    std::mt19937_64 eng_;
};

struct GraphSpec {
    std::string family = "gnp";  // gnp, random-weighted, connected, path, cycle, star, grid, two-cliques, complete
    std::size_t n = 16;
    double p = 0.3;           // edge probability for gnp / random-weighted / connected extras
    Word max_weight = 1;      // weights uniform in [1, max_weight]; 1 = unweighted
    std::uint64_t seed = 1;
};

inline const std::vector<std::string>& graph_families() {
    static const std::vector<std::string> f = {"gnp", "random-weighted", "connected", "path", "cycle",
                                               "star", "grid", "two-cliques", "complete"};
    return f;
}

inline Graph generate(const GraphSpec& spec) {
    const std::size_t n = spec.n;
    if (n < 1) throw InvalidSpec("n must be at least 1");
    if (!(spec.p >= 0.0 && spec.p <= 1.0)) throw InvalidSpec("p must lie in [0, 1]");
    if (spec.max_weight < 1) throw InvalidSpec("max weight must be at least 1");
    Rng rng(spec.seed);
    Graph g(n);
    Word max_w = spec.max_weight;
    if (spec.family == "random-weighted" && max_w == 1) max_w = n;
    auto weight = [&]() -> Word { return max_w == 1 ? 1 : rng.uniform(1, max_w); };
    auto add = [&](std::size_t u, std::size_t v) { g.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v), weight()); };

    const std::string& f = spec.family;
    if (f == "gnp" || f == "random-weighted") {
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v)
                if (rng.bernoulli(spec.p)) add(u, v);
    } else if (f == "connected") {
        std::vector<std::vector<char>> tree(n, std::vector<char>(n, 0));
        for (std::size_t v = 1; v < n; ++v) {
            std::size_t u = rng.uniform(0, v - 1);
            tree[u][v] = 1;
            add(u, v);
        }
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v)
                if (!tree[u][v] && rng.bernoulli(spec.p)) add(u, v);
    } else if (f == "path") {
        for (std::size_t v = 1; v < n; ++v) add(v - 1, v);
    } else if (f == "cycle") {
        if (n < 3) throw InvalidSpec("cycle needs n >= 3");
        for (std::size_t v = 1; v < n; ++v) add(v - 1, v);
        add(n - 1, 0);
    } else if (f == "star") {
        for (std::size_t v = 1; v < n; ++v) add(0, v);
    } else if (f == "grid") {
        // row-major with width ceil(sqrt(n)); the last row may be partial
        const std::size_t w = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
        for (std::size_t v = 0; v < n; ++v) {
            if ((v + 1) % w != 0 && v + 1 < n) add(v, v + 1);
            if (v + w < n) add(v, v + w);
        }
    } else if (f == "two-cliques") {
        if (n < 2) throw InvalidSpec("two-cliques needs n >= 2");
        const std::size_t h = n / 2;
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v)
                if ((u < h) == (v < h)) add(u, v);
        add(0, h);
    } else if (f == "complete") {
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v) add(u, v);
    } else {
        throw InvalidSpec("unknown graph family \"" + f + "\"");
    }
    return g;
}

template <class S>
typename S::value_type random_value(Rng& rng, Word max_w) {
    if constexpr (std::is_same_v<S, AugMinPlus>)
        return AugWeight{rng.uniform(0, max_w), rng.uniform(0, 3)};
    else if constexpr (std::is_same_v<S, MinPlus>)
        return rng.uniform(0, max_w);
    else
        return true;
}

/// Random n x n matrix with about rho * n nonzeros at uniform positions
/// (rho >= n gives a full matrix).
template <class S>
SparseMatrix<S> random_matrix(std::size_t n, std::uint64_t rho, std::uint64_t seed, Word max_w = 9) {
    Rng rng(seed);
    SparseMatrix<S> m(n);
    if (rho >= n) {
        for (NodeId r = 0; r < n; ++r)
            for (NodeId c = 0; c < n; ++c) m.row(r).push_back({c, random_value<S>(rng, max_w), kNoWitness});
        return m;
    }
    for (std::uint64_t e = 0; e < rho * n; ++e) {
        auto r = rng.uniform(0, n - 1), c = rng.uniform(0, n - 1);
        m.set(r, static_cast<NodeId>(c), random_value<S>(rng, max_w));
    }
    return m;
}

}  // namespace ccsp
