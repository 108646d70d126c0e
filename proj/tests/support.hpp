#pragma once

// Shared generators for the test suites.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "ccsp/generate.hpp"
#include "ccsp/sparse_matrix.hpp"

namespace ccsp::testing {

using ccsp::random_matrix;
using ccsp::random_value;

/// Random graph with a random spanning tree (connected) or plain gnp.
inline Graph random_graph(std::size_t n, std::uint64_t seed, Word max_w = 1, bool connected = true, double p = -1) {
    GraphSpec s;
    s.family = connected ? "connected" : "gnp";
    s.n = n;
    s.p = p >= 0 ? p : std::min(1.0, 3.0 / static_cast<double>(n));
    s.max_weight = max_w;
    s.seed = seed;
    return generate(s);
}

/// Exact rational check a <= (num/den) * b using integers.
inline bool within_factor(Word a, Word b, std::uint64_t num, std::uint64_t den) {
    return static_cast<unsigned __int128>(a) * den <= static_cast<unsigned __int128>(b) * num;
}

}  // namespace ccsp::testing
