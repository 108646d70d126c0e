#pragma once

#include <vector>

#include "ccsp/semiring.hpp"

namespace ccsp {

/// A node together with its distance from the owner of the list.
struct Near {
    NodeId node = 0;
    AugWeight dist;
    friend bool operator==(const Near&, const Near&) = default;
};

/// The (weight, hops, id) order shared by every set-valued result and by the
/// reference implementations.
inline bool near_less(const Near& x, const Near& y) {
    if (x.dist != y.dist) return x.dist < y.dist;
    return x.node < y.node;
}

using NearLists = std::vector<std::vector<Near>>;

}  // namespace ccsp
