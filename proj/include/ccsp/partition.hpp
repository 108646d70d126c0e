#pragma once

// Deterministic partitions of weighted index sets, used by every balancing step.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "ccsp/errors.hpp"

namespace ccsp {

/// Half-open index range [begin, end).
struct Range {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool contains(std::size_t i) const noexcept { return begin <= i && i < end; }
    friend bool operator==(const Range&, const Range&) = default;
};

/// Splits [0, n) into k sets of ceil(n/k) slots each (zero-weight dummies pad
/// the last slots when k does not divide n; they are dropped from the output).
/// Items are dealt round-robin in descending weight order, so every part has
/// weight at most W/k + max weight.
inline std::vector<std::vector<std::size_t>> partition_even(std::span<const std::uint64_t> weights, std::size_t k) {
    if (k == 0) throw PreconditionError("partition_even needs k >= 1");
    const std::size_t n = weights.size();
    const std::size_t slots = (n + k - 1) / k * k;
    std::vector<std::size_t> order(slots);
    std::iota(order.begin(), order.end(), 0);
    auto weight = [&](std::size_t i) { return i < n ? weights[i] : 0; };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return weight(x) > weight(y); });
    std::vector<std::vector<std::size_t>> parts(k);
    for (std::size_t r = 0; r < slots; ++r)
        if (order[r] < n) parts[r % k].push_back(order[r]);
    for (auto& p : parts) std::sort(p.begin(), p.end());
    return parts;
}

/// Greedy sweep into at most k runs of consecutive indices: a run is closed
/// once its weight reaches W/k. Every run has weight at most W/k + max weight.
inline std::vector<Range> partition_consecutive(std::span<const std::uint64_t> weights, std::size_t k) {
    if (k == 0) throw PreconditionError("partition_consecutive needs k >= 1");
    const std::size_t n = weights.size();
    std::uint64_t total = 0;
    for (auto w : weights) total += w;
    std::vector<Range> parts;
    std::size_t start = 0;
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += weights[i];
        // sum >= W/k, compared without division; empty-weight runs stay open
        if (sum > 0 && sum * k >= total && parts.size() + 1 < k) {
            parts.push_back({start, i + 1});
            start = i + 1;
            sum = 0;
        }
    }
    if (start < n || parts.empty()) parts.push_back({start, n});
    return parts;
}

/// Exactly k runs of consecutive indices (some possibly empty) satisfying both
/// weight bounds with a factor 2: built from the two single-sequence sweeps by
/// keeping every other fencepost of their merged boundary list.
inline std::vector<Range> partition_consecutive_2(std::span<const std::uint64_t> weights_a,
                                                  std::span<const std::uint64_t> weights_b, std::size_t k) {
    if (weights_a.size() != weights_b.size()) throw PreconditionError("weight sequences differ in length");
    const std::size_t n = weights_a.size();
    auto ends = [&](const std::vector<Range>& parts) {
        std::vector<std::size_t> e;
        for (const Range& r : parts) e.push_back(r.end);
        while (e.size() < k) e.push_back(n);
        return e;
    };
    std::vector<std::size_t> posts = ends(partition_consecutive(weights_a, k));
    std::vector<std::size_t> other = ends(partition_consecutive(weights_b, k));
    posts.insert(posts.end(), other.begin(), other.end());
    std::sort(posts.begin(), posts.end());
    std::vector<Range> parts(k);
    std::size_t prev = 0;
    for (std::size_t j = 0; j < k; ++j) {
        parts[j] = {prev, posts[2 * j + 1]};
        prev = posts[2 * j + 1];
    }
    return parts;
}

}  // namespace ccsp
