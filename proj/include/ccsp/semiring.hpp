#pragma once

// Semirings used by the matrix engine.
//
// A semiring type S provides
//   value_type, zero(), one(), is_zero(v), add(x, y), mul(x, y),
//   kWords            number of message words needed for one value
//   encode / decode   value <-> message words
//   kOrdered          true when add() is min under a total order; then also
//   less(x, y)        the order, and
//   key(v)            the order as a tuple of words (lexicographic)
//
// Infinity is the reserved word kInf; all arithmetic saturates at it.

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string_view>

#include "ccsp/clique.hpp"

namespace ccsp {

inline constexpr Word kInf = std::numeric_limits<Word>::max();
inline constexpr NodeId kNoWitness = std::numeric_limits<NodeId>::max();

constexpr Word sat_add(Word a, Word b) noexcept {
    if (a == kInf || b == kInf) return kInf;
    return b >= kInf - a ? kInf : a + b;
}

/// (weight, hops) pair of the augmented min-plus semiring. Ordered
/// lexicographically; w == kInf iff t == kInf.
struct AugWeight {
    Word w = kInf;
    Word t = kInf;

    static constexpr AugWeight infinity() noexcept { return {kInf, kInf}; }
    static constexpr AugWeight identity() noexcept { return {0, 0}; }
    constexpr bool is_inf() const noexcept { return w == kInf; }

    friend constexpr auto operator<=>(const AugWeight&, const AugWeight&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const AugWeight& a) {
    auto put = [&](Word x) -> std::ostream& { return x == kInf ? os << "inf" : os << x; };
    os << '(';
    put(a.w) << ',';
    return put(a.t) << ')';
}

/// Semiring addition: the smaller argument under the lexicographic order.
constexpr AugWeight aug_combine(AugWeight x, AugWeight y) noexcept { return y < x ? y : x; }

/// Semiring multiplication: componentwise saturating sum.
constexpr AugWeight aug_extend(AugWeight x, AugWeight y) noexcept {
    if (x.is_inf() || y.is_inf()) return AugWeight::infinity();
    const Word w = sat_add(x.w, y.w);
    const Word t = sat_add(x.t, y.t);
    if (w == kInf || t == kInf) return AugWeight::infinity();
    return {w, t};
}

struct MinPlus {
    using value_type = Word;
    static constexpr std::string_view kName = "min-plus";
    static constexpr std::size_t kWords = 1;
    static constexpr bool kOrdered = true;
    static constexpr std::size_t kKeyParts = 1;

    static constexpr value_type zero() noexcept { return kInf; }
    static constexpr value_type one() noexcept { return 0; }
    static constexpr bool is_zero(value_type v) noexcept { return v == kInf; }
    static constexpr value_type add(value_type x, value_type y) noexcept { return std::min(x, y); }
    static constexpr value_type mul(value_type x, value_type y) noexcept { return sat_add(x, y); }
    static constexpr bool less(value_type x, value_type y) noexcept { return x < y; }
    static constexpr std::array<Word, 1> key(value_type v) noexcept { return {v}; }

    static void encode(value_type v, Message& m) { m.push(v); }
    static value_type decode(std::span<const Word> w) { return w[0]; }
};

struct AugMinPlus {
    using value_type = AugWeight;
    static constexpr std::string_view kName = "augmented";
    static constexpr std::size_t kWords = 2;
    static constexpr bool kOrdered = true;
    static constexpr std::size_t kKeyParts = 2;

    static constexpr value_type zero() noexcept { return AugWeight::infinity(); }
    static constexpr value_type one() noexcept { return AugWeight::identity(); }
    static constexpr bool is_zero(value_type v) noexcept { return v.is_inf(); }
    static constexpr value_type add(value_type x, value_type y) noexcept { return aug_combine(x, y); }
    static constexpr value_type mul(value_type x, value_type y) noexcept { return aug_extend(x, y); }
    static constexpr bool less(value_type x, value_type y) noexcept { return x < y; }
    static constexpr std::array<Word, 2> key(value_type v) noexcept { return {v.w, v.t}; }

    static void encode(value_type v, Message& m) {
        m.push(v.w);
        m.push(v.t);
    }
    static value_type decode(std::span<const Word> w) { return {w[0], w[1]}; }
};

/// Boolean semiring; a stored entry is always `true`, so values cost no words.
struct Boolean {
    using value_type = bool;
    static constexpr std::string_view kName = "boolean";
    static constexpr std::size_t kWords = 0;
    static constexpr bool kOrdered = false;

    static constexpr value_type zero() noexcept { return false; }
    static constexpr value_type one() noexcept { return true; }
    static constexpr bool is_zero(value_type v) noexcept { return !v; }
    static constexpr value_type add(value_type x, value_type y) noexcept { return x || y; }
    static constexpr value_type mul(value_type x, value_type y) noexcept { return x && y; }

    static void encode(value_type, Message&) {}
    static value_type decode(std::span<const Word>) { return true; }
};

template <class S>
concept OrderedSemiring = S::kOrdered;

/// Canonical preference between two candidates for the same matrix cell:
/// smaller value first, then smaller witness.
template <class S>
constexpr bool preferred(const typename S::value_type& v1, NodeId w1, const typename S::value_type& v2, NodeId w2) {
    if constexpr (S::kOrdered) {
        if (S::less(v1, v2)) return true;
        if (S::less(v2, v1)) return false;
        return w1 < w2;
    } else {
        return w1 < w2;
    }
}

/// Folds a candidate (value, witness) into an accumulated cell.
template <class S>
constexpr void accumulate(typename S::value_type& acc, NodeId& acc_wit, const typename S::value_type& v, NodeId wit) {
    if constexpr (S::kOrdered) {
        if (preferred<S>(v, wit, acc, acc_wit)) {
            acc = v;
            acc_wit = wit;
        }
    } else {
        acc = S::add(acc, v);
        acc_wit = std::min(acc_wit, wit);
    }
}

}  // namespace ccsp
