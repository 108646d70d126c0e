#pragma once

// Output-sensitive sparse matrix multiplication and filtered multiplication
// on the simulated clique.
//
// Data placement: node v starts with row v of both inputs and ends with row v
// of the product. The multiplication task is cut into a*b*c subcubes
// ("slots"); slot t is computed by node t mod n, so a node serves at most two
// slots. Every transfer goes through the Clique entry points.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccsp/clique.hpp"
#include "ccsp/errors.hpp"
#include "ccsp/partition.hpp"
#include "ccsp/semiring.hpp"
#include "ccsp/sparse_matrix.hpp"

namespace ccsp {

inline constexpr std::uint64_t kBoundSlack = 4;  // constant used in every per-node bound assertion

struct MmParams {
    std::size_t a = 1;  // number of column blocks of the output
    std::size_t b = 1;  // number of row blocks of the output
    std::size_t c = 1;  // number of middle blocks per (row block, column block)

    std::size_t slots() const noexcept { return a * b * c; }
    friend bool operator==(const MmParams&, const MmParams&) = default;
};

namespace detail {

using u128 = unsigned __int128;

// Smallest x in [1, cap] with x^3 * den >= num (cap if none).
inline std::size_t ceil_cube_root_ratio(u128 num, u128 den, std::size_t cap) {
    std::size_t lo = 1, hi = std::max<std::size_t>(cap, 1);
    auto ok = [&](std::size_t x) { return u128(x) * x * x * den >= num; };
    if (!ok(hi)) return hi;
    while (lo < hi) {
        std::size_t mid = lo + (hi - lo) / 2;
        if (ok(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

inline std::size_t ceil_div(std::size_t x, std::size_t y) { return (x + y - 1) / y; }

}  // namespace detail

/// Block counts for S (rho_s) times T (rho_t) with output density rho_p:
/// a = ceil((rho_t rho_p n)^(1/3) / rho_s^(2/3)), b symmetric, both clamped to
/// [1, n] and shrunk until a*b <= n; then c = ceil(n / (a b)), so that
/// n <= a b c < 2n.
inline MmParams mm_params(std::uint64_t rho_s, std::uint64_t rho_t, std::uint64_t rho_p, std::size_t n) {
    if (rho_s == 0 || rho_t == 0 || rho_p == 0) throw PreconditionError("densities must be positive");
    if (n <= 1) return {1, 1, 1};
    using detail::u128;
    std::size_t a = detail::ceil_cube_root_ratio(u128(rho_t) * rho_p * n, u128(rho_s) * rho_s, n);
    std::size_t b = detail::ceil_cube_root_ratio(u128(rho_s) * rho_p * n, u128(rho_t) * rho_t, n);
    while (a * b > n) {
        if (a >= b)
            --a;
        else
            --b;
    }
    return {a, b, detail::ceil_div(n, a * b)};
}

struct SlotIndex {
    std::size_t i = 0;  // row block
    std::size_t j = 0;  // column block
    std::size_t k = 0;  // middle block
};

/// Globally known tiling of the n x n x n product cube into a*b*c subcubes
/// rows(i) x middle(i,j,k) x cols(j).
struct CubePartition {
    std::size_t n = 0;
    MmParams p;
    std::vector<std::vector<NodeId>> row_blocks;  // b blocks of output rows
    std::vector<std::vector<NodeId>> col_blocks;  // a blocks of output columns
    std::vector<std::uint32_t> row_block_of;      // node -> row block
    std::vector<std::uint32_t> col_block_of;      // node -> column block
    std::vector<std::uint32_t> row_pos;           // node -> index inside its row block
    std::vector<std::vector<Range>> middle;       // (i*a + j) -> c consecutive middle ranges

    std::size_t slots() const noexcept { return p.slots(); }
    std::size_t slot(std::size_t i, std::size_t j, std::size_t k) const noexcept { return (i * p.a + j) * p.c + k; }
    SlotIndex index(std::size_t t) const noexcept {
        return {t / (p.a * p.c), (t / p.c) % p.a, t % p.c};
    }
    NodeId host(std::size_t t) const noexcept { return static_cast<NodeId>(t % n); }
    const Range& middle_range(std::size_t t) const {
        SlotIndex s = index(t);
        return middle[s.i * p.a + s.j][s.k];
    }
    /// k such that m lies in the middle range of (i, j, k).
    std::size_t middle_block(std::size_t i, std::size_t j, std::size_t m) const {
        const auto& ranges = middle[i * p.a + j];
        auto it = std::upper_bound(ranges.begin(), ranges.end(), m, [](std::size_t x, const Range& r) { return x < r.end; });
        return static_cast<std::size_t>(it - ranges.begin());
    }
};

/// One unit of product work: node `host` computes the subcube of `slot`.
struct Worker {
    NodeId host = 0;
    std::size_t slot = 0;
};

template <class S>
struct Triple {
    NodeId row = 0;
    NodeId col = 0;
    typename S::value_type val{};
    NodeId wit = kNoWitness;

    friend bool operator==(const Triple&, const Triple&) = default;
};

/// Per-call measurements, also used by the bound assertions.
struct MmTrace {
    MmParams params;
    std::uint64_t rho_s = 1;
    std::uint64_t rho_t = 1;
    std::uint64_t rho_out = 1;  // output density estimate (or filter size)
    std::uint64_t restarts = 0;
    std::uint64_t max_s_slice = 0;
    std::uint64_t max_t_slice = 0;
    std::uint64_t max_values_per_node = 0;
    std::uint64_t duplicated_slots = 0;
    std::uint64_t summation_repeats = 0;
    std::uint64_t search_iterations = 0;
};

// ---------------------------------------------------------------------------
// Balancing of weighted entries

/// An entry moved by balance_load. `words` is the message payload and its last
/// word is `key`, which orders entries of equal weight and must be unique.
struct LoadItem {
    std::uint64_t weight = 0;
    Word key = 0;
    std::array<Word, kMaxPayload> words{};
    std::uint8_t len = 0;

    friend bool operator==(const LoadItem& x, const LoadItem& y) {
        return x.weight == y.weight && x.key == y.key && x.len == y.len &&
               std::equal(x.words.begin(), x.words.begin() + x.len, y.words.begin());
    }
};

/// Redistributes at most n weighted entries per node (weights <= n, total <= W)
/// so that every node holds at most n entries of total weight <= 2(W/n + n).
/// Weight histogram, one global sort, an even partition of the sorted order,
/// one routing step.
inline std::vector<std::vector<LoadItem>> balance_load(Clique& net, std::vector<std::vector<LoadItem>> held,
                                                       std::uint64_t total_bound) {
    const std::size_t n = net.size();
    if (held.size() != n) throw PreconditionError("balance_load needs one entry list per node");
    std::uint64_t total = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (held[v].size() > n) throw WeightViolation("node " + std::to_string(v) + " holds more than n entries");
        for (const LoadItem& it : held[v]) {
            if (it.weight > n) throw WeightViolation("entry weight exceeds n");
            total += it.weight;
        }
    }
    if (total > total_bound) throw WeightViolation("total weight exceeds the declared bound");

    // Weight histogram: counts of weight x go to node max(x,1)-1, node 0 also
    // takes weight 0; every node then broadcasts its tally.
    std::vector<Message> msgs;
    std::vector<std::uint64_t> local(n + 1);
    for (NodeId v = 0; v < n; ++v) {
        std::fill(local.begin(), local.end(), 0);
        for (const LoadItem& it : held[v]) ++local[it.weight];
        if (local[0] || local[1]) msgs.push_back(Message::make(v, 0, {local[0], local[1]}));
        for (std::size_t x = 2; x <= n; ++x)
            if (local[x]) msgs.push_back(Message::make(v, static_cast<NodeId>(x - 1), {local[x]}));
    }
    Inboxes got = net.exchange(msgs);
    std::vector<std::vector<Word>> tallies(n);
    for (NodeId d = 0; d < n; ++d) {
        if (d == 0) {
            Word c0 = 0, c1 = 0;
            for (const Message& m : got[0]) {
                c0 += m[0];
                c1 += m[1];
            }
            tallies[0] = {c0, c1};
        } else {
            Word c = 0;
            for (const Message& m : got[d]) c += m[0];
            tallies[d] = {c};
        }
    }
    auto known = net.broadcast(std::move(tallies));
    std::vector<std::uint64_t> hist(n + 1, 0);
    hist[0] = known[0][0];
    hist[1] = known[0][1];
    for (std::size_t x = 2; x <= n; ++x) hist[x] = known[x - 1][0];

    // Global sort by (weight, key); padding sorts last.
    constexpr std::uint64_t kPad = ~std::uint64_t{0};
    std::vector<std::vector<LoadItem>> batches(n);
    for (std::size_t v = 0; v < n; ++v) {
        batches[v] = std::move(held[v]);
        LoadItem pad;
        pad.weight = kPad;
        pad.key = kPad;
        batches[v].resize(n, pad);
    }
    auto sorted = net.sort_global(std::move(batches), [](const LoadItem& x, const LoadItem& y) {
        return x.weight != y.weight ? x.weight < y.weight : x.key < y.key;
    });

    // Everyone derives the weight at every global position from the histogram
    // and computes the same even partition of positions.
    std::vector<std::uint64_t> pos_weight;
    pos_weight.reserve(n * n);
    for (std::size_t x = 0; x <= n; ++x) pos_weight.insert(pos_weight.end(), hist[x], x);
    pos_weight.resize(n * n, 0);
    auto parts = partition_even(pos_weight, n);
    std::vector<NodeId> owner(n * n);
    for (NodeId j = 0; j < n; ++j)
        for (std::size_t p : parts[j]) owner[p] = j;

    std::vector<Message> moves;
    for (NodeId v = 0; v < n; ++v)
        for (std::size_t r = 0; r < n; ++r) {
            const LoadItem& it = sorted[v][r];
            if (it.weight == kPad) continue;
            Message m;
            m.src = v;
            m.dst = owner[v * n + r];
            m.len = it.len;
            m.payload = it.words;
            moves.push_back(m);
        }
    // Receivers know the weight of every position they were assigned; the key
    // travels as the last payload word.
    std::vector<std::vector<std::uint64_t>> assigned(n);
    for (std::size_t q = 0; q < n * n; ++q)
        if (sorted[q / n][q % n].weight != kPad) assigned[owner[q]].push_back(pos_weight[q]);
    Inboxes delivered = net.route(moves);
    std::vector<std::vector<LoadItem>> out(n);
    for (NodeId v = 0; v < n; ++v) {
        if (delivered[v].size() != assigned[v].size()) throw InvariantViolation("balanced entries lost in routing");
        for (std::size_t q = 0; q < delivered[v].size(); ++q) {
            const Message& m = delivered[v][q];
            LoadItem it;
            it.len = m.len;
            it.words = m.payload;
            it.key = m[m.len - 1];
            it.weight = assigned[v][q];
            out[v].push_back(it);
        }
    }
    for (NodeId v = 0; v < n; ++v) {
        std::uint64_t w = 0;
        for (const LoadItem& it : out[v]) w += it.weight;
        if (out[v].size() > n || w * n > 2 * (total_bound + n * n))
            throw InvariantViolation("balanced load exceeds 2(W/n + n) at node " + std::to_string(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cube partition

namespace detail {

template <class S>
void append_value(Message& m, const typename S::value_type& v) {
    S::encode(v, m);
}

}  // namespace detail

/// Computes the globally known subcube tiling. Row blocks balance the row
/// counts of S, column blocks the column counts of T, and the middle ranges
/// of every (row block, column block) pair balance both slices at once.
template <class S>
CubePartition cube_partition(Clique& net, const SparseMatrix<S>& lhs, const SparseMatrix<S>& rhs, MmParams p) {
    const std::size_t n = net.size();
    if (lhs.size() != n || rhs.size() != n) throw PreconditionError("matrix size differs from the clique size");
    if (p.a * p.b * p.c < n) throw PreconditionError("a*b*c must be at least n");
    CubePartition cp;
    cp.n = n;
    cp.p = p;

    // Row blocks from the broadcast row counts of S.
    std::vector<Word> row_nz(n);
    for (NodeId v = 0; v < n; ++v) row_nz[v] = lhs.row(v).size();
    row_nz = net.broadcast_word(row_nz);
    auto rb = partition_even(std::span<const std::uint64_t>(row_nz), p.b);

    // Column counts of T: every entry (v,u) is announced to u, one message per pair.
    std::vector<Message> msgs;
    for (NodeId v = 0; v < n; ++v)
        for (const auto& e : rhs.row(v)) msgs.push_back(Message::make(v, e.col, {}));
    Inboxes got = net.exchange(msgs);
    std::vector<Word> col_nz(n);
    for (NodeId u = 0; u < n; ++u) col_nz[u] = got[u].size();
    col_nz = net.broadcast_word(col_nz);
    auto cb = partition_even(std::span<const std::uint64_t>(col_nz), p.a);

    cp.row_blocks.resize(p.b);
    cp.col_blocks.resize(p.a);
    cp.row_block_of.assign(n, 0);
    cp.col_block_of.assign(n, 0);
    cp.row_pos.assign(n, 0);
    for (std::size_t i = 0; i < p.b; ++i) {
        for (std::size_t r : rb[i]) {
            cp.row_block_of[r] = static_cast<std::uint32_t>(i);
            cp.row_pos[r] = static_cast<std::uint32_t>(cp.row_blocks[i].size());
            cp.row_blocks[i].push_back(static_cast<NodeId>(r));
        }
    }
    for (std::size_t j = 0; j < p.a; ++j)
        for (std::size_t u : cb[j]) {
            cp.col_block_of[u] = static_cast<std::uint32_t>(j);
            cp.col_blocks[j].push_back(static_cast<NodeId>(u));
        }

    // Node v learns column v of S.
    msgs.clear();
    for (NodeId r = 0; r < n; ++r)
        for (const auto& e : lhs.row(r)) {
            Message m;
            m.src = r;
            m.dst = e.col;
            detail::append_value<S>(m, e.val);
            msgs.push_back(m);
        }
    Inboxes columns = net.exchange(msgs);

    // Node v sends (nz(S[rows(i), v]), nz(T[v, cols(j)])) to every slot (i,j,k).
    std::vector<std::vector<Word>> s_count(n, std::vector<Word>(p.b, 0));
    std::vector<std::vector<Word>> t_count(n, std::vector<Word>(p.a, 0));
    for (NodeId v = 0; v < n; ++v) {
        for (const Message& m : columns[v]) ++s_count[v][cp.row_block_of[m.src]];
        for (const auto& e : rhs.row(v)) ++t_count[v][cp.col_block_of[e.col]];
    }
    msgs.clear();
    const std::size_t slots = p.slots();
    for (NodeId v = 0; v < n; ++v)
        for (std::size_t t = 0; t < slots; ++t) {
            SlotIndex s = cp.index(t);
            if (s_count[v][s.i] == 0 && t_count[v][s.j] == 0) continue;  // zero counts are implicit
            msgs.push_back(Message::make(v, cp.host(t), {s_count[v][s.i], t_count[v][s.j], t}));
        }
    Inboxes counts = net.route_batched(msgs);

    // All c slots of group (i,j) hold the same two count vectors and compute
    // the same split; it is evaluated once per group here.
    cp.middle.assign(p.a * p.b, {});
    std::vector<std::vector<std::uint64_t>> ws(p.a * p.b, std::vector<std::uint64_t>(n, 0));
    std::vector<std::vector<std::uint64_t>> wt(p.a * p.b, std::vector<std::uint64_t>(n, 0));
    for (NodeId h = 0; h < n; ++h)
        for (const Message& m : counts[h]) {
            std::size_t t = m[2];
            SlotIndex s = cp.index(t);
            if (s.k != 0) continue;
            ws[s.i * p.a + s.j][m.src] = m[0];
            wt[s.i * p.a + s.j][m.src] = m[1];
        }
    for (std::size_t g = 0; g < p.a * p.b; ++g) cp.middle[g] = partition_consecutive_2(ws[g], wt[g], p.c);

    // The k-th slot of each group broadcasts the ends of its middle range.
    std::vector<std::vector<Word>> ends(n);
    for (std::size_t t = 0; t < slots; ++t) {
        const Range& r = cp.middle_range(t);
        ends[cp.host(t)].push_back(r.begin);
        ends[cp.host(t)].push_back(r.end);
    }
    net.broadcast(std::move(ends));
    return cp;
}

/// Nonzero counts of the two input slices of every slot.
template <class S>
std::pair<std::vector<std::uint64_t>, std::vector<std::uint64_t>> slice_counts(const CubePartition& cp,
                                                                               const SparseMatrix<S>& lhs,
                                                                               const SparseMatrix<S>& rhs) {
    std::vector<std::uint64_t> sc(cp.slots(), 0), tc(cp.slots(), 0);
    for (NodeId r = 0; r < cp.n; ++r)
        for (const auto& e : lhs.row(r)) {
            std::size_t i = cp.row_block_of[r];
            for (std::size_t j = 0; j < cp.p.a; ++j) ++sc[cp.slot(i, j, cp.middle_block(i, j, e.col))];
        }
    for (NodeId m = 0; m < cp.n; ++m)
        for (const auto& e : rhs.row(m)) {
            std::size_t j = cp.col_block_of[e.col];
            for (std::size_t i = 0; i < cp.p.b; ++i) ++tc[cp.slot(i, j, cp.middle_block(i, j, m))];
        }
    return {sc, tc};
}

/// Asserts the per-slot slice bounds 4(rho_s a + n) and 4(rho_t b + n).
template <class S>
void check_cube_bounds(const CubePartition& cp, const SparseMatrix<S>& lhs, const SparseMatrix<S>& rhs, MmTrace* trace) {
    auto [sc, tc] = slice_counts(cp, lhs, rhs);
    const std::uint64_t n = cp.n;
    const std::uint64_t bound_s = kBoundSlack * (lhs.density() * cp.p.a + n);
    const std::uint64_t bound_t = kBoundSlack * (rhs.density() * cp.p.b + n);
    for (std::size_t t = 0; t < cp.slots(); ++t) {
        if (sc[t] > bound_s) throw InvariantViolation("left slice of slot " + std::to_string(t) + " exceeds 4(rho a + n)");
        if (tc[t] > bound_t) throw InvariantViolation("right slice of slot " + std::to_string(t) + " exceeds 4(rho b + n)");
    }
    if (trace) {
        for (auto x : sc) trace->max_s_slice = std::max(trace->max_s_slice, x);
        for (auto x : tc) trace->max_t_slice = std::max(trace->max_t_slice, x);
    }
}

// ---------------------------------------------------------------------------
// Local products

template <class S>
struct SliceEntry {
    NodeId row = 0;
    NodeId col = 0;
    typename S::value_type val{};
};

/// Sequential product of two slices; result sorted by (row, col) with the
/// canonical witness per cell.
template <class S>
std::vector<Triple<S>> multiply_slices(std::size_t n, std::vector<SliceEntry<S>> left, std::vector<SliceEntry<S>> right) {
    std::sort(left.begin(), left.end(), [](const auto& x, const auto& y) { return x.row != y.row ? x.row < y.row : x.col < y.col; });
    std::sort(right.begin(), right.end(), [](const auto& x, const auto& y) { return x.row != y.row ? x.row < y.row : x.col < y.col; });
    std::vector<std::size_t> start(n + 1, 0);
    for (const auto& e : right) ++start[e.row + 1];
    for (std::size_t i = 0; i < n; ++i) start[i + 1] += start[i];

    std::vector<Triple<S>> out;
    struct Cell {
        typename S::value_type v;
    };
    std::vector<Cell> acc(n, Cell{S::zero()});
    std::vector<NodeId> wit(n, kNoWitness);
    std::vector<char> seen(n, 0);
    std::vector<NodeId> touched;
    std::size_t i = 0;
    while (i < left.size()) {
        const NodeId r = left[i].row;
        touched.clear();
        for (; i < left.size() && left[i].row == r; ++i) {
            const NodeId m = left[i].col;
            for (std::size_t q = start[m]; q < start[m + 1]; ++q) {
                const auto& e = right[q];
                auto v = S::mul(left[i].val, e.val);
                if (S::is_zero(v)) continue;
                if (!seen[e.col]) {
                    seen[e.col] = 1;
                    touched.push_back(e.col);
                    acc[e.col].v = v;
                    wit[e.col] = m;
                } else {
                    accumulate<S>(acc[e.col].v, wit[e.col], v, m);
                }
            }
        }
        std::sort(touched.begin(), touched.end());
        for (NodeId c : touched) {
            out.push_back({r, c, acc[c].v, wit[c]});
            seen[c] = 0;
        }
    }
    return out;
}

/// Every worker learns the two input slices of its slot (one balancing step
/// and one batched routing per input) and computes the local product.
template <class S>
std::vector<std::vector<Triple<S>>> distribute_products(Clique& net, const CubePartition& cp, const SparseMatrix<S>& lhs,
                                                        const SparseMatrix<S>& rhs, std::span<const Worker> workers) {
    const std::size_t n = net.size();
    std::vector<std::vector<NodeId>> hosts_of(cp.slots());
    for (const Worker& w : workers) {
        if (w.slot >= cp.slots() || w.host >= n) throw PreconditionError("worker outside the partition");
        hosts_of[w.slot].push_back(w.host);
    }
    for (auto& h : hosts_of) {
        std::sort(h.begin(), h.end());
        h.erase(std::unique(h.begin(), h.end()), h.end());
    }

    // For an entry, the slots whose slice contains it.
    auto slots_left = [&](NodeId r, NodeId m, std::vector<std::size_t>& out) {
        out.clear();
        std::size_t i = cp.row_block_of[r];
        for (std::size_t j = 0; j < cp.p.a; ++j) out.push_back(cp.slot(i, j, cp.middle_block(i, j, m)));
    };
    auto slots_right = [&](NodeId m, NodeId col, std::vector<std::size_t>& out) {
        out.clear();
        std::size_t j = cp.col_block_of[col];
        for (std::size_t i = 0; i < cp.p.b; ++i) out.push_back(cp.slot(i, j, cp.middle_block(i, j, m)));
    };

    auto gather = [&](const SparseMatrix<S>& mat, auto&& slots_for) {
        std::vector<std::size_t> ts;
        std::vector<NodeId> hs;
        auto hosts_for = [&](NodeId r, NodeId c) {
            slots_for(r, c, ts);
            hs.clear();
            for (std::size_t t : ts) hs.insert(hs.end(), hosts_of[t].begin(), hosts_of[t].end());
            std::sort(hs.begin(), hs.end());
            hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
        };
        // Weight of an entry = number of distinct nodes that need it.
        std::vector<std::vector<LoadItem>> items(n);
        std::uint64_t total = 0;
        for (NodeId r = 0; r < n; ++r)
            for (const auto& e : mat.row(r)) {
                hosts_for(r, e.col);
                if (hs.empty()) continue;
                LoadItem it;
                it.weight = hs.size();
                it.key = Word{r} * n + e.col;
                Message m;
                S::encode(e.val, m);
                m.push(it.key);
                it.words = m.payload;
                it.len = m.len;
                items[r].push_back(it);
                total += it.weight;
            }
        auto balanced = balance_load(net, std::move(items), total);
        std::vector<Message> copies;
        for (NodeId v = 0; v < n; ++v)
            for (const LoadItem& it : balanced[v]) {
                const NodeId r = static_cast<NodeId>(it.key / n), c = static_cast<NodeId>(it.key % n);
                hosts_for(r, c);
                for (NodeId h : hs) {
                    Message m;
                    m.src = v;
                    m.dst = h;
                    m.len = it.len;
                    m.payload = it.words;
                    copies.push_back(m);
                }
            }
        return net.route_batched(copies);
    };

    Inboxes left_in = gather(lhs, slots_left);
    Inboxes right_in = gather(rhs, slots_right);

    auto decode = [&](const Message& m) {
        SliceEntry<S> e;
        const Word key = m[m.len - 1];
        e.row = static_cast<NodeId>(key / n);
        e.col = static_cast<NodeId>(key % n);
        e.val = S::decode(m.words().first(S::kWords));
        return e;
    };

    std::vector<std::vector<Triple<S>>> products(workers.size());
    for (std::size_t w = 0; w < workers.size(); ++w) {
        const std::size_t t = workers[w].slot;
        const NodeId h = workers[w].host;
        const SlotIndex s = cp.index(t);
        const Range& mid = cp.middle_range(t);
        std::vector<SliceEntry<S>> ls, rs;
        for (const Message& m : left_in[h]) {
            auto e = decode(m);
            if (cp.row_block_of[e.row] == s.i && mid.contains(e.col)) ls.push_back(e);
        }
        for (const Message& m : right_in[h]) {
            auto e = decode(m);
            if (cp.col_block_of[e.col] == s.j && mid.contains(e.row)) rs.push_back(e);
        }
        products[w] = multiply_slices<S>(n, std::move(ls), std::move(rs));
    }
    return products;
}

// ---------------------------------------------------------------------------
// Balanced intermediate values

/// Duplicates the dense subcube products so that every node holds at most
/// 4 * rho_hat * c intermediate values, each elementary product covered once.
/// Throws DensityUnderestimate when more than n duplicates would be needed.
template <class S>
std::vector<std::vector<Triple<S>>> balance_intermediate(Clique& net, const CubePartition& cp, const SparseMatrix<S>& lhs,
                                                         const SparseMatrix<S>& rhs,
                                                         const std::vector<std::vector<Triple<S>>>& primary,
                                                         std::uint64_t rho_hat, MmTrace* trace = nullptr) {
    const std::size_t n = net.size();
    const std::size_t slots = cp.slots();
    if (primary.size() != slots) throw PreconditionError("one primary product per slot expected");

    std::vector<std::vector<Word>> sizes(n);
    for (std::size_t t = 0; t < slots; ++t) sizes[cp.host(t)].push_back(primary[t].size());
    net.broadcast(std::move(sizes));

    const std::uint64_t part = rho_hat * cp.p.c;
    std::vector<std::uint64_t> extra(slots, 0);
    std::uint64_t needed = 0;
    for (std::size_t t = 0; t < slots; ++t) {
        extra[t] = primary[t].size() / part;
        needed += extra[t];
    }
    if (needed > n)
        throw DensityUnderestimate("output density estimate " + std::to_string(rho_hat) + " needs " +
                                   std::to_string(needed) + " duplicate slots");

    std::vector<Worker> dups;
    std::vector<std::vector<std::size_t>> dup_index(slots);  // slot -> indices into dups
    NodeId next = 0;
    for (std::size_t t = 0; t < slots; ++t)
        for (std::uint64_t e = 0; e < extra[t]; ++e) {
            dup_index[t].push_back(dups.size());
            dups.push_back({next++, t});
        }
    std::vector<std::vector<Triple<S>>> dup_products;
    if (!dups.empty()) dup_products = distribute_products(net, cp, lhs, rhs, dups);

    std::vector<std::vector<Triple<S>>> held(n);
    auto take = [&](NodeId h, const std::vector<Triple<S>>& prod, std::size_t idx) {
        const std::size_t lo = std::min(prod.size(), idx * part);
        const std::size_t hi = std::min(prod.size(), (idx + 1) * part);
        held[h].insert(held[h].end(), prod.begin() + static_cast<std::ptrdiff_t>(lo), prod.begin() + static_cast<std::ptrdiff_t>(hi));
    };
    for (std::size_t t = 0; t < slots; ++t) {
        take(cp.host(t), primary[t], 0);
        for (std::size_t q = 0; q < dup_index[t].size(); ++q) {
            const std::size_t d = dup_index[t][q];
            if (dup_products[d] != primary[t]) throw InvariantViolation("duplicate subcube product differs");
            take(dups[d].host, dup_products[d], q + 1);
        }
    }
    for (NodeId v = 0; v < n; ++v) {
        if (held[v].size() > kBoundSlack * part)
            throw InvariantViolation("node " + std::to_string(v) + " holds more than 4 rho c intermediate values");
        if (trace) trace->max_values_per_node = std::max<std::uint64_t>(trace->max_values_per_node, held[v].size());
    }
    if (trace) trace->duplicated_slots = dups.size();
    return held;
}

// ---------------------------------------------------------------------------
// Balanced summation

namespace detail {

template <class S>
struct SumItem {
    Word pos = kInf;  // row * n + col; kInf for padding
    typename S::value_type val{};
    NodeId wit = kNoWitness;
};

template <class S>
Message sum_message(NodeId src, NodeId dst, const SumItem<S>& it, std::size_t n) {
    Message m;
    m.src = src;
    m.dst = dst;
    S::encode(it.val, m);
    const Word w = it.wit == kNoWitness ? n : it.wit;
    m.push(it.pos * (n + 1) + w);
    return m;
}

template <class S>
SumItem<S> sum_decode(const Message& m, std::size_t n) {
    SumItem<S> it;
    const Word key = m[m.len - 1];
    it.pos = key / (n + 1);
    const Word w = key % (n + 1);
    it.wit = w == n ? kNoWitness : static_cast<NodeId>(w);
    it.val = S::decode(m.words().first(S::kWords));
    return it;
}

}  // namespace detail

/// Sums intermediate values into the product; node v ends with row v.
/// Repeats (global sort by position, local sums, boundary merge to the
/// smallest holder, routing to row owners) once per n values per node.
template <class S>
SparseMatrix<S> sum_intermediate(Clique& net, const std::vector<std::vector<Triple<S>>>& held, MmTrace* trace = nullptr) {
    using Item = detail::SumItem<S>;
    const std::size_t n = net.size();
    if (held.size() != n) throw PreconditionError("sum_intermediate needs one value list per node");
    // Value counts per node follow from previously broadcast product sizes.
    std::size_t repeats = 0;
    for (const auto& h : held) repeats = std::max(repeats, (h.size() + n - 1) / n);
    if (trace) trace->summation_repeats += repeats;

    std::vector<std::vector<Entry<S>>> rows(n);
    auto before = [](const Item& x, const Item& y) {
        if (x.pos != y.pos) return x.pos < y.pos;
        return preferred<S>(x.val, x.wit, y.val, y.wit);
    };
    for (std::size_t rep = 0; rep < repeats; ++rep) {
        std::vector<std::vector<Item>> batch(n);
        for (NodeId v = 0; v < n; ++v) {
            const auto& h = held[v];
            for (std::size_t q = rep * n; q < std::min(h.size(), (rep + 1) * n); ++q)
                batch[v].push_back({Word{h[q].row} * n + h[q].col, h[q].val, h[q].wit});
            batch[v].resize(n, Item{});
        }
        auto sorted = net.sort_global(std::move(batch), before);

        // Local sums per position.
        std::vector<std::vector<Item>> sums(n);
        for (NodeId v = 0; v < n; ++v)
            for (const Item& it : sorted[v]) {
                if (it.pos == kInf) continue;
                if (!sums[v].empty() && sums[v].back().pos == it.pos)
                    accumulate<S>(sums[v].back().val, sums[v].back().wit, it.val, it.wit);
                else
                    sums[v].push_back(it);
            }

        // Boundary positions are merged into their smallest holder.
        std::vector<std::vector<Word>> bounds(n);
        for (NodeId v = 0; v < n; ++v)
            if (!sums[v].empty()) bounds[v] = {sums[v].front().pos, sums[v].back().pos};
        bounds = net.broadcast(std::move(bounds));
        std::vector<Message> merge;
        for (NodeId v = 0; v < n; ++v) {
            if (sums[v].empty()) continue;
            const Word p = sums[v].front().pos;
            NodeId h = v;
            for (NodeId u = v; u-- > 0;) {
                if (bounds[u].empty()) continue;
                if (bounds[u][1] == p)
                    h = u;
                else
                    break;
            }
            if (h != v) {
                merge.push_back(detail::sum_message<S>(v, h, sums[v].front(), n));
                sums[v].erase(sums[v].begin());
            }
        }
        Inboxes got = net.exchange(merge);
        for (NodeId v = 0; v < n; ++v)
            for (const Message& m : got[v]) {
                Item it = detail::sum_decode<S>(m, n);
                auto pos = std::find_if(sums[v].begin(), sums[v].end(), [&](const Item& x) { return x.pos == it.pos; });
                if (pos == sums[v].end()) throw InvariantViolation("merged sum for a position the node does not hold");
                accumulate<S>(pos->val, pos->wit, it.val, it.wit);
            }

        // Route every sum to the owner of its row.
        std::vector<Message> out;
        for (NodeId v = 0; v < n; ++v)
            for (const Item& it : sums[v]) out.push_back(detail::sum_message<S>(v, static_cast<NodeId>(it.pos / n), it, n));
        Inboxes delivered = net.route(out);
        for (NodeId v = 0; v < n; ++v)
            for (const Message& m : delivered[v]) {
                Item it = detail::sum_decode<S>(m, n);
                rows[v].push_back({static_cast<NodeId>(it.pos % n), it.val, it.wit});
            }
    }

    SparseMatrix<S> product(n);
    for (NodeId v = 0; v < n; ++v) {
        auto& r = rows[v];
        std::sort(r.begin(), r.end(), [](const Entry<S>& x, const Entry<S>& y) {
            if (x.col != y.col) return x.col < y.col;
            return preferred<S>(x.val, x.wit, y.val, y.wit);
        });
        auto& dst = product.row(v);
        for (const Entry<S>& e : r) {
            if (!dst.empty() && dst.back().col == e.col)
                accumulate<S>(dst.back().val, dst.back().wit, e.val, e.wit);
            else
                dst.push_back(e);
        }
    }
    return product;
}

// ---------------------------------------------------------------------------
// Sparse multiplication

namespace detail {

// Every node broadcasts its two row sizes; returns both densities.
inline std::pair<std::uint64_t, std::uint64_t> broadcast_densities(Clique& net, auto&& row_nz) {
    const std::size_t n = net.size();
    std::vector<std::vector<Word>> w(n);
    for (NodeId v = 0; v < n; ++v) {
        auto [l, r] = row_nz(v);
        w[v] = {l, r};
    }
    auto known = net.broadcast(std::move(w));
    std::uint64_t sl = 0, sr = 0;
    for (const auto& k : known) {
        sl += k[0];
        sr += k[1];
    }
    return {density_of(sl, n), density_of(sr, n)};
}

inline void require_engine_bandwidth(const Clique& net) {
    if (net.bandwidth() < 3) throw PreconditionError("the matrix engine needs messages of at least 3 words");
}

}  // namespace detail

template <class S>
struct MmResult {
    SparseMatrix<S> product;
    MmTrace trace;
};

/// Exact semiring product lhs * rhs with a canonical witness per entry.
/// Without a density hint the output density estimate starts at 1 and is
/// doubled after every DensityUnderestimate (each restart is recorded).
template <class S>
MmResult<S> sparse_mm(Clique& net, const SparseMatrix<S>& lhs, const SparseMatrix<S>& rhs,
                      std::optional<std::uint64_t> rho_hint = std::nullopt) {
    detail::require_engine_bandwidth(net);
    const std::size_t n = net.size();
    if (lhs.size() != n || rhs.size() != n) throw PreconditionError("matrix size differs from the clique size");
    MmResult<S> res;
    auto [rs, rt] = detail::broadcast_densities(net, [&](NodeId v) {
        return std::pair<Word, Word>{lhs.row(v).size(), rhs.row(v).size()};
    });
    res.trace.rho_s = rs;
    res.trace.rho_t = rt;
    std::uint64_t rho_hat = std::clamp<std::uint64_t>(rho_hint.value_or(1), 1, n);
    for (;;) {
        MmParams p = mm_params(rs, rt, rho_hat, n);
        res.trace.params = p;
        res.trace.rho_out = rho_hat;
        CubePartition cp = cube_partition(net, lhs, rhs, p);
        check_cube_bounds(cp, lhs, rhs, &res.trace);
        std::vector<Worker> primary_workers(cp.slots());
        for (std::size_t t = 0; t < cp.slots(); ++t) primary_workers[t] = {cp.host(t), t};
        auto primary = distribute_products(net, cp, lhs, rhs, primary_workers);
        try {
            auto held = balance_intermediate(net, cp, lhs, rhs, primary, rho_hat, &res.trace);
            res.product = sum_intermediate(net, held, &res.trace);
            return res;
        } catch (const DensityUnderestimate&) {
            if (rho_hat >= n) throw InvariantViolation("density estimate n reported as an underestimate");
            rho_hat = std::min<std::uint64_t>(2 * rho_hat, n);
            ++res.trace.restarts;
            net.note("mm_restart");
        }
    }
}

// ---------------------------------------------------------------------------
// Filtered multiplication

/// Order-preserving integer code of (value, column) used by the cutoff search.
template <class S>
    requires OrderedSemiring<S>
struct CodeSpace {
    std::array<Word, S::kKeyParts> radix{};
    std::size_t n = 0;
    Word max_code = 0;

    Word code(const typename S::value_type& v, NodeId col) const {
        auto k = S::key(v);
        Word c = 0;
        for (std::size_t p = 0; p < S::kKeyParts; ++p) c = c * radix[p] + k[p];
        return c * n + col;
    }
};

template <class S>
    requires OrderedSemiring<S>
CodeSpace<S> make_code_space(std::span<const Word> key_max, std::size_t n) {
    CodeSpace<S> cs;
    cs.n = n;
    detail::u128 span = 1;
    for (std::size_t p = 0; p < S::kKeyParts; ++p) {
        cs.radix[p] = key_max[p] + 1;
        span *= cs.radix[p];
        if (span > (detail::u128(1) << 62)) throw PreconditionError("value domain too large for the cutoff search");
    }
    span *= n;
    if (span > (detail::u128(1) << 62)) throw PreconditionError("value domain too large for the cutoff search");
    cs.max_code = static_cast<Word>(span - 1);
    return cs;
}

inline constexpr Word kNoCutoff = kInf;

/// Per slot and per row of its row block: the code of the rho-th smallest
/// (value, column) pair of that row of P_k, or kNoCutoff when the row holds at
/// most rho entries. Parallel binary searches, one coordinator per row chosen
/// round-robin inside the group of slots sharing (row block, middle block).
template <class S>
    requires OrderedSemiring<S>
std::vector<std::vector<Word>> cutoff_search(Clique& net, const CubePartition& cp,
                                             const std::vector<std::vector<Triple<S>>>& products, std::uint64_t rho,
                                             CodeSpace<S>& space, MmTrace* trace = nullptr) {
    const std::size_t n = net.size();
    const std::size_t slots = cp.slots();
    const MmParams p = cp.p;

    // Value domain: every node broadcasts the componentwise maxima it holds.
    std::vector<std::vector<Word>> maxima(n, std::vector<Word>(S::kKeyParts, 0));
    for (std::size_t t = 0; t < slots; ++t)
        for (const auto& e : products[t]) {
            auto k = S::key(e.val);
            for (std::size_t q = 0; q < S::kKeyParts; ++q) maxima[cp.host(t)][q] = std::max(maxima[cp.host(t)][q], k[q]);
        }
    auto known = net.broadcast(std::move(maxima));
    std::array<Word, S::kKeyParts> top{};
    for (const auto& m : known)
        for (std::size_t q = 0; q < S::kKeyParts; ++q) top[q] = std::max(top[q], m[q]);
    space = make_code_space<S>(top, n);

    // Sorted codes per (slot, row).
    std::vector<std::map<NodeId, std::vector<Word>>> codes(slots);
    for (std::size_t t = 0; t < slots; ++t)
        for (const auto& e : products[t]) codes[t][e.row].push_back(space.code(e.val, e.col));
    for (auto& m : codes)
        for (auto& [r, v] : m) std::sort(v.begin(), v.end());

    auto coordinator = [&](std::size_t t, NodeId row) {
        SlotIndex s = cp.index(t);
        return cp.slot(s.i, cp.row_pos[row] % p.a, s.k);
    };

    struct Search {
        std::vector<std::size_t> participants;  // slots
        std::uint64_t total = 0;
        Word lo = 0;
        Word hi = 0;
        std::uint64_t pending = 0;
    };
    // Key: coordinator slot * n + row.
    std::map<Word, Search> searches;

    // Participants report their row counts to the coordinator.
    std::vector<Message> msgs;
    for (std::size_t t = 0; t < slots; ++t)
        for (const auto& [row, v] : codes[t]) {
            std::size_t c = coordinator(t, row);
            msgs.push_back(Message::make(cp.host(t), cp.host(c), {Word{c} * n + row, cp.index(t).j, v.size()}));
        }
    Inboxes got = net.route_batched(msgs);
    for (NodeId h = 0; h < n; ++h)
        for (const Message& m : got[h]) {
            Search& s = searches[m[0]];
            const std::size_t c = m[0] / n;
            const SlotIndex ci = cp.index(c);
            s.participants.push_back(cp.slot(ci.i, m[1], ci.k));
            s.total += m[2];
        }
    for (auto it = searches.begin(); it != searches.end();) {
        if (it->second.total <= rho) {
            it = searches.erase(it);
        } else {
            it->second.lo = 0;
            it->second.hi = space.max_code;
            ++it;
        }
    }

    // Lockstep binary search: probe, then counts, per iteration.
    std::uint64_t iterations = 0;
    for (;;) {
        msgs.clear();
        for (auto& [key, s] : searches) {
            if (s.lo >= s.hi) continue;
            const std::size_t c = key / n;
            const NodeId row = static_cast<NodeId>(key % n);
            const Word mid = s.lo + (s.hi - s.lo) / 2;
            for (std::size_t t : s.participants)
                msgs.push_back(Message::make(cp.host(c), cp.host(t), {Word{t} * n + row, mid, c}));
        }
        if (msgs.empty()) break;
        ++iterations;
        Inboxes probes = net.route_batched(msgs);
        std::vector<Message> replies;
        for (NodeId h = 0; h < n; ++h)
            for (const Message& m : probes[h]) {
                const std::size_t t = m[0] / n;
                const NodeId row = static_cast<NodeId>(m[0] % n);
                const auto& v = codes[t].at(row);
                const Word below = static_cast<Word>(std::upper_bound(v.begin(), v.end(), m[1]) - v.begin());
                replies.push_back(Message::make(cp.host(t), cp.host(m[2]), {Word{m[2]} * n + row, below}));
            }
        Inboxes counts = net.route_batched(replies);
        std::map<Word, std::uint64_t> tally;
        for (NodeId h = 0; h < n; ++h)
            for (const Message& m : counts[h]) tally[m[0]] += m[1];
        for (auto& [key, s] : searches) {
            if (s.lo >= s.hi) continue;
            const Word mid = s.lo + (s.hi - s.lo) / 2;
            if (tally[key] >= rho)
                s.hi = mid;
            else
                s.lo = mid + 1;
        }
    }
    if (trace) trace->search_iterations += iterations;

    // Coordinators announce the cutoff to every slot of their group.
    msgs.clear();
    for (auto& [key, s] : searches) {
        const std::size_t c = key / n;
        const NodeId row = static_cast<NodeId>(key % n);
        const SlotIndex ci = cp.index(c);
        for (std::size_t j = 0; j < p.a; ++j) {
            std::size_t t = cp.slot(ci.i, j, ci.k);
            msgs.push_back(Message::make(cp.host(c), cp.host(t), {Word{t} * n + row, s.lo}));
        }
    }
    Inboxes cut = net.route_batched(msgs);
    std::vector<std::vector<Word>> cutoffs(slots);
    for (std::size_t t = 0; t < slots; ++t) cutoffs[t].assign(cp.row_blocks[cp.index(t).i].size(), kNoCutoff);
    for (NodeId h = 0; h < n; ++h)
        for (const Message& m : cut[h]) {
            const std::size_t t = m[0] / n;
            const NodeId row = static_cast<NodeId>(m[0] % n);
            cutoffs[t][cp.row_pos[row]] = m[1];
        }
    return cutoffs;
}

/// Each row of the result holds the min(sigma, rho) smallest entries of the
/// corresponding row of lhs * rhs under (value, column) order.
template <class S>
    requires OrderedSemiring<S>
MmResult<S> filtered_mm(Clique& net, const SparseMatrix<S>& lhs, const SparseMatrix<S>& rhs, std::uint64_t rho) {
    detail::require_engine_bandwidth(net);
    const std::size_t n = net.size();
    if (rho == 0) throw PreconditionError("filter size must be a positive integer");
    if (lhs.size() != n || rhs.size() != n) throw PreconditionError("matrix size differs from the clique size");
    rho = std::min<std::uint64_t>(rho, n);
    MmResult<S> res;
    auto [rs, rt] = detail::broadcast_densities(net, [&](NodeId v) {
        return std::pair<Word, Word>{lhs.row(v).size(), rhs.row(v).size()};
    });
    res.trace.rho_s = rs;
    res.trace.rho_t = rt;
    res.trace.rho_out = rho;
    const MmParams p = mm_params(rs, rt, rho, n);
    res.trace.params = p;
    CubePartition cp = cube_partition(net, lhs, rhs, p);
    check_cube_bounds(cp, lhs, rhs, &res.trace);
    const std::size_t slots = cp.slots();
    std::vector<Worker> primary_workers(slots);
    for (std::size_t t = 0; t < slots; ++t) primary_workers[t] = {cp.host(t), t};
    auto primary = distribute_products(net, cp, lhs, rhs, primary_workers);

    CodeSpace<S> space;
    auto cutoffs = cutoff_search(net, cp, primary, rho, space, &res.trace);
    auto kept = [&](std::size_t t, const std::vector<Triple<S>>& prod) {
        std::vector<Triple<S>> out;
        for (const auto& e : prod)
            if (space.code(e.val, e.col) <= cutoffs[t][cp.row_pos[e.row]] || cutoffs[t][cp.row_pos[e.row]] == kNoCutoff)
                out.push_back(e);
        return out;
    };
    std::vector<std::vector<Triple<S>>> filtered(slots);
    for (std::size_t t = 0; t < slots; ++t) filtered[t] = kept(t, primary[t]);

    // Filtering balance: heavy slots get helpers from their own group.
    std::vector<std::vector<Word>> sizes(n);
    for (std::size_t t = 0; t < slots; ++t) sizes[cp.host(t)].push_back(filtered[t].size());
    net.broadcast(std::move(sizes));
    std::vector<std::uint64_t> threshold(p.b);
    std::uint64_t alpha_max = 1;
    for (std::size_t i = 0; i < p.b; ++i) {
        const std::uint64_t alpha = std::max<std::uint64_t>(1, detail::ceil_div(cp.row_blocks[i].size() * p.b, n));
        alpha_max = std::max(alpha_max, alpha);
        threshold[i] = rho * alpha * p.c;
    }
    std::vector<Worker> helpers;
    std::vector<std::vector<std::size_t>> helper_index(slots);
    for (std::size_t i = 0; i < p.b; ++i)
        for (std::size_t k = 0; k < p.c; ++k) {
            std::size_t next_j = 0;
            for (std::size_t j = 0; j < p.a; ++j) {
                const std::size_t t = cp.slot(i, j, k);
                const std::uint64_t extra = filtered[t].size() / threshold[i];
                for (std::uint64_t e = 0; e < extra; ++e) {
                    if (next_j == p.a) throw InvariantViolation("filtering balance ran out of helper slots");
                    helper_index[t].push_back(helpers.size());
                    helpers.push_back({cp.host(cp.slot(i, next_j++, k)), t});
                }
            }
        }
    std::vector<std::vector<Triple<S>>> helper_products;
    if (!helpers.empty()) helper_products = distribute_products(net, cp, lhs, rhs, helpers);
    res.trace.duplicated_slots = helpers.size();

    std::vector<std::vector<Triple<S>>> held(n);
    auto take = [&](NodeId h, const std::vector<Triple<S>>& prod, std::size_t idx, std::uint64_t part) {
        const std::size_t lo = std::min<std::size_t>(prod.size(), idx * part);
        const std::size_t hi = std::min<std::size_t>(prod.size(), (idx + 1) * part);
        held[h].insert(held[h].end(), prod.begin() + static_cast<std::ptrdiff_t>(lo), prod.begin() + static_cast<std::ptrdiff_t>(hi));
    };
    for (std::size_t t = 0; t < slots; ++t) {
        const std::uint64_t part = threshold[cp.index(t).i];
        take(cp.host(t), filtered[t], 0, part);
        for (std::size_t q = 0; q < helper_index[t].size(); ++q) {
            const std::size_t d = helper_index[t][q];
            auto mine = kept(t, helper_products[d]);
            if (mine != filtered[t]) throw InvariantViolation("helper product differs from the primary product");
            take(helpers[d].host, mine, q + 1, part);
        }
    }
    const std::uint64_t bound = kBoundSlack * rho * alpha_max * p.c;
    for (NodeId v = 0; v < n; ++v) {
        if (held[v].size() > bound)
            throw InvariantViolation("node " + std::to_string(v) + " holds more than 4 rho alpha c filtered values");
        res.trace.max_values_per_node = std::max<std::uint64_t>(res.trace.max_values_per_node, held[v].size());
    }

    SparseMatrix<S> partial = sum_intermediate(net, held, &res.trace);
    res.product = keep_smallest(partial, rho);
    return res;
}

}  // namespace ccsp
