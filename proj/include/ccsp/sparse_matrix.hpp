#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccsp/errors.hpp"
#include "ccsp/graph.hpp"
#include "ccsp/semiring.hpp"

namespace ccsp {

template <class S>
struct Entry {
    NodeId col = 0;
    typename S::value_type val{};
    NodeId wit = kNoWitness;  // middle index of the product term that produced val

    friend bool operator==(const Entry&, const Entry&) = default;
};

/// Smallest positive integer rho with nz <= rho * n.
inline std::uint64_t density_of(std::uint64_t nz, std::size_t n) {
    if (n == 0) return 1;
    return std::max<std::uint64_t>(1, (nz + n - 1) / n);
}

/// Row-sparse n x n matrix over S. Rows hold no explicit zeros and are sorted
/// by strictly increasing column.
template <class S>
class SparseMatrix {
public:
    using value_type = typename S::value_type;
    using Row = std::vector<Entry<S>>;

    SparseMatrix() = default;
    explicit SparseMatrix(std::size_t n) : rows_(n) {}

    static SparseMatrix identity(std::size_t n) {
        SparseMatrix m(n);
        for (NodeId v = 0; v < n; ++v) m.rows_[v].push_back({v, S::one(), kNoWitness});
        return m;
    }

    std::size_t size() const noexcept { return rows_.size(); }
    const Row& row(std::size_t r) const { return rows_.at(r); }
    Row& row(std::size_t r) { return rows_.at(r); }
    const std::vector<Row>& rows() const noexcept { return rows_; }

    std::uint64_t nz() const noexcept {
        std::uint64_t s = 0;
        for (const Row& r : rows_) s += r.size();
        return s;
    }
    std::uint64_t density() const noexcept { return density_of(nz(), size()); }

    const Entry<S>* find(std::size_t r, NodeId c) const {
        const Row& row = rows_.at(r);
        auto it = std::lower_bound(row.begin(), row.end(), c, [](const Entry<S>& e, NodeId x) { return e.col < x; });
        return it != row.end() && it->col == c ? &*it : nullptr;
    }

    value_type at(std::size_t r, NodeId c) const {
        const Entry<S>* e = find(r, c);
        return e ? e->val : S::zero();
    }

    /// Inserts or overwrites an entry; setting the semiring zero erases it.
    void set(std::size_t r, NodeId c, value_type v, NodeId wit = kNoWitness) {
        if (c >= size()) throw PreconditionError("column outside the matrix");
        Row& row = rows_.at(r);
        auto it = std::lower_bound(row.begin(), row.end(), c, [](const Entry<S>& e, NodeId x) { return e.col < x; });
        const bool present = it != row.end() && it->col == c;
        if (S::is_zero(v)) {
            if (present) row.erase(it);
            return;
        }
        if (present)
            *it = {c, v, wit};
        else
            row.insert(it, {c, v, wit});
    }

    /// Checks the representation invariants.
    void validate() const {
        for (std::size_t r = 0; r < rows_.size(); ++r) {
            const Row& row = rows_[r];
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (row[i].col >= size()) throw InvariantViolation("column outside the matrix in row " + std::to_string(r));
                if (S::is_zero(row[i].val)) throw InvariantViolation("explicit zero in row " + std::to_string(r));
                if (i > 0 && row[i - 1].col >= row[i].col)
                    throw InvariantViolation("row " + std::to_string(r) + " is not strictly sorted");
            }
        }
    }

    SparseMatrix transpose() const {
        SparseMatrix t(size());
        for (NodeId r = 0; r < size(); ++r)
            for (const Entry<S>& e : rows_[r]) t.rows_[e.col].push_back({r, e.val, e.wit});
        return t;
    }

    /// Same entries without witnesses.
    SparseMatrix values_only() const {
        SparseMatrix m = *this;
        for (Row& row : m.rows_)
            for (Entry<S>& e : row) e.wit = kNoWitness;
        return m;
    }

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    std::vector<Row> rows_;
};

/// Augmented weight matrix: (0,0) on the diagonal, (w,1) on edges (minimum
/// over parallel edges), zero elsewhere.
inline SparseMatrix<AugMinPlus> weight_matrix(const Graph& g) {
    const std::size_t n = g.size();
    SparseMatrix<AugMinPlus> m(n);
    const auto adj = g.adjacency();
    for (NodeId v = 0; v < n; ++v) {
        auto& row = m.row(v);
        bool diag = false;
        for (const auto& a : adj[v]) {
            if (!diag && a.to > v) {
                row.push_back({v, AugWeight::identity(), kNoWitness});
                diag = true;
            }
            row.push_back({a.to, {a.w, 1}, kNoWitness});
        }
        if (!diag) row.push_back({v, AugWeight::identity(), kNoWitness});
    }
    return m;
}

/// Plain min-plus adjacency matrix with 0 on the diagonal.
inline SparseMatrix<MinPlus> min_plus_matrix(const Graph& g) {
    const auto aug = weight_matrix(g);
    SparseMatrix<MinPlus> m(g.size());
    for (NodeId v = 0; v < g.size(); ++v)
        for (const auto& e : aug.row(v)) m.row(v).push_back({e.col, e.val.w, kNoWitness});
    return m;
}

/// Keeps the rho smallest entries of every row under (value, column) order.
template <class S>
    requires OrderedSemiring<S>
SparseMatrix<S> keep_smallest(const SparseMatrix<S>& m, std::size_t rho) {
    SparseMatrix<S> out(m.size());
    for (std::size_t r = 0; r < m.size(); ++r) {
        auto row = m.row(r);
        if (row.size() > rho) {
            std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(rho), row.end(),
                             [](const Entry<S>& x, const Entry<S>& y) {
                                 if (S::less(x.val, y.val)) return true;
                                 if (S::less(y.val, x.val)) return false;
                                 return x.col < y.col;
                             });
            row.resize(rho);
            std::sort(row.begin(), row.end(), [](const Entry<S>& x, const Entry<S>& y) { return x.col < y.col; });
        }
        out.row(r) = std::move(row);
    }
    return out;
}

}  // namespace ccsp
