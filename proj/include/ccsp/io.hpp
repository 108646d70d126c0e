#pragma once

// Text and JSON serialization for ledgers, matrices, hopsets and per-pair
// error tables.

#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "ccsp/clique.hpp"
#include "ccsp/errors.hpp"
#include "ccsp/hopset.hpp"
#include "ccsp/sparse_matrix.hpp"

namespace ccsp {

using Json = nlohmann::ordered_json;

/// {rounds, charged_rounds, primitives, peak_pair_load}.
inline Json ledger_json(const RoundLedger& l) {
    Json prim = Json::object();
    for (const auto& [k, v] : l.primitives) prim[k] = v;
    return {{"rounds", l.rounds}, {"charged_rounds", l.charged_rounds}, {"primitives", prim}, {"peak_pair_load", l.peak_pair_load}};
}

inline Json events_json(const RoundLedger& l) {
    Json ev = Json::object();
    for (const auto& [k, v] : l.events) ev[k] = v;
    return ev;
}

/// Error class name, most derived first.
inline std::string error_type(const std::exception& e) {
    if (dynamic_cast<const EmptySources*>(&e)) return "EmptySources";
    if (dynamic_cast<const FamilyTooSmall*>(&e)) return "FamilyTooSmall";
    if (dynamic_cast<const HitFailure*>(&e)) return "HitFailure";
    if (dynamic_cast<const WeightedInput*>(&e)) return "WeightedInput";
    if (dynamic_cast<const Disconnected*>(&e)) return "Disconnected";
    if (dynamic_cast<const InvalidSpec*>(&e)) return "InvalidSpec";
    if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
    if (dynamic_cast<const PreconditionError*>(&e)) return "PreconditionError";
    if (dynamic_cast<const BandwidthViolation*>(&e)) return "BandwidthViolation";
    if (dynamic_cast<const NonTermination*>(&e)) return "NonTermination";
    if (dynamic_cast<const DemandViolation*>(&e)) return "DemandViolation";
    if (dynamic_cast<const ArityViolation*>(&e)) return "ArityViolation";
    if (dynamic_cast<const WeightViolation*>(&e)) return "WeightViolation";
    if (dynamic_cast<const InvariantViolation*>(&e)) return "InvariantViolation";
    if (dynamic_cast<const DensityUnderestimate*>(&e)) return "DensityUnderestimate";
    if (dynamic_cast<const Error*>(&e)) return "Error";
    return "std::exception";
}

namespace detail {

template <class S>
void write_value(std::ostream& out, const typename S::value_type& v) {
    if constexpr (std::is_same_v<S, AugMinPlus>)
        out << ' ' << v.w << ' ' << v.t;
    else if constexpr (std::is_same_v<S, MinPlus>)
        out << ' ' << v;
}

template <class S>
typename S::value_type read_value(std::istream& in, std::size_t lineno) {
    if constexpr (std::is_same_v<S, AugMinPlus>) {
        Word w, t;
        if (!(in >> w >> t)) throw ParseError(lineno, "expected \"r c w hops\"");
        return {w, t};
    } else if constexpr (std::is_same_v<S, MinPlus>) {
        Word w;
        if (!(in >> w)) throw ParseError(lineno, "expected \"r c w\"");
        return w;
    } else {
        return true;
    }
}

}  // namespace detail

/// Matrix text format: "n nz" header, then nz lines "r c value" where value
/// is "w" (min-plus), "w hops" (augmented) or absent (Boolean). '#' comments.
template <class S>
void write_matrix(std::ostream& out, const SparseMatrix<S>& m) {
    out << m.size() << ' ' << m.nz() << '\n';
    for (NodeId r = 0; r < m.size(); ++r)
        for (const auto& e : m.row(r)) {
            out << r << ' ' << e.col;
            detail::write_value<S>(out, e.val);
            out << '\n';
        }
}

template <class S>
SparseMatrix<S> read_matrix(std::istream& in) {
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
    long long n = -1, nz = -1;
    if (!(head >> n >> nz) || n < 1 || nz < 0) throw ParseError(lineno, "expected header \"n nz\"");
    SparseMatrix<S> m(static_cast<std::size_t>(n));
    for (long long i = 0; i < nz; ++i) {
        if (!next()) throw ParseError(lineno, "expected " + std::to_string(nz) + " entries, found " + std::to_string(i));
        std::istringstream row(line);
        long long r = -1, c = -1;
        if (!(row >> r >> c)) throw ParseError(lineno, "expected \"r c ...\"");
        if (r < 0 || c < 0 || r >= n || c >= n) throw ParseError(lineno, "index outside [0, n)");
        auto v = detail::read_value<S>(row, lineno);
        std::string rest;
        if (row >> rest) throw ParseError(lineno, "trailing tokens");
        if (m.find(r, static_cast<NodeId>(c))) throw ParseError(lineno, "duplicate entry");
        m.set(r, static_cast<NodeId>(c), v);
    }
    if (next()) throw ParseError(lineno, "more entries than declared");
    return m;
}

template <class S>
Json matrix_json(const SparseMatrix<S>& m) {
    Json rows = Json::array();
    for (NodeId r = 0; r < m.size(); ++r)
        for (const auto& e : m.row(r)) {
            Json x = {{"r", r}, {"c", e.col}};
            if constexpr (std::is_same_v<S, AugMinPlus>) {
                x["w"] = e.val.w;
                x["hops"] = e.val.t;
            } else if constexpr (std::is_same_v<S, MinPlus>) {
                x["w"] = e.val;
            }
            if (e.wit != kNoWitness) x["witness"] = e.wit;
            rows.push_back(std::move(x));
        }
    return rows;
}

/// "u v w level" per line, sorted by (u, v).
inline void write_hopset(std::ostream& out, std::span<const HopEdge> edges) {
    out << "# u v w level\n";
    for (const HopEdge& e : edges) out << e.u << ' ' << e.v << ' ' << e.w << ' ' << e.level << '\n';
}

struct PairError {
    NodeId u = 0;
    NodeId v = 0;
    Word exact = 0;
    Word estimate = 0;
};

inline double pair_ratio(const PairError& p) {
    if (p.exact == p.estimate) return 1.0;
    if (p.exact == 0 || p.exact == kInf || p.estimate == kInf) return std::numeric_limits<double>::infinity();
    return static_cast<double>(p.estimate) / static_cast<double>(p.exact);
}

inline void write_pair_csv(std::ostream& out, std::span<const PairError> pairs) {
    auto cell = [](Word w) { return w == kInf ? std::string("inf") : std::to_string(w); };
    out << "u,v,exact,estimate,ratio\n";
    for (const PairError& p : pairs) out << p.u << ',' << p.v << ',' << cell(p.exact) << ',' << cell(p.estimate) << ',' << pair_ratio(p) << '\n';
}

}  // namespace ccsp
