// Acceptance run: one line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ccsp/ccsp.hpp"
#include "support.hpp"

using namespace ccsp;
using testing::random_graph;

namespace {

std::uint64_t peak_load = 0;  // over every clique used below
std::uint64_t runs = 0;

void track(const Clique& net) {
    peak_load = std::max(peak_load, net.ledger().peak_pair_load);
    ++runs;
}

// Collects failures with a short description of the first few.
struct Tally {
    std::uint64_t cases = 0;
    std::uint64_t failures = 0;
    std::string first;

    void expect(bool ok, const std::string& what) {
        ++cases;
        if (ok) return;
        if (failures++ < 3) first += (first.empty() ? "" : "; ") + what;
    }
};

bool at_most(Word est, Word exact, long double mult, long double add = 0) {
    return static_cast<long double>(est) <= mult * static_cast<long double>(exact) + add + 1e-9L;
}

std::string tag(std::uint64_t seed, std::size_t n) { return "seed " + std::to_string(seed) + " n " + std::to_string(n); }

template <class S>
void mm_case(Tally& t, std::size_t n, std::uint64_t rho, std::uint64_t seed) {
    auto s = random_matrix<S>(n, rho, 7 * seed + 1), u = random_matrix<S>(n, rho, 7 * seed + 2);
    Clique net(n);
    auto r = sparse_mm(net, s, u);
    track(net);
    t.expect(r.product == oracle::brute_product(s, u), std::string(S::kName) + " " + tag(seed, n) + " rho " + std::to_string(rho));
}

Tally sparse_mm_exact() {
    Tally t;
    for (std::size_t n : {4u, 8u, 16u, 32u})
        for (std::uint64_t rho : {1ull, 2ull, 4ull, 1000ull})
            for (std::uint64_t seed = 0; seed < 100; ++seed) {
                mm_case<MinPlus>(t, n, rho, seed);
                mm_case<AugMinPlus>(t, n, rho, seed);
                mm_case<Boolean>(t, n, rho, seed);
            }
    return t;
}

template <class S>
void filter_case(Tally& t, std::size_t n, std::uint64_t rho, std::uint64_t seed) {
    const std::uint64_t dens = std::vector<std::uint64_t>{1, 2, 4, n}[seed % 4];
    auto s = random_matrix<S>(n, dens, 11 * seed + 3), u = random_matrix<S>(n, dens, 11 * seed + 4);
    Clique net(n);
    auto r = filtered_mm(net, s, u, rho);
    track(net);
    t.expect(r.product == oracle::brute_filter(oracle::brute_product(s, u), rho),
             std::string(S::kName) + " " + tag(seed, n) + " rho " + std::to_string(rho));
}

Tally filtered_mm_rows() {
    Tally t;
    for (std::uint64_t seed = 0; seed < 100; ++seed)
        for (std::size_t n : {4u, 8u, 16u, 32u})
            for (std::uint64_t rho : {std::uint64_t{1}, std::uint64_t{3}, std::uint64_t(n)}) {
                filter_case<MinPlus>(t, n, rho, seed);
                filter_case<AugMinPlus>(t, n, rho, seed);
            }
    return t;
}

Tally k_nearest_sets() {
    Tally t;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t n = 4 + seed % 29;
        const std::size_t k = 1 + (seed * 7) % n;
        auto g = random_graph(n, 1000 + seed, 1 + seed % 9, seed % 5 != 0);
        Clique net(n);
        auto r = k_nearest(net, g, k);
        track(net);
        t.expect(r.sets == oracle::brute_k_nearest(g, k), "sets " + tag(seed, n));
        bool closed = true;
        for (NodeId v = 0; v < n; ++v)
            for (const Near& x : r.sets[v])
                for (NodeId w : r.path(v, x.node))
                    closed = closed && std::any_of(r.sets[v].begin(), r.sets[v].end(), [&](const Near& y) { return y.node == w; });
        t.expect(closed, "prefix " + tag(seed, n));
    }
    return t;
}

Tally source_detection_tables() {
    Tally t;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t n = 4 + seed % 29;
        auto g = random_graph(n, 2000 + seed, 1 + seed % 9, seed % 4 != 0);
        Rng rng(seed);
        std::vector<NodeId> s;
        for (NodeId v = 0; v < n; ++v)
            if (rng.bernoulli(0.3)) s.push_back(v);
        if (s.empty()) s.push_back(static_cast<NodeId>(rng.uniform(0, n - 1)));
        const std::size_t k = 1 + seed % s.size();
        for (std::size_t d : {std::size_t{1}, std::size_t{2}, n}) {
            auto want = oracle::brute_source_detection(weight_matrix(g), s, d, k);
            Clique a(n), b(n);
            auto fil = source_detection(a, g, s, d, k, SourceVariant::Filtered);
            auto rect = source_detection(b, g, s, d, k, SourceVariant::Rectangular);
            track(a);
            track(b);
            t.expect(fil.tables == want, "filtered " + tag(seed, n) + " d " + std::to_string(d));
            t.expect(rect.tables == want, "rectangular " + tag(seed, n) + " d " + std::to_string(d));
            t.expect(fil.tables == rect.tables, "variants differ " + tag(seed, n));
        }
    }
    return t;
}

Tally hopset_stretch() {
    Tally t;
    for (std::size_t n : {16u, 32u, 64u})
        for (double eps : {0.25, 0.5})
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                auto g = random_graph(n, 3000 + seed, 20);
                Clique net(n);
                auto h = build_hopset(net, g, eps);
                track(net);
                const std::size_t L = std::max<std::size_t>(1, ceil_log2(n));
                const auto beta = static_cast<std::size_t>(std::ceil(12.0 * double(L) / eps - 1e-9));
                t.expect(h.params.beta == beta, "beta " + tag(seed, n));
                t.expect(double(h.edges.size()) <= 4.0 * std::pow(double(n), 1.5) * std::log2(double(n)), "size " + tag(seed, n));
                auto gh = augmented_graph(g, h.edges);
                for (NodeId s = 0; s < n; ++s) {
                    auto d = oracle::dijkstra(g, s);
                    auto b = oracle::bounded_hops(gh, s, beta);
                    for (NodeId v = 0; v < n; ++v)
                        t.expect(b[v] >= d[v] && at_most(b[v], d[v], 1.0L + eps),
                                 "stretch " + tag(seed, n) + " pair " + std::to_string(s) + "," + std::to_string(v));
                }
            }
    return t;
}

Tally mssp_stretch() {
    Tally t;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::size_t n = 8 + (seed * 13) % 57;
        const double eps = seed % 2 ? 0.25 : 0.5;
        auto g = random_graph(n, 4000 + seed, 1 + seed % 30, seed % 6 != 5);
        for (std::size_t count : {std::size_t{1}, ceil_root(n, 0.5)}) {
            std::vector<NodeId> src;
            for (NodeId v = 0; v < count; ++v) src.push_back(static_cast<NodeId>((v * 7 + seed) % n));
            Clique net(n);
            auto r = mssp(net, g, src, eps);
            track(net);
            for (std::size_t i = 0; i < r.sources.size(); ++i) {
                auto d = oracle::dijkstra(g, r.sources[i]);
                for (NodeId v = 0; v < n; ++v) {
                    const Word e = r.at(i, v);
                    t.expect(d[v] == kInf ? e == kInf : (e >= d[v] && at_most(e, d[v], 1.0L + eps)), "mssp " + tag(seed, n));
                }
            }
        }
    }
    return t;
}

Tally weighted_apsp() {
    Tally t;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::size_t n = 8 + seed % 25;
        const double eps = seed % 2 ? 0.25 : 0.5;
        auto g = random_graph(n, 5000 + seed, 1 + seed % 20);
        Clique net(n);
        auto r = apsp_weighted(net, g, eps);
        track(net);
        auto fw = oracle::floyd_warshall(g);
        for (NodeId u = 0; u < n; ++u) {
            auto row = oracle::shortest_path_row(g, u);
            for (NodeId v = 0; v < n; ++v) {
                const Word d = row.dist[v].w, e = r.estimates.at(u, v);
                const long double add = (1.0L + eps) * static_cast<long double>(row.heaviest[v]);
                t.expect(e >= d && at_most(e, d, 2.0L + eps, add), "bound " + tag(seed, n));
                bool shared = false;
                for (const Near& a : r.nearest[u])
                    for (const Near& b : r.nearest[v])
                        shared = shared || (a.node == b.node && fw[u][a.node] + fw[a.node][v] == d);
                if (shared) t.expect(e == d, "shared nearest not exact " + tag(seed, n));
            }
        }
    }
    return t;
}

Tally unweighted_apsp() {
    Tally t;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::size_t n = 9 + (seed * 11) % 56;
        std::vector<Graph> graphs{random_graph(n, 6000 + seed, 1, true, std::min(1.0, 4.0 / double(n))),
                                  generate({"cycle", n, 0, 1, seed}), generate({"two-cliques", n, 0, 1, seed})};
        for (double eps : {0.25, 0.5})
            for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
                const Graph& g = graphs[gi];
                Clique net(n);
                auto r = apsp_unweighted(net, g, eps);
                track(net);
                for (NodeId u = 0; u < n; ++u) {
                    auto d = oracle::bfs(g, u);
                    for (NodeId v = 0; v < n; ++v) {
                        const Word e = r.estimates.at(u, v);
                        t.expect(e >= d[v] && at_most(e, d[v], 2.0L + eps), "bound family " + std::to_string(gi) + " " + tag(seed, n));
                        if (d[v] == 1) t.expect(e == 1, "adjacent " + tag(seed, n));
                    }
                }
            }
    }
    return t;
}

Tally exact_sssp() {
    Tally t;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::size_t n = 2 + (seed * 17) % 63;
        auto g = random_graph(n, 7000 + seed, 1 + seed % 40, seed % 5 != 4);
        const NodeId src = static_cast<NodeId>(seed % n);
        Clique net(n);
        auto r = sssp_exact(net, g, src);
        track(net);
        t.expect(r.dist == oracle::dijkstra(g, src), "distances " + tag(seed, n));
        t.expect(r.iterations < r.iteration_bound, "iterations " + tag(seed, n));
    }
    return t;
}

Tally diameter_bounds() {
    Tally t;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const std::size_t n = 4 + (seed * 19) % 61;
        for (Word max_w : {Word{1}, Word{1 + seed % 15}}) {
            const double eps = 0.5;
            auto g = random_graph(n, 8000 + seed, max_w, true, std::min(1.0, 2.0 / double(n)));
            Clique net(n);
            auto r = diameter_approx(net, g, eps);
            track(net);
            const Word d = oracle::brute_diameter(g);
            const bool weighted = !g.unit_weights();
            const Word lo = diameter_lower_bound(d, g.max_weight(), weighted);
            t.expect(r.value >= lo && at_most(r.value, d, 1.0L + eps),
                     std::string(weighted ? "weighted " : "unweighted ") + tag(seed, n) + " D " + std::to_string(d) + " est " + std::to_string(r.value));
        }
    }
    return t;
}

Tally ledger_discipline() {
    Tally t;
    t.expect(peak_load <= 1, "a run recorded " + std::to_string(peak_load) + " messages on one pair in one round");
    t.expect(runs > 0, "no runs recorded");
    Clique net(4);
    bool caught = false;
    try {
        net.exchange(std::vector<Message>{Message::make(0, 1, {1}), Message::make(0, 1, {2})});
    } catch (const BandwidthViolation&) {
        caught = true;
    }
    t.expect(caught, "duplicate pair not rejected");
    caught = false;
    try {
        net.exchange(std::vector<Message>{Message::make(0, 1, {1, 2, 3, 4})});
    } catch (const BandwidthViolation&) {
        caught = true;
    }
    t.expect(caught, "payload over B not rejected");
    return t;
}

Tally scaling() {
    Tally t;
    const std::vector<std::size_t> ns{16, 32, 64};
    for (const char* a : {"sparse_mm", "hopset", "mssp"})
        for (double eps : {0.25, 0.5}) {
            if (std::string(a) == "sparse_mm" && eps == 0.25) continue;
            auto r = scaling_sweep(a, ns, 5, eps);
            for (const auto& p : r.points)
                t.expect(p.pass, std::string(a) + " eps " + std::to_string(eps).substr(0, 4) + " n " + std::to_string(p.n) + ": " +
                                     std::to_string(p.mean) + " > " + std::to_string(p.bound));
        }
    return t;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Tally()> run;
    };
    const std::vector<Criterion> all = {
        {1, "sparse_mm exact on min-plus, augmented, Boolean", sparse_mm_exact},
        {2, "filtered_mm rows equal the rho smallest of the product", filtered_mm_rows},
        {3, "k-nearest sets equal the oracle, witness paths prefix-closed", k_nearest_sets},
        {4, "source detection variants equal the oracle and each other", source_detection_tables},
        {5, "hopset stretch and size", hopset_stretch},
        {6, "MSSP within (1+eps)", mssp_stretch},
        {7, "weighted APSP within (2+eps)d + (1+eps)W, shared nearest exact", weighted_apsp},
        {8, "unweighted APSP within (2+eps)d, adjacent pairs exact", unweighted_apsp},
        {9, "exact SSSP, Bellman-Ford rounds < ceil(4n/k)", exact_sssp},
        {10, "diameter lower and upper bounds", diameter_bounds},
        {11, "ledger discipline", ledger_discipline},
        {12, "charged-round scaling under the fitted formula", scaling},
    };
    int failed = 0;
    for (const Criterion& c : all) {
        const auto start = std::chrono::steady_clock::now();
        Tally t;
        std::string error;
        try {
            t = c.run();
        } catch (const std::exception& e) {
            error = e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool ok = error.empty() && t.failures == 0 && t.cases > 0;
        failed += !ok;
        std::printf("criterion %2d %s: %s (%llu cases, %llu failures, %.1fs)", c.id, ok ? "PASS" : "FAIL", c.name,
                    static_cast<unsigned long long>(t.cases), static_cast<unsigned long long>(t.failures), secs);
        if (!error.empty()) std::printf(" error: %s", error.c_str());
        if (!t.first.empty()) std::printf(" first: %s", t.first.c_str());
        std::printf("\n");
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
