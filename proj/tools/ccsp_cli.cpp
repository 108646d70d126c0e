// Command-line front end: one subcommand per algorithm, plus graph generation
// and scaling sweeps. Reports go to stdout or --out as JSON (default) or CSV.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "ccsp/ccsp.hpp"

namespace {

using namespace ccsp;

struct Common {
    ExperimentConfig cfg;
    std::string out;
    bool json = false;
    bool csv = false;
};

void add_common(CLI::App* sub, Common& c) {
    auto& g = c.cfg.graph;
    sub->add_option("--n", g.n, "number of nodes")->capture_default_str();
    sub->add_option("--seed", g.seed, "generator seed")->capture_default_str();
    sub->add_option("--family", g.family, "graph family")->check(CLI::IsMember(graph_families()))->capture_default_str();
    sub->add_option("--p", g.p, "edge probability for random families")->capture_default_str();
    sub->add_option("--max-weight", g.max_weight, "weights uniform in [1, max-weight]")->capture_default_str();
    sub->add_option("--graph", c.cfg.graph_file, "read the graph from FILE instead of generating it");
    sub->add_option("--eps", c.cfg.eps, "approximation parameter in (0, 1)")->capture_default_str();
    sub->add_option("--k", c.cfg.k, "nearest-set size or degree threshold override");
    sub->add_option("--out", c.out, "write the report to FILE");
    auto* j = sub->add_flag("--json", c.json, "emit the JSON report (default)");
    auto* v = sub->add_flag("--csv", c.csv, "emit CSV instead of JSON");
    j->excludes(v);
    sub->add_option("--cost-route", c.cfg.cost_route, "charged rounds per routing call")->capture_default_str();
    sub->add_option("--cost-sort", c.cfg.cost_sort, "charged rounds per sorting call")->capture_default_str();
    sub->add_option("--cost-hit", c.cfg.cost_hit, "charged rounds per hitting-set call")->capture_default_str();
    sub->add_option("--oracle-cap", c.cfg.oracle_cap, "largest n checked against the oracles")->capture_default_str();
    sub->add_flag("--dump", c.cfg.dump, "include full outputs in the report");
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out);
    if (!f) throw PreconditionError("cannot write " + c.out);
    f << text;
}

int run(const Common& c) {
    try {
        ExperimentReport rep = run_experiment(c.cfg);
        std::ostringstream s;
        if (c.csv)
            write_pair_csv(s, rep.pairs);
        else
            s << rep.to_json().dump(2) << '\n';
        emit(c, s.str());
        return exit_code(rep);
    } catch (const std::exception& e) {
        std::cout << error_report(c.cfg, e).dump(2) << '\n';
        return exit_code(e);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Congested Clique shortest-path simulator"};
    app.require_subcommand(1);

    Common c;
    std::function<int()> action;

    auto* gen = app.add_subcommand("gen", "generate a graph file");
    {
        auto& g = c.cfg.graph;
        gen->add_option("--n", g.n)->capture_default_str();
        gen->add_option("--seed", g.seed)->capture_default_str();
        gen->add_option("--family", g.family)->check(CLI::IsMember(graph_families()))->capture_default_str();
        gen->add_option("--p", g.p)->capture_default_str();
        gen->add_option("--max-weight", g.max_weight)->capture_default_str();
        gen->add_option("--out", c.out, "write the graph to FILE");
        gen->callback([&] {
            action = [&] {
                try {
                    std::ostringstream s;
                    write_graph(s, generate(c.cfg.graph));
                    emit(c, s.str());
                    return 0;
                } catch (const std::exception& e) {
                    std::cout << error_report(c.cfg, e).dump(2) << '\n';
                    return exit_code(e);
                }
            };
        });
    }

    auto algo = [&](const std::string& name, const std::string& help) {
        auto* sub = app.add_subcommand(name, help);
        add_common(sub, c);
        sub->callback([&, name] {
            c.cfg.algorithm = name;
            action = [&] { return run(c); };
        });
        return sub;
    };

    for (const std::string name : {"mm", "filtered-mm"}) {
        auto* sub = algo(name, name == "mm" ? "exact sparse matrix product" : "rho-filtered matrix product");
        sub->add_option("--semiring", c.cfg.semiring)->check(CLI::IsMember({"min-plus", "augmented", "boolean"}))->capture_default_str();
        sub->add_option("--density", c.cfg.density, "random inputs: about density * n nonzeros")->capture_default_str();
        sub->add_option("--rho-hint", c.cfg.rho_hint, "known output density");
        sub->add_option("--lhs", c.cfg.lhs_file, "left matrix file");
        sub->add_option("--rhs", c.cfg.rhs_file, "right matrix file");
        if (name == "filtered-mm") sub->add_option("--rho", c.cfg.rho, "entries kept per row")->capture_default_str();
    }
    algo("knearest", "k nearest nodes of every node");
    {
        auto* sub = algo("srcdetect", "bounded-hop source detection");
        sub->add_option("--sources", c.cfg.sources, "use nodes 0..sources-1 (0 = none), default ceil(sqrt n)");
        sub->add_option("--hops", c.cfg.hops, "hop bound, default n");
    }
    algo("through", "distances through shared nearest nodes");
    algo("hopset", "deterministic hopset");
    algo("mssp", "multi-source shortest paths")->add_option("--sources", c.cfg.sources, "use nodes 0..sources-1 (0 = none), default ceil(sqrt n)");
    algo("apsp-w", "weighted APSP approximation")->add_flag("--sketch", c.cfg.sketch, "the plain (3+eps) variant");
    algo("apsp-u", "unweighted APSP approximation")->add_option("--low-k", c.cfg.low_k, "sparse-part nearest-set size");
    algo("sssp", "exact single-source shortest paths")->add_option("--source", c.cfg.source)->capture_default_str();
    algo("diameter", "diameter approximation");
    algo("oracle", "sequential reference distances");

    auto* sweep = app.add_subcommand("sweep", "charged rounds over a range of n");
    std::string sweep_algo = "hopset";
    std::vector<std::size_t> ns{16, 32, 64};
    std::size_t seeds = 5;
    {
        sweep->add_option("--algorithm", sweep_algo)->check(CLI::IsMember(sweep_algorithms()))->capture_default_str();
        sweep->add_option("--n", ns, "sorted list of sizes")->delimiter(',')->capture_default_str();
        sweep->add_option("--seeds", seeds)->capture_default_str();
        sweep->add_option("--eps", c.cfg.eps)->capture_default_str();
        sweep->add_option("--out", c.out);
        auto* j = sweep->add_flag("--json", c.json, "emit JSON (default)");
        auto* v = sweep->add_flag("--csv", c.csv, "emit the CSV of (n, seed, charged_rounds)");
        j->excludes(v);
        sweep->add_option("--cost-route", c.cfg.cost_route)->capture_default_str();
        sweep->add_option("--cost-sort", c.cfg.cost_sort)->capture_default_str();
        sweep->add_option("--cost-hit", c.cfg.cost_hit)->capture_default_str();
        sweep->callback([&] {
            action = [&] {
                try {
                    CliqueConfig costs{.cost_route = c.cfg.cost_route, .cost_sort = c.cfg.cost_sort, .cost_hit = c.cfg.cost_hit};
                    auto r = scaling_sweep(sweep_algo, ns, seeds, c.cfg.eps, costs);
                    std::ostringstream s;
                    if (c.csv)
                        r.write_csv(s);
                    else
                        s << r.to_json().dump(2) << '\n';
                    emit(c, s.str());
                    return r.passed() ? 0 : 2;
                } catch (const std::exception& e) {
                    ExperimentConfig cfg = c.cfg;
                    cfg.algorithm = "sweep:" + sweep_algo;
                    std::cout << error_report(cfg, e).dump(2) << '\n';
                    return exit_code(e);
                }
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }
    return action ? action() : 3;
}
