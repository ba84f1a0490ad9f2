// Command-line front end: solve instances, compute exact optima, compare the
// greedy variants, order set covers, generate instances, run the graph
// reduction, and sanity-check costs by simulation.
//
// Exit codes: 0 success, 2 bad input, 3 over a solver's capacity, 4 an
// oracle or solver broke its contract.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sst/sst.hpp"

namespace {

using namespace sst;

std::string fmt10(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fnv1a_digest(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

io::json parse_json(const std::string& text, const std::string& path) {
    try {
        return io::json::parse(text);
    } catch (const io::json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

struct LoadedFile {
    io::LoadedInstance data;
    std::string digest;
};

LoadedFile load_instance(const std::string& path, double eps) {
    std::string text = read_file(path);
    return {io::instance_from_json(parse_json(text, path), eps), fnv1a_digest(text)};
}

void emit(const io::json& j, const std::string& out) {
    if (out.empty())
        std::cout << j.dump(2) << '\n';
    else
        io::save_json_file(out, j);
}

// Expected cost under the model's exact batch costs; empty when a batch is
// beyond the exact solver's reach.
std::optional<double> true_expected(const Instance& inst, const std::vector<TestSet>& batches,
                                    const CostModel& model) {
    try {
        return expected_cost(inst, batches, model.cost_fn());
    } catch (const CapacityError&) {
        return std::nullopt;
    }
}

void print_report(const std::string& algorithm, const std::string& digest,
                  const std::optional<double>& expected, double bound, const CostModel& model,
                  double wall_seconds, std::uint64_t seed) {
    std::string marker = model.audited() ? "" : " (unaudited)";
    std::cout << "algorithm:     " << algorithm << '\n';
    std::cout << "instance:      " << digest << '\n';
    if (expected)
        std::cout << "expected cost: " << fmt10(*expected) << '\n';
    else
        std::cout << "expected cost: n/a (exact batch costs beyond capacity)" << '\n';
    std::cout << "upper bound G: " << fmt10(bound) << marker << '\n';
    std::cout << "oracle gamma:  " << fmt10(model.gamma()) << marker << '\n';
    std::cout << "oracle rho:    " << fmt10(model.rho()) << marker << '\n';
    std::cout << "4*rho+gamma:   " << fmt10(model.approx_factor()) << marker << '\n';
    std::cout << "wall time (s): " << fmt10(wall_seconds) << '\n';
    std::cout << "seed:          " << seed << '\n';
}

int run_solve(const std::string& path, double eps, std::uint64_t seed, const std::string& out) {
    auto loaded = load_instance(path, eps);
    const Instance& inst = loaded.data.instance;
    const CostModel& model = *loaded.data.model;
    auto t0 = std::chrono::steady_clock::now();
    auto res = modified_greedy(inst, model.ratio_oracle(), model.value_oracle());
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto expected = true_expected(inst, res.chosen.sequence.batches, model);
    print_report("modified_greedy", loaded.digest, expected, res.chosen.upper_bound, model, secs,
                 seed);
    std::cout << "truncation k:  " << res.chosen.k << " of " << res.trace.batches.size() << '\n';
    if (!out.empty()) {
        emit(io::solution_to_json(res.chosen.sequence, expected.value_or(res.chosen.upper_bound),
                                  res.chosen.upper_bound),
             out);
        std::cout << "solution:      " << out << '\n';
    }
    return 0;
}

// The cardinality solver handles any n; everything else goes through the
// subset DP and its capacity limits.
ExactSolveResult exact_leg(const Instance& inst, const CostModel& model) {
    if (auto* m = dynamic_cast<const ConcaveCardinalityModel*>(&model))
        return exact_concave_cardinality_sst(inst, m->table());
    return exact_sst(inst, model.cost_fn());
}

int run_exact(const std::string& path, double eps, const std::string& out) {
    auto loaded = load_instance(path, eps);
    auto res = exact_leg(loaded.data.instance, *loaded.data.model);
    std::cout << "instance:      " << loaded.digest << '\n';
    std::cout << "optimal cost:  " << fmt10(res.opt_cost) << '\n';
    std::cout << "batches:       " << res.sequence.size() << '\n';
    if (!out.empty()) {
        CostedSequence seq;
        seq.batches = res.sequence;
        for (const auto& b : seq.batches)
            seq.bounds.push_back(loaded.data.model->exact_cost(b));
        emit(io::solution_to_json(seq, res.opt_cost, res.opt_cost), out);
        std::cout << "solution:      " << out << '\n';
    }
    return 0;
}

int run_compare(const std::string& path, double eps) {
    auto loaded = load_instance(path, eps);
    const Instance& inst = loaded.data.instance;
    const CostModel& model = *loaded.data.model;
    std::cout << "instance:      " << loaded.digest << '\n';

    auto trace = plain_greedy(inst, model.ratio_oracle());
    CostedSequence plain{trace.batches, trace.bounds};
    auto plain_exact = true_expected(inst, trace.batches, model);
    double plain_cost = plain_exact.value_or(expected_cost_upper(inst, plain));
    std::cout << "plain greedy:    " << fmt10(plain_cost)
              << (plain_exact ? "" : " (bound)") << "  batches " << trace.batches.size() << '\n';

    auto res = modified_greedy(inst, model.ratio_oracle(), model.value_oracle());
    auto mod_exact = true_expected(inst, res.chosen.sequence.batches, model);
    double mod_cost = mod_exact.value_or(res.chosen.upper_bound);
    std::cout << "modified greedy: " << fmt10(mod_cost) << (mod_exact ? "" : " (bound)")
              << "  G " << fmt10(res.chosen.upper_bound) << "  k " << res.chosen.k << '\n';

    try {
        auto ex = exact_leg(inst, model);
        std::cout << "exact optimum:   " << fmt10(ex.opt_cost) << '\n';
        std::cout << "plain/exact:     " << fmt10(plain_cost / ex.opt_cost) << '\n';
    } catch (const CapacityError&) {
        std::cout << "exact optimum:   omitted (instance beyond the exact solver's capacity)"
                  << '\n';
    }
    return 0;
}

int run_mssc(const std::string& path) {
    std::string text = read_file(path);
    auto inst = io::mssc_from_json(parse_json(text, path));
    auto sol = mssc_greedy(inst);
    std::cout << "instance:      " << fnv1a_digest(text) << '\n';
    std::cout << "objective:     " << fmt10(sol.objective) << '\n';
    std::cout << "order:        ";
    for (int s : sol.order) std::cout << ' ' << s;
    std::cout << '\n';
    try {
        auto ex = exact_mssc(inst);
        std::cout << "exact optimum: " << fmt10(ex.objective) << '\n';
        std::cout << "greedy/exact:  " << fmt10(sol.objective / ex.objective) << '\n';
    } catch (const CapacityError&) {
        std::cout << "exact optimum: omitted (instance beyond the exact solver's capacity)"
                  << '\n';
    }
    return 0;
}

int run_gen(const std::string& kind, int n, std::uint64_t seed, const std::string& out) {
    GeneratedCase c = [&] {
        if (kind == "bad_greedy") return gen_bad_greedy(n);
        if (kind == "random_additive") return gen_random_additive(n, seed);
        if (kind == "random_tree") return gen_random_tree(n, seed);
        if (kind == "random_machines") return gen_random_machines(n, seed);
        if (kind == "random_metric") return gen_random_metric(n, seed);
        throw InputError("gen: unknown kind '" + kind +
                         "' (want bad_greedy, random_additive, random_tree, random_machines, "
                         "or random_metric)");
    }();
    emit(io::instance_to_json(c.instance, *c.model), out);
    return 0;
}

int run_reduce(const std::string& path, double eps, const std::string& out) {
    auto g = io::graph_from_json(parse_json(read_file(path), path));
    auto red = dre_to_sst(g);
    const int m = static_cast<int>(g.edges.size());
    std::cout << "edges:         " << m << "  target r: " << g.r << '\n';
    std::cout << "fail prob q:   " << fmt10(red.fail_prob) << '\n';
    if (!out.empty()) {
        emit(io::instance_to_json(red.instance, red.model), out);
        std::cout << "instance:      " << out << '\n';
    }
    if (m > 20) {
        std::cout << "solve:         skipped (ratio oracle enumerates up to 20 tests)" << '\n';
        return 0;
    }
    auto res = modified_greedy(red.instance, red.model.ratio_oracle(), red.model.value_oracle());
    double expected =
        expected_cost(red.instance, res.chosen.sequence.batches, red.model.cost_fn());
    auto rec = recover_dre(g, res.chosen.sequence.batches);
    std::cout << "expected cost: " << fmt10(expected) << '\n';
    std::cout << "recovered |S|: " << rec.nodes.size() << "  induced edges: " << rec.edges
              << "  prefix batches: " << rec.batches_used << '\n';
    double edge_floor = g.r / (2.0 * std::log(static_cast<double>(m)));
    bool ok_nodes = static_cast<double>(rec.nodes.size()) <= 2.0 * expected + 1e-9;
    bool ok_edges = static_cast<double>(rec.edges) + 1e-9 >= edge_floor;
    std::cout << "check |S| <= 2*cost:          " << (ok_nodes ? "pass" : "FAIL") << " ("
              << rec.nodes.size() << " vs " << fmt10(2.0 * expected) << ")" << '\n';
    std::cout << "check E(S) >= r/(2 ln|E|):    " << (ok_edges ? "pass" : "FAIL") << " ("
              << rec.edges << " vs " << fmt10(edge_floor) << ")" << '\n';
    return ok_nodes && ok_edges ? 0 : 4;
}

int run_bench(const std::string& path, double eps, std::uint64_t trials, std::uint64_t seed) {
    auto loaded = load_instance(path, eps);
    const Instance& inst = loaded.data.instance;
    const CostModel& model = *loaded.data.model;
    auto t0 = std::chrono::steady_clock::now();
    auto res = modified_greedy(inst, model.ratio_oracle(), model.value_oracle());
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    double expected = expected_cost(inst, res.chosen.sequence.batches, model.cost_fn());
    auto mc = monte_carlo_cost(inst, res.chosen.sequence.batches, model.cost_fn(), trials, seed);
    print_report("modified_greedy", loaded.digest, expected, res.chosen.upper_bound, model, secs,
                 seed);
    std::cout << "mc mean:       " << fmt10(mc.mean) << '\n';
    std::cout << "mc std error:  " << fmt10(mc.stderr_of_mean) << '\n';
    double z = mc.stderr_of_mean > 0.0 ? (mc.mean - expected) / mc.stderr_of_mean : 0.0;
    std::cout << "mc z-score:    " << fmt10(z) << '\n';
    std::cout << "trials:        " << mc.trials << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential testing with subadditive batch costs"};
    app.require_subcommand(1);

    std::string in_path, out_path, kind;
    double eps = 0.1;
    std::uint64_t seed = 1, trials = 100000;
    int n = 0;
    int code = 0;

    auto* solve = app.add_subcommand("solve", "Run modified greedy on an instance file");
    solve->add_option("file", in_path, "instance JSON")->required();
    solve->add_option("--epsilon", eps, "oracle accuracy knob");
    solve->add_option("--seed", seed, "reported seed");
    solve->add_option("--out", out_path, "write the solution JSON here");
    solve->callback([&] { code = run_solve(in_path, eps, seed, out_path); });

    auto* exact = app.add_subcommand("exact", "Exact optimum of an instance file");
    exact->add_option("file", in_path, "instance JSON")->required();
    exact->add_option("--epsilon", eps, "oracle accuracy knob");
    exact->add_option("--out", out_path, "write the exact solution JSON here");
    exact->callback([&] { code = run_exact(in_path, eps, out_path); });

    auto* compare = app.add_subcommand("compare", "Plain vs modified greedy vs exact");
    compare->add_option("file", in_path, "instance JSON")->required();
    compare->add_option("--epsilon", eps, "oracle accuracy knob");
    compare->callback([&] { code = run_compare(in_path, eps); });

    auto* mssc = app.add_subcommand("mssc", "Greedy ordering for a weighted set cover file");
    mssc->add_option("file", in_path, "set system JSON")->required();
    mssc->callback([&] { code = run_mssc(in_path); });

    auto* gen = app.add_subcommand("gen", "Generate an instance file");
    gen->add_option("kind", kind,
                    "bad_greedy | random_additive | random_tree | random_machines | random_metric")
        ->required();
    gen->add_option("n", n, "number of tests")->required();
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--out", out_path, "output path (default stdout)");
    gen->callback([&] { code = run_gen(kind, n, seed, out_path); });

    auto* reduce = app.add_subcommand("reduce", "Graph file -> testing instance, solve, recover");
    reduce->add_option("file", in_path, "graph JSON")->required();
    reduce->add_option("--epsilon", eps, "oracle accuracy knob");
    reduce->add_option("--out", out_path, "write the reduced instance here");
    reduce->callback([&] { code = run_reduce(in_path, eps, out_path); });

    auto* bench = app.add_subcommand("bench", "Solve and cross-check by simulation");
    bench->add_option("file", in_path, "instance JSON")->required();
    bench->add_option("--epsilon", eps, "oracle accuracy knob");
    bench->add_option("--trials", trials, "simulation runs");
    bench->add_option("--seed", seed, "simulation seed");
    bench->callback([&] { code = run_bench(in_path, eps, trials, seed); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const sst::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const sst::CapacityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const sst::ContractViolation& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return code;
}
