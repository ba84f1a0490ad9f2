#pragma once

// Deterministic instance factories: the adversarial square-root gap family
// plus seeded random instances for every cost model. Same arguments, same
// bits out; the CLI leans on that for reproducible files.

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include "sst/core.hpp"
#include "sst/cost_model.hpp"
#include "sst/hardness.hpp"
#include "sst/machine_cost.hpp"
#include "sst/routing_cost.hpp"
#include "sst/tree_cost.hpp"

namespace sst {

struct GeneratedCase {
    Instance instance;
    std::unique_ptr<CostModel> model;
};

// n tests, the i-th failing with probability 2^-(i+1), under the concave
// cardinality cost min(|B|, sqrt(n)). The exact ratio oracle then tests one
// by one at expected cost >= n/2 while the single full batch costs sqrt(n),
// so plain greedy trails the truncated variant by a sqrt(n)/2 factor. Needs
// a perfect square so the cap is integral. Fully deterministic.
inline GeneratedCase gen_bad_greedy(int n) {
    if (n < 1) throw InputError("bad_greedy: n must be positive");
    int root = static_cast<int>(std::llround(std::sqrt(static_cast<double>(n))));
    if (root * root != n)
        throw InputError("bad_greedy: n must be a perfect square, got " + std::to_string(n));
    std::vector<double> fail(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i)
        fail[static_cast<std::size_t>(i - 1)] = std::ldexp(1.0, -(i + 1));
    std::vector<double> g(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) g[static_cast<std::size_t>(k)] = std::min(k, root);
    return {Instance::from_fail_probs(fail),
            std::make_unique<ConcaveCardinalityModel>(std::move(g))};
}

namespace detail {

inline std::vector<double> random_probs(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> pd(0.2, 0.9);
    std::vector<double> p(static_cast<std::size_t>(n));
    for (auto& v : p) v = pd(rng);
    return p;
}

inline GeneratedCase finish(std::mt19937_64& rng, int n, std::unique_ptr<CostModel> model) {
    auto inst = Instance::from_pass_probs(random_probs(rng, n), model->family());
    return {std::move(inst), std::move(model)};
}

}  // namespace detail

inline GeneratedCase gen_random_additive(int n, std::uint64_t seed) {
    if (n < 1) throw InputError("random_additive: n must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> cd(0.5, 2.0);
    std::vector<double> c(static_cast<std::size_t>(n));
    for (auto& v : c) v = cd(rng);
    return detail::finish(rng, n, std::make_unique<AdditiveModel>(std::move(c)));
}

inline GeneratedCase gen_random_batch_setup(int n, std::uint64_t seed, double eps = 0.1) {
    if (n < 1) throw InputError("random_batch_setup: n must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> sd(1.0, 5.0), wd(0.5, 2.0);
    double setup = sd(rng);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (auto& v : w) v = wd(rng);
    return detail::finish(rng, n, std::make_unique<BatchSetupModel>(setup, std::move(w), eps));
}

inline GeneratedCase gen_random_concave(int n, std::uint64_t seed) {
    if (n < 1) throw InputError("random_concave: n must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> inc(0.1, 1.0);
    std::vector<double> steps(static_cast<std::size_t>(n));
    for (auto& v : steps) v = inc(rng);
    std::sort(steps.begin(), steps.end(), std::greater<>());  // shrinking increments
    std::vector<double> g(static_cast<std::size_t>(n) + 1, 0.0);
    for (int k = 1; k <= n; ++k)
        g[static_cast<std::size_t>(k)] =
            g[static_cast<std::size_t>(k - 1)] + steps[static_cast<std::size_t>(k - 1)];
    return detail::finish(rng, n, std::make_unique<ConcaveCardinalityModel>(std::move(g)));
}

namespace detail {

// Random binary tree shape over `leaves` leaves; nodes numbered in creation
// order starting at the root. Returns each leaf's node id in test order.
inline void random_tree_shape(std::mt19937_64& rng, int leaves, int parent,
                              std::vector<double>& weights, std::vector<int>& parents,
                              std::vector<int>& leaf_nodes) {
    std::uniform_real_distribution<double> wd(0.1, 2.0);
    int id = static_cast<int>(weights.size());
    weights.push_back(wd(rng));
    parents.push_back(parent);
    if (leaves == 1) {
        leaf_nodes.push_back(id);
        return;
    }
    std::uniform_int_distribution<int> split(1, leaves - 1);
    int left = split(rng);
    random_tree_shape(rng, left, id, weights, parents, leaf_nodes);
    random_tree_shape(rng, leaves - left, id, weights, parents, leaf_nodes);
}

inline TreeCost random_tree(std::mt19937_64& rng, int n) {
    std::vector<double> weights;
    std::vector<int> parents, leaf_nodes;
    random_tree_shape(rng, n, -1, weights, parents, leaf_nodes);
    weights[0] = 0.0;  // free root so single-leaf trees stay nontrivial
    return TreeCost(std::move(weights), std::move(parents), std::move(leaf_nodes));
}

}  // namespace detail

inline GeneratedCase gen_random_tree(int n, std::uint64_t seed, double eps = 0.1) {
    if (n < 1) throw InputError("random_tree: n must be positive");
    std::mt19937_64 rng(seed);
    auto model = std::make_unique<TreeCostModel>(detail::random_tree(rng, n), eps);
    return detail::finish(rng, n, std::move(model));
}

inline GeneratedCase gen_random_tree_capacitated(int n, int k, std::uint64_t seed,
                                                 double eps = 0.1) {
    if (n < 1) throw InputError("random_tree_capacitated: n must be positive");
    std::mt19937_64 rng(seed);
    auto model =
        std::make_unique<CapacitatedTreeCostModel>(detail::random_tree(rng, n), k, eps);
    return detail::finish(rng, n, std::move(model));
}

inline GeneratedCase gen_random_machines(int n, std::uint64_t seed) {
    if (n < 1) throw InputError("random_machines: n must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> cd(0.5, 3.0);
    std::uniform_int_distribution<int> md(2, 4);
    std::vector<Machine> ms;
    std::vector<char> covered(static_cast<std::size_t>(n), 0);
    int groups = md(rng);
    for (int j = 0; j < groups; ++j) {
        TestSet t;
        for (int id = 1; id <= n; ++id)
            if (rng() & 1u) {
                t.push_back(id);
                covered[static_cast<std::size_t>(id - 1)] = 1;
            }
        if (!t.empty()) ms.push_back({cd(rng), std::move(t)});
    }
    for (int id = 1; id <= n; ++id)
        if (!covered[static_cast<std::size_t>(id - 1)]) ms.push_back({cd(rng), {id}});
    if (ms.empty()) ms.push_back({cd(rng), {1}});
    return detail::finish(rng, n, std::make_unique<MachineCostModel>(n, std::move(ms)));
}

inline GeneratedCase gen_random_metric(int n, std::uint64_t seed, double eps = 0.1) {
    if (n < 1) throw InputError("random_metric: n must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> xy(0.0, 1.0);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i <= n; ++i) pts.push_back({xy(rng), xy(rng)});
    std::vector<std::vector<double>> d(static_cast<std::size_t>(n) + 1,
                                       std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b)
            d[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = std::hypot(
                pts[static_cast<std::size_t>(a)].first - pts[static_cast<std::size_t>(b)].first,
                pts[static_cast<std::size_t>(a)].second - pts[static_cast<std::size_t>(b)].second);
    auto model = std::make_unique<RoutingCostModel>(RoutingCost(std::move(d)), eps);
    return detail::finish(rng, n, std::move(model));
}

// Coin-flip graph on 3..max_v vertices with at least two edges and a target
// drawn so the reduction's failure probability ln|E|/r stays inside (0,1).
inline DreInstance gen_random_graph(int max_v, std::uint64_t seed) {
    if (max_v < 3) throw InputError("random_graph: need at least three vertices");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> vd(3, max_v);
    int v = vd(rng);
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < v; ++a)
        for (int b = a + 1; b < v; ++b)
            if (rng() & 1u) edges.push_back({a, b});
    if (edges.size() < 2) edges = {{0, 1}, {1, 2}};
    int m = static_cast<int>(edges.size());
    int lo = static_cast<int>(std::floor(std::log(static_cast<double>(m)))) + 1;
    std::uniform_int_distribution<int> rd(lo, m);
    return DreInstance(v, std::move(edges), rd(rng));
}

}  // namespace sst
