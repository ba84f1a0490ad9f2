#pragma once

// Bridge between sequential testing and the densest-r-edges problem (find the
// fewest vertices inducing at least r edges). Each edge becomes a test that
// touches its two endpoints; batch costs count touched vertices; every test
// fails with probability ln|E| / r. A cheap testing sequence then contains a
// small vertex set inducing many edges, and conversely.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "sst/core.hpp"
#include "sst/cost_model.hpp"

namespace sst {

struct DreInstance {
    int vertices = 0;
    std::vector<std::pair<int, int>> edges;  // normalized u < v, sorted, unique
    int r = 0;

    DreInstance(int v, std::vector<std::pair<int, int>> e, int target)
        : vertices(v), edges(std::move(e)), r(target) {
        if (vertices < 1) throw InputError("graph: need at least one vertex");
        for (auto& [u, w] : edges) {
            if (u == w) throw InputError("graph: self-loops are not allowed");
            if (u > w) std::swap(u, w);
            if (u < 0 || w >= vertices)
                throw InputError("graph: edge endpoint outside 0.." + std::to_string(vertices - 1));
        }
        std::sort(edges.begin(), edges.end());
        if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
            throw InputError("graph: duplicate edge");
        if (r < 1) throw InputError("graph: edge target must be positive");
        if (r > static_cast<int>(edges.size()))
            throw InputError("graph: edge target " + std::to_string(r) + " exceeds the " +
                             std::to_string(edges.size()) + " edges present");
    }
};

// Number of edges with both endpoints inside `nodes`.
inline int induced_edges(const DreInstance& g, const std::vector<int>& nodes) {
    std::vector<char> in(static_cast<std::size_t>(g.vertices), 0);
    for (int v : nodes) {
        if (v < 0 || v >= g.vertices)
            throw InputError("graph: vertex " + std::to_string(v) + " out of range");
        in[static_cast<std::size_t>(v)] = 1;
    }
    int count = 0;
    for (auto [u, w] : g.edges)
        if (in[static_cast<std::size_t>(u)] && in[static_cast<std::size_t>(w)]) ++count;
    return count;
}

// Minimum vertex count inducing at least g.r edges, by enumeration. Ties
// prefer the smallest vertex bitmask.
inline int exact_dre(const DreInstance& g) {
    if (g.vertices > 16)
        throw CapacityError("exact densest-edges search capped at 16 vertices, got " +
                            std::to_string(g.vertices));
    const std::uint32_t top = 1u << g.vertices;
    int best = g.vertices + 1;
    for (std::uint32_t m = 0; m < top; ++m) {
        int size = std::popcount(m);
        if (size >= best) continue;
        int count = 0;
        for (auto [u, w] : g.edges)
            if (((m >> u) & 1u) && ((m >> w) & 1u)) ++count;
        if (count >= g.r) best = size;
    }
    return best;  // r <= |E| guarantees the full set is feasible
}

// Batch cost = number of distinct elements touched by the batch's tests.
// Monotone and submodular; the ratio oracle is exact by enumeration and so
// only answers for residuals of at most 20 tests.
class AndCoverageModel final : public CostModel {
  public:
    explicit AndCoverageModel(std::vector<std::vector<int>> sets) : sets_(std::move(sets)) {
        if (sets_.empty()) throw InputError("coverage: need at least one test");
        universe_ = 0;
        for (std::size_t i = 0; i < sets_.size(); ++i) {
            auto& s = sets_[i];
            std::sort(s.begin(), s.end());
            if (std::adjacent_find(s.begin(), s.end()) != s.end())
                throw InputError("coverage: duplicate element in test " + std::to_string(i + 1));
            if (!s.empty()) {
                if (s.front() < 0)
                    throw InputError("coverage: negative element in test " + std::to_string(i + 1));
                universe_ = std::max(universe_, s.back() + 1);
            }
        }
    }

    std::string name() const override { return "and_coverage"; }
    int n() const override { return static_cast<int>(sets_.size()); }

    double exact_cost(const TestSet& batch) const override {
        TestSet b = normalized(batch);
        require_ids(b);
        std::vector<char> seen(static_cast<std::size_t>(universe_), 0);
        int count = 0;
        for (int id : b)
            for (int e : sets_[static_cast<std::size_t>(id - 1)])
                if (!seen[static_cast<std::size_t>(e)]) {
                    seen[static_cast<std::size_t>(e)] = 1;
                    ++count;
                }
        return static_cast<double>(count);
    }

    RatioBatch min_ratio(const Instance& inst, const TestSet& residual) const override {
        require_same_n(inst);
        TestSet u = normalized(residual);
        if (u.empty()) throw InputError("coverage: residual set is empty");
        require_ids(u);
        return detail::scan_min_ratio(inst, u, cost_fn());
    }

    const std::vector<std::vector<int>>& sets() const { return sets_; }

  private:
    std::vector<std::vector<int>> sets_;
    int universe_ = 0;
};

struct DreReduction {
    Instance instance;
    AndCoverageModel model;
    double fail_prob = 0.0;  // shared by every test
};

// Test per edge, touching its endpoints, failing with probability ln|E| / r.
// Needs at least two edges (otherwise the probability degenerates) and
// r > ln|E| (below that the plain greedy cover answer is already good).
inline DreReduction dre_to_sst(const DreInstance& g) {
    const int m = static_cast<int>(g.edges.size());
    if (m < 2)
        throw InputError("reduction: needs at least two edges, got " + std::to_string(m));
    const double q = std::log(static_cast<double>(m)) / g.r;
    if (q >= 1.0)
        throw InputError("reduction: edge target must exceed ln(edge count); r = " +
                         std::to_string(g.r) + ", ln|E| = " + std::to_string(std::log(double(m))));
    std::vector<std::vector<int>> sets;
    sets.reserve(static_cast<std::size_t>(m));
    for (auto [u, w] : g.edges) sets.push_back({u, w});
    return {Instance::from_fail_probs(std::vector<double>(static_cast<std::size_t>(m), q)),
            AndCoverageModel(std::move(sets)), q};
}

struct DreRecovery {
    std::vector<int> nodes;
    int edges = 0;        // induced by `nodes` in the whole graph
    int batches_used = 0; // prefix length taken from the sequence
};

// Extract a vertex set from any full testing sequence on the reduced
// instance: take the longest batch prefix whose run probability stays at
// least 1/2 and keep every vertex those edges touch. The vertex count is at
// most twice the sequence's expected cost, and the induced edge count is at
// least r / (2 ln|E|): the prefix's pass probability dropping under 1/2
// forces enough edges once ln|E|/r <= 1/2, and a single edge already
// suffices when ln|E|/r > 1/2. The whole-sequence prefix case is covered
// because a full partition induces all |E| >= r edges.
inline DreRecovery recover_dre(const DreInstance& g, const std::vector<TestSet>& batches) {
    const int m = static_cast<int>(g.edges.size());
    if (m < 2) throw InputError("recovery: needs at least two edges");
    std::vector<char> seen(static_cast<std::size_t>(m) + 1, 0);
    for (const auto& b : batches) {
        if (b.empty()) throw InputError("recovery: empty batch");
        for (int id : b) {
            if (id < 1 || id > m)
                throw InputError("recovery: test id outside 1.." + std::to_string(m));
            if (seen[static_cast<std::size_t>(id)])
                throw InputError("recovery: test " + std::to_string(id) + " appears twice");
            seen[static_cast<std::size_t>(id)] = 1;
        }
    }
    for (int id = 1; id <= m; ++id)
        if (!seen[static_cast<std::size_t>(id)])
            throw InputError("recovery: sequence misses test " + std::to_string(id));

    const double q = std::log(static_cast<double>(m)) / g.r;
    const double log_pass = std::log1p(-q);
    DreRecovery out;
    std::size_t done = 0;
    int j = 0;
    for (std::size_t i = 0; i < batches.size(); ++i) {
        // Run probability before batch i+1.
        if (std::exp(static_cast<double>(done) * log_pass) < 0.5) break;
        j = static_cast<int>(i) + 1;
        done += batches[i].size();
    }
    out.batches_used = j;

    std::vector<char> in(static_cast<std::size_t>(g.vertices), 0);
    for (int i = 0; i < j; ++i)
        for (int id : batches[static_cast<std::size_t>(i)]) {
            auto [u, w] = g.edges[static_cast<std::size_t>(id - 1)];
            in[static_cast<std::size_t>(u)] = 1;
            in[static_cast<std::size_t>(w)] = 1;
        }
    for (int v = 0; v < g.vertices; ++v)
        if (in[static_cast<std::size_t>(v)]) out.nodes.push_back(v);
    out.edges = induced_edges(g, out.nodes);
    return out;
}

// A solver that, given a densest-edges instance, returns a vertex set
// inducing at least r / beta of the requested edges (any alpha factor on the
// vertex count is the caller's concern).
using DreSolver = std::function<std::vector<int>(const DreInstance&)>;

struct AmplifyResult {
    std::vector<int> nodes;
    int edges = 0;
    int iterations = 0;
};

// Turn a bicriteria solver into a full solution by repeated residual calls.
// Each round solves the instance whose edges are those not yet induced and
// whose target is the shortfall; an optimal set for the original instance
// stays feasible there, so the residual optimum never exceeds the original
// one. Rounds shrink the shortfall by the 1/beta factor the solver promises
// (checked; anything less is a contract violation), so the loop runs at most
// about beta ln r times.
inline AmplifyResult amplify_bicriteria(const DreInstance& g, const DreSolver& solver,
                                        double beta) {
    if (!solver) throw InputError("amplify: no solver provided");
    if (!(beta >= 1.0)) throw InputError("amplify: beta must be at least 1");

    std::vector<char> in(static_cast<std::size_t>(g.vertices), 0);
    AmplifyResult res;
    int covered = 0;
    while (covered < g.r) {
        const int target = g.r - covered;
        std::vector<std::pair<int, int>> rem;
        for (auto [u, w] : g.edges)
            if (!(in[static_cast<std::size_t>(u)] && in[static_cast<std::size_t>(w)]))
                rem.push_back({u, w});
        auto picked = solver(DreInstance(g.vertices, std::move(rem), target));
        for (int v : picked) {
            if (v < 0 || v >= g.vertices)
                throw ContractViolation("amplify: solver returned vertex " + std::to_string(v) +
                                        " outside 0.." + std::to_string(g.vertices - 1));
            in[static_cast<std::size_t>(v)] = 1;
        }
        std::vector<int> now;
        for (int v = 0; v < g.vertices; ++v)
            if (in[static_cast<std::size_t>(v)]) now.push_back(v);
        int total = induced_edges(g, now);
        if (total - covered < 1 ||
            static_cast<double>(total - covered) + 1e-9 < static_cast<double>(target) / beta)
            throw ContractViolation("amplify: solver fell short of the promised edge gain");
        covered = total;
        ++res.iterations;
    }
    for (int v = 0; v < g.vertices; ++v)
        if (in[static_cast<std::size_t>(v)]) res.nodes.push_back(v);
    res.edges = covered;
    return res;
}

}  // namespace sst
