#pragma once

// The sequencing layer. plain_greedy repeatedly takes the batch a ratio
// oracle proposes for the current residual and charges its certified cost
// bound; that alone can be badly off when an expensive test hides behind a
// long run of near-certain passes. modified_greedy fixes this by also asking
// a value oracle to price covering each residual outright, then truncating
// the greedy trace at the prefix whose certified upper bound
//
//   G_k = sum_{j<=k} prod_{h<j} P(B_h) * C_j  +  prod_{h<=k} P(B_h) * D_k
//
// is smallest. With a rho-accurate ratio oracle and gamma-accurate value
// oracle this is a (4*rho + gamma)-approximation.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sst/core.hpp"
#include "sst/errors.hpp"
#include "sst/exact.hpp"
#include "sst/oracles.hpp"

namespace sst {

using RatioOracle = std::function<RatioBatch(const Instance&, const TestSet& residual)>;
using ValueOracle = std::function<ValueResult(const Instance&, const TestSet& residual)>;

namespace detail {

inline TestSet oracle_batch(const TestSet& s, const char* who) {
    try {
        return normalized(s);
    } catch (const InputError&) {
        throw ContractViolation(std::string(who) + " returned a batch with duplicate tests");
    }
}

}  // namespace detail

struct GreedyTrace {
    std::vector<TestSet> batches;   // B_1..B_l, disjoint, union = all tests
    std::vector<double> bounds;     // certified cost bounds C_j
    std::vector<double> ratios;     // C_j / fail_prob(B_j)
    std::vector<TestSet> residuals; // residual *before* each pick; residuals[0] = full set
};

inline GreedyTrace plain_greedy(const Instance& inst, const RatioOracle& ratio) {
    GreedyTrace trace;
    TestSet residual = full_set(inst.n());
    while (!residual.empty()) {
        trace.residuals.push_back(residual);
        RatioBatch pick = ratio(inst, residual);
        TestSet batch = set_intersect(detail::oracle_batch(pick.batch, "ratio oracle"), residual);
        if (batch.empty()) throw ContractViolation("ratio oracle proposed a batch disjoint from the residual");
        if (!inst.family().allows(batch))
            throw ContractViolation("ratio oracle proposed a batch the family forbids");
        if (!(pick.cost_bound >= 0.0))
            throw ContractViolation("ratio oracle returned a negative or NaN cost bound");
        double fp = inst.fail_prob(batch);
        if (!(fp > 0.0)) throw ContractViolation("ratio oracle proposed a batch with zero failure probability");
        trace.batches.push_back(batch);
        trace.bounds.push_back(pick.cost_bound);
        trace.ratios.push_back(pick.cost_bound / fp);
        residual = set_minus(residual, batch);
    }
    return trace;
}

struct TruncatedSolution {
    int k = 0;                    // prefix length kept from the trace
    CostedSequence sequence;      // B_1..B_k then the value oracle's cover of the residual
    double tail_bound = 0.0;      // D_k (0 when the residual is empty)
    double upper_bound = 0.0;     // G_k
};

// One TruncatedSolution per k = 0..l. The value oracle's cover batches are
// spliced in as the tail of the sequence so the result is a genuine ordered
// partition (size caps and all); their costs stand in as the tail's bounds.
inline std::vector<TruncatedSolution> enumerate_truncations(const Instance& inst, const GreedyTrace& trace,
                                                            const ValueOracle& value) {
    int l = static_cast<int>(trace.batches.size());
    std::vector<TruncatedSolution> out;
    out.reserve(static_cast<std::size_t>(l) + 1);
    double log_disc = 0.0;  // log prod_{h<=k} P(B_h)
    double prefix = 0.0;    // sum_{j<=k} prod_{h<j} P(B_h) * C_j
    TestSet residual = full_set(inst.n());
    for (int k = 0; k <= l; ++k) {
        if (k > 0) {
            prefix += std::exp(log_disc) * trace.bounds[static_cast<std::size_t>(k - 1)];
            log_disc += inst.log_pass_prob(trace.batches[static_cast<std::size_t>(k - 1)]);
            residual = set_minus(residual, trace.batches[static_cast<std::size_t>(k - 1)]);
        }
        TruncatedSolution t;
        t.k = k;
        t.sequence.batches.assign(trace.batches.begin(), trace.batches.begin() + k);
        t.sequence.bounds.assign(trace.bounds.begin(), trace.bounds.begin() + k);
        if (!residual.empty()) {
            ValueResult cover = value(inst, residual);
            if (!(cover.bound >= 0.0))
                throw ContractViolation("value oracle returned a negative or NaN bound");
            if (cover.cover_costs.size() != cover.cover.size())
                throw ContractViolation("value oracle cover and cover_costs lengths differ");
            TestSet seen;
            double cost_sum = 0.0;
            for (std::size_t j = 0; j < cover.cover.size(); ++j) {
                TestSet b = detail::oracle_batch(cover.cover[j], "value oracle");
                if (b.empty()) throw ContractViolation("value oracle cover contains an empty batch");
                if (!inst.family().allows(b))
                    throw ContractViolation("value oracle cover batch violates the family");
                if (!set_intersect(seen, b).empty())
                    throw ContractViolation("value oracle cover batches overlap");
                seen = set_union(seen, b);
                cost_sum += cover.cover_costs[j];
                t.sequence.batches.push_back(b);
                t.sequence.bounds.push_back(cover.cover_costs[j]);
            }
            if (seen != residual) throw ContractViolation("value oracle cover does not partition the residual");
            if (!(cost_sum <= cover.bound * (1.0 + 1e-9) + 1e-12))
                throw ContractViolation("value oracle cover costs exceed its certified bound");
            t.tail_bound = cover.bound;
        }
        t.upper_bound = prefix + std::exp(log_disc) * t.tail_bound;
        out.push_back(std::move(t));
    }
    return out;
}

struct ModifiedGreedyResult {
    TruncatedSolution chosen;                 // argmin_k G_k, ties to smallest k
    std::vector<TruncatedSolution> all;       // every truncation, for audits
    GreedyTrace trace;
};

inline ModifiedGreedyResult modified_greedy(const Instance& inst, const RatioOracle& ratio,
                                            const ValueOracle& value) {
    ModifiedGreedyResult res;
    res.trace = plain_greedy(inst, ratio);
    res.all = enumerate_truncations(inst, res.trace, value);
    std::size_t best = 0;
    for (std::size_t k = 1; k < res.all.size(); ++k)
        if (res.all[k].upper_bound < res.all[best].upper_bound) best = k;
    res.chosen = res.all[best];
    return res;
}

struct GapReport {
    double plain_cost = 0.0;
    double modified_cost = 0.0;
    double modified_bound = 0.0;            // G_k of the chosen truncation
    std::optional<double> exact_opt;        // filled when the subset DP is in reach
    std::vector<double> ratios;             // the trace's certified ratios
};

template <typename CostFn>
GapReport gap_report(const Instance& inst, const RatioOracle& ratio, const ValueOracle& value, CostFn cost,
                     bool want_exact = true) {
    GapReport rep;
    ModifiedGreedyResult mg = modified_greedy(inst, ratio, value);
    GreedyTrace& trace = mg.trace;
    rep.plain_cost = expected_cost(inst, trace.batches, cost);
    rep.modified_cost = expected_cost(inst, mg.chosen.sequence.batches, cost);
    rep.modified_bound = mg.chosen.upper_bound;
    rep.ratios = trace.ratios;
    if (want_exact && inst.n() <= 20) rep.exact_opt = exact_sst(inst, cost).opt_cost;
    return rep;
}

}  // namespace sst
