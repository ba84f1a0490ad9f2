#pragma once

// The quota bridge. With rewards r_i = -ln p_i and d(x) = 1 - e^{-x}, the
// batch ratio c(B)/(1 - P(B)) is exactly c(B)/d(r(B)), so an approximate
// minimum-ratio batch can be recovered from a quota-problem solver (minimum
// cost subject to a reward quota) evaluated on a geometric quota grid: an
// (alpha, beta)-bicriteria solver yields a ((1+eps) * alpha * beta)-accurate
// ratio oracle. The workhorse fact is that d(x)/x is decreasing, so missing
// the quota grid point by a (1+eps) factor costs at most that factor.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "sst/core.hpp"
#include "sst/errors.hpp"
#include "sst/exact.hpp"
#include "sst/oracles.hpp"

namespace sst {

inline double quota_d(double x) {
    if (x < 0.0) throw InputError("d(x) is only defined for x >= 0");
    return -std::expm1(-x);
}

// 1-based reward table r_i = -ln p_i (index 0 unused).
inline std::vector<double> quota_rewards(const Instance& inst) {
    std::vector<double> r(static_cast<std::size_t>(inst.n()) + 1, 0.0);
    for (int i = 1; i <= inst.n(); ++i) r[static_cast<std::size_t>(i)] = -inst.log_p(i);
    return r;
}

// c / d(r(B)); agrees with c / (1 - P(B)) to rounding.
inline double ratio_value(const Instance& inst, const TestSet& batch, double cost) {
    if (batch.empty()) throw InputError("ratio_value: batch is empty");
    return cost / quota_d(-inst.log_pass_prob(batch));
}

// A quota-problem solver with declared bicriteria factors: on (U, rewards, Q)
// it returns S <= U with certified cost within alpha of the cheapest subset
// meeting Q and reward r(S) >= Q/beta, or nullopt when the quota is
// unreachable even taking all of U.
struct BicriteriaSolver {
    double alpha = 1.0;
    double beta = 1.0;
    std::function<std::optional<QpSolution>(const TestSet& U, const std::vector<double>& reward_by_id,
                                            double quota)>
        solve;
};

struct QuotaRatioResult {
    TestSet batch;
    double ratio_bound = 0.0;  // cost_bound / d(r(batch))
    double cost_bound = 0.0;   // C*
};

// Sweeps quotas q_min * (1+eps)^i for i = 0..L (L chosen so the grid covers
// the total reward), solves each, and keeps the candidate with the best
// certified ratio. Infeasible grid points are skipped.
inline QuotaRatioResult ratio_from_quota(const Instance& inst, const TestSet& U,
                                         const BicriteriaSolver& solver, double eps) {
    if (U.empty()) throw InputError("ratio_from_quota: residual set is empty");
    if (!(eps > 0.0)) throw InputError("ratio_from_quota: eps must be positive");
    if (!solver.solve) throw InputError("ratio_from_quota: solver is not callable");

    std::vector<double> rewards = quota_rewards(inst);
    double r_min = std::numeric_limits<double>::infinity();
    double r_max = 0.0;
    for (int id : U) {
        r_min = std::min(r_min, inst.q(id));
        r_max += rewards[static_cast<std::size_t>(id)];
    }
    int levels = static_cast<int>(std::ceil(std::log(r_max / r_min) / std::log1p(eps)));

    QuotaRatioResult best;
    best.ratio_bound = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= levels; ++i) {
        double quota = r_min * std::pow(1.0 + eps, i);
        auto sol = solver.solve(U, rewards, quota);
        if (!sol) continue;
        TestSet s;
        try {
            s = normalized(sol->set);
        } catch (const InputError&) {
            throw ContractViolation("quota solver returned a set with duplicate tests");
        }
        if (s.empty() || !set_minus(s, U).empty())
            throw ContractViolation("quota solver returned a set outside the residual");
        if (!(sol->cost >= 0.0))
            throw ContractViolation("quota solver returned a negative or NaN cost bound");
        double r = 0.0;
        for (int id : s) r += rewards[static_cast<std::size_t>(id)];
        double ratio = sol->cost / quota_d(r);
        if (ratio < best.ratio_bound) {
            best.ratio_bound = ratio;
            best.cost_bound = sol->cost;
            best.batch = std::move(s);
        }
    }
    if (best.batch.empty())
        throw ContractViolation("quota solver was infeasible on the whole grid, including Q = q_min");
    return best;
}

// The enumeration solver as a BicriteriaSolver (alpha = beta = 1), for audits
// and for backends whose residuals stay desk-sized.
template <typename CostFn>
BicriteriaSolver exact_qp_solver(CostFn cost) {
    BicriteriaSolver s;
    s.alpha = 1.0;
    s.beta = 1.0;
    s.solve = [cost](const TestSet& U, const std::vector<double>& rewards,
                     double quota) mutable -> std::optional<QpSolution> {
        return exact_qp(rewards, U, cost, quota);
    };
    return s;
}

}  // namespace sst
