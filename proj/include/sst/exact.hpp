#pragma once

// Desk-scale ground-truth solvers. Everything here is exponential and
// deliberately capped; these are the referees the approximation algorithms
// are audited against, not production paths.

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sst/core.hpp"
#include "sst/errors.hpp"
#include "sst/mssc.hpp"
#include "sst/oracles.hpp"

namespace sst {

inline std::uint32_t mask_of(const TestSet& s, int n) {
    std::uint32_t m = 0;
    for (int id : s) {
        if (id < 1 || id > n) throw InputError("test id out of range for bitmask");
        m |= 1u << (id - 1);
    }
    return m;
}

inline TestSet set_of_mask(std::uint32_t m) {
    TestSet s;
    for (int i = 0; m >> i; ++i)
        if ((m >> i) & 1u) s.push_back(i + 1);
    return s;
}

struct ExactSolveResult {
    double opt_cost = 0.0;
    std::vector<TestSet> sequence;
    // Optimal residual cost per test-subset bitmask (index = mask). Filled by
    // the subset-DP solver; structured solvers leave it empty.
    std::vector<double> residual_opt;
};

namespace detail {

inline void check_exact_n(int n, const char* who) {
    if (n > 20)
        throw CapacityError(std::string(who) + ": subset table has 2^n entries; n capped at 20, got " +
                            std::to_string(n));
}

inline bool mask_allowed(const BatchFamily& family, std::uint32_t mask) {
    if (family.kind == BatchFamily::Kind::MaxSize) return std::popcount(mask) <= family.k;
    return true;
}

// Lazily evaluated per-mask cost cache; one mask is costed at most once per
// solver call, which keeps reentrancy (no state outlives the call).
template <typename CostFn>
class MaskCostCache {
  public:
    MaskCostCache(CostFn& cost, int n) : cost_(cost), vals_(std::size_t{1} << n, -1.0) {}
    double operator()(std::uint32_t mask) {
        double& v = vals_[mask];
        if (v < 0.0) {
            v = cost_(set_of_mask(mask));
            if (!(v >= 0.0)) throw InputError("cost function returned a negative or NaN value");
        }
        return v;
    }

  private:
    CostFn& cost_;
    std::vector<double> vals_;
};

}  // namespace detail

// Optimal expected cost by dynamic programming over residual subsets:
//   OPT(U) = min over nonempty family batches B <= U of c(B) + P(B) OPT(U\B).
// Ties prefer the numerically smallest batch bitmask.
template <typename CostFn>
ExactSolveResult exact_sst(const Instance& inst, CostFn&& cost) {
    const int n = inst.n();
    detail::check_exact_n(n, "exact_sst");
    const std::size_t top = std::size_t{1} << n;

    std::vector<double> logp(top, 0.0), pass(top, 1.0);
    for (std::size_t m = 1; m < top; ++m) {
        int low = std::countr_zero(m);
        logp[m] = logp[m & (m - 1)] + inst.log_p(low + 1);
        pass[m] = std::exp(logp[m]);
    }

    detail::MaskCostCache<std::remove_reference_t<CostFn>> c(cost, n);
    std::vector<double> opt(top, 0.0);
    std::vector<std::uint32_t> choice(top, 0);
    for (std::size_t u = 1; u < top; ++u) {
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_b = 0;
        auto um = static_cast<std::uint32_t>(u);
        for (std::uint32_t b = um;; b = (b - 1) & um) {
            if (b == 0) break;
            if (detail::mask_allowed(inst.family(), b)) {
                double v = c(b) + pass[b] * opt[u ^ b];
                if (v < best || (v == best && b < best_b)) {
                    best = v;
                    best_b = b;
                }
            }
        }
        if (best_b == 0)
            throw InputError("exact_sst: batch family admits no batch inside a residual set");
        opt[u] = best;
        choice[u] = best_b;
    }

    ExactSolveResult res;
    res.opt_cost = opt[top - 1];
    res.residual_opt = std::move(opt);
    for (std::uint32_t u = static_cast<std::uint32_t>(top - 1); u;) {
        res.sequence.push_back(set_of_mask(choice[u]));
        u ^= choice[u];
    }
    return res;
}

struct RatioResultExact {
    TestSet batch;
    double ratio = 0.0;
    double cost = 0.0;
};

// Brute-force minimum of c(B) / (1 - P(B)) over nonempty family batches
// B <= U. Ties prefer the smallest batch bitmask.
template <typename CostFn>
RatioResultExact exact_ratio(const Instance& inst, const TestSet& U, CostFn&& cost) {
    const int n = inst.n();
    detail::check_exact_n(n, "exact_ratio");
    if (U.empty()) throw InputError("exact_ratio: residual set is empty");
    std::uint32_t um = mask_of(U, n);

    detail::MaskCostCache<std::remove_reference_t<CostFn>> c(cost, n);
    double best = std::numeric_limits<double>::infinity();
    double best_cost = 0.0;
    std::uint32_t best_b = 0;
    for (std::uint32_t b = um;; b = (b - 1) & um) {
        if (b == 0) break;
        if (!detail::mask_allowed(inst.family(), b)) continue;
        TestSet bs = set_of_mask(b);
        double fail = inst.fail_prob(bs);
        double v = c(b) / fail;
        if (v < best || (v == best && b < best_b)) {
            best = v;
            best_cost = c(b);
            best_b = b;
        }
    }
    if (best_b == 0) throw InputError("exact_ratio: batch family admits no batch inside U");
    return {set_of_mask(best_b), best, best_cost};
}

// Minimum-cost subset of U with total reward >= quota, by enumeration.
// Returns nullopt when even all of U falls short. Ties prefer the smallest
// subset bitmask. `reward_by_id` is 1-based (index 0 unused).
template <typename CostFn>
std::optional<QpSolution> exact_qp(const std::vector<double>& reward_by_id, const TestSet& U,
                                   CostFn&& cost, double quota) {
    int maxid = 0;
    for (int id : U) maxid = std::max(maxid, id);
    if (static_cast<std::size_t>(maxid) >= reward_by_id.size())
        throw InputError("exact_qp: reward table shorter than max test id");
    if (static_cast<int>(U.size()) > 20)
        throw CapacityError("exact_qp: |U| capped at 20, got " + std::to_string(U.size()));

    const std::uint32_t top = 1u << U.size();
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_m = 0;
    double best_reward = 0.0;
    for (std::uint32_t m = 1; m < top; ++m) {
        double r = 0.0;
        TestSet s;
        for (std::size_t i = 0; i < U.size(); ++i)
            if ((m >> i) & 1u) {
                s.push_back(U[i]);
                r += reward_by_id[static_cast<std::size_t>(U[i])];
            }
        if (r < quota) continue;
        double cv = cost(s);
        if (!(cv >= 0.0)) throw InputError("cost function returned a negative or NaN value");
        if (cv < best || (cv == best && m < best_m)) {
            best = cv;
            best_m = m;
            best_reward = r;
        }
    }
    if (best_m == 0) return std::nullopt;
    TestSet s;
    for (std::size_t i = 0; i < U.size(); ++i)
        if ((best_m >> i) & 1u) s.push_back(U[i]);
    return QpSolution{std::move(s), best, best_reward};
}

struct ExactMsscResult {
    double objective = 0.0;
    std::vector<int> order;
};

// Optimal pick order by depth-first search over set sequences. Prefixes that
// add no new element are pruned (inserting such a set never helps), as are
// partial objectives already at or above the incumbent.
inline ExactMsscResult exact_mssc(const MsscInstance& inst) {
    inst.validate();
    if (inst.num_sets() > 8)
        throw CapacityError("exact_mssc: capped at 8 sets, got " + std::to_string(inst.num_sets()));
    if (inst.num_elements() > 64)
        throw CapacityError("exact_mssc: capped at 64 elements, got " +
                            std::to_string(inst.num_elements()));

    std::uint64_t need = 0;
    for (int e = 0; e < inst.num_elements(); ++e)
        if (inst.weights[static_cast<std::size_t>(e)] > 0.0) need |= 1ull << e;
    std::vector<std::uint64_t> set_mask(static_cast<std::size_t>(inst.num_sets()), 0);
    std::uint64_t reachable = 0;
    for (int s = 0; s < inst.num_sets(); ++s) {
        for (int e : inst.sets[static_cast<std::size_t>(s)].members)
            set_mask[static_cast<std::size_t>(s)] |= 1ull << e;
        reachable |= set_mask[static_cast<std::size_t>(s)];
    }
    if ((need & reachable) != need)
        throw InputError("exact_mssc: a positive-weight element belongs to no set");

    ExactMsscResult best;
    best.objective = std::numeric_limits<double>::infinity();
    std::vector<int> order;
    std::vector<char> used(static_cast<std::size_t>(inst.num_sets()), 0);

    auto weight_of = [&](std::uint64_t mask) {
        double w = 0.0;
        for (int e = 0; mask >> e; ++e)
            if ((mask >> e) & 1ull) w += inst.weights[static_cast<std::size_t>(e)];
        return w;
    };

    std::function<void(std::uint64_t, double, double)> dfs = [&](std::uint64_t covered,
                                                                 double spent, double obj) {
        if ((covered & need) == need) {
            if (obj < best.objective) {
                best.objective = obj;
                best.order = order;
            }
            return;
        }
        if (obj >= best.objective) return;
        for (int s = 0; s < inst.num_sets(); ++s) {
            if (used[static_cast<std::size_t>(s)]) continue;
            std::uint64_t fresh = set_mask[static_cast<std::size_t>(s)] & ~covered;
            if (!fresh) continue;
            double cost = inst.sets[static_cast<std::size_t>(s)].cost;
            used[static_cast<std::size_t>(s)] = 1;
            order.push_back(s);
            dfs(covered | fresh, spent + cost, obj + (spent + cost) * weight_of(fresh));
            order.pop_back();
            used[static_cast<std::size_t>(s)] = 0;
        }
    };
    dfs(0, 0.0, 0.0);
    return best;
}

// Optimal expected cost for cardinality costs c(B) = g(|B|) with g concave
// and nondecreasing (g(0) = 0). The optimum batches consecutive runs of the
// tests sorted by increasing pass probability, so an O(n^2) suffix DP
// suffices:  f(i) = min_{j>i} g(j-i) + P(block) f(j).
inline ExactSolveResult exact_concave_cardinality_sst(const Instance& inst,
                                                      const std::vector<double>& g) {
    const int n = inst.n();
    if (static_cast<int>(g.size()) != n + 1)
        throw InputError("concave cardinality: g must have n+1 entries g(0..n)");
    if (g[0] != 0.0) throw InputError("concave cardinality: g(0) must be 0");
    for (int k = 1; k <= n; ++k) {
        if (g[static_cast<std::size_t>(k)] + 1e-12 < g[static_cast<std::size_t>(k - 1)])
            throw InputError("concave cardinality: g must be nondecreasing");
        if (k >= 2 && g[static_cast<std::size_t>(k)] - g[static_cast<std::size_t>(k - 1)] >
                          g[static_cast<std::size_t>(k - 1)] - g[static_cast<std::size_t>(k - 2)] + 1e-12)
            throw InputError("concave cardinality: g must be concave");
    }

    TestSet order = full_set(n);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return inst.p(a) < inst.p(b); });
    std::vector<double> pref_log(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i)
        pref_log[static_cast<std::size_t>(i) + 1] =
            pref_log[static_cast<std::size_t>(i)] + inst.log_p(order[static_cast<std::size_t>(i)]);

    std::vector<double> f(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> cut(static_cast<std::size_t>(n) + 1, 0);
    for (int i = n - 1; i >= 0; --i) {
        double best = std::numeric_limits<double>::infinity();
        int best_j = i + 1;
        for (int j = i + 1; j <= n; ++j) {
            if (inst.family().kind == BatchFamily::Kind::MaxSize && j - i > inst.family().k) break;
            double block_pass =
                std::exp(pref_log[static_cast<std::size_t>(j)] - pref_log[static_cast<std::size_t>(i)]);
            double v = g[static_cast<std::size_t>(j - i)] + block_pass * f[static_cast<std::size_t>(j)];
            if (v < best) {
                best = v;
                best_j = j;
            }
        }
        f[static_cast<std::size_t>(i)] = best;
        cut[static_cast<std::size_t>(i)] = best_j;
    }

    ExactSolveResult res;
    res.opt_cost = f[0];
    for (int i = 0; i < n;) {
        int j = cut[static_cast<std::size_t>(i)];
        TestSet b(order.begin() + i, order.begin() + j);
        res.sequence.push_back(normalized(b));
        i = j;
    }
    return res;
}

}  // namespace sst
