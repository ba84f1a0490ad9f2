#pragma once

// Min-sum set cover: pick sets one at a time; an element's cover time is the
// total cost spent up to and including the first set containing it, and the
// objective is the weighted sum of cover times. The testing problem embeds
// into this by one element per nonzero outcome vector and one set per batch.

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sst/core.hpp"
#include "sst/errors.hpp"

namespace sst {

struct MsscSet {
    std::vector<int> members;  // 0-based element ids, sorted
    double cost = 0.0;
};

struct MsscInstance {
    std::vector<double> weights;  // per element, >= 0
    std::vector<MsscSet> sets;

    int num_elements() const { return static_cast<int>(weights.size()); }
    int num_sets() const { return static_cast<int>(sets.size()); }

    void validate() const {
        for (double w : weights)
            if (!(w >= 0.0)) throw InputError("mssc: element weight must be >= 0");
        for (std::size_t s = 0; s < sets.size(); ++s) {
            if (!(sets[s].cost >= 0.0)) throw InputError("mssc: set cost must be >= 0");
            int prev = -1;
            for (int e : sets[s].members) {
                if (e < 0 || e >= num_elements())
                    throw InputError("mssc: set " + std::to_string(s) +
                                     " has out-of-range element " + std::to_string(e));
                if (e <= prev)
                    throw InputError("mssc: set " + std::to_string(s) +
                                     " members must be sorted and distinct");
                prev = e;
            }
        }
    }
};

struct MsscSolution {
    std::vector<int> order;           // chosen set indices
    std::vector<double> cover_times;  // per element; +inf if never covered
    double objective = 0.0;
};

// Cover times and objective for a given pick order. A positive-weight element
// left uncovered at the end is an input error; zero-weight stragglers keep an
// infinite cover time and contribute nothing.
inline MsscSolution cover_time(const MsscInstance& inst, const std::vector<int>& order) {
    inst.validate();
    MsscSolution sol;
    sol.order = order;
    sol.cover_times.assign(static_cast<std::size_t>(inst.num_elements()),
                           std::numeric_limits<double>::infinity());
    double spent = 0.0;
    for (int s : order) {
        if (s < 0 || s >= inst.num_sets())
            throw InputError("mssc: order references set " + std::to_string(s));
        spent += inst.sets[static_cast<std::size_t>(s)].cost;
        for (int e : inst.sets[static_cast<std::size_t>(s)].members) {
            auto ue = static_cast<std::size_t>(e);
            if (std::isinf(sol.cover_times[ue])) sol.cover_times[ue] = spent;
        }
    }
    for (int e = 0; e < inst.num_elements(); ++e) {
        auto ue = static_cast<std::size_t>(e);
        if (inst.weights[ue] > 0.0 && std::isinf(sol.cover_times[ue]))
            throw InputError("mssc: element " + std::to_string(e) +
                             " has positive weight but is never covered");
        if (!std::isinf(sol.cover_times[ue]))
            sol.objective += inst.weights[ue] * sol.cover_times[ue];
    }
    return sol;
}

// Pluggable selection rule: given the marginal uncovered weight per set,
// return the set to pick next. Must return a set with positive marginal.
using MsscChoice = std::function<int(const MsscInstance&, const std::vector<double>& marginal)>;

// The canonical rule: minimize cost / marginal weight, ties to the lowest set
// index. Sets with zero marginal are skipped.
inline int mssc_exact_choice(const MsscInstance& inst, const std::vector<double>& marginal) {
    int best = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int s = 0; s < inst.num_sets(); ++s) {
        double m = marginal[static_cast<std::size_t>(s)];
        if (m <= 0.0) continue;
        double ratio = inst.sets[static_cast<std::size_t>(s)].cost / m;
        if (ratio < best_ratio) {
            best_ratio = ratio;
            best = s;
        }
    }
    return best;
}

inline MsscSolution mssc_greedy(const MsscInstance& inst, const MsscChoice& choice = mssc_exact_choice) {
    inst.validate();
    std::vector<char> covered(static_cast<std::size_t>(inst.num_elements()), 0);
    // Progress is tracked as an exact count: weights may be arbitrarily tiny
    // and a float running sum could hit zero while elements remain.
    int remaining = 0;
    for (int e = 0; e < inst.num_elements(); ++e)
        if (inst.weights[static_cast<std::size_t>(e)] > 0.0) ++remaining;

    std::vector<int> order;
    std::vector<double> marginal(static_cast<std::size_t>(inst.num_sets()), 0.0);
    while (remaining > 0) {
        bool any = false;
        for (int s = 0; s < inst.num_sets(); ++s) {
            double m = 0.0;
            for (int e : inst.sets[static_cast<std::size_t>(s)].members)
                if (!covered[static_cast<std::size_t>(e)]) m += inst.weights[static_cast<std::size_t>(e)];
            marginal[static_cast<std::size_t>(s)] = m;
            any = any || m > 0.0;
        }
        if (!any)
            throw InputError("mssc: positive-weight elements cannot be covered by any set");
        int pick = choice(inst, marginal);
        if (pick < 0 || pick >= inst.num_sets() || marginal[static_cast<std::size_t>(pick)] <= 0.0)
            throw ContractViolation("mssc choice returned a set with no uncovered weight");
        order.push_back(pick);
        for (int e : inst.sets[static_cast<std::size_t>(pick)].members) {
            auto ue = static_cast<std::size_t>(e);
            if (!covered[ue]) {
                covered[ue] = 1;
                if (inst.weights[ue] > 0.0) --remaining;
            }
        }
    }
    return cover_time(inst, order);
}

// Price accounting for a pick order: at step i with residual weight w(R_i),
// covered weight w(X_i) and cumulative cost s_i, the step's price is
// P_i = c_i * w(R_i) / w(X_i). Two exact identities tie the table to the
// objective: sum_i w(X_i) P_i = sum_i c_i w(R_i) = sum_i s_i w(X_i).
struct PriceAudit {
    struct Row {
        int set = 0;
        double cost = 0.0;
        double residual_weight = 0.0;  // w(R_i)
        double covered_weight = 0.0;   // w(X_i)
        double cum_cost = 0.0;         // s_i
        double price = 0.0;            // P_i
    };
    std::vector<Row> rows;
    double objective = 0.0;    // sum_i s_i w(X_i)
    double priced_mass = 0.0;  // sum_i w(X_i) P_i
    double direct_mass = 0.0;  // sum_i c_i w(R_i)
};

inline PriceAudit price_audit(const MsscInstance& inst, const std::vector<int>& order) {
    inst.validate();
    PriceAudit audit;
    std::vector<char> covered(static_cast<std::size_t>(inst.num_elements()), 0);
    double residual = 0.0;
    for (int e = 0; e < inst.num_elements(); ++e) residual += inst.weights[static_cast<std::size_t>(e)];
    double spent = 0.0;
    for (int s : order) {
        if (s < 0 || s >= inst.num_sets())
            throw InputError("mssc: order references set " + std::to_string(s));
        const MsscSet& set = inst.sets[static_cast<std::size_t>(s)];
        double gained = 0.0;
        for (int e : set.members)
            if (!covered[static_cast<std::size_t>(e)]) gained += inst.weights[static_cast<std::size_t>(e)];
        spent += set.cost;
        PriceAudit::Row row;
        row.set = s;
        row.cost = set.cost;
        row.residual_weight = residual;
        row.covered_weight = gained;
        row.cum_cost = spent;
        row.price = gained > 0.0 ? set.cost * residual / gained
                                 : std::numeric_limits<double>::infinity();
        audit.rows.push_back(row);
        audit.objective += spent * gained;
        audit.direct_mass += set.cost * residual;
        if (gained > 0.0) audit.priced_mass += gained * row.price;
        for (int e : set.members) {
            auto ue = static_cast<std::size_t>(e);
            if (!covered[ue]) {
                covered[ue] = 1;
                residual -= inst.weights[ue];
            }
        }
    }
    return audit;
}

// The covering embedding of a testing instance: one element per nonzero
// outcome vector x (bit i set = test i fails) weighted by its probability,
// one set per family batch B containing the outcomes B would catch, priced
// at c(B). Sets are enumerated in ascending batch-bitmask order, which makes
// greedy tie-breaking agree with the smallest-bitmask rule on the test side.
struct BuiltMssc {
    MsscInstance mssc;
    std::vector<TestSet> batch_of_set;
};

template <typename CostFn>
BuiltMssc build_mssc_from_sst(const Instance& inst, CostFn&& cost) {
    const int n = inst.n();
    if (n > 12)
        throw CapacityError("build_mssc_from_sst: 2^n elements; n is capped at 12, got " +
                            std::to_string(n));
    BuiltMssc out;
    const std::uint32_t top = 1u << n;
    out.mssc.weights.resize(top - 1);
    for (std::uint32_t x = 1; x < top; ++x) {
        double w = 1.0;
        for (int i = 0; i < n; ++i) w *= (x >> i) & 1u ? inst.q(i + 1) : inst.p(i + 1);
        out.mssc.weights[x - 1] = w;
    }
    for (std::uint32_t bm = 1; bm < top; ++bm) {
        TestSet batch;
        for (int i = 0; i < n; ++i)
            if ((bm >> i) & 1u) batch.push_back(i + 1);
        if (!inst.family().allows(batch)) continue;
        MsscSet set;
        set.cost = cost(batch);
        for (std::uint32_t x = 1; x < top; ++x)
            if (x & bm) set.members.push_back(static_cast<int>(x - 1));
        out.mssc.sets.push_back(std::move(set));
        out.batch_of_set.push_back(std::move(batch));
    }
    return out;
}

}  // namespace sst
