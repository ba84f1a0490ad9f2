#pragma once

// Instances, batch sequences and their evaluation.
//
// A test i passes independently with probability p_i. A batched strategy runs
// groups of tests in a fixed order and stops after the first group containing
// a failure; the cost of a group is given by a set function c. The expected
// cost of a sequence <B_1, ..., B_m> is
//
//     sum_j  prod_{l<j} P(B_l) * c(B_j),      P(B) = prod_{i in B} p_i.
//
// Failure probabilities are the authoritative representation: products are
// accumulated as sums of log1p(-q_i), so both P(B) and 1 - P(B) retain full
// relative precision even when the q_i underflow the pass side (q_i ~ 2^-250
// is a supported input; p_i = 1 is not).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sst/errors.hpp"

namespace sst {

// Tests are identified by 1-based ids; a batch is a set of ids.
using TestSet = std::vector<int>;

struct BatchFamily {
    enum class Kind { All, MaxSize, ModelDefined };
    Kind kind = Kind::All;
    int k = 0;  // MaxSize only

    static BatchFamily all() { return {Kind::All, 0}; }
    static BatchFamily max_size(int k) {
        if (k < 1) throw InputError("batch family max_size: k must be >= 1");
        return {Kind::MaxSize, k};
    }
    static BatchFamily model_defined() { return {Kind::ModelDefined, 0}; }

    // Membership check for the families core understands. ModelDefined
    // batches are the owning cost model's responsibility and pass here.
    bool allows(const TestSet& batch) const {
        if (kind == Kind::MaxSize) return static_cast<int>(batch.size()) <= k;
        return true;
    }
};

class Instance {
  public:
    static Instance from_pass_probs(const std::vector<double>& pass,
                                    BatchFamily family = BatchFamily::all()) {
        std::vector<double> fail(pass.size());
        for (std::size_t i = 0; i < pass.size(); ++i) {
            if (!(pass[i] > 0.0) || !(pass[i] < 1.0))
                throw InputError("pass probability of test " + std::to_string(i + 1) +
                                 " must lie strictly inside (0,1)");
            fail[i] = 1.0 - pass[i];
        }
        return Instance(std::move(fail), family);
    }

    static Instance from_fail_probs(std::vector<double> fail,
                                    BatchFamily family = BatchFamily::all()) {
        for (std::size_t i = 0; i < fail.size(); ++i)
            if (!(fail[i] > 0.0) || !(fail[i] < 1.0))
                throw InputError("failure probability of test " + std::to_string(i + 1) +
                                 " must lie strictly inside (0,1)");
        return Instance(std::move(fail), family);
    }

    int n() const { return static_cast<int>(q_.size()); }
    const BatchFamily& family() const { return family_; }
    void set_family(BatchFamily f) { family_ = f; }

    double p(int id) const { return 1.0 - q_[check(id)]; }
    double q(int id) const { return q_[check(id)]; }
    double log_p(int id) const { return logp_[check(id)]; }

    double log_pass_prob(const TestSet& batch) const {
        double s = 0.0;
        for (int id : batch) s += logp_[check(id)];
        return s;
    }

    // P(B). Small batches multiply directly (exact for dyadic examples);
    // larger ones go through log space.
    double pass_prob(const TestSet& batch) const {
        if (batch.size() <= 32) {
            double prod = 1.0;
            for (int id : batch) prod *= 1.0 - q_[check(id)];
            return prod;
        }
        return std::exp(log_pass_prob(batch));
    }

    // 1 - P(B), always through expm1 so tiny failure probabilities survive.
    double fail_prob(const TestSet& batch) const {
        return -std::expm1(log_pass_prob(batch));
    }

  private:
    Instance(std::vector<double> fail, BatchFamily family)
        : q_(std::move(fail)), family_(family) {
        logp_.resize(q_.size());
        for (std::size_t i = 0; i < q_.size(); ++i) logp_[i] = std::log1p(-q_[i]);
    }

    std::size_t check(int id) const {
        if (id < 1 || id > n())
            throw InputError("test id " + std::to_string(id) + " out of range 1.." +
                             std::to_string(n()));
        return static_cast<std::size_t>(id - 1);
    }

    std::vector<double> q_;
    std::vector<double> logp_;
    BatchFamily family_;
};

struct BatchSequence {
    std::vector<TestSet> batches;
};

// A sequence together with per-batch cost upper bounds (oracle output).
struct CostedSequence {
    std::vector<TestSet> batches;
    std::vector<double> bounds;
};

// First violation of the ordered-partition contract, or nullopt if the
// sequence is a genuine partition of [n] into family batches.
inline std::optional<std::string> validate_partition(const Instance& inst,
                                                     const std::vector<TestSet>& batches) {
    std::vector<char> seen(static_cast<std::size_t>(inst.n()) + 1, 0);
    for (std::size_t j = 0; j < batches.size(); ++j) {
        const TestSet& b = batches[j];
        if (b.empty()) return "batch " + std::to_string(j + 1) + " is empty";
        for (int id : b) {
            if (id < 1 || id > inst.n())
                return "batch " + std::to_string(j + 1) + " contains invalid test id " +
                       std::to_string(id);
            if (seen[static_cast<std::size_t>(id)])
                return "test " + std::to_string(id) + " appears more than once";
            seen[static_cast<std::size_t>(id)] = 1;
        }
        if (!inst.family().allows(b))
            return "batch " + std::to_string(j + 1) + " of size " + std::to_string(b.size()) +
                   " is not in the batch family";
    }
    for (int id = 1; id <= inst.n(); ++id)
        if (!seen[static_cast<std::size_t>(id)])
            return "test " + std::to_string(id) + " is missing";
    return std::nullopt;
}

namespace detail {
inline void require_partition(const Instance& inst, const std::vector<TestSet>& batches) {
    if (auto v = validate_partition(inst, batches)) throw InputError("invalid sequence: " + *v);
}
}  // namespace detail

// Expected cost of running `batches` in order under cost function `cost`.
template <typename CostFn>
double expected_cost(const Instance& inst, const std::vector<TestSet>& batches, CostFn&& cost) {
    detail::require_partition(inst, batches);
    double total = 0.0, log_disc = 0.0;
    for (const TestSet& b : batches) {
        double c = cost(b);
        if (!(c >= 0.0)) throw InputError("cost function returned a negative or NaN value");
        total += std::exp(log_disc) * c;
        log_disc += inst.log_pass_prob(b);
    }
    return total;
}

// Same discounting applied to per-batch upper bounds instead of a cost
// function; dominates expected_cost whenever bounds[j] >= c(B_j).
inline double expected_cost_upper(const Instance& inst, const CostedSequence& cs) {
    detail::require_partition(inst, cs.batches);
    if (cs.bounds.size() != cs.batches.size())
        throw InputError("costed sequence: bounds/batches length mismatch");
    double total = 0.0, log_disc = 0.0;
    for (std::size_t j = 0; j < cs.batches.size(); ++j) {
        if (!(cs.bounds[j] >= 0.0)) throw InputError("costed sequence: negative or NaN bound");
        total += std::exp(log_disc) * cs.bounds[j];
        log_disc += inst.log_pass_prob(cs.batches[j]);
    }
    return total;
}

struct MonteCarloResult {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    std::uint64_t trials = 0;
};

// Simulates the stop-at-first-failure process. Deterministic for a fixed
// seed: uniforms are drawn as (x >> 11) * 2^-53 from a mt19937_64 stream.
template <typename CostFn>
MonteCarloResult monte_carlo_cost(const Instance& inst, const std::vector<TestSet>& batches,
                                  CostFn&& cost, std::uint64_t trials, std::uint64_t seed) {
    detail::require_partition(inst, batches);
    if (trials == 0) throw InputError("monte_carlo_cost: trials must be >= 1");
    std::vector<double> batch_cost(batches.size());
    for (std::size_t j = 0; j < batches.size(); ++j) {
        batch_cost[j] = cost(batches[j]);
        if (!(batch_cost[j] >= 0.0))
            throw InputError("cost function returned a negative or NaN value");
    }
    std::mt19937_64 rng(seed);
    auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    double sum = 0.0, sumsq = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        double run = 0.0;
        for (std::size_t j = 0; j < batches.size(); ++j) {
            run += batch_cost[j];
            bool failed = false;
            for (int id : batches[j])
                if (uniform() < inst.q(id)) failed = true;
            if (failed) break;
        }
        sum += run;
        sumsq += run * run;
    }
    MonteCarloResult r;
    r.trials = trials;
    r.mean = sum / static_cast<double>(trials);
    if (trials > 1) {
        double var = (sumsq - sum * sum / static_cast<double>(trials)) /
                     static_cast<double>(trials - 1);
        r.stderr_of_mean = std::sqrt(std::max(0.0, var) / static_cast<double>(trials));
    }
    return r;
}

// Canonical form used by oracles and IO: sorted ascending, duplicates are a
// caller bug surfaced as InputError.
inline TestSet normalized(TestSet s) {
    std::sort(s.begin(), s.end());
    if (std::adjacent_find(s.begin(), s.end()) != s.end())
        throw InputError("test set contains a duplicate id");
    return s;
}

inline TestSet set_minus(const TestSet& a, const TestSet& b) {
    TestSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline TestSet set_intersect(const TestSet& a, const TestSet& b) {
    TestSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline TestSet set_union(const TestSet& a, const TestSet& b) {
    TestSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline TestSet full_set(int n) {
    TestSet s(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = i + 1;
    return s;
}

}  // namespace sst
