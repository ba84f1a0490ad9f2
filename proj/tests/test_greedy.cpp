#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sst/exact.hpp"
#include "sst/greedy.hpp"

using namespace sst;

namespace {

// q_i = 2^-(i+1): near-certain passes in front of each other, so singleton
// ratios explode geometrically while one capped batch stays cheap.
Instance bad_instance(int n) {
    std::vector<double> q(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) q[static_cast<std::size_t>(i)] = std::ldexp(1.0, -(i + 2));
    return Instance::from_fail_probs(q);
}

auto capped_card_cost(double cap) {
    return [cap](const TestSet& s) { return std::min(static_cast<double>(s.size()), cap); };
}

template <typename CostFn>
RatioOracle exact_oracle(CostFn cost) {
    return [cost](const Instance& inst, const TestSet& U) {
        auto r = exact_ratio(inst, U, cost);
        return RatioBatch{r.batch, r.cost};
    };
}

// Exact for subadditive costs under the unrestricted family: no partition of
// S beats running S as one batch.
template <typename CostFn>
ValueOracle whole_set_value(CostFn cost) {
    return [cost](const Instance&, const TestSet& U) {
        double c = cost(U);
        return ValueResult{c, {U}, {c}};
    };
}

struct SetupCost {
    double setup;
    std::vector<double> w;
    double operator()(const TestSet& s) const {
        if (s.empty()) return 0.0;
        double c = setup;
        for (int id : s) c += w[static_cast<std::size_t>(id)];
        return c;
    }
};

Instance random_instance(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> P(0.15, 0.95);
    std::vector<double> p(static_cast<std::size_t>(n));
    for (double& x : p) x = P(rng);
    return Instance::from_pass_probs(p);
}

SetupCost random_setup_cost(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> K(0.3, 2.0), W(0.1, 1.5);
    SetupCost c;
    c.setup = K(rng);
    c.w.assign(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 1; i <= n; ++i) c.w[static_cast<std::size_t>(i)] = W(rng);
    return c;
}

}  // namespace

TEST_CASE("plain greedy on the capped-cardinality trap picks singletons with doubling ratios") {
    Instance inst = bad_instance(4);
    auto cost = capped_card_cost(2.0);
    GreedyTrace t = plain_greedy(inst, exact_oracle(cost));

    REQUIRE(t.batches.size() == 4);
    for (int j = 0; j < 4; ++j) {
        CHECK(t.batches[static_cast<std::size_t>(j)] == TestSet{j + 1});
        CHECK(t.bounds[static_cast<std::size_t>(j)] == 1.0);
        CHECK(t.ratios[static_cast<std::size_t>(j)] ==
              Catch::Approx(std::ldexp(1.0, j + 2)).epsilon(1e-13));  // 4, 8, 16, 32
    }
    REQUIRE(t.residuals.size() == 4);
    CHECK(t.residuals[0] == full_set(4));
    CHECK(t.residuals[3] == TestSet{4});
    CHECK(expected_cost(inst, t.batches, cost) == Catch::Approx(3.021484375).epsilon(1e-12));
}

TEST_CASE("truncation bounds on the trap, by hand") {
    Instance inst = bad_instance(4);
    auto cost = capped_card_cost(2.0);
    GreedyTrace t = plain_greedy(inst, exact_oracle(cost));
    auto trunc = enumerate_truncations(inst, t, whole_set_value(cost));

    REQUIRE(trunc.size() == 5);
    // G_k = sum_{j<=k} disc_j * 1 + disc_k+1 * min(4-k, 2), discounts 1, .75,
    // .65625, .615234375, .59600830078125.
    CHECK(trunc[0].upper_bound == Catch::Approx(2.0).epsilon(1e-12));
    CHECK(trunc[1].upper_bound == Catch::Approx(2.5).epsilon(1e-12));
    CHECK(trunc[2].upper_bound == Catch::Approx(3.0625).epsilon(1e-12));
    CHECK(trunc[3].upper_bound == Catch::Approx(3.021484375).epsilon(1e-12));
    CHECK(trunc[4].upper_bound == Catch::Approx(3.021484375).epsilon(1e-12));

    CHECK(trunc[0].k == 0);
    CHECK(trunc[0].tail_bound == 2.0);
    REQUIRE(trunc[0].sequence.batches.size() == 1);
    CHECK(trunc[0].sequence.batches[0] == full_set(4));
    CHECK(trunc[2].sequence.batches ==
          std::vector<TestSet>{{1}, {2}, {3, 4}});
    CHECK(trunc[4].tail_bound == 0.0);
    REQUIRE(trunc[4].sequence.batches.size() == 4);

    for (const auto& tr : trunc) {
        CHECK(!validate_partition(inst, tr.sequence.batches).has_value());
        // the certified bound dominates both the discounted bound sum and the
        // true expected cost of the spliced sequence
        CHECK(expected_cost_upper(inst, tr.sequence) <= tr.upper_bound * (1.0 + 1e-12));
        CHECK(expected_cost(inst, tr.sequence.batches, cost) <= tr.upper_bound * (1.0 + 1e-12));
    }
}

TEST_CASE("modified greedy escapes the trap with one capped batch") {
    Instance inst = bad_instance(4);
    auto cost = capped_card_cost(2.0);
    auto res = modified_greedy(inst, exact_oracle(cost), whole_set_value(cost));

    CHECK(res.chosen.k == 0);
    CHECK(res.chosen.upper_bound == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE(res.chosen.sequence.batches.size() == 1);
    CHECK(res.chosen.sequence.batches[0] == full_set(4));
    CHECK(res.all.size() == 5);
    CHECK(expected_cost(inst, res.chosen.sequence.batches, cost) ==
          Catch::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("upper-bound ties resolve to the shortest prefix") {
    Instance inst = Instance::from_pass_probs({0.5});
    auto unit = [](const TestSet&) { return 1.0; };
    auto res = modified_greedy(inst, exact_oracle(unit), whole_set_value(unit));
    REQUIRE(res.all.size() == 2);
    CHECK(res.all[0].upper_bound == res.all[1].upper_bound);
    CHECK(res.chosen.k == 0);
}

TEST_CASE("additive costs: greedy with an exact ratio oracle is optimal") {
    std::mt19937_64 rng(20260819);
    for (int rep = 0; rep < 30; ++rep) {
        int n = 2 + static_cast<int>(rng() % 6);
        Instance inst = random_instance(rng, n);
        std::uniform_real_distribution<double> W(0.1, 2.0);
        std::vector<double> w(static_cast<std::size_t>(n) + 1, 0.0);
        for (int i = 1; i <= n; ++i) w[static_cast<std::size_t>(i)] = W(rng);
        auto add = [&w](const TestSet& s) {
            double c = 0.0;
            for (int id : s) c += w[static_cast<std::size_t>(id)];
            return c;
        };

        double opt = exact_sst(inst, add).opt_cost;
        GreedyTrace t = plain_greedy(inst, exact_oracle(add));
        CHECK(expected_cost(inst, t.batches, add) == Catch::Approx(opt).epsilon(1e-11));

        auto res = modified_greedy(inst, exact_oracle(add), whole_set_value(add));
        CHECK(expected_cost(inst, res.chosen.sequence.batches, add) ==
              Catch::Approx(opt).epsilon(1e-11));
    }
}

TEST_CASE("with exact oracles the chosen bound is within 5x of optimal") {
    std::mt19937_64 rng(424242);
    for (int rep = 0; rep < 40; ++rep) {
        int n = 2 + static_cast<int>(rng() % 5);
        Instance inst = random_instance(rng, n);
        SetupCost cost = random_setup_cost(rng, n);

        double opt = exact_sst(inst, cost).opt_cost;
        auto res = modified_greedy(inst, exact_oracle(cost), whole_set_value(cost));

        CHECK(res.chosen.upper_bound <= 5.0 * opt * (1.0 + 1e-12));
        CHECK(res.chosen.upper_bound >= opt * (1.0 - 1e-12));
        CHECK(expected_cost(inst, res.chosen.sequence.batches, cost) <=
              res.chosen.upper_bound * (1.0 + 1e-12));
        for (const auto& tr : res.all) {
            CHECK(expected_cost(inst, tr.sequence.batches, cost) <=
                  tr.upper_bound * (1.0 + 1e-12));
            CHECK(tr.upper_bound >= res.chosen.upper_bound * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("size-capped families flow through greedy, truncation and validation") {
    std::mt19937_64 rng(5150);
    for (int rep = 0; rep < 15; ++rep) {
        int n = 4 + static_cast<int>(rng() % 3);
        Instance base = random_instance(rng, n);
        std::vector<double> p(static_cast<std::size_t>(n));
        for (int i = 1; i <= n; ++i) p[static_cast<std::size_t>(i - 1)] = base.p(i);
        Instance inst = Instance::from_pass_probs(p, BatchFamily::max_size(2));
        SetupCost cost = random_setup_cost(rng, n);

        // pair-chunked cover: feasible under the cap, costs charged honestly
        ValueOracle chunks = [&cost](const Instance&, const TestSet& U) {
            ValueResult v;
            for (std::size_t i = 0; i < U.size(); i += 2) {
                TestSet b(U.begin() + static_cast<std::ptrdiff_t>(i),
                          U.begin() + static_cast<std::ptrdiff_t>(std::min(i + 2, U.size())));
                v.cover.push_back(b);
                v.cover_costs.push_back(cost(b));
                v.bound += cost(b);
            }
            return v;
        };
        auto res = modified_greedy(inst, exact_oracle(cost), chunks);

        CHECK(!validate_partition(inst, res.chosen.sequence.batches).has_value());
        for (const TestSet& b : res.chosen.sequence.batches) CHECK(b.size() <= 2);
        double opt = exact_sst(inst, cost).opt_cost;
        double got = expected_cost(inst, res.chosen.sequence.batches, cost);
        CHECK(got >= opt * (1.0 - 1e-12));
        CHECK(got <= res.chosen.upper_bound * (1.0 + 1e-12));
    }
}

TEST_CASE("oracle misbehavior is caught as a contract violation") {
    Instance inst = Instance::from_pass_probs({0.5, 0.6, 0.7});
    auto unit = [](const TestSet&) { return 1.0; };

    RatioOracle empty_batch = [](const Instance&, const TestSet&) { return RatioBatch{{}, 1.0}; };
    CHECK_THROWS_AS(plain_greedy(inst, empty_batch), ContractViolation);

    RatioOracle stuck = [](const Instance&, const TestSet&) { return RatioBatch{{1}, 1.0}; };
    CHECK_THROWS_AS(plain_greedy(inst, stuck), ContractViolation);

    RatioOracle nan_bound = [](const Instance&, const TestSet& U) {
        return RatioBatch{U, std::nan("")};
    };
    CHECK_THROWS_AS(plain_greedy(inst, nan_bound), ContractViolation);

    RatioOracle dup_ids = [](const Instance&, const TestSet&) {
        return RatioBatch{{1, 1}, 1.0};
    };
    CHECK_THROWS_AS(plain_greedy(inst, dup_ids), ContractViolation);

    Instance capped = Instance::from_pass_probs({0.5, 0.6, 0.7}, BatchFamily::max_size(1));
    RatioOracle too_big = [](const Instance&, const TestSet& U) { return RatioBatch{U, 1.0}; };
    CHECK_THROWS_AS(plain_greedy(capped, too_big), ContractViolation);

    auto ratio_ok = exact_oracle(unit);

    ValueOracle neg = [](const Instance&, const TestSet& U) {
        return ValueResult{-1.0, {U}, {1.0}};
    };
    CHECK_THROWS_AS(modified_greedy(inst, ratio_ok, neg), ContractViolation);

    ValueOracle mismatched = [](const Instance&, const TestSet& U) {
        return ValueResult{1.0, {U}, {}};
    };
    CHECK_THROWS_AS(modified_greedy(inst, ratio_ok, mismatched), ContractViolation);

    ValueOracle overlapping = [](const Instance&, const TestSet& U) {
        return ValueResult{2.0, {U, {U.front()}}, {1.0, 1.0}};
    };
    CHECK_THROWS_AS(modified_greedy(inst, ratio_ok, overlapping), ContractViolation);

    ValueOracle short_cover = [](const Instance&, const TestSet& U) {
        return ValueResult{1.0, {{U.front()}}, {1.0}};
    };
    CHECK_THROWS_AS(modified_greedy(inst, ratio_ok, short_cover), ContractViolation);

    ValueOracle over_bound = [](const Instance&, const TestSet& U) {
        return ValueResult{1.0, {U}, {5.0}};
    };
    CHECK_THROWS_AS(modified_greedy(inst, ratio_ok, over_bound), ContractViolation);

    ValueOracle cap_breaker = [](const Instance&, const TestSet& U) {
        return ValueResult{1.0, {U}, {1.0}};
    };
    RatioOracle singles = [](const Instance&, const TestSet& U) {
        return RatioBatch{{U.front()}, 1.0};
    };
    CHECK_THROWS_AS(modified_greedy(capped, singles, cap_breaker), ContractViolation);
}

TEST_CASE("gap report quantifies the trap at n = 9") {
    Instance inst = bad_instance(9);
    auto cost = capped_card_cost(3.0);
    GapReport rep = gap_report(inst, exact_oracle(cost), whole_set_value(cost), cost);

    CHECK(rep.plain_cost >= 4.5);
    CHECK(rep.modified_cost == Catch::Approx(3.0).epsilon(1e-12));
    CHECK(rep.modified_bound == Catch::Approx(3.0).epsilon(1e-12));
    REQUIRE(rep.exact_opt.has_value());
    CHECK(*rep.exact_opt <= 3.0 * (1.0 + 1e-12));
    CHECK(rep.modified_cost <= *rep.exact_opt * 5.0);
    REQUIRE(rep.ratios.size() == 9);
    CHECK(rep.ratios.front() == Catch::Approx(4.0).epsilon(1e-13));
    CHECK(rep.ratios.back() == Catch::Approx(std::ldexp(1.0, 10)).epsilon(1e-12));

    GapReport noex = gap_report(inst, exact_oracle(cost), whole_set_value(cost), cost, false);
    CHECK(!noex.exact_opt.has_value());
}

TEST_CASE("gap report skips the exact leg past the subset-DP cap") {
    int n = 21;
    std::vector<double> p(static_cast<std::size_t>(n), 0.5);
    Instance inst = Instance::from_pass_probs(p);
    auto add = [](const TestSet& s) { return static_cast<double>(s.size()); };
    // additive: cheapest singleton ratio first, no subset enumeration needed
    RatioOracle singleton = [](const Instance& in, const TestSet& U) {
        int best = U.front();
        for (int id : U)
            if (in.q(id) > in.q(best)) best = id;
        return RatioBatch{{best}, 1.0};
    };
    GapReport rep = gap_report(inst, singleton, whole_set_value(add), add);
    CHECK(!rep.exact_opt.has_value());
    CHECK(rep.plain_cost == Catch::Approx(rep.modified_cost).epsilon(1e-12));
}
