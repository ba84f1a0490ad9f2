#pragma once

// Machine-activation costs: each machine j carries a test set T_j and an
// activation cost, and c(B) is the cheapest activation total whose machines
// cover B. exact_cost solves that cover outright; value() uses the classic
// greedy cover; min_ratio is exact because any batch's ratio is at least the
// best single-machine quotient by the mediant inequality.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sst/core.hpp"
#include "sst/cost_model.hpp"

namespace sst {

struct Machine {
    double cost = 0.0;
    TestSet tests;
};

class MachineCostModel final : public CostModel {
  public:
    static constexpr int kExactCover = 20;

    MachineCostModel(int n, std::vector<Machine> machines) : n_(n), ms_(std::move(machines)) {
        if (n_ < 1) throw InputError("machines: need at least one test");
        if (ms_.empty()) throw InputError("machines: need at least one machine");
        std::vector<char> covered(static_cast<std::size_t>(n_) + 1, 0);
        for (std::size_t j = 0; j < ms_.size(); ++j) {
            auto& m = ms_[j];
            if (!std::isfinite(m.cost) || m.cost < 0.0)
                throw InputError("machines: activation costs must be finite and nonnegative");
            m.tests = normalized(m.tests);
            if (m.tests.empty())
                throw InputError("machines: machine " + std::to_string(j) + " covers no tests");
            if (m.tests.front() < 1 || m.tests.back() > n_)
                throw InputError("machines: machine " + std::to_string(j) +
                                 " references a test outside 1.." + std::to_string(n_));
            for (int id : m.tests) covered[static_cast<std::size_t>(id)] = 1;
        }
        for (int id = 1; id <= n_; ++id)
            if (!covered[static_cast<std::size_t>(id)])
                throw InputError("machines: test " + std::to_string(id) + " is covered by no machine");
    }

    std::string name() const override { return "machines"; }
    int n() const override { return n_; }

    // Greedy cover is within the harmonic number of the optimum, and the
    // optimum IS the batch cost here, so that is the honest value factor.
    double gamma() const override {
        double h = 0.0;
        for (int i = 1; i <= n_; ++i) h += 1.0 / i;
        return h;
    }

    double exact_cost(const TestSet& batch) const override {
        TestSet b = normalized(batch);
        require_ids(b);
        if (b.empty()) return 0.0;
        const int m = static_cast<int>(b.size());
        if (m > kExactCover)
            throw CapacityError("machines: exact cover capped at " + std::to_string(kExactCover) +
                                " tests, got " + std::to_string(m));

        std::vector<std::uint32_t> bits(ms_.size(), 0);
        for (std::size_t j = 0; j < ms_.size(); ++j)
            for (int id : ms_[j].tests) {
                auto it = std::lower_bound(b.begin(), b.end(), id);
                if (it != b.end() && *it == id)
                    bits[j] |= 1u << (it - b.begin());
            }

        const std::uint32_t full = (1u << m) - 1u;
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> f(static_cast<std::size_t>(full) + 1, inf);
        f[0] = 0.0;
        for (std::uint32_t mask = 0; mask <= full; ++mask) {
            if (!(f[mask] < inf)) continue;
            if (mask == full) break;
            for (std::size_t j = 0; j < ms_.size(); ++j) {
                if (bits[j] == 0) continue;
                std::uint32_t nm = mask | bits[j];
                if (nm == mask) continue;
                double c = f[mask] + ms_[j].cost;
                if (c < f[nm]) f[nm] = c;
            }
        }
        return f[full];
    }

    // Greedy cover; one batch per activated machine, restricted to the tests
    // that machine newly covers, so the batches partition s.
    ValueResult value(const Instance& inst, const TestSet& s) const override {
        (void)inst;
        TestSet uncov = normalized(s);
        require_ids(uncov);
        ValueResult out;
        out.bound = 0.0;
        while (!uncov.empty()) {
            std::size_t best_j = ms_.size();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < ms_.size(); ++j) {
                TestSet hit = set_intersect(ms_[j].tests, uncov);
                if (hit.empty()) continue;
                double v = ms_[j].cost / static_cast<double>(hit.size());
                if (v < best) {
                    best = v;
                    best_j = j;
                }
            }
            if (best_j == ms_.size())
                throw InputError("machines: residual tests covered by no machine");
            TestSet batch = set_intersect(ms_[best_j].tests, uncov);
            uncov = set_minus(uncov, batch);
            out.bound += ms_[best_j].cost;
            out.cover_costs.push_back(ms_[best_j].cost);
            out.cover.push_back(std::move(batch));
        }
        return out;
    }

    ValueResult exact_value(const Instance& inst, const TestSet& s) const override {
        (void)inst;
        TestSet b = normalized(s);
        ValueResult out;
        out.bound = 0.0;
        if (b.empty()) return out;
        double c = exact_cost(b);
        out.bound = c;
        out.cover.push_back(std::move(b));
        out.cover_costs.push_back(c);
        return out;
    }

    RatioBatch min_ratio(const Instance& inst, const TestSet& residual) const override {
        require_same_n(inst);
        TestSet u = normalized(residual);
        if (u.empty()) throw InputError("machines: residual set is empty");
        require_ids(u);

        std::size_t best_j = ms_.size();
        double best = std::numeric_limits<double>::infinity();
        TestSet best_set;
        for (std::size_t j = 0; j < ms_.size(); ++j) {
            TestSet s = set_intersect(ms_[j].tests, u);
            if (s.empty() || !inst.family().allows(s)) continue;
            double v = ms_[j].cost / inst.fail_prob(s);
            if (v < best) {
                best = v;
                best_j = j;
                best_set = std::move(s);
            }
        }
        if (best_j == ms_.size())
            throw InputError("machines: no machine intersects the residual");
        return {std::move(best_set), ms_[best_j].cost};
    }

    const std::vector<Machine>& machines() const { return ms_; }

  private:
    int n_;
    std::vector<Machine> ms_;
};

}  // namespace sst
