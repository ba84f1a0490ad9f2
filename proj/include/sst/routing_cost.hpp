#pragma once

// Routing costs: vertex 0 is the depot, test i sits at vertex i, and c(B) is
// the length of the shortest closed tour from the depot through B. Exact
// tours come from a Held-Karp table built once at construction; beyond 14
// tests the model degrades to doubled-spanning-tree values and a
// nearest-neighbor quota heuristic, reported as unaudited.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sst/core.hpp"
#include "sst/cost_model.hpp"
#include "sst/exact.hpp"
#include "sst/quota.hpp"

namespace sst {

class RoutingCost {
  public:
    // dist is (n+1) x (n+1) over depot and tests, and must be a metric.
    explicit RoutingCost(std::vector<std::vector<double>> dist) : d_(std::move(dist)) {
        const std::size_t m = d_.size();
        if (m < 2) throw InputError("routing: need the depot plus at least one test");
        double scale = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (d_[i].size() != m) throw InputError("routing: distance matrix must be square");
            for (std::size_t j = 0; j < m; ++j) {
                double v = d_[i][j];
                if (!std::isfinite(v) || v < 0.0)
                    throw InputError("routing: distances must be finite and nonnegative");
                scale = std::max(scale, v);
            }
            if (d_[i][i] != 0.0) throw InputError("routing: diagonal must be zero");
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j)
                if (d_[i][j] != d_[j][i]) throw InputError("routing: distances must be symmetric");
        const double tol = 1e-9 * (1.0 + scale);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                for (std::size_t k = 0; k < m; ++k)
                    if (d_[i][k] > d_[i][j] + d_[j][k] + tol)
                        throw InputError("routing: triangle inequality fails at (" +
                                         std::to_string(i) + "," + std::to_string(j) + "," +
                                         std::to_string(k) + ")");
    }

    int tests() const { return static_cast<int>(d_.size()) - 1; }
    double dist(int a, int b) const {
        return d_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    }

  private:
    std::vector<std::vector<double>> d_;
};

class RoutingCostModel final : public CostModel {
  public:
    static constexpr int kExactTour = 14;

    explicit RoutingCostModel(RoutingCost metric, double eps = 0.1)
        : metric_(std::move(metric)), eps_(eps) {
        if (!(eps_ > 0.0) || eps_ > 1.0) throw InputError("routing: eps must lie in (0, 1]");
        const int n = metric_.tests();
        if (n <= kExactTour) build_tours();
    }

    std::string name() const override { return "routing"; }
    int n() const override { return metric_.tests(); }
    double gamma() const override { return n() <= kExactTour ? 1.0 : 2.0; }
    double rho() const override { return 1.0 + eps_; }
    bool audited() const override { return n() <= kExactTour; }

    double exact_cost(const TestSet& batch) const override {
        TestSet b = normalized(batch);
        require_ids(b);
        if (b.empty()) return 0.0;
        if (n() > kExactTour)
            throw CapacityError("routing: exact tours capped at " + std::to_string(kExactTour) +
                                " tests");
        return tour_[mask_of(b, n())];
    }

    ValueResult value(const Instance& inst, const TestSet& s) const override {
        (void)inst;
        TestSet b = normalized(s);
        require_ids(b);
        ValueResult out;
        out.bound = 0.0;
        if (b.empty()) return out;
        double c = n() <= kExactTour ? tour_[mask_of(b, n())] : 2.0 * mst_cost(b);
        out.bound = c;
        out.cover.push_back(std::move(b));
        out.cover_costs.push_back(c);
        return out;
    }

    ValueResult exact_value(const Instance& inst, const TestSet& s) const override {
        if (n() > kExactTour)
            throw CapacityError("routing: exact tours capped at " + std::to_string(kExactTour) +
                                " tests");
        return value(inst, s);
    }

    RatioBatch min_ratio(const Instance& inst, const TestSet& residual) const override {
        require_same_n(inst);
        TestSet u = normalized(residual);
        if (u.empty()) throw InputError("routing: residual set is empty");
        require_ids(u);

        BicriteriaSolver solver;
        solver.alpha = 1.0;
        solver.beta = 1.0;
        if (n() <= kExactTour) {
            // Exact quota solve by subset scan: reward sums and global tour
            // masks extend incrementally from each subset with its lowest
            // position dropped.
            const int m = static_cast<int>(u.size());
            const std::uint32_t top = 1u << m;
            auto rsum = std::make_shared<std::vector<double>>();
            auto gmask = std::make_shared<std::vector<std::uint32_t>>();
            solver.solve = [this, u, m, top, rsum, gmask, &inst](
                               const TestSet&, const std::vector<double>& reward,
                               double quota) -> std::optional<QpSolution> {
                if (rsum->empty()) {
                    rsum->assign(top, 0.0);
                    gmask->assign(top, 0);
                    for (std::uint32_t s = 1; s < top; ++s) {
                        std::uint32_t low = s & (~s + 1u);
                        int i = std::countr_zero(low);
                        int id = u[static_cast<std::size_t>(i)];
                        (*rsum)[s] = (*rsum)[s ^ low] + reward[static_cast<std::size_t>(id)];
                        (*gmask)[s] = (*gmask)[s ^ low] | (1u << (id - 1));
                    }
                }
                const double need = quota * (1.0 - 1e-12);
                const bool capped = inst.family().kind == BatchFamily::Kind::MaxSize;
                double best = std::numeric_limits<double>::infinity();
                std::uint32_t best_s = 0;
                for (std::uint32_t s = 1; s < top; ++s) {
                    if ((*rsum)[s] < need) continue;
                    if (capped && std::popcount(s) > inst.family().k) continue;
                    double c = tour_[(*gmask)[s]];
                    if (c < best) {
                        best = c;
                        best_s = s;
                    }
                }
                if (best_s == 0) return std::nullopt;
                QpSolution out;
                for (int i = 0; i < m; ++i)
                    if ((best_s >> i) & 1u) out.set.push_back(u[static_cast<std::size_t>(i)]);
                out.cost = best;
                out.reward = (*rsum)[best_s];
                return out;
            };
        } else {
            // Nearest-neighbor visiting order from the depot; each quota gets
            // the shortest reward-sufficient prefix, costed as the closed tour
            // in that order. Upper bounds only; audited() is false here.
            auto order = std::make_shared<std::vector<int>>(nn_order(u));
            solver.solve = [this, order](const TestSet&, const std::vector<double>& reward,
                                         double quota) -> std::optional<QpSolution> {
                double got = 0.0, len = 0.0;
                int prev = 0;
                QpSolution out;
                for (int id : *order) {
                    got += reward[static_cast<std::size_t>(id)];
                    len += metric_.dist(prev, id);
                    prev = id;
                    out.set.push_back(id);
                    if (got >= quota) break;
                }
                if (got < quota) return std::nullopt;
                out.cost = len + metric_.dist(prev, 0);
                out.reward = got;
                std::sort(out.set.begin(), out.set.end());
                return out;
            };
        }
        auto r = ratio_from_quota(inst, u, solver, eps_);
        return {std::move(r.batch), r.cost_bound};
    }

    const RoutingCost& metric() const { return metric_; }

  private:
    void build_tours() {
        const int n = metric_.tests();
        const std::uint32_t top = 1u << n;
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<double> dp(static_cast<std::size_t>(top) * static_cast<std::size_t>(n), inf);
        auto at = [n](std::uint32_t mask, int last) {
            return static_cast<std::size_t>(mask) * static_cast<std::size_t>(n) +
                   static_cast<std::size_t>(last);
        };
        for (int i = 0; i < n; ++i) dp[at(1u << i, i)] = metric_.dist(0, i + 1);
        for (std::uint32_t mask = 1; mask < top; ++mask)
            for (int last = 0; last < n; ++last) {
                if (!((mask >> last) & 1u)) continue;
                double cur = dp[at(mask, last)];
                if (!(cur < inf)) continue;
                for (int nxt = 0; nxt < n; ++nxt) {
                    if ((mask >> nxt) & 1u) continue;
                    double& slot = dp[at(mask | (1u << nxt), nxt)];
                    double cand = cur + metric_.dist(last + 1, nxt + 1);
                    if (cand < slot) slot = cand;
                }
            }
        tour_.assign(top, 0.0);
        for (std::uint32_t mask = 1; mask < top; ++mask) {
            double best = inf;
            for (int last = 0; last < n; ++last)
                if ((mask >> last) & 1u)
                    best = std::min(best, dp[at(mask, last)] + metric_.dist(last + 1, 0));
            tour_[mask] = best;
        }
    }

    double mst_cost(const TestSet& b) const {
        std::vector<int> verts{0};
        for (int id : b) verts.push_back(id);
        const std::size_t m = verts.size();
        std::vector<char> in(m, 0);
        std::vector<double> key(m, std::numeric_limits<double>::infinity());
        key[0] = 0.0;
        double total = 0.0;
        for (std::size_t step = 0; step < m; ++step) {
            std::size_t pick = m;
            for (std::size_t i = 0; i < m; ++i)
                if (!in[i] && (pick == m || key[i] < key[pick])) pick = i;
            in[pick] = 1;
            total += key[pick];
            for (std::size_t i = 0; i < m; ++i)
                if (!in[i]) key[i] = std::min(key[i], metric_.dist(verts[pick], verts[i]));
        }
        return total;
    }

    std::vector<int> nn_order(const TestSet& u) const {
        std::vector<int> order;
        std::vector<char> used(u.size(), 0);
        int cur = 0;
        for (std::size_t step = 0; step < u.size(); ++step) {
            std::size_t pick = u.size();
            for (std::size_t i = 0; i < u.size(); ++i) {
                if (used[i]) continue;
                if (pick == u.size() ||
                    metric_.dist(cur, u[i]) < metric_.dist(cur, u[static_cast<std::size_t>(pick)]))
                    pick = i;
            }
            used[pick] = 1;
            order.push_back(u[pick]);
            cur = u[pick];
        }
        return order;
    }

    RoutingCost metric_;
    double eps_;
    std::vector<double> tour_;
};

}  // namespace sst
