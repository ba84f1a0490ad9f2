#pragma once

// Node-weighted rooted-tree costs: tests sit on leaves and a batch pays the
// total weight of the union of root paths to its leaves. The capacitated
// variant additionally caps batches at k tests.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sst/cost_model.hpp"
#include "sst/core.hpp"
#include "sst/quota.hpp"

namespace sst {

class TreeCost {
  public:
    // parent[v] = -1 marks the root; leaf_of_test[i] is the node of test i+1.
    TreeCost(std::vector<double> weights, std::vector<int> parent, std::vector<int> leaf_of_test)
        : w_(std::move(weights)), parent_(std::move(parent)), leaf_(std::move(leaf_of_test)) {
        const int v = static_cast<int>(w_.size());
        if (v < 1) throw InputError("tree: need at least one node");
        if (static_cast<int>(parent_.size()) != v)
            throw InputError("tree: parent table must cover every node");
        for (double w : w_)
            if (!std::isfinite(w) || w < 0.0)
                throw InputError("tree: node weights must be finite and nonnegative");

        int root = -1;
        for (int i = 0; i < v; ++i) {
            int p = parent_[static_cast<std::size_t>(i)];
            if (p == -1) {
                if (root != -1) throw InputError("tree: more than one root");
                root = i;
            } else if (p < 0 || p >= v || p == i) {
                throw InputError("tree: parent of node " + std::to_string(i) + " out of range");
            }
        }
        if (root == -1) throw InputError("tree: no root (exactly one parent must be -1)");
        root_ = root;

        children_.assign(static_cast<std::size_t>(v), {});
        for (int i = 0; i < v; ++i)
            if (i != root_) children_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(i)])].push_back(i);

        // Preorder walk; also proves acyclicity by counting reached nodes.
        pre_.reserve(static_cast<std::size_t>(v));
        pre_index_.assign(static_cast<std::size_t>(v), -1);
        std::vector<int> stack{root_};
        while (!stack.empty()) {
            int node = stack.back();
            stack.pop_back();
            pre_index_[static_cast<std::size_t>(node)] = static_cast<int>(pre_.size());
            pre_.push_back(node);
            const auto& ch = children_[static_cast<std::size_t>(node)];
            for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
        }
        if (static_cast<int>(pre_.size()) != v)
            throw InputError("tree: parent table contains a cycle");

        span_.assign(static_cast<std::size_t>(v), 1);
        for (auto it = pre_.rbegin(); it != pre_.rend(); ++it)
            if (*it != root_) span_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(*it)])] +=
                span_[static_cast<std::size_t>(*it)];

        if (leaf_.empty()) throw InputError("tree: need at least one test");
        test_at_.assign(static_cast<std::size_t>(v), 0);
        for (std::size_t i = 0; i < leaf_.size(); ++i) {
            int node = leaf_[i];
            if (node < 0 || node >= v)
                throw InputError("tree: test " + std::to_string(i + 1) + " maps to missing node");
            if (!children_[static_cast<std::size_t>(node)].empty())
                throw InputError("tree: test " + std::to_string(i + 1) + " maps to an internal node");
            if (test_at_[static_cast<std::size_t>(node)] != 0)
                throw InputError("tree: two tests map to node " + std::to_string(node));
            test_at_[static_cast<std::size_t>(node)] = static_cast<int>(i) + 1;
        }

        total_ = 0.0;
        for (double w : w_) total_ += w;
    }

    int vertices() const { return static_cast<int>(w_.size()); }
    int tests() const { return static_cast<int>(leaf_.size()); }
    int root() const { return root_; }
    double weight(int v) const { return w_[static_cast<std::size_t>(v)]; }
    int parent(int v) const { return parent_[static_cast<std::size_t>(v)]; }
    int leaf_of(int test) const { return leaf_[static_cast<std::size_t>(test - 1)]; }
    int test_at(int v) const { return test_at_[static_cast<std::size_t>(v)]; }
    const std::vector<int>& preorder() const { return pre_; }
    int pre_index(int v) const { return pre_index_[static_cast<std::size_t>(v)]; }
    int span(int v) const { return span_[static_cast<std::size_t>(v)]; }
    double total_weight() const { return total_; }

    double path_cost(int test) const {
        double s = 0.0;
        for (int v = leaf_of(test); v != -1; v = parent_[static_cast<std::size_t>(v)])
            s += w_[static_cast<std::size_t>(v)];
        return s;
    }

    // Weight of the union of root paths of the given tests.
    double subtree_cost(const TestSet& tests) const {
        std::vector<char> mark(w_.size(), 0);
        double s = 0.0;
        for (int t : tests) {
            if (t < 1 || t > this->tests())
                throw InputError("tree: test id outside 1.." + std::to_string(this->tests()));
            for (int v = leaf_of(t); v != -1; v = parent_[static_cast<std::size_t>(v)]) {
                if (mark[static_cast<std::size_t>(v)]) break;
                mark[static_cast<std::size_t>(v)] = 1;
                s += w_[static_cast<std::size_t>(v)];
            }
        }
        return s;
    }

  private:
    std::vector<double> w_;
    std::vector<int> parent_;
    std::vector<int> leaf_;
    std::vector<std::vector<int>> children_;
    std::vector<int> pre_;
    std::vector<int> pre_index_;
    std::vector<int> span_;
    std::vector<int> test_at_;
    int root_ = 0;
    double total_ = 0.0;
};

namespace detail {

// Maximum true reward over ancestor-closed node selections whose rounded
// weights fit the budget, with an optional cap on selected reward leaves.
// Skipping a node in preorder skips its whole subtree, which is exactly the
// ancestor-closure constraint.
struct TreeDpResult {
    double reward = 0.0;
    TestSet tests;
};

inline TreeDpResult tree_budget_dp(const TreeCost& tree, const std::vector<double>& node_reward,
                                   const std::vector<char>& is_reward_leaf, double budget,
                                   double eps_round, int cap) {
    const int v = tree.vertices();
    int units_budget;
    std::vector<long long> wu(static_cast<std::size_t>(v));
    if (budget <= 0.0) {
        units_budget = 0;
        for (int i = 0; i < v; ++i) wu[static_cast<std::size_t>(i)] = tree.weight(i) > 0.0 ? 1 : 0;
    } else {
        units_budget = static_cast<int>(std::floor(v / eps_round + 1e-9));
        const double mu = eps_round * budget / v;
        for (int i = 0; i < v; ++i) {
            double u = std::floor(tree.weight(i) / mu);
            wu[static_cast<std::size_t>(i)] =
                static_cast<long long>(std::min(u, static_cast<double>(units_budget) + 1.0));
        }
    }

    const bool capped = cap > 0;
    const int hs = capped ? cap + 1 : 1;
    const std::size_t stride = static_cast<std::size_t>(units_budget + 1) * static_cast<std::size_t>(hs);
    std::vector<double> f((static_cast<std::size_t>(v) + 1) * stride, 0.0);
    std::vector<char> take(static_cast<std::size_t>(v) * stride, 0);
    const auto& pre = tree.preorder();

    auto at = [&](int i, int t, int h) -> std::size_t {
        return static_cast<std::size_t>(i) * stride +
               static_cast<std::size_t>(t) * static_cast<std::size_t>(hs) + static_cast<std::size_t>(h);
    };

    for (int i = v - 1; i >= 0; --i) {
        int node = pre[static_cast<std::size_t>(i)];
        int skip_to = i + tree.span(node);
        long long w = wu[static_cast<std::size_t>(node)];
        bool consumes = capped && is_reward_leaf[static_cast<std::size_t>(node)];
        for (int t = 0; t <= units_budget; ++t) {
            for (int h = 0; h < hs; ++h) {
                double best = f[at(skip_to, t, h)];
                if (w <= t && (!consumes || h >= 1)) {
                    double got = node_reward[static_cast<std::size_t>(node)] +
                                 f[at(i + 1, t - static_cast<int>(w), consumes ? h - 1 : h)];
                    if (got > best) {
                        best = got;
                        take[at(i, t, h)] = 1;
                    }
                }
                f[at(i, t, h)] = best;
            }
        }
    }

    TreeDpResult out;
    out.reward = f[at(0, units_budget, hs - 1)];
    int i = 0, t = units_budget, h = hs - 1;
    while (i < v) {
        int node = pre[static_cast<std::size_t>(i)];
        if (take[at(i, t, h)]) {
            if (is_reward_leaf[static_cast<std::size_t>(node)]) {
                out.tests.push_back(tree.test_at(node));
                if (capped) --h;
            }
            t -= static_cast<int>(wu[static_cast<std::size_t>(node)]);
            ++i;
        } else {
            i += tree.span(node);
        }
    }
    std::sort(out.tests.begin(), out.tests.end());
    return out;
}

// Geometric budget candidates covering every positive optimum within a
// (1+eps) factor, plus an explicit zero rung when free paths exist.
inline std::vector<double> budget_candidates(const TreeCost& tree, const TestSet& u, double w_full,
                                             double eps_budget) {
    double lo_pos = std::numeric_limits<double>::infinity();
    bool has_free = false;
    for (int t : u) {
        double pc = tree.path_cost(t);
        if (pc <= 0.0)
            has_free = true;
        else
            lo_pos = std::min(lo_pos, pc);
    }
    std::vector<double> budgets;
    if (has_free) budgets.push_back(0.0);
    if (lo_pos < w_full) {
        double levels = std::ceil(std::log(w_full / lo_pos) / std::log1p(eps_budget));
        if (levels > 200000.0) throw CapacityError("tree: budget grid too fine for weight spread");
        for (int i = 0; i < static_cast<int>(levels); ++i)
            budgets.push_back(lo_pos * std::pow(1.0 + eps_budget, i));
    } else if (lo_pos < std::numeric_limits<double>::infinity()) {
        budgets.push_back(lo_pos);
    }
    if (budgets.empty() || budgets.back() < w_full) budgets.push_back(w_full);
    return budgets;
}

}  // namespace detail

// Root-path-union costs on a node-weighted tree. value() is exact (gamma 1);
// min_ratio() runs the quota bridge over a geometric budget grid with a
// rounded-weight subtree knapsack, so three (1+eps)^(1/3) factors compose to
// the declared 1+eps.
class TreeCostModel final : public CostModel {
  public:
    explicit TreeCostModel(TreeCost tree, double eps = 0.1) : tree_(std::move(tree)), eps_(eps) {
        if (!(eps_ > 0.0) || eps_ > 1.0) throw InputError("tree: eps must lie in (0, 1]");
    }

    std::string name() const override { return "tree"; }
    int n() const override { return tree_.tests(); }
    double rho() const override { return 1.0 + eps_; }

    double exact_cost(const TestSet& batch) const override {
        TestSet b = normalized(batch);
        require_ids(b);
        return tree_.subtree_cost(b);
    }

    RatioBatch min_ratio(const Instance& inst, const TestSet& residual) const override {
        require_same_n(inst);
        TestSet u = normalized(residual);
        if (u.empty()) throw InputError("tree: residual set is empty");
        require_ids(u);

        double w_full = tree_.subtree_cost(u);
        if (w_full <= 0.0) return {u, 0.0};

        const double eps_part = std::cbrt(1.0 + eps_) - 1.0;
        auto budgets = detail::budget_candidates(tree_, u, w_full, eps_part);

        std::vector<double> node_reward(static_cast<std::size_t>(tree_.vertices()), 0.0);
        std::vector<char> is_leaf(static_cast<std::size_t>(tree_.vertices()), 0);
        auto memo = std::make_shared<std::map<int, detail::TreeDpResult>>();

        BicriteriaSolver solver;
        solver.alpha = (1.0 + eps_part) * (1.0 + eps_part);
        solver.beta = 1.0;
        solver.solve = [this, budgets, &node_reward, &is_leaf, memo, eps_part](
                           const TestSet& uu, const std::vector<double>& reward,
                           double quota) -> std::optional<QpSolution> {
            std::fill(node_reward.begin(), node_reward.end(), 0.0);
            std::fill(is_leaf.begin(), is_leaf.end(), 0);
            for (int t : uu) {
                int v = tree_.leaf_of(t);
                node_reward[static_cast<std::size_t>(v)] = reward[static_cast<std::size_t>(t)];
                is_leaf[static_cast<std::size_t>(v)] = 1;
            }
            auto reward_at = [&](int idx) -> double {
                auto it = memo->find(idx);
                if (it == memo->end())
                    it = memo->emplace(idx, detail::tree_budget_dp(tree_, node_reward, is_leaf,
                                                                   budgets[static_cast<std::size_t>(idx)],
                                                                   eps_part, 0))
                             .first;
                return it->second.reward;
            };
            const double need = quota * (1.0 - 1e-12);
            int lo = 0, hi = static_cast<int>(budgets.size()) - 1;
            if (reward_at(hi) < need) return std::nullopt;
            while (lo < hi) {
                int mid = (lo + hi) / 2;
                if (reward_at(mid) >= need)
                    hi = mid;
                else
                    lo = mid + 1;
            }
            const auto& dp = memo->at(lo);
            QpSolution out;
            out.set = dp.tests;
            out.cost = tree_.subtree_cost(dp.tests);
            out.reward = dp.reward;
            return out;
        };
        auto r = ratio_from_quota(inst, u, solver, eps_part);
        return {std::move(r.batch), r.cost_bound};
    }

    const TreeCost& tree() const { return tree_; }
    double eps() const { return eps_; }

  private:
    TreeCost tree_;
    double eps_;
};

// Same cost structure with batches capped at k tests. value() solves the
// grouping exactly up to 12 tests by subset DP and falls back to preorder
// chunks beyond that, which is why audited() turns off for larger trees.
class CapacitatedTreeCostModel final : public CostModel {
  public:
    static constexpr int kExactGrouping = 12;

    CapacitatedTreeCostModel(TreeCost tree, int k, double eps = 0.1)
        : tree_(std::move(tree)), k_(k), eps_(eps) {
        if (k_ < 1) throw InputError("capacitated tree: k must be at least 1");
        if (!(eps_ > 0.0) || eps_ > 1.0) throw InputError("capacitated tree: eps must lie in (0, 1]");
    }

    std::string name() const override { return "tree_capacitated"; }
    int n() const override { return tree_.tests(); }
    BatchFamily family() const override { return BatchFamily::max_size(k_); }
    double rho() const override { return 1.0 + eps_; }
    bool audited() const override { return n() <= kExactGrouping; }

    double exact_cost(const TestSet& batch) const override {
        TestSet b = normalized(batch);
        require_ids(b);
        return tree_.subtree_cost(b);
    }

    ValueResult value(const Instance& inst, const TestSet& s) const override {
        (void)inst;
        TestSet b = normalized(s);
        require_ids(b);
        ValueResult out;
        out.bound = 0.0;
        if (b.empty()) return out;
        if (static_cast<int>(b.size()) <= kExactGrouping) return grouping(b);

        // Leaves close in preorder share ancestors, so chunking in that order
        // keeps the bound reasonable even without optimality.
        std::sort(b.begin(), b.end(), [&](int a, int c) {
            return tree_.pre_index(tree_.leaf_of(a)) < tree_.pre_index(tree_.leaf_of(c));
        });
        for (std::size_t at = 0; at < b.size(); at += static_cast<std::size_t>(k_)) {
            TestSet chunk(b.begin() + static_cast<std::ptrdiff_t>(at),
                          b.begin() + static_cast<std::ptrdiff_t>(
                                          std::min(at + static_cast<std::size_t>(k_), b.size())));
            std::sort(chunk.begin(), chunk.end());
            double c = tree_.subtree_cost(chunk);
            out.bound += c;
            out.cover.push_back(std::move(chunk));
            out.cover_costs.push_back(c);
        }
        return out;
    }

    ValueResult exact_value(const Instance& inst, const TestSet& s) const override {
        TestSet b = normalized(s);
        if (static_cast<int>(b.size()) > kExactGrouping)
            throw CapacityError("capacitated tree: exact grouping capped at " +
                                std::to_string(kExactGrouping) + " tests");
        return value(inst, b);
    }

    RatioBatch min_ratio(const Instance& inst, const TestSet& residual) const override {
        require_same_n(inst);
        TestSet u = normalized(residual);
        if (u.empty()) throw InputError("capacitated tree: residual set is empty");
        require_ids(u);

        double w_full = tree_.subtree_cost(u);
        if (w_full <= 0.0) {
            TestSet b(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(
                                                 std::min<std::size_t>(u.size(),
                                                                       static_cast<std::size_t>(k_))));
            return {std::move(b), 0.0};
        }

        const double eps_part = std::cbrt(1.0 + eps_) - 1.0;
        auto budgets = detail::budget_candidates(tree_, u, w_full, eps_part);

        std::vector<double> node_reward(static_cast<std::size_t>(tree_.vertices()), 0.0);
        std::vector<char> is_leaf(static_cast<std::size_t>(tree_.vertices()), 0);
        auto memo = std::make_shared<std::map<int, detail::TreeDpResult>>();

        BicriteriaSolver solver;
        solver.alpha = (1.0 + eps_part) * (1.0 + eps_part);
        solver.beta = 1.0;
        solver.solve = [this, budgets, &node_reward, &is_leaf, memo, eps_part](
                           const TestSet& uu, const std::vector<double>& reward,
                           double quota) -> std::optional<QpSolution> {
            std::fill(node_reward.begin(), node_reward.end(), 0.0);
            std::fill(is_leaf.begin(), is_leaf.end(), 0);
            for (int t : uu) {
                int v = tree_.leaf_of(t);
                node_reward[static_cast<std::size_t>(v)] = reward[static_cast<std::size_t>(t)];
                is_leaf[static_cast<std::size_t>(v)] = 1;
            }
            auto reward_at = [&](int idx) -> double {
                auto it = memo->find(idx);
                if (it == memo->end())
                    it = memo->emplace(idx, detail::tree_budget_dp(tree_, node_reward, is_leaf,
                                                                   budgets[static_cast<std::size_t>(idx)],
                                                                   eps_part, k_))
                             .first;
                return it->second.reward;
            };
            const double need = quota * (1.0 - 1e-12);
            int lo = 0, hi = static_cast<int>(budgets.size()) - 1;
            if (reward_at(hi) < need) return std::nullopt;
            while (lo < hi) {
                int mid = (lo + hi) / 2;
                if (reward_at(mid) >= need)
                    hi = mid;
                else
                    lo = mid + 1;
            }
            const auto& dp = memo->at(lo);
            QpSolution out;
            out.set = dp.tests;
            out.cost = tree_.subtree_cost(dp.tests);
            out.reward = dp.reward;
            return out;
        };
        auto r = ratio_from_quota(inst, u, solver, eps_part);
        return {std::move(r.batch), r.cost_bound};
    }

    const TreeCost& tree() const { return tree_; }
    int capacity() const { return k_; }

  private:
    // Exact minimum-cost partition of b into blocks of at most k tests.
    ValueResult grouping(const TestSet& b) const {
        const int m = static_cast<int>(b.size());
        const std::uint32_t full = (m == 32) ? 0xffffffffu : ((1u << m) - 1u);
        const double inf = std::numeric_limits<double>::infinity();

        std::vector<double> block_cost(static_cast<std::size_t>(full) + 1, -1.0);
        auto cost_of = [&](std::uint32_t mask) {
            double& c = block_cost[mask];
            if (c < 0.0) {
                TestSet s;
                for (int i = 0; i < m; ++i)
                    if ((mask >> i) & 1u) s.push_back(b[static_cast<std::size_t>(i)]);
                c = tree_.subtree_cost(s);
            }
            return c;
        };

        std::vector<double> f(static_cast<std::size_t>(full) + 1, inf);
        std::vector<std::uint32_t> pick(static_cast<std::size_t>(full) + 1, 0);
        f[0] = 0.0;
        for (std::uint32_t mask = 1; mask <= full; ++mask) {
            std::uint32_t low = mask & (~mask + 1u);
            for (std::uint32_t p = mask;; p = (p - 1) & mask) {
                if (p == 0) break;
                if ((p & low) && std::popcount(p) <= k_) {
                    double cand = cost_of(p) + f[mask ^ p];
                    if (cand < f[mask]) {
                        f[mask] = cand;
                        pick[mask] = p;
                    }
                }
            }
        }

        ValueResult out;
        out.bound = f[full];
        for (std::uint32_t mask = full; mask != 0; mask ^= pick[mask]) {
            std::uint32_t p = pick[mask];
            TestSet s;
            for (int i = 0; i < m; ++i)
                if ((p >> i) & 1u) s.push_back(b[static_cast<std::size_t>(i)]);
            out.cover_costs.push_back(cost_of(p));
            out.cover.push_back(std::move(s));
        }
        return out;
    }

    TreeCost tree_;
    int k_;
    double eps_;
};

}  // namespace sst
