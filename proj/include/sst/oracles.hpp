#pragma once

// Shared result shapes for the two oracle kinds every cost backend provides.
//
// Value oracle:  S -> (bound, cover) with c(S) <= bound <= gamma * c(S);
//   the cover is a list of *disjoint* family batches partitioning S whose
//   individual costs sum to the bound.
// Ratio oracle:  U -> (B, C*) with B a family batch inside U, c(B) <= C*, and
//   C*/(1 - P(B)) within rho of the best batch ratio available in U.

#include <vector>

#include "sst/core.hpp"

namespace sst {

struct ValueResult {
    double bound = 0.0;
    std::vector<TestSet> cover;
    std::vector<double> cover_costs;  // per cover batch; sums to bound
};

struct RatioBatch {
    TestSet batch;
    double cost_bound = 0.0;  // C*
};

struct QpSolution {
    TestSet set;
    double cost = 0.0;   // certified cost of `set`
    double reward = 0.0;
};

}  // namespace sst
