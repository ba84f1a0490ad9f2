// Reproduces the square-root separation between the plain and truncated
// greedy sequencers on the adversarial instance family: n tests failing with
// probability 2^-(i+1) under the cost min(|B|, sqrt(n)). Plain greedy tests
// one at a time and pays about 0.58 n; truncating at k = 0 pays sqrt(n).

#include <cstdio>

#include "sst/sst.hpp"

int main() {
    std::printf("%6s %14s %16s %12s %12s\n", "n", "plain greedy", "modified greedy",
                "exact opt", "plain/opt");
    for (int n : {16, 64, 256}) {
        auto c = sst::gen_bad_greedy(n);
        const auto& model =
            dynamic_cast<const sst::ConcaveCardinalityModel&>(*c.model);
        auto trace = sst::plain_greedy(c.instance, model.ratio_oracle());
        double plain = sst::expected_cost(c.instance, trace.batches, model.cost_fn());
        auto mod = sst::modified_greedy(c.instance, model.ratio_oracle(), model.value_oracle());
        double modified =
            sst::expected_cost(c.instance, mod.chosen.sequence.batches, model.cost_fn());
        double opt = sst::exact_concave_cardinality_sst(c.instance, model.table()).opt_cost;
        std::printf("%6d %14.6f %16.6f %12.6f %12.6f\n", n, plain, modified, opt, plain / opt);
    }
    return 0;
}
