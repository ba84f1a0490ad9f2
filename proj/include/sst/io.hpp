#pragma once

// JSON (de)serialization for instances, cost models, solutions, set-cover
// orderings, and graphs. Probabilities travel as decimal strings so inputs
// like 0.96875 or 2^-17 survive the trip bit for bit; other reals rely on
// the serializer's shortest round-trip form. Field problems surface as
// InputError with the offending file and field named.

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sst/core.hpp"
#include "sst/cost_model.hpp"
#include "sst/hardness.hpp"
#include "sst/machine_cost.hpp"
#include "sst/mssc.hpp"
#include "sst/routing_cost.hpp"
#include "sst/tree_cost.hpp"

namespace sst::io {

using nlohmann::json;

namespace detail {

inline std::string prob_string(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline const json& field(const json& j, const char* name, const std::string& where) {
    auto it = j.find(name);
    if (it == j.end())
        throw InputError(where + ": missing field '" + name + "'");
    return *it;
}

inline double number(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string& s = v.get_ref<const std::string&>();
        try {
            std::size_t used = 0;
            double out = std::stod(s, &used);
            if (used == s.size()) return out;
        } catch (const std::exception&) {
        }
        throw InputError(where + ": '" + s + "' is not a number");
    }
    throw InputError(where + ": expected a number");
}

inline int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer())
        throw InputError(where + ": expected an integer");
    return v.get<int>();
}

inline std::vector<double> number_array(const json& v, const std::string& where) {
    if (!v.is_array()) throw InputError(where + ": expected an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

inline std::vector<int> int_array(const json& v, const std::string& where) {
    if (!v.is_array()) throw InputError(where + ": expected an array");
    std::vector<int> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(integer(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

}  // namespace detail

// ---- cost models ----

inline std::unique_ptr<CostModel> model_from_json(const json& j, double eps = 0.1) {
    const std::string where = "cost_model";
    if (!j.is_object()) throw InputError(where + ": expected an object");
    std::string type = detail::field(j, "type", where).get<std::string>();
    if (type == "additive")
        return std::make_unique<AdditiveModel>(
            detail::number_array(detail::field(j, "costs", where), where + ".costs"));
    if (type == "batch_setup")
        return std::make_unique<BatchSetupModel>(
            detail::number(detail::field(j, "setup", where), where + ".setup"),
            detail::number_array(detail::field(j, "costs", where), where + ".costs"), eps);
    if (type == "concave_cardinality")
        return std::make_unique<ConcaveCardinalityModel>(
            detail::number_array(detail::field(j, "g", where), where + ".g"));
    if (type == "tree" || type == "tree_capacitated") {
        const json& nodes = detail::field(j, "nodes", where);
        if (!nodes.is_array()) throw InputError(where + ".nodes: expected an array");
        std::vector<double> weights(nodes.size(), 0.0);
        std::vector<int> parents(nodes.size(), -2);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const std::string at = where + ".nodes[" + std::to_string(i) + "]";
            int id = detail::integer(detail::field(nodes[i], "id", at), at + ".id");
            if (id < 0 || id >= static_cast<int>(nodes.size()))
                throw InputError(at + ".id: must lie in 0.." + std::to_string(nodes.size() - 1));
            if (parents[static_cast<std::size_t>(id)] != -2)
                throw InputError(at + ".id: node " + std::to_string(id) + " defined twice");
            weights[static_cast<std::size_t>(id)] =
                detail::number(detail::field(nodes[i], "weight", at), at + ".weight");
            parents[static_cast<std::size_t>(id)] =
                detail::integer(detail::field(nodes[i], "parent", at), at + ".parent");
        }
        TreeCost tree(std::move(weights), std::move(parents),
                      detail::int_array(detail::field(j, "leaf_of_test", where),
                                        where + ".leaf_of_test"));
        if (type == "tree") return std::make_unique<TreeCostModel>(std::move(tree), eps);
        int k = detail::integer(detail::field(j, "k", where), where + ".k");
        return std::make_unique<CapacitatedTreeCostModel>(std::move(tree), k, eps);
    }
    if (type == "machines") {
        const json& ms = detail::field(j, "machines", where);
        if (!ms.is_array()) throw InputError(where + ".machines: expected an array");
        std::vector<Machine> out;
        int n = 0;
        for (std::size_t i = 0; i < ms.size(); ++i) {
            const std::string at = where + ".machines[" + std::to_string(i) + "]";
            Machine m;
            m.cost = detail::number(detail::field(ms[i], "cost", at), at + ".cost");
            m.tests = detail::int_array(detail::field(ms[i], "tests", at), at + ".tests");
            for (int id : m.tests) n = std::max(n, id);
            out.push_back(std::move(m));
        }
        return std::make_unique<MachineCostModel>(n, std::move(out));
    }
    if (type == "routing") {
        const json& rows = detail::field(j, "dist", where);
        if (!rows.is_array()) throw InputError(where + ".dist: expected an array");
        std::vector<std::vector<double>> d;
        for (std::size_t i = 0; i < rows.size(); ++i)
            d.push_back(detail::number_array(rows[i], where + ".dist[" + std::to_string(i) + "]"));
        return std::make_unique<RoutingCostModel>(RoutingCost(std::move(d)), eps);
    }
    if (type == "and_coverage") {
        const json& sets = detail::field(j, "sets", where);
        if (!sets.is_array()) throw InputError(where + ".sets: expected an array");
        std::vector<std::vector<int>> out;
        for (std::size_t i = 0; i < sets.size(); ++i)
            out.push_back(detail::int_array(sets[i], where + ".sets[" + std::to_string(i) + "]"));
        return std::make_unique<AndCoverageModel>(std::move(out));
    }
    throw InputError(where + ".type: unknown cost model '" + type + "'");
}

inline json model_to_json(const CostModel& model) {
    json j;
    if (auto* m = dynamic_cast<const AdditiveModel*>(&model)) {
        j["type"] = "additive";
        j["costs"] = m->costs();
        return j;
    }
    if (auto* m = dynamic_cast<const BatchSetupModel*>(&model)) {
        j["type"] = "batch_setup";
        j["setup"] = m->setup();
        j["costs"] = m->weights();
        return j;
    }
    if (auto* m = dynamic_cast<const ConcaveCardinalityModel*>(&model)) {
        j["type"] = "concave_cardinality";
        j["g"] = m->table();
        return j;
    }
    const TreeCost* tree = nullptr;
    if (auto* m = dynamic_cast<const CapacitatedTreeCostModel*>(&model)) {
        j["type"] = "tree_capacitated";
        j["k"] = m->capacity();
        tree = &m->tree();
    } else if (auto* m = dynamic_cast<const TreeCostModel*>(&model)) {
        j["type"] = "tree";
        tree = &m->tree();
    }
    if (tree) {
        json nodes = json::array();
        for (int v = 0; v < tree->vertices(); ++v)
            nodes.push_back({{"id", v}, {"weight", tree->weight(v)}, {"parent", tree->parent(v)}});
        j["nodes"] = std::move(nodes);
        std::vector<int> leaves;
        for (int t = 1; t <= tree->tests(); ++t) leaves.push_back(tree->leaf_of(t));
        j["leaf_of_test"] = leaves;
        return j;
    }
    if (auto* m = dynamic_cast<const MachineCostModel*>(&model)) {
        j["type"] = "machines";
        json ms = json::array();
        for (const auto& mm : m->machines())
            ms.push_back({{"cost", mm.cost}, {"tests", mm.tests}});
        j["machines"] = std::move(ms);
        return j;
    }
    if (auto* m = dynamic_cast<const RoutingCostModel*>(&model)) {
        j["type"] = "routing";
        j["root"] = 0;
        int n = m->n();
        std::vector<std::vector<double>> d;
        for (int a = 0; a <= n; ++a) {
            std::vector<double> row;
            for (int b = 0; b <= n; ++b) row.push_back(m->metric().dist(a, b));
            d.push_back(std::move(row));
        }
        j["dist"] = std::move(d);
        return j;
    }
    if (auto* m = dynamic_cast<const AndCoverageModel*>(&model)) {
        j["type"] = "and_coverage";
        j["sets"] = m->sets();
        return j;
    }
    throw InputError("cost model '" + model.name() + "' has no file form");
}

// ---- instances ----

struct LoadedInstance {
    Instance instance;
    std::unique_ptr<CostModel> model;
};

inline json instance_to_json(const Instance& inst, const CostModel& model) {
    json j;
    j["n"] = inst.n();
    // Complements of tiny failure probabilities collapse to 1.0, which the
    // loader rightly rejects; switch fields rather than lose them.
    bool pass_ok = true;
    for (int i = 1; i <= inst.n(); ++i)
        if (!(inst.p(i) < 1.0)) pass_ok = false;
    std::vector<std::string> probs;
    for (int i = 1; i <= inst.n(); ++i)
        probs.push_back(detail::prob_string(pass_ok ? inst.p(i) : inst.q(i)));
    j[pass_ok ? "pass_probs" : "fail_probs"] = std::move(probs);
    j["cost_model"] = model_to_json(model);
    const BatchFamily& f = inst.family();
    if (f.kind == BatchFamily::Kind::MaxSize)
        j["batch_family"] = {{"type", "max_size"}, {"k", f.k}};
    return j;
}

inline LoadedInstance instance_from_json(const json& j, double eps = 0.1) {
    if (!j.is_object()) throw InputError("instance: expected a JSON object");
    int n = detail::integer(detail::field(j, "n", "instance"), "instance.n");
    bool has_pass = j.contains("pass_probs"), has_fail = j.contains("fail_probs");
    if (has_pass == has_fail)
        throw InputError("instance: need exactly one of 'pass_probs' or 'fail_probs'");
    auto probs = detail::number_array(j[has_pass ? "pass_probs" : "fail_probs"],
                                      has_pass ? "instance.pass_probs" : "instance.fail_probs");
    if (static_cast<int>(probs.size()) != n)
        throw InputError("instance: n = " + std::to_string(n) + " but " +
                         (has_pass ? "pass_probs" : "fail_probs") + " has " +
                         std::to_string(probs.size()) + " entries");
    auto model = model_from_json(detail::field(j, "cost_model", "instance"), eps);
    if (model->n() != n)
        throw InputError("instance: cost_model describes " + std::to_string(model->n()) +
                         " tests but n = " + std::to_string(n));
    BatchFamily family = model->family();
    if (j.contains("batch_family")) {
        const json& f = j["batch_family"];
        std::string type = detail::field(f, "type", "instance.batch_family").get<std::string>();
        if (type == "all")
            family = BatchFamily::all();
        else if (type == "max_size")
            family = BatchFamily::max_size(
                detail::integer(detail::field(f, "k", "instance.batch_family"),
                                "instance.batch_family.k"));
        else
            throw InputError("instance.batch_family.type: unknown '" + type + "'");
    }
    Instance inst = has_pass ? Instance::from_pass_probs(probs, family)
                             : Instance::from_fail_probs(probs, family);
    return {std::move(inst), std::move(model)};
}

// ---- solutions ----

inline json solution_to_json(const CostedSequence& seq, double expected, double bound) {
    json j;
    j["batches"] = seq.batches;
    j["bounds"] = seq.bounds;
    j["expected_cost"] = expected;
    j["upper_bound"] = bound;
    return j;
}

inline CostedSequence solution_from_json(const json& j) {
    if (!j.is_object()) throw InputError("solution: expected a JSON object");
    const json& bs = detail::field(j, "batches", "solution");
    if (!bs.is_array()) throw InputError("solution.batches: expected an array");
    CostedSequence seq;
    for (std::size_t i = 0; i < bs.size(); ++i)
        seq.batches.push_back(
            detail::int_array(bs[i], "solution.batches[" + std::to_string(i) + "]"));
    seq.bounds = detail::number_array(detail::field(j, "bounds", "solution"), "solution.bounds");
    if (seq.bounds.size() != seq.batches.size())
        throw InputError("solution: bounds and batches must have equal length");
    return seq;
}

// ---- set-cover orderings ----

inline json mssc_to_json(const MsscInstance& inst) {
    json j;
    j["weights"] = inst.weights;
    json sets = json::array();
    for (const auto& s : inst.sets)
        sets.push_back({{"members", s.members}, {"cost", s.cost}});
    j["sets"] = std::move(sets);
    return j;
}

inline MsscInstance mssc_from_json(const json& j) {
    if (!j.is_object()) throw InputError("mssc: expected a JSON object");
    MsscInstance inst;
    inst.weights = detail::number_array(detail::field(j, "weights", "mssc"), "mssc.weights");
    const json& sets = detail::field(j, "sets", "mssc");
    if (!sets.is_array()) throw InputError("mssc.sets: expected an array");
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const std::string at = "mssc.sets[" + std::to_string(i) + "]";
        MsscSet s;
        s.members = detail::int_array(detail::field(sets[i], "members", at), at + ".members");
        s.cost = detail::number(detail::field(sets[i], "cost", at), at + ".cost");
        inst.sets.push_back(std::move(s));
    }
    inst.validate();
    return inst;
}

// ---- graphs ----

inline json graph_to_json(const DreInstance& g) {
    json j;
    j["vertices"] = g.vertices;
    json edges = json::array();
    for (auto [u, w] : g.edges) edges.push_back({u, w});
    j["edges"] = std::move(edges);
    j["r"] = g.r;
    return j;
}

inline DreInstance graph_from_json(const json& j) {
    if (!j.is_object()) throw InputError("graph: expected a JSON object");
    int v = detail::integer(detail::field(j, "vertices", "graph"), "graph.vertices");
    const json& es = detail::field(j, "edges", "graph");
    if (!es.is_array()) throw InputError("graph.edges: expected an array");
    std::vector<std::pair<int, int>> edges;
    for (std::size_t i = 0; i < es.size(); ++i) {
        auto pair = detail::int_array(es[i], "graph.edges[" + std::to_string(i) + "]");
        if (pair.size() != 2)
            throw InputError("graph.edges[" + std::to_string(i) + "]: expected [u, v]");
        edges.push_back({pair[0], pair[1]});
    }
    return DreInstance(v, std::move(edges),
                       detail::integer(detail::field(j, "r", "graph"), "graph.r"));
}

// ---- files ----

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path + ": cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

inline void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InputError(path + ": cannot open file for writing");
    out << j.dump(2) << '\n';
    if (!out) throw InputError(path + ": write failed");
}

}  // namespace sst::io
