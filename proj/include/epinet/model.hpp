#pragma once

#include "errors.hpp"
#include "network.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace epinet {

/// Spontaneous transition: from -> to at `rate` per unit time.
struct NodalTransition {
    std::string from;
    std::string to;
    double rate = 0.0;
};

/// Neighbor-induced transition on one layer. Hazard for a node in `from` is
/// rate_per_contact * sum over its `layer` neighbors in `inducer` of edge weight.
struct EdgeTransition {
    std::string from;
    std::string to;
    std::string inducer;
    std::string layer;
    double rate_per_contact = 0.0;
};

struct ModelSchema {
    std::vector<std::string> compartments;
    std::vector<NodalTransition> nodal;
    std::vector<EdgeTransition> edge;

    /// Index of a compartment; throws invalid_argument when undeclared.
    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < compartments.size(); ++i)
            if (compartments[i] == name) return i;
        throw invalid_argument("unknown compartment '" + name + "'");
    }
    bool has(const std::string& name) const {
        return std::find(compartments.begin(), compartments.end(), name) != compartments.end();
    }
};

/// Every problem with the schema, and with its layer references when `net` is given.
inline std::vector<std::string> validate_schema(const ModelSchema& schema, const Network* net = nullptr) {
    std::vector<std::string> errors;
    if (schema.compartments.empty()) errors.push_back("model declares no compartments");
    for (std::size_t i = 0; i < schema.compartments.size(); ++i) {
        if (schema.compartments[i].empty()) errors.push_back("compartment " + std::to_string(i) + " has an empty name");
        for (std::size_t j = 0; j < i; ++j)
            if (schema.compartments[j] == schema.compartments[i])
                errors.push_back("duplicate compartment '" + schema.compartments[i] + "'");
    }
    auto check_ref = [&](const std::string& what, const std::string& name) {
        if (!schema.has(name)) errors.push_back(what + " references undeclared compartment '" + name + "'");
    };
    for (std::size_t i = 0; i < schema.nodal.size(); ++i) {
        const auto& t = schema.nodal[i];
        const std::string what = "nodal transition " + std::to_string(i) + " (" + t.from + "->" + t.to + ")";
        check_ref(what, t.from);
        check_ref(what, t.to);
        if (t.from == t.to) errors.push_back(what + " has from == to");
        if (!(t.rate >= 0.0)) errors.push_back(what + " has negative rate");
    }
    for (std::size_t i = 0; i < schema.edge.size(); ++i) {
        const auto& t = schema.edge[i];
        const std::string what = "edge transition " + std::to_string(i) + " (" + t.from + "->" + t.to + ")";
        check_ref(what, t.from);
        check_ref(what, t.to);
        check_ref(what, t.inducer);
        if (t.from == t.to) errors.push_back(what + " has from == to");
        if (!(t.rate_per_contact >= 0.0)) errors.push_back(what + " has negative rate");
        if (net && !net->has_layer(t.layer)) errors.push_back(what + " names unknown layer '" + t.layer + "'");
    }
    return errors;
}

inline std::vector<std::string> validate_schema(const ModelSchema& schema, const Network& net) {
    return validate_schema(schema, &net);
}

namespace detail {

inline void require_rates(std::initializer_list<double> rates) {
    for (double r : rates)
        if (!(r >= 0.0)) throw invalid_argument("rates must be non-negative");
}

} // namespace detail

inline ModelSchema builtin_sir(double beta, double gamma, const std::string& layer = kDefaultLayer) {
    detail::require_rates({beta, gamma});
    return {{"S", "I", "R"}, {{"I", "R", gamma}}, {{"S", "I", "I", layer, beta}}};
}

inline ModelSchema builtin_seir(double beta, double sigma, double gamma, const std::string& layer = kDefaultLayer) {
    detail::require_rates({beta, sigma, gamma});
    return {{"S", "E", "I", "R"}, {{"E", "I", sigma}, {"I", "R", gamma}}, {{"S", "E", "I", layer, beta}}};
}

inline ModelSchema builtin_sis(double beta, double delta, const std::string& layer = kDefaultLayer) {
    detail::require_rates({beta, delta});
    return {{"S", "I"}, {{"I", "S", delta}}, {{"S", "I", "I", layer, beta}}};
}

// V is an isolated absorbing compartment filled by pre-simulation vaccination.
inline ModelSchema builtin_sirv(double beta, double gamma, const std::string& layer = kDefaultLayer) {
    detail::require_rates({beta, gamma});
    return {{"S", "I", "R", "V"}, {{"I", "R", gamma}}, {{"S", "I", "I", layer, beta}}};
}

/// Competitive SI1I2S: a node hosts at most one virus; virus v spreads on layer v.
inline ModelSchema builtin_bivirus(double beta1, double delta1, const std::string& layer1, double beta2,
                                   double delta2, const std::string& layer2) {
    detail::require_rates({beta1, delta1, beta2, delta2});
    return {{"S", "I1", "I2"},
            {{"I1", "S", delta1}, {"I2", "S", delta2}},
            {{"S", "I1", "I1", layer1, beta1}, {"S", "I2", "I2", layer2, beta2}}};
}

// JSON form: {"compartments": [...], "nodal": [{"from","to","rate"}],
//             "edge": [{"from","to","inducer","layer","rate_per_contact"}]}
inline void to_json(nlohmann::json& j, const NodalTransition& t) {
    j = {{"from", t.from}, {"to", t.to}, {"rate", t.rate}};
}
inline void from_json(const nlohmann::json& j, NodalTransition& t) {
    j.at("from").get_to(t.from);
    j.at("to").get_to(t.to);
    j.at("rate").get_to(t.rate);
}
inline void to_json(nlohmann::json& j, const EdgeTransition& t) {
    j = {{"from", t.from}, {"to", t.to}, {"inducer", t.inducer}, {"layer", t.layer}, {"rate_per_contact", t.rate_per_contact}};
}
inline void from_json(const nlohmann::json& j, EdgeTransition& t) {
    j.at("from").get_to(t.from);
    j.at("to").get_to(t.to);
    j.at("inducer").get_to(t.inducer);
    j.at("layer").get_to(t.layer);
    j.at("rate_per_contact").get_to(t.rate_per_contact);
}
inline void to_json(nlohmann::json& j, const ModelSchema& m) {
    j = {{"compartments", m.compartments}, {"nodal", m.nodal}, {"edge", m.edge}};
}
inline void from_json(const nlohmann::json& j, ModelSchema& m) {
    j.at("compartments").get_to(m.compartments);
    m.nodal = j.value("nodal", std::vector<NodalTransition>{});
    m.edge = j.value("edge", std::vector<EdgeTransition>{});
}

inline ModelSchema load_model_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model schema " + path);
    nlohmann::json j;
    try {
        in >> j;
        auto schema = j.get<ModelSchema>();
        if (auto errors = validate_schema(schema); !errors.empty()) throw validation_error(std::move(errors));
        return schema;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what(), 0);
    }
}

/// Per-node compartment assignment with running per-compartment totals.
class NodeStateVector {
public:
    NodeStateVector() = default;
    NodeStateVector(std::size_t n_nodes, std::size_t n_compartments, std::uint16_t initial = 0)
        : state_(n_nodes, initial), counts_(n_compartments, 0) {
        if (initial >= n_compartments) throw invalid_argument("initial compartment out of range");
        counts_[initial] = n_nodes;
    }

    std::size_t size() const noexcept { return state_.size(); }
    std::size_t n_compartments() const noexcept { return counts_.size(); }
    std::uint16_t operator[](NodeId v) const { return state_[v]; }
    const std::vector<std::uint16_t>& states() const noexcept { return state_; }
    const std::vector<std::size_t>& counts() const noexcept { return counts_; }

    void set(NodeId v, std::uint16_t c) {
        if (v >= state_.size()) throw invalid_argument("node " + std::to_string(v) + " out of range");
        if (c >= counts_.size()) throw invalid_argument("compartment index out of range");
        --counts_[state_[v]];
        ++counts_[c];
        state_[v] = c;
    }

    /// Nodes moved out of the susceptible pool by vaccination (not infection).
    std::size_t immunized() const noexcept { return immunized_; }
    void add_immunized(std::size_t k) noexcept { immunized_ += k; }

    friend bool operator==(const NodeStateVector&, const NodeStateVector&) = default;

private:
    std::vector<std::uint16_t> state_;
    std::vector<std::size_t> counts_;
    std::size_t immunized_ = 0;
};

} // namespace epinet
