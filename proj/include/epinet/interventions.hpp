#pragma once

#include "calibrate.hpp"
#include "errors.hpp"
#include "measures.hpp"
#include "model.hpp"
#include "network.hpp"
#include "rng.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Seeding and vaccination. The first compartment of a model is its
// susceptible pool; only susceptible nodes are ever converted.

namespace epinet {

namespace detail {

inline std::uint16_t compartment_index(const ModelSchema& model, const std::string& name) {
    return static_cast<std::uint16_t>(model.index_of(name));
}

inline std::vector<NodeId> susceptible_nodes(const NodeStateVector& state) {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < state.size(); ++v)
        if (state[v] == 0) out.push_back(v);
    return out;
}

/// `count` distinct entries of `pool`, uniformly (partial Fisher-Yates).
inline std::vector<NodeId> sample_without_replacement(std::vector<NodeId> pool, std::size_t count, Rng& rng) {
    for (std::size_t i = 0; i < count; ++i) std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
    pool.resize(count);
    return pool;
}

} // namespace detail

inline NodeStateVector susceptible_state(std::size_t n_nodes, const ModelSchema& model) {
    return NodeStateVector(n_nodes, model.compartments.size(), 0);
}

/// Moves `count` uniformly chosen susceptible nodes into `compartment`.
inline void infect_random(NodeStateVector& state, std::uint16_t compartment, std::size_t count, Rng& rng) {
    auto pool = detail::susceptible_nodes(state);
    if (count > pool.size())
        throw invalid_argument("cannot seed " + std::to_string(count) + " nodes, only " + std::to_string(pool.size()) +
                               " susceptible");
    for (NodeId v : detail::sample_without_replacement(std::move(pool), count, rng)) state.set(v, compartment);
}

inline NodeStateVector seed_random(std::size_t n_nodes, const ModelSchema& model, std::size_t count, Rng& rng,
                                   const std::string& compartment = "I") {
    auto state = susceptible_state(n_nodes, model);
    infect_random(state, detail::compartment_index(model, compartment), count, rng);
    return state;
}

inline NodeStateVector seed_random(const Network& net, const ModelSchema& model, std::size_t count, Rng& rng,
                                   const std::string& compartment = "I") {
    return seed_random(net.n_nodes(), model, count, rng, compartment);
}

/// Highest-degree nodes on `layer`, ties by lower id.
inline NodeStateVector seed_hubs(const Network& net, std::string_view layer, const ModelSchema& model,
                                 std::size_t count, const std::string& compartment = "I") {
    if (count > net.n_nodes()) throw invalid_argument("seed count exceeds node count");
    const auto c = detail::compartment_index(model, compartment);
    auto state = susceptible_state(net.n_nodes(), model);
    const auto order = nodes_by_degree(net, layer);
    for (std::size_t i = 0; i < count; ++i) state.set(order[i], c);
    return state;
}

inline NodeStateVector seed_explicit(const Network& net, const ModelSchema& model, const std::vector<NodeId>& nodes,
                                     const std::string& compartment = "I") {
    const auto c = detail::compartment_index(model, compartment);
    auto state = susceptible_state(net.n_nodes(), model);
    for (NodeId v : nodes) {
        if (v >= net.n_nodes()) throw invalid_argument("seed node " + std::to_string(v) + " out of range");
        if (state[v] != 0) throw invalid_argument("seed node " + std::to_string(v) + " listed twice");
        state.set(v, c);
    }
    return state;
}

/// Moves round(fraction * |S|) random susceptible nodes to `immune`.
inline NodeStateVector vaccinate_random(NodeStateVector state, double fraction, std::uint16_t immune, Rng& rng) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw invalid_argument("vaccination fraction must be in [0, 1]");
    if (immune >= state.n_compartments() || immune == 0) throw invalid_argument("bad immune compartment");
    auto pool = detail::susceptible_nodes(state);
    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(pool.size())));
    for (NodeId v : detail::sample_without_replacement(std::move(pool), count, rng)) state.set(v, immune);
    state.add_immunized(count);
    return state;
}

/// Moves the first `count` susceptible nodes of the policy ordering to `immune`.
inline NodeStateVector vaccinate_targeted(NodeStateVector state, const Network& net, std::string_view layer,
                                          VaccinationPolicy policy, std::size_t count, std::uint16_t immune) {
    if (immune >= state.n_compartments() || immune == 0) throw invalid_argument("bad immune compartment");
    std::vector<NodeId> eligible;
    for (NodeId v : policy_order(net, layer, policy))
        if (state[v] == 0) eligible.push_back(v);
    if (count > eligible.size())
        throw invalid_argument("targeted vaccination of " + std::to_string(count) + " nodes exceeds the " +
                               std::to_string(eligible.size()) + " eligible susceptible nodes");
    for (std::size_t i = 0; i < count; ++i) state.set(eligible[i], immune);
    state.add_immunized(count);
    return state;
}

} // namespace epinet
