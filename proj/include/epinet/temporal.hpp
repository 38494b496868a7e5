#pragma once

#include "generators.hpp"
#include "network.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace epinet {

/// Activity-driven temporal network: at each step every node activates with
/// probability 1 - exp(-activity_rate * step_length) and links to
/// edges_per_activation distinct random partners; links last one step.
class TemporalNetworkSpec {
public:
    TemporalNetworkSpec(std::size_t n_nodes, double activity_rate, std::size_t edges_per_activation,
                        double step_length, std::size_t horizon_steps)
        : n_nodes_(n_nodes), activity_rate_(activity_rate), edges_per_activation_(edges_per_activation),
          step_length_(step_length), horizon_steps_(horizon_steps) {
        if (!(activity_rate >= 0.0)) throw invalid_argument("activity rate must be >= 0");
        if (edges_per_activation >= n_nodes)
            throw invalid_argument("edges per activation must be below the node count");
        if (!(step_length > 0.0)) throw invalid_argument("step length must be > 0");
        if (horizon_steps < 1) throw invalid_argument("horizon must be at least one step");
    }

    std::size_t n_nodes() const noexcept { return n_nodes_; }
    double activity_rate() const noexcept { return activity_rate_; }
    std::size_t edges_per_activation() const noexcept { return edges_per_activation_; }
    double step_length() const noexcept { return step_length_; }
    std::size_t horizon_steps() const noexcept { return horizon_steps_; }

    /// Exact per-step activation probability (never the alpha*dt linearization).
    double activation_probability() const { return -std::expm1(-activity_rate_ * step_length_); }

private:
    std::size_t n_nodes_;
    double activity_rate_;
    std::size_t edges_per_activation_;
    double step_length_;
    std::size_t horizon_steps_;
};

/// Nodes active in one step, in ascending id order.
inline std::vector<NodeId> sample_activations(const TemporalNetworkSpec& spec, Rng& rng) {
    std::vector<NodeId> active;
    const double p = spec.activation_probability();
    for (NodeId v = 0; v < spec.n_nodes(); ++v)
        if (rng.bernoulli(p)) active.push_back(v);
    return active;
}

/// Undirected edges (u < v, sorted, duplicates collapsed) present in one step.
inline std::vector<std::pair<NodeId, NodeId>> sample_temporal_step(const TemporalNetworkSpec& spec, Rng& rng) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    const std::size_t m = spec.edges_per_activation();
    if (m == 0) {
        sample_activations(spec, rng);
        return edges;
    }
    const auto n = static_cast<std::uint64_t>(spec.n_nodes());
    std::vector<NodeId> partners;
    for (NodeId v : sample_activations(spec, rng)) {
        partners.clear();
        while (partners.size() < m) {
            // uniform over the n-1 other nodes
            auto w = static_cast<NodeId>(rng.index(n - 1));
            if (w >= v) ++w;
            if (std::find(partners.begin(), partners.end(), w) == partners.end()) partners.push_back(w);
        }
        for (NodeId w : partners) edges.emplace_back(std::min(v, w), std::max(v, w));
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

/// Time-aggregated static network: weight(i, j) = number of steps in which
/// (i, j) was present, over `steps` steps (the spec horizon by default).
inline Network aggregate_temporal(const TemporalNetworkSpec& spec, std::uint64_t seed, std::size_t steps,
                                  const std::string& layer = kDefaultLayer) {
    Rng rng(seed);
    std::unordered_map<std::uint64_t, std::uint32_t> counts;
    for (std::size_t t = 0; t < steps; ++t)
        for (auto [u, v] : sample_temporal_step(spec, rng)) ++counts[detail::pair_key(u, v)];
    std::vector<Edge> edges;
    edges.reserve(counts.size());
    for (auto [key, c] : counts)
        edges.push_back({static_cast<NodeId>(key >> 32), static_cast<NodeId>(key & 0xffffffffu), static_cast<double>(c)});
    return Network(spec.n_nodes(), {Layer(layer, spec.n_nodes(), std::move(edges))});
}

inline Network aggregate_temporal(const TemporalNetworkSpec& spec, std::uint64_t seed,
                                  const std::string& layer = kDefaultLayer) {
    return aggregate_temporal(spec, seed, spec.horizon_steps(), layer);
}

} // namespace epinet
