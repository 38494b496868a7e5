#pragma once

#include "network.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace epinet {

inline Network generate_complete(std::size_t n, const std::string& layer = kDefaultLayer) {
    if (n == 0) throw invalid_argument("complete graph needs n >= 1");
    std::vector<Edge> edges;
    edges.reserve(n * (n - 1) / 2);
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) edges.push_back({u, v, 1.0});
    return Network(n, {Layer(layer, n, std::move(edges))});
}

/// G(n, p) with p = target_mean_degree / (n - 1); pairs visited in (u, v) order.
inline Network generate_er(std::size_t n, double target_mean_degree, std::uint64_t seed,
                           const std::string& layer = kDefaultLayer) {
    if (n == 0) throw invalid_argument("Erdos-Renyi graph needs n >= 1");
    if (!(target_mean_degree >= 0.0)) throw invalid_argument("target mean degree must be >= 0");
    if (target_mean_degree > static_cast<double>(n - 1))
        throw invalid_argument("target mean degree " + std::to_string(target_mean_degree) + " exceeds n-1");
    std::vector<Edge> edges;
    if (n > 1 && target_mean_degree > 0.0) {
        const double p = target_mean_degree / static_cast<double>(n - 1);
        Rng rng(seed);
        for (NodeId u = 0; u < n; ++u)
            for (NodeId v = u + 1; v < n; ++v)
                if (rng.bernoulli(p)) edges.push_back({u, v, 1.0});
    }
    return Network(n, {Layer(layer, n, std::move(edges))});
}

/// Preferential attachment grown from a complete seed graph on m_attach+1 nodes.
///
/// Each new node draws m_attach distinct targets, each draw proportional to
/// current degree among the targets not yet chosen (sequential sampling
/// without replacement from the degree-weighted multiset of edge endpoints).
inline Network generate_ba(std::size_t n, std::size_t m_attach, std::uint64_t seed,
                           const std::string& layer = kDefaultLayer) {
    if (m_attach < 1) throw invalid_argument("BA attachment count must be >= 1");
    if (m_attach >= n) throw invalid_argument("BA attachment count must be < n");
    Rng rng(seed);
    std::vector<Edge> edges;
    edges.reserve(m_attach * (n - m_attach - 1) + m_attach * (m_attach + 1) / 2);
    // every edge contributes both endpoints, so a uniform pick is degree-proportional
    std::vector<NodeId> endpoints;
    endpoints.reserve(2 * edges.capacity());
    for (NodeId u = 0; u <= m_attach; ++u)
        for (NodeId v = u + 1; v <= m_attach; ++v) {
            edges.push_back({u, v, 1.0});
            endpoints.push_back(u);
            endpoints.push_back(v);
        }
    std::vector<NodeId> targets;
    for (NodeId v = static_cast<NodeId>(m_attach + 1); v < n; ++v) {
        targets.clear();
        while (targets.size() < m_attach) {
            const NodeId t = endpoints[rng.index(endpoints.size())];
            if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
        }
        for (NodeId t : targets) {
            edges.push_back({t, v, 1.0});
            endpoints.push_back(t);
            endpoints.push_back(v);
        }
    }
    return Network(n, {Layer(layer, n, std::move(edges))});
}

namespace detail {

inline std::uint64_t pair_key(NodeId a, NodeId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

} // namespace detail

inline constexpr std::size_t kConfigurationMaxRestarts = 1000;

/// Simple graph with exactly the requested degree sequence.
///
/// Stubs are shuffled and paired; remaining self-loops and multi-edges are
/// then removed with degree-preserving double-edge swaps against randomly
/// chosen edges. An attempt whose swap budget runs out restarts from a fresh
/// shuffle, up to kConfigurationMaxRestarts times.
inline Network generate_configuration(const std::vector<std::size_t>& degrees, std::uint64_t seed,
                                      const std::string& layer = kDefaultLayer) {
    const std::size_t n = degrees.size();
    std::size_t total = 0;
    for (auto d : degrees) {
        if (d >= n && d > 0) throw invalid_argument("degree " + std::to_string(d) + " is not below n=" + std::to_string(n));
        total += d;
    }
    if (total % 2 != 0) throw invalid_argument("degree sequence has odd sum " + std::to_string(total));
    if (total == 0) return Network(n, {Layer(layer, n, {})});

    Rng rng(seed);
    std::vector<NodeId> stubs;
    stubs.reserve(total);
    for (NodeId v = 0; v < n; ++v) stubs.insert(stubs.end(), degrees[v], v);
    const std::size_t m = total / 2;

    for (std::size_t attempt = 0; attempt < kConfigurationMaxRestarts; ++attempt) {
        rng.shuffle(stubs.begin(), stubs.end());
        std::vector<std::pair<NodeId, NodeId>> pairs(m);
        std::multiset<std::uint64_t> keys;
        for (std::size_t i = 0; i < m; ++i) {
            pairs[i] = {stubs[2 * i], stubs[2 * i + 1]};
            keys.insert(detail::pair_key(pairs[i].first, pairs[i].second));
        }
        auto is_bad = [&](std::size_t i) {
            const auto [a, b] = pairs[i];
            return a == b || keys.count(detail::pair_key(a, b)) > 1;
        };
        auto replace = [&](std::size_t i, NodeId a, NodeId b) {
            keys.erase(keys.find(detail::pair_key(pairs[i].first, pairs[i].second)));
            pairs[i] = {a, b};
            keys.insert(detail::pair_key(a, b));
        };

        std::vector<std::size_t> bad;
        for (std::size_t i = 0; i < m; ++i)
            if (is_bad(i)) bad.push_back(i);
        std::size_t budget = 100 * m + 1000;
        while (!bad.empty() && budget > 0) {
            --budget;
            const std::size_t i = bad.back();
            if (!is_bad(i)) {
                bad.pop_back();
                continue;
            }
            const std::size_t j = rng.index(m);
            if (j == i) continue;
            auto [a, b] = pairs[i];
            auto [c, d] = pairs[j];
            if (rng.bernoulli(0.5)) std::swap(c, d);
            // (a,b),(c,d) -> (a,c),(b,d)
            if (a == c || b == d) continue;
            if (keys.count(detail::pair_key(a, c)) > 0 || keys.count(detail::pair_key(b, d)) > 0) continue;
            if (detail::pair_key(a, c) == detail::pair_key(b, d)) continue;
            // the new pairs are fresh, so no edge outside `bad` can turn bad here
            replace(i, a, c);
            replace(j, b, d);
            bad.pop_back();
        }
        bool ok = true;
        for (std::size_t i = 0; i < m && ok; ++i) ok = !is_bad(i);
        if (!ok) continue;

        std::vector<Edge> edges;
        edges.reserve(m);
        for (auto [a, b] : pairs) edges.push_back({a, b, 1.0});
        return Network(n, {Layer(layer, n, std::move(edges))});
    }
    throw non_realizable_sequence("degree sequence could not be realized as a simple graph after " +
                                  std::to_string(kConfigurationMaxRestarts) + " restarts");
}

/// Two-layer network over a shared node set; layer names must differ.
inline Network build_multiplex(const Layer& layer_a, const Layer& layer_b, std::size_t n) {
    if (layer_a.node_count() != n || layer_b.node_count() != n)
        throw invalid_argument("multiplex layers must both have " + std::to_string(n) + " nodes (got " +
                               std::to_string(layer_a.node_count()) + " and " +
                               std::to_string(layer_b.node_count()) + ")");
    if (layer_a.name() == layer_b.name())
        throw invalid_argument("multiplex layers need distinct names, both are '" + layer_a.name() + "'");
    return Network(n, {layer_a, layer_b});
}

} // namespace epinet
