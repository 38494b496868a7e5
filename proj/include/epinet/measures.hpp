#pragma once

#include "network.hpp"

#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

namespace epinet {

/// Pseudo-layer name that makes degree queries use the union of all layers.
inline constexpr std::string_view kAggregateLayer = "aggregate";

struct DegreeHistogram {
    std::map<std::size_t, std::size_t> counts;
    std::string layer;

    std::size_t node_total() const {
        std::size_t s = 0;
        for (const auto& [k, c] : counts) s += c;
        return s;
    }
};

/// Per-node degree on `layer`; "aggregate" (when no layer has that name)
/// counts distinct neighbors over the union of all layers.
inline std::vector<std::size_t> degrees(const Network& net, std::string_view layer) {
    std::vector<std::size_t> deg(net.n_nodes(), 0);
    if (!net.has_layer(layer) && layer == kAggregateLayer) {
        std::vector<NodeId> seen(net.n_nodes(), static_cast<NodeId>(-1));
        for (NodeId v = 0; v < net.n_nodes(); ++v)
            for (const auto& l : net.layers())
                for (const auto& nb : l.neighbors(v))
                    if (seen[nb.node] != v) {
                        seen[nb.node] = v;
                        ++deg[v];
                    }
        return deg;
    }
    const Layer& l = net.layer(layer);
    for (NodeId v = 0; v < net.n_nodes(); ++v) deg[v] = l.degree(v);
    return deg;
}

inline DegreeHistogram degree_histogram(const Network& net, std::string_view layer) {
    DegreeHistogram h;
    h.layer = std::string(layer);
    for (auto d : degrees(net, layer)) ++h.counts[d];
    return h;
}

inline double mean_degree(const Network& net, std::string_view layer) {
    if (net.n_nodes() == 0) return 0.0;
    const auto deg = degrees(net, layer);
    return static_cast<double>(std::accumulate(deg.begin(), deg.end(), std::size_t{0})) /
           static_cast<double>(net.n_nodes());
}

/// Mean weighted degree; equals mean_degree on unweighted layers.
inline double mean_strength(const Network& net, std::string_view layer) {
    if (net.n_nodes() == 0) return 0.0;
    return 2.0 * net.layer(layer).total_weight() / static_cast<double>(net.n_nodes());
}

inline std::size_t count_nodes_with_degree(const Network& net, std::string_view layer, std::size_t k) {
    std::size_t c = 0;
    for (auto d : degrees(net, layer)) c += (d == k);
    return c;
}

/// Nodes sorted by degree descending, ties by id ascending.
inline std::vector<NodeId> nodes_by_degree(const Network& net, std::string_view layer) {
    const auto deg = degrees(net, layer);
    std::vector<NodeId> order(net.n_nodes());
    std::iota(order.begin(), order.end(), NodeId{0});
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return deg[a] > deg[b]; });
    return order;
}

inline constexpr std::size_t kSpectralMaxIterations = 200000;

/// Largest adjacency eigenvalue of `layer` restricted to nodes with
/// active[v] != 0 (all nodes when `active` is empty).
///
/// Power iteration on A + cI with c = half the mean strength of the active
/// subgraph: the shift keeps the Perron root strictly dominant on bipartite
/// graphs. Iterates until the residual ||Bx - theta x|| <= tol, which bounds the
/// eigenvalue error for a symmetric matrix.
inline double spectral_radius(const Layer& layer, double tol, const std::vector<char>& active = {}) {
    const std::size_t n = layer.node_count();
    auto on = [&](NodeId v) { return active.empty() || active[v] != 0; };

    std::size_t n_active = 0;
    double strength_sum = 0.0;
    for (NodeId v = 0; v < n; ++v) {
        if (!on(v)) continue;
        ++n_active;
        for (const auto& nb : layer.neighbors(v))
            if (on(nb.node)) strength_sum += nb.weight;
    }
    if (n_active == 0 || strength_sum == 0.0) return 0.0;
    const double shift = 0.5 * strength_sum / static_cast<double>(n_active);

    // x is scaled by its max entry, not its 2-norm, so regular graphs hit the
    // all-ones eigenvector exactly and theta comes out exact.
    std::vector<double> x(n, 0.0), y(n, 0.0);
    for (NodeId v = 0; v < n; ++v)
        if (on(v)) x[v] = 1.0;

    double theta = 0.0;
    for (std::size_t it = 0; it < kSpectralMaxIterations; ++it) {
        for (NodeId v = 0; v < n; ++v) {
            if (!on(v)) continue;
            double s = shift * x[v];
            for (const auto& nb : layer.neighbors(v))
                if (on(nb.node)) s += nb.weight * x[nb.node];
            y[v] = s;
        }
        double xy = 0.0, xx = 0.0, ymax = 0.0;
        for (NodeId v = 0; v < n; ++v) {
            xy += x[v] * y[v];
            xx += x[v] * x[v];
            ymax = std::max(ymax, y[v]);
        }
        theta = xy / xx;
        double rr = 0.0;
        for (NodeId v = 0; v < n; ++v) {
            const double r = y[v] - theta * x[v];
            rr += r * r;
        }
        const double residual = std::sqrt(rr / xx);
        for (NodeId v = 0; v < n; ++v) x[v] = y[v] / ymax;
        if (residual <= tol) break;
    }
    return std::max(0.0, theta - shift);
}

inline double spectral_radius(const Network& net, std::string_view layer, double tol = 1e-9) {
    if (!(tol > 0.0)) throw invalid_argument("spectral tolerance must be positive");
    return spectral_radius(net.layer(layer), tol);
}

} // namespace epinet
