#pragma once

#include "errors.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace epinet {

using NodeId = std::uint32_t;

struct Edge {
    NodeId u = 0;
    NodeId v = 0;
    double weight = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
    NodeId node;
    double weight;
};

/// One named set of weighted undirected edges over nodes [0, n).
///
/// Edges are stored canonically (u < v, sorted by (u, v)) and a symmetric
/// adjacency is built once; a Layer never changes after construction.
class Layer {
public:
    Layer() = default;

    Layer(std::string name, std::size_t n_nodes, std::vector<Edge> edges)
        : name_(std::move(name)), n_nodes_(n_nodes), edges_(std::move(edges)) {
        if (name_.empty() || name_.find_first_of(" \t\r\n#") != std::string::npos)
            throw invalid_argument("layer name must be a non-empty identifier without whitespace: '" + name_ + "'");
        for (auto& e : edges_) {
            if (e.u == e.v)
                throw invalid_argument("self-loop on node " + std::to_string(e.u) + " in layer " + name_);
            if (e.u >= n_nodes_ || e.v >= n_nodes_)
                throw invalid_argument("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                       ") out of range for " + std::to_string(n_nodes_) + " nodes");
            if (!(e.weight > 0.0))
                throw invalid_argument("non-positive edge weight in layer " + name_);
            if (e.u > e.v) std::swap(e.u, e.v);
        }
        std::sort(edges_.begin(), edges_.end(),
                  [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
        for (std::size_t i = 1; i < edges_.size(); ++i) {
            if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v)
                throw invalid_argument("duplicate edge (" + std::to_string(edges_[i].u) + ", " +
                                       std::to_string(edges_[i].v) + ") in layer " + name_);
        }
        build_adjacency();
    }

    const std::string& name() const noexcept { return name_; }
    std::size_t node_count() const noexcept { return n_nodes_; }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    std::span<const Neighbor> neighbors(NodeId v) const {
        return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
    }
    std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
    double strength(NodeId v) const {
        double s = 0.0;
        for (const auto& nb : neighbors(v)) s += nb.weight;
        return s;
    }
    double total_weight() const {
        double s = 0.0;
        for (const auto& e : edges_) s += e.weight;
        return s;
    }

    Layer renamed(std::string name) const { return Layer(std::move(name), n_nodes_, edges_); }

    friend bool operator==(const Layer& a, const Layer& b) {
        return a.name_ == b.name_ && a.n_nodes_ == b.n_nodes_ && a.edges_ == b.edges_;
    }

private:
    void build_adjacency() {
        offsets_.assign(n_nodes_ + 1, 0);
        for (const auto& e : edges_) {
            ++offsets_[e.u + 1];
            ++offsets_[e.v + 1];
        }
        for (std::size_t i = 0; i < n_nodes_; ++i) offsets_[i + 1] += offsets_[i];
        adjacency_.resize(2 * edges_.size());
        std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
        for (const auto& e : edges_) {
            adjacency_[cursor[e.u]++] = {e.v, e.weight};
            adjacency_[cursor[e.v]++] = {e.u, e.weight};
        }
    }

    std::string name_;
    std::size_t n_nodes_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_{0};
    std::vector<Neighbor> adjacency_;
};

/// Node set plus one or more named layers sharing node ids.
class Network {
public:
    Network() = default;

    Network(std::size_t n_nodes, std::vector<Layer> layers) : n_nodes_(n_nodes), layers_(std::move(layers)) {
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            if (layers_[i].node_count() != n_nodes_)
                throw invalid_argument("layer " + layers_[i].name() + " has " +
                                       std::to_string(layers_[i].node_count()) + " nodes, network has " +
                                       std::to_string(n_nodes_));
            for (std::size_t j = 0; j < i; ++j)
                if (layers_[j].name() == layers_[i].name())
                    throw invalid_argument("duplicate layer name " + layers_[i].name());
        }
    }

    std::size_t n_nodes() const noexcept { return n_nodes_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }

    bool has_layer(std::string_view name) const { return find_layer(name) != nullptr; }

    const Layer& layer(std::string_view name) const {
        if (const auto* l = find_layer(name)) return *l;
        throw invalid_argument("unknown layer '" + std::string(name) + "'");
    }

    std::size_t layer_index(std::string_view name) const {
        for (std::size_t i = 0; i < layers_.size(); ++i)
            if (layers_[i].name() == name) return i;
        throw invalid_argument("unknown layer '" + std::string(name) + "'");
    }

    friend bool operator==(const Network&, const Network&) = default;

private:
    const Layer* find_layer(std::string_view name) const {
        for (const auto& l : layers_)
            if (l.name() == name) return &l;
        return nullptr;
    }

    std::size_t n_nodes_ = 0;
    std::vector<Layer> layers_;
};

inline constexpr const char* kDefaultLayer = "contact";

} // namespace epinet
