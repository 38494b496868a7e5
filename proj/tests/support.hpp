#pragma once

#include <epinet/epinet.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <vector>

namespace test_support {

// Dense symmetric eigensolver on the (optionally masked) weighted adjacency.
inline double dense_lambda_max(const epinet::Layer& layer, const std::vector<char>& keep = {}) {
    const auto n = static_cast<Eigen::Index>(layer.node_count());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : layer.edges()) {
        if (!keep.empty() && (!keep[e.u] || !keep[e.v])) continue;
        a(e.u, e.v) = e.weight;
        a(e.v, e.u) = e.weight;
    }
    if (n == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline double total_variation(const std::map<std::size_t, double>& p, const std::map<std::size_t, double>& q) {
    std::map<std::size_t, double> diff = p;
    for (const auto& [k, v] : q) diff[k] -= v;
    double s = 0.0;
    for (const auto& [k, v] : diff) s += std::abs(v);
    return 0.5 * s;
}

inline std::map<std::size_t, double> normalize(const std::map<std::size_t, std::size_t>& counts) {
    double total = 0.0;
    for (const auto& [k, c] : counts) total += static_cast<double>(c);
    std::map<std::size_t, double> out;
    for (const auto& [k, c] : counts) out[k] = static_cast<double>(c) / total;
    return out;
}

inline epinet::Network star(std::size_t leaves, const std::string& layer = std::string(epinet::kDefaultLayer)) {
    std::vector<epinet::Edge> edges;
    for (epinet::NodeId v = 1; v <= leaves; ++v) edges.push_back({0, v, 1.0});
    return epinet::Network(leaves + 1, {epinet::Layer(layer, leaves + 1, edges)});
}

inline epinet::Network path(std::size_t n) {
    std::vector<epinet::Edge> edges;
    for (epinet::NodeId v = 0; v + 1 < n; ++v) edges.push_back({v, v + 1, 1.0});
    return epinet::Network(n, {epinet::Layer(std::string(epinet::kDefaultLayer), n, edges)});
}

inline std::vector<double> unit_grid(double end, double step = 1.0) {
    std::vector<double> g;
    for (double t = 0.0; t <= end + 1e-12; t += step) g.push_back(t);
    return g;
}

} // namespace test_support
