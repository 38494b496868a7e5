#pragma once

#include "errors.hpp"
#include "measures.hpp"
#include "network.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace epinet {

enum class CalibrationBasis { mean_degree, spectral };

inline std::string to_string(CalibrationBasis b) { return b == CalibrationBasis::spectral ? "spectral" : "mean-degree"; }

inline CalibrationBasis parse_basis(std::string_view s) {
    if (s == "mean-degree") return CalibrationBasis::mean_degree;
    if (s == "spectral") return CalibrationBasis::spectral;
    throw invalid_argument("unknown calibration basis '" + std::string(s) + "' (expected mean-degree or spectral)");
}

struct CalibrationReport {
    double r0 = 0.0;
    double per_contact_rate = 0.0;
    double recovery_rate = 0.0;
    CalibrationBasis basis = CalibrationBasis::mean_degree;
    double reference_quantity = 0.0;
};

/// beta = r0 * gamma / reference, where reference is the mean degree or
/// spectral radius of the contact layer.
inline CalibrationReport per_contact_rate(double r0, double gamma, double reference, CalibrationBasis basis) {
    if (!(r0 >= 0.0)) throw invalid_argument("r0 must be >= 0");
    if (!(gamma > 0.0)) throw invalid_argument("recovery rate must be > 0");
    if (!(reference > 0.0)) throw degenerate_network("calibration reference quantity is zero (empty layer)");
    return {r0, r0 * gamma / reference, gamma, basis, reference};
}

/// Network form. Mean-degree basis uses mean strength (weighted degree), which
/// is the plain mean degree on unweighted layers; weights multiply the hazard.
inline CalibrationReport per_contact_rate(double r0, double gamma, const Network& net, std::string_view layer,
                                          CalibrationBasis basis) {
    const double ref = basis == CalibrationBasis::spectral ? spectral_radius(net, layer, 1e-10)
                                                           : mean_strength(net, layer);
    return per_contact_rate(r0, gamma, ref, basis);
}

inline constexpr double kFinalSizeTolerance = 1e-8;

/// Largest root of z = 1 - exp(-r0 z); 0 when r0 <= 1. Bisection on [1e-9, 1].
inline double final_size_fraction(double r0, double tol = kFinalSizeTolerance) {
    if (!(r0 >= 0.0)) throw invalid_argument("r0 must be >= 0");
    if (r0 <= 1.0) return 0.0;
    auto g = [r0](double z) { return z - 1.0 + std::exp(-r0 * z); };
    double lo = 1e-9, hi = 1.0;
    double mid = hi;
    for (int i = 0; i < 200; ++i) {
        mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (std::abs(gm) <= tol && hi - lo <= tol) break;
        (gm < 0.0 ? lo : hi) = mid;
    }
    return mid;
}

inline double epidemic_threshold(double gamma, double lambda_max) {
    if (!(lambda_max > 0.0)) throw invalid_argument("spectral radius must be > 0");
    if (!(gamma >= 0.0)) throw invalid_argument("recovery rate must be >= 0");
    return gamma / lambda_max;
}

/// Mean-field activity-driven threshold: beta_c * m * (<a> + sqrt(<a^2>)) = gamma.
inline double activity_driven_threshold(double gamma, std::size_t m, double a_mean, double a2_mean) {
    if (m == 0) throw invalid_argument("edges per activation must be > 0");
    if (!(gamma > 0.0) || !(a_mean > 0.0) || !(a2_mean > 0.0))
        throw invalid_argument("activity-driven threshold needs positive gamma, <a>, <a^2>");
    return gamma / (static_cast<double>(m) * (a_mean + std::sqrt(a2_mean)));
}

/// p = 1 - exp(-alpha dt), computed with expm1.
inline double activation_probability(double alpha, double dt) {
    if (!(alpha >= 0.0)) throw invalid_argument("activity rate must be >= 0");
    if (!(dt > 0.0)) throw invalid_argument("step length must be > 0");
    return -std::expm1(-alpha * dt);
}

inline double herd_immunity_random(double r0) {
    if (!(r0 > 0.0)) throw invalid_argument("r0 must be > 0");
    return std::max(0.0, 1.0 - 1.0 / r0);
}

inline constexpr double kResidualTolerance = 1e-10;

/// Re = beta * lambda_max(subgraph on unvaccinated nodes) / gamma.
/// `vaccinated` is a per-node flag vector (empty means nobody).
inline double residual_reproduction(const Network& net, std::string_view layer, const std::vector<char>& vaccinated,
                                    double beta, double gamma) {
    if (!(gamma > 0.0)) throw invalid_argument("recovery rate must be > 0");
    if (!(beta >= 0.0)) throw invalid_argument("transmission rate must be >= 0");
    const Layer& l = net.layer(layer);
    if (!vaccinated.empty() && vaccinated.size() != net.n_nodes())
        throw invalid_argument("vaccination mask size does not match node count");
    std::vector<char> active;
    if (!vaccinated.empty()) {
        active.resize(net.n_nodes());
        for (std::size_t v = 0; v < active.size(); ++v) active[v] = vaccinated[v] ? 0 : 1;
    }
    return beta * spectral_radius(l, kResidualTolerance, active) / gamma;
}

struct VaccinationPolicy {
    enum class Kind { top_degree, degree_equals } kind = Kind::top_degree;
    std::size_t k = 0; // used by degree_equals

    static VaccinationPolicy top_degree() { return {Kind::top_degree, 0}; }
    static VaccinationPolicy degree_equals(std::size_t k) { return {Kind::degree_equals, k}; }
};

/// Policy node ordering: degree descending, ties by id; degree_equals keeps
/// only nodes of degree k.
inline std::vector<NodeId> policy_order(const Network& net, std::string_view layer, VaccinationPolicy policy) {
    auto order = nodes_by_degree(net, layer);
    if (policy.kind == VaccinationPolicy::Kind::degree_equals) {
        const Layer& l = net.layer(layer);
        std::erase_if(order, [&](NodeId v) { return l.degree(v) != policy.k; });
    }
    return order;
}

/// Smallest prefix of the policy ordering whose removal gives Re < 1.
///
/// Re is non-increasing along the prefix (induced subgraphs shrink), so the
/// prefix length is found by bisection.
inline std::size_t targeted_vaccination_count(const Network& net, std::string_view layer, double beta, double gamma,
                                              VaccinationPolicy policy) {
    const auto order = policy_order(net, layer, policy);
    auto re_after = [&](std::size_t c) {
        std::vector<char> mask(net.n_nodes(), 0);
        for (std::size_t i = 0; i < c; ++i) mask[order[i]] = 1;
        return residual_reproduction(net, layer, mask, beta, gamma);
    };
    if (re_after(0) < 1.0) return 0;
    if (!(re_after(order.size()) < 1.0))
        throw infeasible_policy("vaccinating all " + std::to_string(order.size()) +
                                " eligible nodes leaves Re >= 1");
    std::size_t lo = 0, hi = order.size(); // Re(lo) >= 1, Re(hi) < 1
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (re_after(mid) < 1.0 ? hi : lo) = mid;
    }
    return hi;
}

} // namespace epinet
