#pragma once

#include "engine.hpp"
#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <tuple>
#include <string>
#include <vector>

namespace epinet {

/// Per-grid-point mean and population standard deviation per compartment.
struct AggregateSeries {
    std::vector<double> grid;
    std::vector<std::string> compartments;
    std::vector<std::vector<double>> mean; // [grid][compartment]
    std::vector<std::vector<double>> std;
    std::size_t n_realizations = 0;
    std::size_t n_nodes = 0;

    std::size_t index_of(const std::string& c) const {
        for (std::size_t i = 0; i < compartments.size(); ++i)
            if (compartments[i] == c) return i;
        throw invalid_argument("unknown compartment '" + c + "'");
    }
};

enum class BivirusRegime { dominance_1, dominance_2, coexistence, extinction };

inline std::string to_string(BivirusRegime r) {
    switch (r) {
    case BivirusRegime::dominance_1: return "dominance-1";
    case BivirusRegime::dominance_2: return "dominance-2";
    case BivirusRegime::coexistence: return "coexistence";
    case BivirusRegime::extinction: return "extinction";
    }
    return "?";
}

struct MetricsReport {
    double peak_time = 0.0;
    double peak_size = 0.0;
    double final_size_mean = 0.0;
    double final_size_std = 0.0;
    std::optional<double> final_size_conditional_mean; // absent when no major outbreak
    double outbreak_probability = 0.0;
    double duration_mean = 0.0;
    std::optional<double> analytic_final_size;
    std::optional<BivirusRegime> regime;
};

inline AggregateSeries aggregate_batch(const BatchResult& batch) {
    if (batch.trajectories.empty()) throw invalid_argument("cannot aggregate an empty batch");
    AggregateSeries s;
    s.grid = batch.grid;
    s.compartments = batch.compartments;
    s.n_realizations = batch.size();
    s.n_nodes = batch.n_nodes;
    const std::size_t k = batch.compartments.size();
    const double r = static_cast<double>(batch.size());
    s.mean.assign(s.grid.size(), std::vector<double>(k, 0.0));
    s.std.assign(s.grid.size(), std::vector<double>(k, 0.0));
    for (const auto& t : batch.trajectories)
        if (t.grid_counts.size() != s.grid.size()) throw invalid_argument("trajectory not sampled on the batch grid");
    for (std::size_t g = 0; g < s.grid.size(); ++g) {
        for (std::size_t c = 0; c < k; ++c) {
            double sum = 0.0;
            for (const auto& t : batch.trajectories) sum += static_cast<double>(t.grid_counts[g][c]);
            const double m = sum / r;
            double ss = 0.0;
            for (const auto& t : batch.trajectories) {
                const double d = static_cast<double>(t.grid_counts[g][c]) - m;
                ss += d * d;
            }
            s.mean[g][c] = m;
            s.std[g][c] = std::sqrt(ss / r);
        }
    }
    return s;
}

/// (time, mean size) at the grid maximum of the compartment mean; earliest on ties.
inline std::pair<double, double> peak_metrics(const AggregateSeries& series, const std::string& compartment) {
    const std::size_t c = series.index_of(compartment);
    if (series.grid.empty()) return {0.0, 0.0};
    std::size_t best = 0;
    for (std::size_t g = 1; g < series.grid.size(); ++g)
        if (series.mean[g][c] > series.mean[best][c]) best = g;
    return {series.grid[best], series.mean[best][c]};
}

/// Ever-infected count: nodes that left the susceptible pool other than by vaccination.
inline std::size_t final_size(const Trajectory& traj) {
    return traj.n_nodes - traj.final_counts.at(0) - traj.immunized;
}

inline double epidemic_duration(const Trajectory& traj) { return traj.duration; }

inline constexpr double kOutbreakThreshold = 0.1;

inline bool is_major_outbreak(const Trajectory& traj, double threshold_fraction) {
    return static_cast<double>(final_size(traj)) >= threshold_fraction * static_cast<double>(traj.n_nodes);
}

inline double outbreak_probability(const BatchResult& batch, double threshold_fraction = kOutbreakThreshold) {
    if (batch.trajectories.empty()) throw invalid_argument("empty batch");
    std::size_t k = 0;
    for (const auto& t : batch.trajectories) k += is_major_outbreak(t, threshold_fraction);
    return static_cast<double>(k) / static_cast<double>(batch.size());
}

/// Mean final size over major outbreaks only; absent when there are none.
inline std::optional<double> conditional_final_size_mean(const BatchResult& batch,
                                                         double threshold_fraction = kOutbreakThreshold) {
    double sum = 0.0;
    std::size_t k = 0;
    for (const auto& t : batch.trajectories)
        if (is_major_outbreak(t, threshold_fraction)) {
            sum += static_cast<double>(final_size(t));
            ++k;
        }
    if (k == 0) return std::nullopt;
    return sum / static_cast<double>(k);
}

/// Signed relative deviation of the major-outbreak mean final fraction from `analytic_fraction`.
inline double compare_to_analytic(const BatchResult& batch, double analytic_fraction,
                                  double threshold_fraction = kOutbreakThreshold) {
    if (!(analytic_fraction > 0.0 && analytic_fraction <= 1.0))
        throw invalid_argument("analytic fraction must be in (0, 1]");
    const auto cond = conditional_final_size_mean(batch, threshold_fraction);
    if (!cond) throw invalid_argument("batch has no major outbreak to compare");
    return (*cond / static_cast<double>(batch.n_nodes) - analytic_fraction) / analytic_fraction;
}

inline constexpr double kCoexistenceEpsilon = 0.01;

/// Regime from end-of-run mean prevalences of I1 and I2.
inline BivirusRegime classify_bivirus(const BatchResult& batch, double epsilon = kCoexistenceEpsilon) {
    auto find = [&](const char* name) {
        for (std::size_t i = 0; i < batch.compartments.size(); ++i)
            if (batch.compartments[i] == name) return i;
        throw invalid_argument(std::string("batch has no compartment ") + name + "; not a bi-virus model");
    };
    const std::size_t i1 = find("I1"), i2 = find("I2");
    if (batch.trajectories.empty()) throw invalid_argument("empty batch");
    double p1 = 0.0, p2 = 0.0;
    for (const auto& t : batch.trajectories) {
        p1 += static_cast<double>(t.final_counts[i1]) / static_cast<double>(t.n_nodes);
        p2 += static_cast<double>(t.final_counts[i2]) / static_cast<double>(t.n_nodes);
    }
    p1 /= static_cast<double>(batch.size());
    p2 /= static_cast<double>(batch.size());
    const bool alive1 = p1 >= epsilon, alive2 = p2 >= epsilon;
    if (alive1 && alive2) return BivirusRegime::coexistence;
    if (alive1) return BivirusRegime::dominance_1;
    if (alive2) return BivirusRegime::dominance_2;
    return BivirusRegime::extinction;
}

struct MetricsOptions {
    std::string peak_compartment = "I";
    double outbreak_threshold = kOutbreakThreshold;
    std::optional<double> analytic_final_size;
    bool bivirus = false;
    double bivirus_epsilon = kCoexistenceEpsilon;
};

inline MetricsReport compute_metrics(const BatchResult& batch, const AggregateSeries& series,
                                     const MetricsOptions& options) {
    MetricsReport m;
    if (!series.grid.empty()) std::tie(m.peak_time, m.peak_size) = peak_metrics(series, options.peak_compartment);
    const double r = static_cast<double>(batch.size());
    double sum = 0.0, dur = 0.0;
    for (const auto& t : batch.trajectories) {
        sum += static_cast<double>(final_size(t));
        dur += epidemic_duration(t);
    }
    m.final_size_mean = sum / r;
    double ss = 0.0;
    for (const auto& t : batch.trajectories) {
        const double d = static_cast<double>(final_size(t)) - m.final_size_mean;
        ss += d * d;
    }
    m.final_size_std = std::sqrt(ss / r);
    m.final_size_conditional_mean = conditional_final_size_mean(batch, options.outbreak_threshold);
    m.outbreak_probability = outbreak_probability(batch, options.outbreak_threshold);
    m.duration_mean = dur / r;
    m.analytic_final_size = options.analytic_final_size;
    if (options.bivirus) m.regime = classify_bivirus(batch, options.bivirus_epsilon);
    return m;
}

} // namespace epinet
