#pragma once

#include "analyze.hpp"
#include "calibrate.hpp"
#include "engine.hpp"
#include "network_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace epinet {

// realization,time,<compartment...>; one row per grid sample
inline void write_trajectories_csv(std::ostream& out, const BatchResult& batch) {
    out << "realization,time";
    for (const auto& c : batch.compartments) out << ',' << c;
    out << '\n';
    for (std::size_t r = 0; r < batch.size(); ++r) {
        const auto& t = batch.trajectories[r];
        for (std::size_t g = 0; g < batch.grid.size(); ++g) {
            out << r << ',' << format_real(batch.grid[g]);
            for (auto c : t.grid_counts[g]) out << ',' << c;
            out << '\n';
        }
    }
}

// realization,time,node,from,to
inline void write_events_csv(std::ostream& out, const BatchResult& batch) {
    out << "realization,time,node,from,to\n";
    for (std::size_t r = 0; r < batch.size(); ++r)
        for (const auto& e : batch.trajectories[r].events)
            out << r << ',' << format_real(e.time) << ',' << e.node << ',' << batch.compartments[e.from] << ','
                << batch.compartments[e.to] << '\n';
}

// time,<c>_mean,<c>_std,...
inline void write_aggregate_csv(std::ostream& out, const AggregateSeries& s) {
    out << "time";
    for (const auto& c : s.compartments) out << ',' << c << "_mean," << c << "_std";
    out << '\n';
    for (std::size_t g = 0; g < s.grid.size(); ++g) {
        out << format_real(s.grid[g]);
        for (std::size_t c = 0; c < s.compartments.size(); ++c)
            out << ',' << format_real(s.mean[g][c]) << ',' << format_real(s.std[g][c]);
        out << '\n';
    }
}

inline nlohmann::json metrics_json(const MetricsReport& m, const BatchResult& batch, double outbreak_threshold) {
    nlohmann::json j;
    j["peak_time"] = m.peak_time;
    j["peak_size"] = m.peak_size;
    j["final_size_mean"] = m.final_size_mean;
    j["final_size_std"] = m.final_size_std;
    j["final_size_conditional_mean"] =
        m.final_size_conditional_mean ? nlohmann::json(*m.final_size_conditional_mean) : nlohmann::json(nullptr);
    j["outbreak_probability"] = m.outbreak_probability;
    j["duration_mean"] = m.duration_mean;
    j["analytic_final_size"] = m.analytic_final_size ? nlohmann::json(*m.analytic_final_size) : nlohmann::json(nullptr);
    j["regime"] = m.regime ? nlohmann::json(to_string(*m.regime)) : nlohmann::json(nullptr);
    j["metadata"] = {{"n_nodes", batch.n_nodes},
                     {"n_realizations", batch.size()},
                     {"std_estimator", "population"},
                     {"outbreak_threshold_fraction", outbreak_threshold},
                     {"compartments", batch.compartments}};
    return j;
}

inline nlohmann::json calibration_json(const CalibrationReport& c) {
    return {{"r0", c.r0},
            {"per_contact_rate", c.per_contact_rate},
            {"recovery_rate", c.recovery_rate},
            {"basis", to_string(c.basis)},
            {"reference_quantity", c.reference_quantity}};
}

/// Static SVG: mean line with a +-1 std band for one compartment.
inline void write_svg(std::ostream& out, const AggregateSeries& s, const std::string& compartment) {
    const std::size_t c = s.index_of(compartment);
    const double w = 640, h = 400, ml = 60, mr = 20, mt = 30, mb = 40;
    const double t0 = s.grid.empty() ? 0.0 : s.grid.front();
    const double t1 = s.grid.empty() ? 1.0 : std::max(s.grid.back(), t0 + 1e-12);
    const double ymax = std::max(1.0, static_cast<double>(s.n_nodes));
    auto X = [&](double t) { return ml + (t - t0) / (t1 - t0) * (w - ml - mr); };
    auto Y = [&](double y) { return mt + (1.0 - std::clamp(y / ymax, 0.0, 1.0)) * (h - mt - mb); };
    auto fmt = [](double v) {
        std::ostringstream o;
        o.precision(6);
        o << v;
        return o.str();
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
        << ' ' << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << ml << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << compartment
        << " (mean, +-1 std, " << s.n_realizations << " realizations)</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ml << "\" y=\"" << h - 10 << "\" font-family=\"sans-serif\" font-size=\"11\">t=" << fmt(t0)
        << "</text>\n";
    out << "<text x=\"" << w - mr - 60 << "\" y=\"" << h - 10 << "\" font-family=\"sans-serif\" font-size=\"11\">t="
        << fmt(t1) << "</text>\n";
    out << "<text x=\"5\" y=\"" << mt + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(ymax)
        << "</text>\n";
    if (!s.grid.empty()) {
        out << "<polygon fill=\"steelblue\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
        for (std::size_t g = 0; g < s.grid.size(); ++g)
            out << fmt(X(s.grid[g])) << ',' << fmt(Y(s.mean[g][c] + s.std[g][c])) << ' ';
        for (std::size_t g = s.grid.size(); g-- > 0;)
            out << fmt(X(s.grid[g])) << ',' << fmt(Y(s.mean[g][c] - s.std[g][c])) << ' ';
        out << "\"/>\n";
        out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
        for (std::size_t g = 0; g < s.grid.size(); ++g) out << fmt(X(s.grid[g])) << ',' << fmt(Y(s.mean[g][c])) << ' ';
        out << "\"/>\n";
    }
    out << "</svg>\n";
}

/// Reads a trajectories CSV back into a batch (grid samples only; the last
/// sample of each realization stands in for its final state and the last
/// sample time at which counts changed stands in for the duration).
/// Nodes found in `immune_compartment` at the first sample are treated as
/// vaccinated, so they do not count towards the final size.
inline BatchResult read_trajectories_csv(std::istream& in, const std::string& immune_compartment = "") {
    BatchResult b;
    std::string line;
    std::size_t lineno = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cell;
        std::istringstream ss(s);
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    if (!std::getline(in, line)) throw parse_error("empty trajectories file", 0);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split(line);
    if (header.size() < 3 || header[0] != "realization" || header[1] != "time")
        throw parse_error("expected header 'realization,time,<compartments>'", 1);
    b.compartments.assign(header.begin() + 2, header.end());
    std::ptrdiff_t immune = -1;
    if (!immune_compartment.empty()) {
        const auto it = std::find(b.compartments.begin(), b.compartments.end(), immune_compartment);
        if (it == b.compartments.end()) throw invalid_argument("no compartment '" + immune_compartment + "' in file");
        immune = it - b.compartments.begin();
    }
    std::size_t current = static_cast<std::size_t>(-1);
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != header.size()) throw parse_error("wrong number of fields", lineno);
        std::size_t r = 0;
        double time = 0;
        if (!detail::parse_number(cells[0], r) || !detail::parse_number(cells[1], time))
            throw parse_error("bad realization index or time", lineno);
        std::vector<std::size_t> counts(b.compartments.size());
        for (std::size_t c = 0; c < counts.size(); ++c)
            if (!detail::parse_number(cells[c + 2], counts[c])) throw parse_error("bad count", lineno);
        if (r != current) {
            if (r != b.trajectories.size()) throw parse_error("realizations must be contiguous and start at 0", lineno);
            current = r;
            b.trajectories.emplace_back();
            b.seeds.push_back(r);
        }
        auto& t = b.trajectories.back();
        if (r == 0) b.grid.push_back(time);
        else if (t.grid_counts.size() >= b.grid.size() || b.grid[t.grid_counts.size()] != time)
            throw parse_error("realization grid differs from realization 0", lineno);
        std::size_t total = 0;
        for (auto c : counts) total += c;
        if (t.grid_counts.empty()) {
            t.n_nodes = total;
            t.initial_counts = counts;
            if (immune >= 0) t.immunized = counts[static_cast<std::size_t>(immune)];
        } else if (total != t.n_nodes) {
            throw parse_error("compartment totals change within a realization", lineno);
        } else if (counts != t.grid_counts.back()) {
            t.duration = time;
        }
        t.grid_counts.push_back(counts);
        t.final_counts = counts;
        t.end_time = time;
    }
    for (const auto& t : b.trajectories)
        if (t.grid_counts.size() != b.grid.size()) throw parse_error("realization with a truncated grid", lineno);
    if (!b.trajectories.empty()) b.n_nodes = b.trajectories.front().n_nodes;
    return b;
}

} // namespace epinet
