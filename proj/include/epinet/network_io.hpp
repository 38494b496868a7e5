#pragma once

#include "network.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace epinet {

/// "%.17g": round-trips every double.
inline std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Edge-list text format:
//   # comment
//   nodes N
//   layer NAME            (optional; declares layer order, keeps empty layers)
//   u v weight NAME
inline void write_network(std::ostream& out, const Network& net) {
    out << "# epinet edge list: u v weight layer\n";
    out << "nodes " << net.n_nodes() << '\n';
    for (const auto& l : net.layers()) out << "layer " << l.name() << '\n';
    for (const auto& l : net.layers())
        for (const auto& e : l.edges()) out << e.u << ' ' << e.v << ' ' << format_real(e.weight) << ' ' << l.name() << '\n';
}

namespace detail {

template <class T>
bool parse_number(const std::string& token, T& value) {
    const char* first = token.data();
    const char* last = first + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    return ec == std::errc() && ptr == last;
}

} // namespace detail

inline Network read_network(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    bool have_nodes = false;
    std::size_t n = 0;
    std::vector<std::string> order;
    std::map<std::string, std::vector<Edge>> edges;
    std::map<std::string, std::map<std::pair<NodeId, NodeId>, std::size_t>> seen;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ss(line);
        std::vector<std::string> tok;
        for (std::string t; ss >> t;) tok.push_back(t);

        if (tok[0] == "nodes") {
            if (have_nodes) throw parse_error("duplicate 'nodes' header", lineno);
            if (tok.size() != 2 || !detail::parse_number(tok[1], n)) throw parse_error("expected 'nodes N'", lineno);
            have_nodes = true;
            continue;
        }
        if (!have_nodes) throw parse_error("'nodes N' header must precede edges", lineno);
        if (tok[0] == "layer") {
            if (tok.size() != 2) throw parse_error("expected 'layer NAME'", lineno);
            if (!edges.count(tok[1])) {
                order.push_back(tok[1]);
                edges[tok[1]];
            }
            continue;
        }
        if (tok.size() != 4) throw parse_error("expected 'u v weight layer', got " + std::to_string(tok.size()) + " fields", lineno);
        Edge e;
        if (!detail::parse_number(tok[0], e.u) || !detail::parse_number(tok[1], e.v))
            throw parse_error("node ids must be non-negative integers", lineno);
        if (!detail::parse_number(tok[2], e.weight)) throw parse_error("bad weight '" + tok[2] + "'", lineno);
        if (e.u == e.v) throw parse_error("self-loop on node " + tok[0], lineno);
        if (e.u >= n || e.v >= n) throw parse_error("node id out of range [0, " + std::to_string(n) + ")", lineno);
        if (!(e.weight > 0.0)) throw parse_error("weight must be > 0", lineno);
        const auto& name = tok[3];
        if (!edges.count(name)) {
            order.push_back(name);
            edges[name];
        }
        const auto key = std::minmax(e.u, e.v);
        auto [it, fresh] = seen[name].emplace(key, lineno);
        if (!fresh)
            throw parse_error("duplicate edge (" + tok[0] + ", " + tok[1] + ") in layer " + name + ", first on line " +
                                  std::to_string(it->second),
                              lineno);
        edges[name].push_back(e);
    }
    if (!have_nodes) throw parse_error("missing 'nodes N' header", 0);
    std::vector<Layer> layers;
    for (const auto& name : order) layers.emplace_back(name, n, std::move(edges[name]));
    return Network(n, std::move(layers));
}

inline void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_network(out, net);
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline Network load_network(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_network(in);
}

} // namespace epinet
