#pragma once

#include "errors.hpp"
#include "model.hpp"
#include "network.hpp"
#include "rng.hpp"
#include "temporal.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace epinet {

struct SimulationOptions {
    std::vector<double> sample_grid;
    bool record_events = false;
};

struct Event {
    double time;
    NodeId node;
    std::uint16_t from;
    std::uint16_t to;

    friend bool operator==(const Event&, const Event&) = default;
};

/// One realization. grid_counts[i] holds per-compartment totals at
/// sample_grid[i]; events are kept only when requested.
struct Trajectory {
    std::size_t n_nodes = 0;
    std::vector<std::size_t> initial_counts;
    std::vector<std::vector<std::size_t>> grid_counts;
    std::vector<std::size_t> final_counts;
    std::vector<Event> events;
    std::size_t n_events = 0;
    double end_time = 0.0;  // absorption time, or the horizon
    double duration = 0.0;  // last event (continuous) / last step with an infectious node (discrete)
    std::size_t immunized = 0;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

namespace detail {

inline void check_grid(const std::vector<double>& grid, double t_end) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || grid[i] > t_end)
            throw invalid_argument("sample grid point " + std::to_string(grid[i]) + " outside [0, " +
                                   std::to_string(t_end) + "]");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw invalid_argument("sample grid must be strictly increasing");
    }
}

/// Complete binary sum tree over node rates; parents are recomputed from their
/// children on every update, so an all-zero tree sums to exactly zero.
class RateTree {
public:
    explicit RateTree(std::size_t n) {
        size_ = 1;
        while (size_ < n) size_ <<= 1;
        tree_.assign(2 * size_, 0.0);
    }

    void build(std::span<const double> rates) {
        std::fill(tree_.begin(), tree_.end(), 0.0);
        std::copy(rates.begin(), rates.end(), tree_.begin() + static_cast<std::ptrdiff_t>(size_));
        for (std::size_t i = size_ - 1; i >= 1; --i) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
    }

    void set(std::size_t leaf, double rate) {
        std::size_t i = size_ + leaf;
        tree_[i] = rate;
        for (i >>= 1; i >= 1; i >>= 1) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
    }

    double total() const { return tree_[1]; }
    double leaf(std::size_t i) const { return tree_[size_ + i]; }

    /// Leaf whose cumulative interval contains x in [0, total()). Never
    /// returns a zero-rate leaf while total() > 0.
    std::size_t find(double x) const {
        std::size_t i = 1;
        while (i < size_) {
            const double left = tree_[2 * i];
            if (x < left) {
                i = 2 * i;
            } else if (tree_[2 * i + 1] > 0.0) {
                x -= left;
                i = 2 * i + 1;
            } else {
                i = 2 * i;
            }
        }
        return i - size_;
    }

private:
    std::size_t size_ = 1;
    std::vector<double> tree_;
};

/// Schema resolved against one network: indices instead of names, edge
/// transitions grouped by the (layer, inducer) pair that drives them.
struct CompiledModel {
    struct Nodal {
        std::uint16_t to;
        double rate;
    };
    struct EdgeRule {
        std::uint16_t to;
        std::size_t group;
        double rate;
    };
    struct Group {
        const Layer* layer;
        std::uint16_t inducer;
    };

    std::size_t n_compartments = 0;
    std::vector<std::vector<Nodal>> nodal_by_from;
    std::vector<std::vector<EdgeRule>> edge_by_from;
    std::vector<Group> groups;
    std::vector<std::vector<std::size_t>> groups_by_inducer;

    CompiledModel(const ModelSchema& model, const Network& net) {
        if (auto errors = validate_schema(model, net); !errors.empty()) throw validation_error(std::move(errors));
        if (model.compartments.size() > std::numeric_limits<std::uint16_t>::max())
            throw invalid_argument("too many compartments");
        n_compartments = model.compartments.size();
        nodal_by_from.resize(n_compartments);
        edge_by_from.resize(n_compartments);
        groups_by_inducer.resize(n_compartments);
        auto idx = [&](const std::string& c) { return static_cast<std::uint16_t>(model.index_of(c)); };
        for (const auto& t : model.nodal) nodal_by_from[idx(t.from)].push_back({idx(t.to), t.rate});
        for (const auto& t : model.edge) {
            const Layer* layer = &net.layer(t.layer);
            const auto inducer = idx(t.inducer);
            std::size_t g = 0;
            while (g < groups.size() && !(groups[g].layer == layer && groups[g].inducer == inducer)) ++g;
            if (g == groups.size()) {
                groups.push_back({layer, inducer});
                groups_by_inducer[inducer].push_back(g);
            }
            edge_by_from[idx(t.from)].push_back({idx(t.to), g, t.rate_per_contact});
        }
    }
};

} // namespace detail

/// Exact CTMC sample path (Gillespie direct method).
///
/// Each node carries its total outgoing rate in a sum tree; after an event only
/// the event node and its neighbors on the layers whose pressure changed are
/// re-rated. Runs until t_max or until the total rate is zero.
inline Trajectory run_ctmc(const Network& net, const ModelSchema& model, const NodeStateVector& initial, double t_max,
                           Rng& rng, const SimulationOptions& options = {}) {
    const detail::CompiledModel cm(model, net);
    const std::size_t n = net.n_nodes();
    if (initial.size() != n)
        throw invalid_argument("initial state covers " + std::to_string(initial.size()) + " nodes, network has " +
                               std::to_string(n));
    if (initial.n_compartments() != cm.n_compartments)
        throw invalid_argument("initial state has the wrong number of compartments");
    if (!(t_max > 0.0)) throw invalid_argument("t_max must be > 0");
    const auto& grid = options.sample_grid;
    detail::check_grid(grid, t_max);

    std::vector<std::uint16_t> state = initial.states();
    std::vector<std::size_t> counts = initial.counts();

    const std::size_t n_groups = cm.groups.size();
    std::vector<double> pressure(n_groups * n, 0.0);
    std::vector<std::uint32_t> inducers(n_groups * n, 0);
    for (std::size_t g = 0; g < n_groups; ++g) {
        const auto& grp = cm.groups[g];
        for (NodeId v = 0; v < n; ++v) {
            if (state[v] != grp.inducer) continue;
            for (const auto& nb : grp.layer->neighbors(v)) {
                pressure[g * n + nb.node] += nb.weight;
                ++inducers[g * n + nb.node];
            }
        }
    }

    auto node_rate = [&](NodeId v) {
        const auto s = state[v];
        double r = 0.0;
        for (const auto& t : cm.nodal_by_from[s]) r += t.rate;
        for (const auto& t : cm.edge_by_from[s]) r += t.rate * pressure[t.group * n + v];
        return r;
    };

    std::vector<double> rates(n);
    for (NodeId v = 0; v < n; ++v) rates[v] = node_rate(v);
    detail::RateTree tree(n);
    tree.build(rates);

    Trajectory traj;
    traj.n_nodes = n;
    traj.initial_counts = counts;
    traj.immunized = initial.immunized();
    traj.grid_counts.reserve(grid.size());
    std::size_t gi = 0;

    auto rerate = [&](NodeId v) {
        const double r = node_rate(v);
        if (r != rates[v]) {
            rates[v] = r;
            tree.set(v, r);
        }
    };
    auto shift_pressure = [&](std::uint16_t inducer, NodeId v, double sign) {
        for (std::size_t g : cm.groups_by_inducer[inducer]) {
            for (const auto& nb : cm.groups[g].layer->neighbors(v)) {
                const std::size_t k = g * n + nb.node;
                if (sign > 0) {
                    pressure[k] += nb.weight;
                    ++inducers[k];
                } else if (--inducers[k] == 0) {
                    pressure[k] = 0.0;
                } else {
                    pressure[k] -= nb.weight;
                }
                rerate(nb.node);
            }
        }
    };

    // x in [0, rates[v]); nodal rules first, then edge rules, in schema order
    auto pick_transition = [&](NodeId v, double x) {
        const auto s = state[v];
        std::uint16_t last = s;
        for (const auto& tr : cm.nodal_by_from[s]) {
            if (tr.rate <= 0.0) continue;
            last = tr.to;
            if (x < tr.rate) return tr.to;
            x -= tr.rate;
        }
        for (const auto& tr : cm.edge_by_from[s]) {
            const double r = tr.rate * pressure[tr.group * n + v];
            if (r <= 0.0) continue;
            last = tr.to;
            if (x < r) return tr.to;
            x -= r;
        }
        return last; // rounding left x just past the final interval
    };

    double t = 0.0;
    while (true) {
        const double total = tree.total();
        if (!(total > 0.0)) break;
        double t_next = t + rng.exponential(total);
        if (!(t_next > t)) t_next = std::nextafter(t, std::numeric_limits<double>::infinity());
        if (t_next > t_max) {
            t = t_max;
            break;
        }
        while (gi < grid.size() && grid[gi] < t_next) {
            traj.grid_counts.push_back(counts);
            ++gi;
        }

        const auto v = static_cast<NodeId>(tree.find(rng.uniform() * total));
        const auto from = state[v];
        const std::uint16_t to = pick_transition(v, rng.uniform() * rates[v]);

        state[v] = to;
        --counts[from];
        ++counts[to];
        ++traj.n_events;
        if (options.record_events) traj.events.push_back({t_next, v, from, to});
        shift_pressure(from, v, -1.0);
        shift_pressure(to, v, +1.0);
        rerate(v);
        t = t_next;
        traj.duration = t;
    }
    while (gi < grid.size()) {
        traj.grid_counts.push_back(counts);
        ++gi;
    }
    traj.final_counts = counts;
    traj.end_time = t;
    return traj;
}

namespace detail {

inline constexpr std::uint16_t kS = 0, kI = 1, kR = 2;

/// One synchronous SIR step. Every draw reads `start`; nodes are visited in
/// `order`, which only decides which random number lands on which node.
/// Returns the post-step states.
inline std::vector<std::uint16_t> synchronous_step(const std::vector<std::uint16_t>& start,
                                                   const std::vector<std::pair<NodeId, NodeId>>& edges,
                                                   double infect_prob, double recover_prob, Rng& rng,
                                                   std::span<const NodeId> order) {
    std::vector<std::uint32_t> exposures(start.size(), 0);
    for (auto [u, v] : edges) {
        if (start[u] == kI && start[v] == kS) ++exposures[v];
        if (start[v] == kI && start[u] == kS) ++exposures[u];
    }
    std::vector<std::uint16_t> next = start;
    for (NodeId v : order) {
        if (start[v] == kS && exposures[v] > 0) {
            const double p = 1.0 - std::pow(1.0 - infect_prob, static_cast<double>(exposures[v]));
            if (rng.bernoulli(p)) next[v] = kI;
        }
    }
    // recovery comes after every transmission draw of this step
    for (NodeId v : order) {
        if (start[v] == kI && rng.bernoulli(recover_prob)) next[v] = kR;
    }
    return next;
}

inline std::size_t grid_step(double g, double dt) { return static_cast<std::size_t>(std::floor(g / dt + 1e-9)); }

} // namespace detail

/// Discrete-time SIR on an activity-driven temporal network.
///
/// Compartments are S=0, I=1, R=2. Each step draws that step's contacts, then
/// updates synchronously from the start-of-step states: an S node with j
/// infectious contacts is infected with probability 1 - (1 - infect_prob)^j and
/// every I node recovers with probability recover_prob after its own
/// transmissions for the step. Stops at the horizon or when I is extinct.
inline Trajectory run_discrete_temporal(const TemporalNetworkSpec& spec, double infect_prob, double recover_prob,
                                        const NodeStateVector& initial, Rng& rng,
                                        const SimulationOptions& options = {}) {
    if (!(infect_prob >= 0.0 && infect_prob <= 1.0)) throw invalid_argument("infection probability must be in [0, 1]");
    if (!(recover_prob >= 0.0 && recover_prob <= 1.0)) throw invalid_argument("recovery probability must be in [0, 1]");
    const std::size_t n = spec.n_nodes();
    if (initial.size() != n) throw invalid_argument("initial state does not cover the temporal network's nodes");
    if (initial.n_compartments() != 3) throw invalid_argument("discrete temporal engine needs an S, I, R state");
    const double dt = spec.step_length();
    const auto& grid = options.sample_grid;
    detail::check_grid(grid, dt * static_cast<double>(spec.horizon_steps()));

    std::vector<std::uint16_t> state = initial.states();
    std::vector<std::size_t> counts = initial.counts();
    std::vector<NodeId> order(n);
    for (NodeId v = 0; v < n; ++v) order[v] = v;

    Trajectory traj;
    traj.n_nodes = n;
    traj.initial_counts = counts;
    traj.immunized = initial.immunized();
    std::size_t gi = 0;
    auto flush_grid = [&](std::size_t step) {
        while (gi < grid.size() && detail::grid_step(grid[gi], dt) <= step) {
            traj.grid_counts.push_back(counts);
            ++gi;
        }
    };
    flush_grid(0);

    std::size_t step = 0;
    while (step < spec.horizon_steps() && counts[detail::kI] > 0) {
        ++step;
        const auto edges = sample_temporal_step(spec, rng);
        auto next = detail::synchronous_step(state, edges, infect_prob, recover_prob, rng, order);
        const double time = dt * static_cast<double>(step);
        for (NodeId v = 0; v < n; ++v) {
            if (next[v] == state[v]) continue;
            --counts[state[v]];
            ++counts[next[v]];
            ++traj.n_events;
            if (options.record_events) traj.events.push_back({time, v, state[v], next[v]});
        }
        state = std::move(next);
        flush_grid(step);
        if (counts[detail::kI] == 0) traj.duration = time;
    }
    if (counts[detail::kI] > 0) traj.duration = dt * static_cast<double>(step);
    flush_grid(std::numeric_limits<std::size_t>::max());
    traj.final_counts = counts;
    traj.end_time = dt * static_cast<double>(step);
    return traj;
}

/// Batch settings. Realization i draws from Rng(base_seed + i).
struct SimulationConfig {
    std::size_t n_realizations = 1;
    std::uint64_t base_seed = 0;
    double t_max = 0.0; // continuous engine only
    std::vector<double> sample_grid;
    bool record_events = false;
    unsigned threads = 0; // 0: hardware concurrency

    void validate_common() const {
        if (n_realizations < 1) throw invalid_argument("n_realizations must be >= 1");
    }
};

struct BatchResult {
    std::vector<std::string> compartments;
    std::size_t n_nodes = 0;
    std::vector<double> grid;
    std::vector<Trajectory> trajectories;
    std::vector<std::uint64_t> seeds;

    std::size_t size() const noexcept { return trajectories.size(); }
    friend bool operator==(const BatchResult&, const BatchResult&) = default;
};

/// Builds a realization's initial state from that realization's stream.
using InitialStateFactory = std::function<NodeStateVector(Rng&)>;

namespace detail {

/// Runs body(i) for i in [0, count) on up to `threads` workers; results are
/// written by index, so the outcome does not depend on scheduling. The
/// lowest-index exception is rethrown.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    std::vector<std::exception_ptr> errors(count);
    auto run = [&](unsigned w) {
        for (std::size_t i = w; i < count; i += workers) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        run(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

inline BatchResult run_batch(const Network& net, const ModelSchema& model, const InitialStateFactory& initial,
                             const SimulationConfig& config) {
    config.validate_common();
    if (!(config.t_max > 0.0)) throw invalid_argument("t_max must be > 0");
    detail::check_grid(config.sample_grid, config.t_max);
    if (auto errors = validate_schema(model, net); !errors.empty()) throw validation_error(std::move(errors));

    BatchResult out;
    out.compartments = model.compartments;
    out.n_nodes = net.n_nodes();
    out.grid = config.sample_grid;
    out.trajectories.resize(config.n_realizations);
    out.seeds.resize(config.n_realizations);
    const SimulationOptions opts{config.sample_grid, config.record_events};
    detail::parallel_for(config.n_realizations, config.threads, [&](std::size_t i) {
        out.seeds[i] = config.base_seed + i;
        Rng rng(out.seeds[i]);
        const NodeStateVector start = initial(rng);
        out.trajectories[i] = run_ctmc(net, model, start, config.t_max, rng, opts);
    });
    return out;
}

inline BatchResult run_batch(const Network& net, const ModelSchema& model, const NodeStateVector& initial,
                             const SimulationConfig& config) {
    return run_batch(net, model, InitialStateFactory([&initial](Rng&) { return initial; }), config);
}

inline BatchResult run_batch(const TemporalNetworkSpec& spec, double infect_prob, double recover_prob,
                             const InitialStateFactory& initial, const SimulationConfig& config) {
    config.validate_common();
    detail::check_grid(config.sample_grid, spec.step_length() * static_cast<double>(spec.horizon_steps()));
    BatchResult out;
    out.compartments = {"S", "I", "R"};
    out.n_nodes = spec.n_nodes();
    out.grid = config.sample_grid;
    out.trajectories.resize(config.n_realizations);
    out.seeds.resize(config.n_realizations);
    const SimulationOptions opts{config.sample_grid, config.record_events};
    detail::parallel_for(config.n_realizations, config.threads, [&](std::size_t i) {
        out.seeds[i] = config.base_seed + i;
        Rng rng(out.seeds[i]);
        const NodeStateVector start = initial(rng);
        out.trajectories[i] = run_discrete_temporal(spec, infect_prob, recover_prob, start, rng, opts);
    });
    return out;
}

inline BatchResult run_batch(const TemporalNetworkSpec& spec, double infect_prob, double recover_prob,
                             const NodeStateVector& initial, const SimulationConfig& config) {
    return run_batch(spec, infect_prob, recover_prob, InitialStateFactory([&initial](Rng&) { return initial; }),
                     config);
}

} // namespace epinet
