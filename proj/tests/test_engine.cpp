#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <set>

using namespace epinet;
using Catch::Approx;

TEST_CASE("no infectious nodes, no events", "[engine]") {
    const auto net = generate_complete(10);
    const auto model = builtin_sir(1.0, 1.0);
    Rng rng(1);
    SimulationOptions opts{{0.0, 5.0}, true};
    const auto t = run_ctmc(net, model, susceptible_state(10, model), 10.0, rng, opts);
    REQUIRE(t.events.empty());
    REQUIRE(t.n_events == 0);
    REQUIRE(t.grid_counts.size() == 2);
    REQUIRE(final_size(t) == 0);
}

TEST_CASE("three-node path matches the exact final-size distribution", "[engine]") {
    const auto net = test_support::path(3);
    const auto model = builtin_sir(1.0, 1.0);
    const auto start = seed_explicit(net, model, {0});
    std::map<std::size_t, std::size_t> counts;
    std::size_t node2 = 0;
    SimulationOptions opts;
    opts.record_events = true;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        Rng rng(i);
        const auto t = run_ctmc(net, model, start, 1e9, rng, opts);
        ++counts[t.final_counts[2]];
        for (const auto& e : t.events) node2 += e.node == 2 && e.to == 1;
    }
    const std::map<std::size_t, double> exact{{1, 0.5}, {2, 0.25}, {3, 0.25}};
    REQUIRE(test_support::total_variation(test_support::normalize(counts), exact) < 0.02);
    REQUIRE(std::abs(static_cast<double>(node2) / 10000.0 - 0.25) <= 0.02);
}

TEST_CASE("single-seed die-out on K_500 follows the branching estimate", "[engine]") {
    const auto net = generate_complete(500);
    const auto cal = per_contact_rate(3.0, 1.0, net, "contact", CalibrationBasis::spectral);
    const auto model = builtin_sir(cal.per_contact_rate, 1.0);
    SimulationConfig cfg;
    cfg.n_realizations = 1000;
    cfg.base_seed = 100;
    cfg.t_max = 1e6;
    const auto batch = run_batch(net, model, seed_explicit(net, model, {0}), cfg);
    const double die_out = 1.0 - outbreak_probability(batch, 0.1);
    REQUIRE(std::abs(die_out - 1.0 / 3.0) <= 0.05);
}

TEST_CASE("edge weight multiplies the infection hazard", "[engine]") {
    const Network net(2, {Layer("contact", 2, {{0, 1, 4.0}})});
    const auto model = builtin_sir(0.5, 0.0);
    const auto start = seed_explicit(net, model, {0});
    double total = 0.0;
    SimulationOptions opts;
    opts.record_events = true;
    for (std::uint64_t i = 0; i < 20000; ++i) {
        Rng rng(i);
        total += run_ctmc(net, model, start, 1e9, rng, opts).events.at(0).time;
    }
    REQUIRE(total / 20000.0 == Approx(1.0 / (4.0 * 0.5)).epsilon(0.03));
}

TEST_CASE("competing transitions race as independent clocks", "[engine]") {
    // I1 on one side, I2 on the other; the middle node goes to whichever fires first
    const Network net(3, {Layer("a", 3, {{0, 1, 1.0}}), Layer("b", 3, {{1, 2, 1.0}})});
    const auto model = builtin_bivirus(1.0, 0.0, "a", 3.0, 0.0, "b");
    auto start = susceptible_state(3, model);
    start.set(0, 1);
    start.set(2, 2);
    std::size_t took_2 = 0;
    for (std::uint64_t i = 0; i < 20000; ++i) {
        Rng rng(i);
        took_2 += run_ctmc(net, model, start, 1e9, rng).final_counts[2] == 2;
    }
    REQUIRE(static_cast<double>(took_2) / 20000.0 == Approx(0.75).margin(0.015));
}

TEST_CASE("trajectory bookkeeping", "[engine]") {
    const auto net = generate_er(300, 6.0, 2);
    const auto model = builtin_seir(0.3, 0.5, 0.2);
    Rng rng(8);
    const auto start = seed_random(net, model, 5, rng);
    SimulationOptions opts{test_support::unit_grid(80.0, 0.5), true};
    const auto t = run_ctmc(net, model, start, 80.0, rng, opts);
    REQUIRE(t.events.size() == t.n_events);
    REQUIRE(t.grid_counts.size() == opts.sample_grid.size());

    // replay the events onto the grid
    std::vector<std::size_t> counts = start.counts();
    std::size_t ei = 0;
    for (std::size_t g = 0; g < opts.sample_grid.size(); ++g) {
        while (ei < t.events.size() && t.events[ei].time <= opts.sample_grid[g]) {
            --counts[t.events[ei].from];
            ++counts[t.events[ei].to];
            ++ei;
        }
        REQUIRE(counts == t.grid_counts[g]);
    }
    for (std::size_t i = 1; i < t.events.size(); ++i) REQUIRE(t.events[i].time > t.events[i - 1].time);
    REQUIRE(t.duration == (t.events.empty() ? 0.0 : t.events.back().time));
}

TEST_CASE("engine input checks", "[engine]") {
    const auto net = generate_complete(5);
    Rng rng(0);
    REQUIRE_THROWS_AS(run_ctmc(net, builtin_sir(1, 1, "missing"), NodeStateVector(5, 3), 1.0, rng), validation_error);
    REQUIRE_THROWS_AS(run_ctmc(net, builtin_sir(1, 1), NodeStateVector(4, 3), 1.0, rng), invalid_argument);
    REQUIRE_THROWS_AS(run_ctmc(net, builtin_sir(1, 1), NodeStateVector(5, 3), 0.0, rng), invalid_argument);
    SimulationOptions bad{{0.0, 2.0}, false};
    REQUIRE_THROWS_AS(run_ctmc(net, builtin_sir(1, 1), NodeStateVector(5, 3), 1.0, rng, bad), invalid_argument);
    SimulationOptions unsorted{{0.5, 0.2}, false};
    REQUIRE_THROWS_AS(run_ctmc(net, builtin_sir(1, 1), NodeStateVector(5, 3), 1.0, rng, unsorted), invalid_argument);
}

TEST_CASE("discrete temporal engine", "[engine]") {
    SECTION("no transmission means only recoveries") {
        const TemporalNetworkSpec spec(100, 1.0, 3, 1.0, 50);
        const auto sir = builtin_sir(0, 0);
        Rng rng(3);
        SimulationOptions opts;
        opts.record_events = true;
        const auto t = run_discrete_temporal(spec, 0.0, 0.3, seed_random(100, sir, 10, rng), rng, opts);
        for (const auto& e : t.events) REQUIRE((e.from == 1 && e.to == 2));
        REQUIRE(t.final_counts[0] == 90);
    }
    SECTION("a seed that recovers in step 1 still transmits in step 1") {
        // two always-active nodes: the pair (0, 1) is present every step
        const TemporalNetworkSpec spec(2, 50.0, 1, 1.0, 5);
        auto start = NodeStateVector(2, 3);
        start.set(0, 1);
        Rng rng(1);
        SimulationOptions opts;
        opts.record_events = true;
        const auto t = run_discrete_temporal(spec, 1.0, 1.0, start, rng, opts);
        REQUIRE(t.events.size() >= 2);
        REQUIRE(t.events[0].time == 1.0);
        REQUIRE(t.events[1].time == 1.0);
        REQUIRE(t.final_counts == std::vector<std::size_t>{0, 0, 2});
    }
    SECTION("terminates when I is extinct and records the duration") {
        const TemporalNetworkSpec spec(50, 0.1, 2, 1.0, 1000);
        auto start = NodeStateVector(50, 3);
        start.set(7, 1);
        Rng rng(9);
        const auto t = run_discrete_temporal(spec, 0.0, 1.0, start, rng, {{0.0, 1.0, 500.0}, false});
        REQUIRE(t.end_time == 1.0);
        REQUIRE(t.duration == 1.0);
        REQUIRE(t.grid_counts.size() == 3);
        REQUIRE(t.grid_counts[2] == std::vector<std::size_t>{49, 0, 1});
    }
    SECTION("probability checks") {
        const TemporalNetworkSpec spec(10, 1.0, 2, 1.0, 5);
        Rng rng(0);
        REQUIRE_THROWS_AS(run_discrete_temporal(spec, 1.5, 0.1, NodeStateVector(10, 3), rng), invalid_argument);
        REQUIRE_THROWS_AS(run_discrete_temporal(spec, 0.5, -0.1, NodeStateVector(10, 3), rng), invalid_argument);
    }
}

TEST_CASE("batch execution", "[engine]") {
    const auto net = generate_ba(300, 3, 1);
    const auto model = builtin_sir(0.2, 0.5);
    const auto start = seed_explicit(net, model, {0, 1, 2});
    SimulationConfig cfg;
    cfg.n_realizations = 1;
    cfg.base_seed = 42;
    cfg.t_max = 50.0;
    cfg.sample_grid = test_support::unit_grid(50.0);

    SECTION("one realization equals a direct run") {
        const auto batch = run_batch(net, model, start, cfg);
        Rng rng(42);
        REQUIRE(batch.trajectories.front() == run_ctmc(net, model, start, 50.0, rng, {cfg.sample_grid, false}));
        REQUIRE(batch.seeds == std::vector<std::uint64_t>{42});
    }
    SECTION("repeatable and independent of the thread count") {
        cfg.n_realizations = 40;
        cfg.threads = 1;
        const auto a = run_batch(net, model, start, cfg);
        cfg.threads = 4;
        const auto b = run_batch(net, model, start, cfg);
        REQUIRE(a == b);
        REQUIRE(a.seeds.back() == 42 + 39);
    }
    SECTION("initial-state factory draws from the realization stream") {
        cfg.n_realizations = 20;
        const auto batch = run_batch(
            net, model, InitialStateFactory([&](Rng& rng) { return seed_random(net, model, 3, rng); }), cfg);
        std::set<std::vector<std::size_t>> distinct;
        for (const auto& t : batch.trajectories) distinct.insert(t.grid_counts[5]);
        REQUIRE(distinct.size() > 1);
    }
}

TEST_CASE("seeding", "[engine]") {
    const auto model = builtin_sir(1, 1);
    REQUIRE(seed_hubs(test_support::star(8), "contact", model, 1)[0] == 1);

    const auto ba = generate_ba(1000, 5, 2);
    Rng rng(1);
    REQUIRE(seed_random(ba, model, 5, rng).counts()[1] == 5);
    REQUIRE_THROWS_AS(seed_random(ba, model, 1001, rng), invalid_argument);
    REQUIRE_THROWS_AS(seed_hubs(ba, "contact", model, 1001), invalid_argument);

    const auto hubs = seed_hubs(ba, "contact", model, 5);
    REQUIRE(hubs.counts()[1] == 5);
    std::size_t min_seed = SIZE_MAX, max_other = 0;
    const auto& layer = ba.layers().front();
    for (NodeId v = 0; v < 1000; ++v) {
        if (hubs[v] == 1) min_seed = std::min(min_seed, layer.degree(v));
        else max_other = std::max(max_other, layer.degree(v));
    }
    REQUIRE(min_seed >= max_other);

    const auto expl = seed_explicit(ba, model, {3, 9});
    REQUIRE(expl[3] == 1);
    REQUIRE(expl.counts()[1] == 2);
    REQUIRE_THROWS_AS(seed_explicit(ba, model, {1000}), invalid_argument);
}

TEST_CASE("vaccination", "[engine]") {
    const auto model = builtin_sirv(1, 1);
    const auto net = generate_complete(100);
    Rng rng(4);
    const auto start = seed_random(net, model, 4, rng);

    const auto all = vaccinate_random(start, 1.0, 3, rng);
    REQUIRE(all.counts()[0] == 0);
    REQUIRE(all.counts()[1] == 4);
    REQUIRE(all.immunized() == 96);
    REQUIRE(vaccinate_random(start, 0.0, 3, rng) == start);
    REQUIRE(vaccinate_random(start, 0.5, 3, rng).counts()[3] == 48);

    const auto star = test_support::star(10);
    const auto targeted = vaccinate_targeted(susceptible_state(11, model), star, "contact",
                                             VaccinationPolicy::top_degree(), 1, 3);
    REQUIRE(targeted[0] == 3);
    REQUIRE_THROWS_AS(vaccinate_targeted(susceptible_state(11, model), star, "contact",
                                         VaccinationPolicy::degree_equals(1), 11, 3),
                      invalid_argument);
}

TEST_CASE("random vaccination above the herd threshold on K_300", "[engine]") {
    const auto net = generate_complete(300);
    const auto cal = per_contact_rate(3.0, 0.1, net, "contact", CalibrationBasis::spectral);
    const auto model = builtin_sirv(cal.per_contact_rate, 0.1);
    SimulationConfig cfg;
    cfg.n_realizations = 200;
    cfg.base_seed = 900;
    cfg.t_max = 1e5;
    const auto batch = run_batch(net, model, InitialStateFactory([&](Rng& rng) {
                                     return vaccinate_random(seed_random(net, model, 2, rng), 0.75, 3, rng);
                                 }),
                                 cfg);
    REQUIRE(outbreak_probability(batch, 0.1) < 0.1);
    for (const auto& t : batch.trajectories) REQUIRE(t.final_counts[3] == t.initial_counts[3]);
}
