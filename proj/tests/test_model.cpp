#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace epinet;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("built-in model structure", "[epimodel]") {
    const auto sir = builtin_sir(0.03, 0.1);
    REQUIRE(sir.compartments == std::vector<std::string>{"S", "I", "R"});
    REQUIRE(sir.edge.size() == 1);
    REQUIRE(sir.nodal.size() == 1);

    const auto seir = builtin_seir(0.25, 0.2, 0.1);
    REQUIRE(seir.compartments == std::vector<std::string>{"S", "E", "I", "R"});
    REQUIRE(seir.edge.front().to == "E");
    REQUIRE(seir.edge.front().inducer == "I");
    REQUIRE(seir.nodal.front().rate == 0.2);

    REQUIRE(builtin_sis(0.1, 1.0).compartments.size() == 2);

    const auto sirv = builtin_sirv(0.1, 0.1);
    REQUIRE(sirv.compartments.size() == 4);
    for (const auto& t : sirv.nodal) REQUIRE((t.from != "V" && t.to != "V"));
    for (const auto& t : sirv.edge) REQUIRE((t.from != "V" && t.inducer != "V"));

    const auto bi = builtin_bivirus(0.1, 1.0, "a", 0.2, 1.0, "b");
    REQUIRE(bi.compartments == std::vector<std::string>{"S", "I1", "I2"});
    REQUIRE(bi.edge.size() == 2);
    REQUIRE(bi.edge[0].layer != bi.edge[1].layer);

    for (const auto& m : {sir, seir, builtin_sis(1, 1), sirv, bi}) {
        for (const auto& t : m.nodal) REQUIRE(t.from != t.to);
        for (const auto& t : m.edge) REQUIRE(t.from != t.to);
    }

    REQUIRE_THROWS_AS(builtin_sir(-1, 0.1), invalid_argument);
    REQUIRE_THROWS_AS(builtin_seir(0.1, -0.2, 0.1), invalid_argument);
    REQUIRE_THROWS_AS(builtin_sis(0.1, -1), invalid_argument);
    REQUIRE_THROWS_AS(builtin_sirv(0.1, -1), invalid_argument);
    REQUIRE_THROWS_AS(builtin_bivirus(0.1, 1, "a", -0.1, 1, "b"), invalid_argument);
}

TEST_CASE("schema validation lists every problem", "[epimodel]") {
    const auto net = generate_complete(5);
    REQUIRE(validate_schema(builtin_sir(0.1, 0.1), net).empty());
    REQUIRE(validate_schema(builtin_seir(0.1, 0.1, 0.1), net).empty());
    REQUIRE(validate_schema(builtin_sirv(0.1, 0.1), net).empty());
    REQUIRE(validate_schema(builtin_sis(0.1, 0.1), net).empty());

    const auto wrong_layer = validate_schema(builtin_sir(0.1, 0.1, "school"), net);
    REQUIRE(wrong_layer.size() == 1);
    REQUIRE_THAT(wrong_layer.front(), ContainsSubstring("school"));

    ModelSchema bad{{"S", "I", "S"}, {{"I", "X", 0.1}, {"I", "I", 0.1}}, {{"S", "I", "Y", "contact", -1.0}}};
    const auto errors = validate_schema(bad, net);
    REQUIRE(errors.size() == 5);
    bool names_x = false;
    for (const auto& e : errors) names_x = names_x || e.find("'X'") != std::string::npos;
    REQUIRE(names_x);

    REQUIRE(validate_schema(ModelSchema{}).size() == 1);
}

TEST_CASE("schema JSON round trip", "[epimodel]") {
    const auto bi = builtin_bivirus(0.1, 1.0, "a", 0.2, 0.5, "b");
    const nlohmann::json j = bi;
    REQUIRE(j.contains("compartments"));
    REQUIRE(j.contains("nodal"));
    REQUIRE(j.contains("edge"));
    REQUIRE(j["edge"][0].contains("rate_per_contact"));
    const auto back = j.get<ModelSchema>();
    REQUIRE(nlohmann::json(back) == j);

    const auto path = std::filesystem::temp_directory_path() / "epinet_model_test.json";
    std::ofstream(path) << j.dump();
    REQUIRE(nlohmann::json(load_model_schema(path.string())) == j);
    std::ofstream(path) << R"({"compartments": ["S"], "nodal": [{"from": "S", "to": "Q", "rate": 1}]})";
    REQUIRE_THROWS_AS(load_model_schema(path.string()), validation_error);
    std::ofstream(path) << "{ not json";
    REQUIRE_THROWS_AS(load_model_schema(path.string()), parse_error);
    std::filesystem::remove(path);
}

TEST_CASE("node state vector keeps counts consistent", "[epimodel]") {
    NodeStateVector s(5, 3);
    REQUIRE(s.counts() == std::vector<std::size_t>{5, 0, 0});
    s.set(1, 2);
    s.set(1, 1);
    s.set(4, 2);
    REQUIRE(s.counts() == std::vector<std::size_t>{3, 1, 1});
    REQUIRE_THROWS_AS(s.set(5, 0), invalid_argument);
    REQUIRE_THROWS_AS(s.set(0, 3), invalid_argument);
}

TEST_CASE("zero rates disable transitions", "[epimodel]") {
    const auto net = generate_complete(30);
    Rng rng(1);
    SimulationOptions opts;
    SECTION("beta = 0: only recoveries") {
        const auto model = builtin_sir(0.0, 1.0);
        opts.record_events = true;
        const auto t = run_ctmc(net, model, seed_random(net, model, 3, rng), 100.0, rng, opts);
        REQUIRE(t.events.size() == 3);
        for (const auto& e : t.events) REQUIRE(e.from == 1);
    }
    SECTION("sigma = 0: E is absorbing") {
        const auto model = builtin_seir(5.0, 0.0, 1.0);
        const auto t = run_ctmc(net, model, seed_random(net, model, 1, rng, "E"), 100.0, rng, opts);
        REQUIRE(t.n_events == 0);
        REQUIRE(t.final_counts[3] == 0);
    }
    SECTION("delta = 0: SIS infects every reachable node") {
        const auto p = test_support::path(10);
        const auto model = builtin_sis(1.0, 0.0);
        const auto t = run_ctmc(p, model, seed_explicit(p, model, {0}), 1e6, rng, opts);
        REQUIRE(t.final_counts[1] == 10);
    }
    SECTION("all vaccinated: nothing happens") {
        const auto model = builtin_sirv(1.0, 1.0);
        NodeStateVector all_v(30, 4, 3);
        const auto t = run_ctmc(net, model, all_v, 10.0, rng, opts);
        REQUIRE(t.n_events == 0);
    }
}

TEST_CASE("fast incubation approaches SIR", "[epimodel]") {
    const auto net = generate_complete(50);
    const double beta = 2.0 / 49.0, gamma = 1.0;
    const auto grid = test_support::unit_grid(15.0, 0.5);
    SimulationConfig cfg;
    cfg.n_realizations = 2000;
    cfg.base_seed = 77;
    cfg.t_max = 15.0;
    cfg.sample_grid = grid;

    const auto sir = builtin_sir(beta, gamma);
    const auto seir = builtin_seir(beta, 1000.0, gamma);
    const auto a = aggregate_batch(run_batch(net, sir, seed_explicit(net, sir, {0, 1}), cfg));
    cfg.base_seed = 99;
    const auto b = aggregate_batch(run_batch(net, seir, seed_explicit(net, seir, {0, 1}), cfg));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        // R is compartment 2 in SIR and 3 in SEIR
        REQUIRE(std::abs(a.mean[g][2] - b.mean[g][3]) / 50.0 < 0.03);
        REQUIRE(std::abs(a.mean[g][0] - b.mean[g][0]) / 50.0 < 0.03);
    }
}

TEST_CASE("subcritical SIS dies out", "[epimodel]") {
    const auto net = generate_er(200, 10.0, 3);
    const double lam = spectral_radius(net, "contact", 1e-10);
    const auto model = builtin_sis(0.5 / lam, 1.0);
    SimulationConfig cfg;
    cfg.n_realizations = 50;
    cfg.t_max = 60.0;
    cfg.sample_grid = {0.0, 60.0};
    Rng rng(0);
    const auto series = aggregate_batch(run_batch(net, model, seed_random(net, model, 50, rng), cfg));
    REQUIRE(series.mean.back()[1] < 0.01 * 200);
}

TEST_CASE("bi-virus without virus 2 is SIS", "[epimodel]") {
    const auto net = generate_complete(20);
    const double beta = 1.5 / 19.0;
    const auto sis = builtin_sis(beta, 1.0);
    const auto bi = builtin_bivirus(beta, 1.0, "contact", 0.0, 0.7, "contact");
    SimulationConfig cfg;
    cfg.n_realizations = 1000;
    cfg.t_max = 5.0;
    cfg.sample_grid = {0.0, 5.0};
    cfg.base_seed = 2024;
    const auto a = run_batch(net, sis, seed_explicit(net, sis, {0, 1}), cfg);
    const auto b = run_batch(net, bi, seed_explicit(net, bi, {0, 1}, "I1"), cfg);
    std::map<std::size_t, std::size_t> ha, hb;
    for (const auto& t : a.trajectories) ++ha[final_size(t)];
    for (const auto& t : b.trajectories) {
        REQUIRE(t.final_counts[2] == 0);
        ++hb[final_size(t)];
    }
    REQUIRE(test_support::total_variation(test_support::normalize(ha), test_support::normalize(hb)) < 0.05);
}

TEST_CASE("spectral condition decides which virus survives", "[epimodel]") {
    const auto er = generate_er(500, 8.0, 11, "er");
    const auto ba = generate_ba(500, 3, 12, "ba");
    const auto net = build_multiplex(er.layers().front(), ba.layers().front(), 500);
    const double l1 = spectral_radius(net, "er", 1e-10), l2 = spectral_radius(net, "ba", 1e-10);
    const auto model = builtin_bivirus(1.5 / l1, 1.0, "er", 0.8 / l2, 1.0, "ba");
    SimulationConfig cfg;
    cfg.n_realizations = 100;
    cfg.base_seed = 31;
    cfg.t_max = 60.0;
    cfg.sample_grid = {0.0, 30.0, 60.0};
    const auto batch = run_batch(
        net, model,
        InitialStateFactory([&](Rng& rng) {
            auto s = susceptible_state(500, model);
            infect_random(s, 1, 10, rng);
            infect_random(s, 2, 10, rng);
            return s;
        }),
        cfg);
    std::size_t virus2_gone = 0;
    for (const auto& t : batch.trajectories) virus2_gone += t.final_counts[2] == 0;
    REQUIRE(virus2_gone >= 95);
    REQUIRE(classify_bivirus(batch) == BivirusRegime::dominance_1);
}
