#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>

using namespace epinet;
using Catch::Approx;

namespace {

void require_network_invariants(const Network& net) {
    for (const auto& layer : net.layers()) {
        std::set<std::pair<NodeId, NodeId>> seen;
        for (const auto& e : layer.edges()) {
            REQUIRE(e.u < net.n_nodes());
            REQUIRE(e.v < net.n_nodes());
            REQUIRE(e.u != e.v);
            REQUIRE(e.weight > 0.0);
            REQUIRE(seen.insert({std::min(e.u, e.v), std::max(e.u, e.v)}).second);
        }
    }
}

bool connected(const Layer& l) {
    if (l.node_count() == 0) return true;
    std::vector<char> seen(l.node_count(), 0);
    std::queue<NodeId> q;
    q.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!q.empty()) {
        const NodeId v = q.front();
        q.pop();
        for (const auto& nb : l.neighbors(v))
            if (!seen[nb.node]) {
                seen[nb.node] = 1;
                ++reached;
                q.push(nb.node);
            }
    }
    return reached == l.node_count();
}

// Straightforward preferential attachment used as an independent reference:
// each target is drawn by a linear scan over current degrees.
std::vector<std::size_t> reference_ba_degrees(std::size_t n, std::size_t m, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> deg(n, 0);
    for (std::size_t v = 0; v <= m; ++v) deg[v] = m;
    for (std::size_t v = m + 1; v < n; ++v) {
        std::set<std::size_t> targets;
        while (targets.size() < m) {
            const double total = std::accumulate(deg.begin(), deg.begin() + static_cast<std::ptrdiff_t>(v), 0.0);
            double x = rng.uniform() * total;
            std::size_t u = 0;
            while (u + 1 < v && x >= static_cast<double>(deg[u])) x -= static_cast<double>(deg[u++]);
            targets.insert(u);
        }
        for (auto u : targets) ++deg[u];
        deg[v] = m;
    }
    return deg;
}

} // namespace

TEST_CASE("layer rejects invariant violations", "[netgen]") {
    REQUIRE_THROWS_AS(Layer("contact", 3, {{0, 0, 1.0}}), invalid_argument);
    REQUIRE_THROWS_AS(Layer("contact", 3, {{0, 3, 1.0}}), invalid_argument);
    REQUIRE_THROWS_AS(Layer("contact", 3, {{0, 1, 0.0}}), invalid_argument);
    REQUIRE_THROWS_AS(Layer("contact", 3, {{0, 1, 1.0}, {1, 0, 2.0}}), invalid_argument);
    REQUIRE_THROWS_AS(Layer("two words", 3, {}), invalid_argument);
    const Layer ok("contact", 3, {{2, 0, 1.5}});
    REQUIRE(ok.edges().front().u == 0);
    REQUIRE(ok.strength(2) == 1.5);
}

TEST_CASE("network needs distinct layer names on one node set", "[netgen]") {
    const Layer a("a", 4, {{0, 1, 1.0}});
    REQUIRE_THROWS_AS(Network(4, {a, a}), invalid_argument);
    REQUIRE_THROWS_AS(Network(5, {a}), invalid_argument);
    const Network net(4, {a});
    REQUIRE_THROWS_AS(net.layer("missing"), invalid_argument);
}

TEST_CASE("complete graph", "[netgen]") {
    REQUIRE(generate_complete(4).layers().front().edge_count() == 6);
    REQUIRE(generate_complete(1).layers().front().edge_count() == 0);
    const auto k1000 = generate_complete(1000);
    REQUIRE(k1000.layers().front().edge_count() == 499500);
    REQUIRE(mean_degree(k1000, "contact") == 999.0);
    REQUIRE_THROWS_AS(generate_complete(0), invalid_argument);
    require_network_invariants(k1000);

    const auto h = degree_histogram(generate_complete(5), "contact");
    REQUIRE(h.counts.size() == 1);
    REQUIRE(h.counts.at(4) == 5);
}

TEST_CASE("Erdos-Renyi generator", "[netgen]") {
    const auto net = generate_er(1000, 10.0, 7);
    require_network_invariants(net);
    REQUIRE(std::abs(mean_degree(net, "contact") - 10.0) <= 0.5);
    REQUIRE(generate_er(10, 0.0, 1).layers().front().edge_count() == 0);
    REQUIRE(generate_er(1000, 10.0, 7) == net);
    REQUIRE_FALSE(generate_er(1000, 10.0, 8) == net);
    REQUIRE_THROWS_AS(generate_er(10, 9.5, 1), invalid_argument);

    // realized edge count within 4 binomial standard deviations
    const double pairs = 1000.0 * 999.0 / 2.0, p = 10.0 / 999.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const double e = static_cast<double>(generate_er(1000, 10.0, seed).layers().front().edge_count());
        REQUIRE(std::abs(e - pairs * p) <= 4.0 * std::sqrt(pairs * p * (1.0 - p)));
    }
}

TEST_CASE("Barabasi-Albert generator", "[netgen]") {
    SECTION("edge count, connectivity, mean degree") {
        for (std::size_t m : {1u, 2u, 5u}) {
            const auto net = generate_ba(1000, m, 3);
            require_network_invariants(net);
            const auto& l = net.layers().front();
            REQUIRE(l.edge_count() == m * (1000 - m - 1) + m * (m + 1) / 2);
            REQUIRE(connected(l));
        }
        const double k = mean_degree(generate_ba(1000, 5, 3), "contact");
        REQUIRE(k >= 9.5);
        REQUIRE(k <= 10.0);
    }
    SECTION("seed graph convention") {
        REQUIRE(generate_ba(6, 5, 1).layers().front() == generate_complete(6).layers().front());
        REQUIRE_THROWS_AS(generate_ba(5, 5, 1), invalid_argument);
        REQUIRE_THROWS_AS(generate_ba(5, 0, 1), invalid_argument);
    }
    SECTION("heavy tail, matched by the reference generator") {
        double ours = 0.0, reference = 0.0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto net = generate_ba(1000, 5, seed);
            const auto deg = degrees(net, "contact");
            const double kmax = static_cast<double>(*std::max_element(deg.begin(), deg.end()));
            REQUIRE(kmax > 3.0 * mean_degree(net, "contact"));
            ours += kmax;
            const auto ref = reference_ba_degrees(1000, 5, seed + 100);
            const double rmax = static_cast<double>(*std::max_element(ref.begin(), ref.end()));
            REQUIRE(rmax > 3.0 * 9.97);
            reference += rmax;
        }
        REQUIRE(ours / 20.0 == Approx(reference / 20.0).epsilon(0.25));
    }
    SECTION("determinism") { REQUIRE(generate_ba(500, 3, 9) == generate_ba(500, 3, 9)); }
}

TEST_CASE("configuration model", "[netgen]") {
    std::vector<std::size_t> seq(700, 10);
    seq.insert(seq.end(), 300, 2);
    const auto net = generate_configuration(seq, 1);
    require_network_invariants(net);
    REQUIRE(degrees(net, "contact") == seq);
    REQUIRE(count_nodes_with_degree(net, "contact", 10) == 700);
    REQUIRE(degree_histogram(net, "contact").counts.at(2) == 300);
    REQUIRE(generate_configuration(seq, 1) == net);

    REQUIRE(generate_configuration({1, 1}, 1).layers().front().edge_count() == 1);
    REQUIRE_THROWS_AS(generate_configuration({3}, 1), invalid_argument);
    REQUIRE(generate_configuration({3, 1, 1, 1}, 1).layers().front().degree(0) == 3);
    REQUIRE_THROWS_AS(generate_configuration({3, 3, 1, 1}, 1), non_realizable_sequence);
    REQUIRE_THROWS_AS(generate_configuration({2, 2}, 1), invalid_argument);
    REQUIRE_THROWS_AS(generate_configuration({4, 1, 1}, 1), invalid_argument);
}

TEST_CASE("multiplex assembly", "[netgen]") {
    const auto er = generate_er(500, 8.0, 1, "er");
    const auto ba = generate_ba(500, 3, 2, "ba");
    const auto mux = build_multiplex(er.layers().front(), ba.layers().front(), 500);
    REQUIRE(mux.layers().size() == 2);
    REQUIRE(mux.n_nodes() == 500);
    REQUIRE(mux.layer("er") == er.layers().front());
    REQUIRE_THROWS_AS(build_multiplex(er.layers().front(), generate_ba(400, 3, 2, "ba").layers().front(), 500),
                      invalid_argument);

    const auto same = build_multiplex(er.layers().front(), er.layers().front().renamed("copy"), 500);
    REQUIRE(spectral_radius(same, "er") == Approx(spectral_radius(same, "copy")).margin(1e-9));

    const auto a = generate_er(200, 4.0, 5, "a");
    const auto b = generate_er(200, 12.0, 6, "b");
    const auto ab = build_multiplex(a.layers().front(), b.layers().front(), 200);
    const double la = test_support::dense_lambda_max(ab.layer("a"));
    const double lb = test_support::dense_lambda_max(ab.layer("b"));
    REQUIRE(lb > la);
    REQUIRE(spectral_radius(ab, "b", 1e-9) > spectral_radius(ab, "a", 1e-9));
}

TEST_CASE("degree measures agree with each other", "[netgen]") {
    const auto net = generate_ba(300, 2, 4);
    const auto h = degree_histogram(net, "contact");
    REQUIRE(h.node_total() == 300);
    std::size_t weighted = 0;
    for (const auto& [k, c] : h.counts) weighted += k * c;
    REQUIRE(weighted % 2 == 0);
    REQUIRE(mean_degree(net, "contact") == Approx(static_cast<double>(weighted) / 300.0));
    for (const auto& [k, c] : h.counts) REQUIRE(count_nodes_with_degree(net, "contact", k) == c);
    REQUIRE_THROWS_AS(mean_degree(net, "nope"), invalid_argument);

    const auto order = nodes_by_degree(net, "contact");
    for (std::size_t i = 1; i < order.size(); ++i) {
        const auto d0 = net.layers().front().degree(order[i - 1]), d1 = net.layers().front().degree(order[i]);
        REQUIRE((d0 > d1 || (d0 == d1 && order[i - 1] < order[i])));
    }
}

TEST_CASE("aggregate pseudo-layer takes the union of layers", "[netgen]") {
    const Layer a("a", 4, {{0, 1, 1.0}, {1, 2, 1.0}});
    const Layer b("b", 4, {{0, 1, 1.0}, {2, 3, 1.0}});
    const Network net(4, {a, b});
    REQUIRE(degrees(net, "aggregate") == std::vector<std::size_t>{1, 2, 2, 1});
    REQUIRE(degree_histogram(net, "aggregate").layer == "aggregate");
}

TEST_CASE("spectral radius", "[netgen]") {
    for (std::size_t n : {2u, 5u, 50u}) REQUIRE(spectral_radius(generate_complete(n), "contact", 1e-10) ==
                                                Approx(static_cast<double>(n - 1)).margin(1e-8));
    for (std::size_t k : {1u, 4u, 9u, 30u})
        REQUIRE(spectral_radius(test_support::star(k), "contact", 1e-10) ==
                Approx(std::sqrt(static_cast<double>(k))).margin(1e-8));
    REQUIRE(spectral_radius(Network(5, {Layer("contact", 5, {})}), "contact") == 0.0);

    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto net = generate_er(200, 10.0, seed);
        REQUIRE(spectral_radius(net, "contact", 1e-9) ==
                Approx(test_support::dense_lambda_max(net.layers().front())).margin(1e-6));
    }
    // weighted, disconnected and bipartite inputs
    const auto agg = aggregate_temporal(TemporalNetworkSpec(150, 0.2, 2, 1.0, 40), 3);
    REQUIRE(spectral_radius(agg, "contact", 1e-9) ==
            Approx(test_support::dense_lambda_max(agg.layers().front())).margin(1e-6));
    const Network two(6, {Layer("contact", 6, {{0, 1, 1.0}, {2, 3, 1.0}, {3, 4, 1.0}, {2, 4, 1.0}})});
    REQUIRE(spectral_radius(two, "contact", 1e-10) == Approx(2.0).margin(1e-8));
    REQUIRE_THROWS_AS(spectral_radius(two, "contact", 0.0), invalid_argument);
}
