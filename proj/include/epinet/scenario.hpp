#pragma once

#include "analyze.hpp"
#include "artifacts.hpp"
#include "calibrate.hpp"
#include "engine.hpp"
#include "errors.hpp"
#include "generators.hpp"
#include "interventions.hpp"
#include "measures.hpp"
#include "model.hpp"
#include "network_io.hpp"
#include "temporal.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

// Declarative scenarios. A scenario file holds shared "defaults" and a list
// of sub-scenarios that patch them; see docs/scenario-format.md.

namespace epinet {

inline constexpr int kScenarioSchemaVersion = 1;

using json = nlohmann::json;

struct ScenarioConfig {
    std::string scenario;  // file-level name
    std::string name;      // sub-scenario name
    std::filesystem::path base_dir;
    json network;
    json model;
    std::optional<json> calibration;
    std::vector<json> seeding;
    std::optional<json> vaccination;
    std::string engine; // "ctmc" | "discrete"
    std::optional<double> t_max;
    std::optional<std::size_t> horizon_steps;
    json sample_grid;
    std::size_t realizations = 1;
    std::uint64_t base_seed = 0;
    std::optional<json> analytic_reference;
    double outbreak_threshold = kOutbreakThreshold;
    double bivirus_epsilon = kCoexistenceEpsilon;
    std::string peak_compartment;
    bool record_events = false;
    unsigned threads = 0;
    std::vector<std::string> paper_silent;
};

struct ScenarioFile {
    std::string name;
    std::string description;
    std::vector<ScenarioConfig> scenarios;
};

struct ScenarioOverrides {
    std::optional<std::uint64_t> base_seed;
    std::optional<std::size_t> realizations;
    std::optional<unsigned> threads;
};

namespace detail {

inline std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(offset, text.size()); ++i) line += text[i] == '\n';
    return line;
}

/// Collects semantic errors with a field path prefix instead of throwing on the first.
class FieldReader {
public:
    FieldReader(const json& j, std::string path, std::vector<std::string>& errors)
        : j_(j), path_(std::move(path)), errors_(errors) {}

    bool has(const char* key) const { return j_.is_object() && j_.contains(key); }
    const json& raw() const { return j_; }
    std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }
    void error(const std::string& msg) { errors_.push_back(msg); }

    template <class T>
    std::optional<T> opt(const char* key) {
        if (!has(key)) return std::nullopt;
        try {
            return j_.at(key).get<T>();
        } catch (const json::exception&) {
            errors_.push_back(path(key) + ": wrong type");
            return std::nullopt;
        }
    }
    template <class T>
    T req(const char* key, T fallback = T{}) {
        if (!has(key)) {
            errors_.push_back(path(key) + ": required field missing");
            return fallback;
        }
        return opt<T>(key).value_or(fallback);
    }
    double positive(const char* key) {
        const double v = req<double>(key, 1.0);
        if (!(v > 0.0)) errors_.push_back(path(key) + ": must be > 0");
        return v;
    }
    double nonnegative(const char* key, double fallback = 0.0) {
        const double v = has(key) ? req<double>(key, fallback) : fallback;
        if (!(v >= 0.0)) errors_.push_back(path(key) + ": must be >= 0");
        return v;
    }

private:
    const json& j_;
    std::string path_;
    std::vector<std::string>& errors_;
};

inline const std::vector<std::string>& known_models() {
    static const std::vector<std::string> names{"sir", "seir", "sis", "sirv", "bivirus"};
    return names;
}

inline void check_network_spec(const json& j, const std::string& path, std::vector<std::string>& errors) {
    FieldReader f(j, path, errors);
    if (!j.is_object()) {
        errors.push_back(path + ": must be an object");
        return;
    }
    const auto kind = f.req<std::string>("kind");
    if (kind == "complete") {
        f.req<std::size_t>("n");
    } else if (kind == "er") {
        f.req<std::size_t>("n");
        f.nonnegative("mean_degree");
    } else if (kind == "ba") {
        f.req<std::size_t>("n");
        f.req<std::size_t>("m");
    } else if (kind == "configuration") {
        if (!f.has("degree_blocks") || !j["degree_blocks"].is_array())
            errors.push_back(f.path("degree_blocks") + ": required array of {count, degree}");
    } else if (kind == "multiplex") {
        if (!f.has("layers") || !j["layers"].is_array() || j["layers"].size() != 2) {
            errors.push_back(f.path("layers") + ": multiplex needs exactly two layer specs");
        } else {
            for (std::size_t i = 0; i < 2; ++i) {
                const auto& l = j["layers"][i];
                const std::string lp = f.path("layers") + "[" + std::to_string(i) + "]";
                if (!l.is_object() || !l.contains("name")) errors.push_back(lp + ".name: required field missing");
                if (l.is_object() && l.value("kind", "") == "multiplex") errors.push_back(lp + ": nested multiplex");
                else check_network_spec(l, lp, errors);
            }
        }
    } else if (kind == "temporal" || kind == "temporal_aggregate") {
        f.req<std::size_t>("n");
        f.nonnegative("activity_rate");
        f.req<std::size_t>("edges_per_activation");
        f.positive("step_length");
        if (kind == "temporal_aggregate") f.req<std::size_t>("horizon_steps");
    } else if (kind == "file") {
        f.req<std::string>("path");
    } else if (!kind.empty()) {
        errors.push_back(f.path("kind") + ": unknown network kind '" + kind + "'");
    }
}

inline void check_grid_spec(const json& g, std::optional<double> t_end, std::vector<std::string>& errors) {
    if (!g.is_object()) {
        errors.push_back("sample_grid: must be an object with step, count or times");
        return;
    }
    if (g.contains("times")) {
        try {
            auto times = g["times"].get<std::vector<double>>();
            for (std::size_t i = 0; i < times.size(); ++i) {
                if (t_end && (times[i] < 0.0 || times[i] > *t_end))
                    errors.push_back("sample_grid.times: point " + format_real(times[i]) + " outside [0, " +
                                     format_real(*t_end) + "]");
                if (i > 0 && !(times[i] > times[i - 1]))
                    errors.push_back("sample_grid.times: must be strictly increasing");
            }
        } catch (const json::exception&) {
            errors.push_back("sample_grid.times: must be an array of numbers");
        }
    } else if (g.contains("step")) {
        if (!g["step"].is_number() || !(g["step"].get<double>() > 0.0))
            errors.push_back("sample_grid.step: must be > 0");
        if (g.contains("end") && t_end && g["end"].is_number() && g["end"].get<double>() > *t_end)
            errors.push_back("sample_grid.end: " + format_real(g["end"].get<double>()) + " is beyond the run end " +
                             format_real(*t_end));
    } else if (g.contains("count")) {
        if (!g["count"].is_number_unsigned() || g["count"].get<std::size_t>() < 1)
            errors.push_back("sample_grid.count: must be a positive integer");
    } else {
        errors.push_back("sample_grid: needs one of step, count, times");
    }
}

inline ScenarioConfig parse_sub_scenario(const json& j, const std::string& scenario, const std::string& where,
                                         const std::filesystem::path& base_dir,
                                         const std::vector<std::string>& paper_silent,
                                         std::vector<std::string>& errors) {
    ScenarioConfig c;
    c.scenario = scenario;
    c.base_dir = base_dir;
    c.paper_silent = paper_silent;
    std::vector<std::string> local;
    FieldReader f(j, "", local);

    c.name = f.req<std::string>("name");
    if (!f.has("network")) local.push_back("network: required field missing");
    else {
        c.network = j["network"];
        check_network_spec(c.network, "network", local);
    }
    const std::string net_kind = c.network.is_object() ? c.network.value("kind", "") : "";

    if (!f.has("model") || !j["model"].is_object()) {
        local.push_back("model: required object missing");
    } else {
        c.model = j["model"];
        if (c.model.contains("schema_file")) {
            if (!c.model["schema_file"].is_string()) local.push_back("model.schema_file: must be a path string");
        } else if (!c.model.contains("builtin") || !c.model["builtin"].is_string()) {
            local.push_back("model.builtin: required (one of sir, seir, sis, sirv, bivirus) unless schema_file is given");
        } else {
            const auto name = c.model["builtin"].get<std::string>();
            const auto& known = known_models();
            if (std::find(known.begin(), known.end(), name) == known.end())
                local.push_back("model.builtin: unknown model '" + name + "'");
        }
    }

    if (f.has("calibration")) c.calibration = j["calibration"];
    if (f.has("seeding")) {
        const auto& s = j["seeding"];
        if (s.is_array()) c.seeding.assign(s.begin(), s.end());
        else c.seeding.push_back(s);
        for (std::size_t i = 0; i < c.seeding.size(); ++i) {
            const auto& sd = c.seeding[i];
            const std::string sp = "seeding[" + std::to_string(i) + "]";
            const auto strat = sd.value("strategy", "");
            if (strat != "random" && strat != "hubs" && strat != "explicit")
                local.push_back(sp + ".strategy: expected random, hubs or explicit");
            if (strat == "explicit" && !sd.contains("nodes")) local.push_back(sp + ".nodes: required for explicit");
            if (strat != "explicit" && !sd.contains("count")) local.push_back(sp + ".count: required");
        }
    } else {
        local.push_back("seeding: required field missing");
    }
    if (f.has("vaccination")) {
        c.vaccination = j["vaccination"];
        const auto strat = c.vaccination->value("strategy", "");
        if (strat != "random" && strat != "targeted")
            local.push_back("vaccination.strategy: expected random or targeted");
        if (!c.vaccination->contains("compartment")) local.push_back("vaccination.compartment: required field missing");
    }

    c.engine = f.opt<std::string>("engine").value_or(net_kind == "temporal" ? "discrete" : "ctmc");
    if (c.engine != "ctmc" && c.engine != "discrete") local.push_back("engine: expected ctmc or discrete");
    if (c.engine == "discrete" && net_kind != "temporal")
        local.push_back("engine: discrete engine needs a temporal network");
    if (c.engine == "ctmc" && net_kind == "temporal")
        local.push_back("engine: ctmc cannot run on a temporal network (use temporal_aggregate)");
    c.t_max = f.opt<double>("t_max");
    c.horizon_steps = f.opt<std::size_t>("horizon_steps");
    std::optional<double> t_end;
    if (c.engine == "ctmc") {
        if (!c.t_max) local.push_back("t_max: required for the ctmc engine");
        else if (!(*c.t_max > 0.0)) local.push_back("t_max: must be > 0");
        if (c.horizon_steps) local.push_back("horizon_steps: not allowed with the ctmc engine");
        t_end = c.t_max;
    } else if (c.engine == "discrete") {
        if (!c.horizon_steps) local.push_back("horizon_steps: required for the discrete engine");
        else if (*c.horizon_steps < 1) local.push_back("horizon_steps: must be >= 1");
        if (c.t_max) local.push_back("t_max: not allowed with the discrete engine");
        if (c.horizon_steps && c.network.is_object() && c.network.contains("step_length") &&
            c.network["step_length"].is_number())
            t_end = c.network["step_length"].get<double>() * static_cast<double>(*c.horizon_steps);
    }
    if (!f.has("sample_grid")) local.push_back("sample_grid: required field missing");
    else {
        c.sample_grid = j["sample_grid"];
        check_grid_spec(c.sample_grid, t_end, local);
    }
    c.realizations = f.req<std::size_t>("realizations", 1);
    if (c.realizations < 1) local.push_back("realizations: must be >= 1");
    c.base_seed = f.opt<std::uint64_t>("base_seed").value_or(0);
    if (f.has("analytic_reference")) c.analytic_reference = j["analytic_reference"];
    c.outbreak_threshold = f.opt<double>("outbreak_threshold").value_or(kOutbreakThreshold);
    c.bivirus_epsilon = f.opt<double>("bivirus_epsilon").value_or(kCoexistenceEpsilon);
    c.peak_compartment = f.opt<std::string>("peak_compartment").value_or("");
    c.record_events = f.opt<bool>("record_events").value_or(false);
    c.threads = f.opt<unsigned>("threads").value_or(0);

    const std::string prefix = where + (c.name.empty() ? "" : " '" + c.name + "'") + ": ";
    for (auto& e : local) errors.push_back(prefix + e);
    return c;
}

} // namespace detail

inline ScenarioFile parse_scenario(const std::string& text, const std::filesystem::path& base_dir = ".") {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("invalid JSON: ") + e.what(), detail::line_of_offset(text, e.byte));
    }
    std::vector<std::string> errors;
    ScenarioFile file;
    if (!root.is_object()) throw validation_error({"scenario file must be a JSON object"});
    if (!root.contains("schema_version") || !root["schema_version"].is_number_integer())
        errors.push_back("schema_version: required integer field missing");
    else if (root["schema_version"].get<int>() != kScenarioSchemaVersion)
        errors.push_back("schema_version: unsupported version " + root["schema_version"].dump());
    file.name = root.value("name", "");
    if (file.name.empty()) errors.push_back("name: required field missing");
    file.description = root.value("description", "");
    std::vector<std::string> paper_silent;
    if (root.contains("paper_silent")) {
        try {
            paper_silent = root["paper_silent"].get<std::vector<std::string>>();
        } catch (const json::exception&) {
            errors.push_back("paper_silent: must be a list of field names");
        }
    }
    const json defaults = root.value("defaults", json::object());
    if (!root.contains("scenarios") || !root["scenarios"].is_array() || root["scenarios"].empty()) {
        errors.push_back("scenarios: required non-empty array");
    } else {
        std::size_t i = 0;
        for (const auto& sub : root["scenarios"]) {
            json merged = defaults;
            merged.merge_patch(sub);
            file.scenarios.push_back(detail::parse_sub_scenario(merged, file.name, "scenarios[" + std::to_string(i) + "]",
                                                                base_dir, paper_silent, errors));
            for (std::size_t k = 0; k + 1 < file.scenarios.size(); ++k)
                if (file.scenarios[k].name == file.scenarios.back().name)
                    errors.push_back("scenarios[" + std::to_string(i) + "]: duplicate name '" +
                                     file.scenarios.back().name + "'");
            ++i;
        }
    }
    if (!errors.empty()) throw validation_error(std::move(errors));
    return file;
}

inline ScenarioFile load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open scenario file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_scenario(ss.str(), path.parent_path());
    } catch (const parse_error& e) {
        throw parse_error(path.string() + ": " + e.message(), e.line());
    }
}

namespace detail {

inline Network build_single_network(const json& spec, const std::string& layer_name,
                                    const std::filesystem::path& base_dir) {
    const auto kind = spec.at("kind").get<std::string>();
    const auto seed = spec.value("seed", std::uint64_t{0});
    if (kind == "complete") return generate_complete(spec.at("n").get<std::size_t>(), layer_name);
    if (kind == "er")
        return generate_er(spec.at("n").get<std::size_t>(), spec.at("mean_degree").get<double>(), seed, layer_name);
    if (kind == "ba") return generate_ba(spec.at("n").get<std::size_t>(), spec.at("m").get<std::size_t>(), seed, layer_name);
    if (kind == "configuration") {
        std::vector<std::size_t> degrees;
        for (const auto& block : spec.at("degree_blocks"))
            degrees.insert(degrees.end(), block.at("count").get<std::size_t>(), block.at("degree").get<std::size_t>());
        return generate_configuration(degrees, seed, layer_name);
    }
    if (kind == "temporal_aggregate") {
        const TemporalNetworkSpec ts(spec.at("n").get<std::size_t>(), spec.at("activity_rate").get<double>(),
                                     spec.at("edges_per_activation").get<std::size_t>(),
                                     spec.at("step_length").get<double>(), spec.at("horizon_steps").get<std::size_t>());
        return aggregate_temporal(ts, seed, layer_name);
    }
    if (kind == "file") {
        auto p = std::filesystem::path(spec.at("path").get<std::string>());
        if (p.is_relative()) p = base_dir / p;
        return load_network(p.string());
    }
    throw invalid_argument("network kind '" + kind + "' cannot be built as a static network");
}

inline Network build_network(const json& spec, const std::filesystem::path& base_dir) {
    const auto kind = spec.at("kind").get<std::string>();
    if (kind == "multiplex") {
        const auto& ls = spec.at("layers");
        const Network a = build_single_network(ls[0], ls[0].at("name").get<std::string>(), base_dir);
        const Network b = build_single_network(ls[1], ls[1].at("name").get<std::string>(), base_dir);
        return build_multiplex(a.layers().front(), b.layers().front(), a.n_nodes());
    }
    return build_single_network(spec, spec.value("layer", std::string(kDefaultLayer)), base_dir);
}

inline TemporalNetworkSpec build_temporal_spec(const json& spec, std::size_t horizon) {
    return TemporalNetworkSpec(spec.at("n").get<std::size_t>(), spec.at("activity_rate").get<double>(),
                               spec.at("edges_per_activation").get<std::size_t>(), spec.at("step_length").get<double>(),
                               horizon);
}

inline std::vector<double> build_grid(const json& g, double t_end) {
    std::vector<double> grid;
    if (g.contains("times")) return g["times"].get<std::vector<double>>();
    if (g.contains("step")) {
        const double step = g["step"].get<double>();
        const double end = g.value("end", t_end);
        const auto n = static_cast<std::size_t>(std::floor(end / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) grid.push_back(std::min(end, static_cast<double>(i) * step));
        return grid;
    }
    const auto count = g.at("count").get<std::size_t>();
    if (count == 1) return {0.0};
    for (std::size_t i = 0; i < count; ++i)
        grid.push_back(t_end * static_cast<double>(i) / static_cast<double>(count - 1));
    return grid;
}

} // namespace detail

/// Everything a run produced; artifacts are written from this.
struct ScenarioResult {
    std::string scenario;
    std::string name;
    MetricsReport metrics;
    BatchResult batch;
    AggregateSeries series;
    json calibration; // parameters actually used
    double outbreak_threshold = kOutbreakThreshold;
};

/// generate -> calibrate -> seed -> (vaccinate) -> simulate -> analyze.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg, const ScenarioOverrides& overrides = {}) {
    try {
        ScenarioResult res;
        res.scenario = cfg.scenario;
        res.name = cfg.name;
        res.outbreak_threshold = cfg.outbreak_threshold;

        SimulationConfig sim;
        sim.n_realizations = overrides.realizations.value_or(cfg.realizations);
        sim.base_seed = overrides.base_seed.value_or(cfg.base_seed);
        sim.record_events = cfg.record_events;
        sim.threads = overrides.threads.value_or(cfg.threads);

        const json& m = cfg.model;
        const json cal = cfg.calibration.value_or(json::object());
        json used = json::object();
        std::optional<double> r0;
        if (cal.contains("r0")) r0 = cal["r0"].get<double>();

        if (cfg.engine == "discrete") {
            // SIR on the activity-driven process; per-step probabilities come
            // from rates: p = 1 - exp(-rate * dt).
            const auto spec = detail::build_temporal_spec(cfg.network, *cfg.horizon_steps);
            const double dt = spec.step_length();
            double gamma = cal.value("gamma", m.value("gamma", 1.0));
            double beta = m.value("beta", 0.0);
            if (r0) {
                const double a = spec.activity_rate();
                const double bc = activity_driven_threshold(gamma, spec.edges_per_activation(), a, a * a);
                beta = *r0 * bc;
                used["threshold_per_contact_rate"] = bc;
                used["basis"] = "activity-driven";
            }
            const double infect = m.contains("infect_prob") ? m["infect_prob"].get<double>() : -std::expm1(-beta * dt);
            const double recover =
                m.contains("recover_prob") ? m["recover_prob"].get<double>() : -std::expm1(-gamma * dt);
            used["per_contact_rate"] = beta;
            used["recovery_rate"] = gamma;
            used["infect_prob"] = infect;
            used["recover_prob"] = recover;
            if (r0) used["r0"] = *r0;

            const ModelSchema sir = builtin_sir(beta, gamma);
            sim.sample_grid = detail::build_grid(cfg.sample_grid, dt * static_cast<double>(spec.horizon_steps()));
            const auto seeding = cfg.seeding;
            InitialStateFactory factory = [&](Rng& rng) {
                auto state = susceptible_state(spec.n_nodes(), sir);
                for (const auto& sd : seeding) {
                    const auto comp = static_cast<std::uint16_t>(sir.index_of(sd.value("compartment", "I")));
                    const auto strategy = sd.at("strategy").get<std::string>();
                    if (strategy == "random") {
                        infect_random(state, comp, sd.at("count").get<std::size_t>(), rng);
                    } else if (strategy == "explicit") {
                        for (auto v : sd.at("nodes").get<std::vector<NodeId>>()) state.set(v, comp);
                    } else {
                        throw invalid_argument("hub seeding needs a static network");
                    }
                }
                if (cfg.vaccination) {
                    const auto& vac = *cfg.vaccination;
                    if (vac.at("strategy") != "random")
                        throw invalid_argument("only random vaccination is available on temporal networks");
                    state = vaccinate_random(state, vac.at("fraction").get<double>(),
                                             static_cast<std::uint16_t>(sir.index_of(vac.at("compartment"))), rng);
                }
                return state;
            };
            res.batch = run_batch(spec, infect, recover, factory, sim);
        } else {
            const Network net = detail::build_network(cfg.network, cfg.base_dir);
            ModelSchema model;
            std::string primary_layer = net.layers().empty() ? std::string(kDefaultLayer) : net.layers().front().name();
            double beta = 0.0, gamma = 0.0;
            if (m.contains("schema_file")) {
                auto p = std::filesystem::path(m["schema_file"].get<std::string>());
                if (p.is_relative()) p = cfg.base_dir / p;
                model = load_model_schema(p.string());
            } else {
                const auto builtin = m.at("builtin").get<std::string>();
                const std::string layer = m.value("layer", primary_layer);
                primary_layer = layer;
                if (builtin == "bivirus") {
                    const std::string l1 = m.value("layer1", net.layers().at(0).name());
                    const std::string l2 = m.value("layer2", net.layers().at(std::min<std::size_t>(1, net.layers().size() - 1)).name());
                    double b1 = m.value("beta1", 0.0), b2 = m.value("beta2", 0.0);
                    const double d1 = m.value("delta1", 1.0), d2 = m.value("delta2", 1.0);
                    if (cal.contains("tau1") || cal.contains("tau2")) {
                        // tau_v = beta_v * lambda_max(layer_v) / delta_v
                        const double lam1 = spectral_radius(net, l1, 1e-10), lam2 = spectral_radius(net, l2, 1e-10);
                        if (!(lam1 > 0.0) || !(lam2 > 0.0)) throw degenerate_network("bi-virus layer has no edges");
                        if (cal.contains("tau1")) b1 = cal["tau1"].get<double>() * d1 / lam1;
                        if (cal.contains("tau2")) b2 = cal["tau2"].get<double>() * d2 / lam2;
                        used["lambda_max_1"] = lam1;
                        used["lambda_max_2"] = lam2;
                    }
                    used["beta1"] = b1;
                    used["beta2"] = b2;
                    used["delta1"] = d1;
                    used["delta2"] = d2;
                    used["tau1"] = b1 * spectral_radius(net, l1, 1e-10) / d1;
                    used["tau2"] = b2 * spectral_radius(net, l2, 1e-10) / d2;
                    model = builtin_bivirus(b1, d1, l1, b2, d2, l2);
                    primary_layer = l1;
                } else {
                    beta = m.value("beta", 0.0);
                    gamma = builtin == "sis" ? m.value("delta", m.value("gamma", 1.0)) : m.value("gamma", 1.0);
                    if (r0) {
                        gamma = cal.value("gamma", gamma);
                        const auto basis = parse_basis(cal.value("basis", "mean-degree"));
                        const auto report = per_contact_rate(*r0, gamma, net, layer, basis);
                        beta = report.per_contact_rate;
                        used = calibration_json(report);
                    } else {
                        used["per_contact_rate"] = beta;
                        used["recovery_rate"] = gamma;
                    }
                    if (builtin == "sir") model = builtin_sir(beta, gamma, layer);
                    else if (builtin == "seir") model = builtin_seir(beta, m.value("sigma", 1.0), gamma, layer);
                    else if (builtin == "sis") model = builtin_sis(beta, gamma, layer);
                    else model = builtin_sirv(beta, gamma, layer);
                    if (builtin == "seir") used["incubation_rate"] = m.value("sigma", 1.0);
                }
            }

            // vaccination parameters that do not depend on the realization
            std::optional<double> vac_fraction;
            std::optional<std::size_t> vac_count;
            std::optional<VaccinationPolicy> vac_policy;
            std::string vac_layer = primary_layer;
            if (cfg.vaccination) {
                const auto& vac = *cfg.vaccination;
                vac_layer = vac.value("layer", primary_layer);
                if (vac.at("strategy") == "random") {
                    if (vac.contains("threshold_offset")) {
                        if (!r0) throw invalid_argument("vaccination.threshold_offset needs calibration.r0");
                        const double qc = herd_immunity_random(*r0);
                        vac_fraction = std::clamp(qc + vac["threshold_offset"].get<double>(), 0.0, 1.0);
                        used["herd_immunity_threshold"] = qc;
                    } else {
                        vac_fraction = vac.at("fraction").get<double>();
                    }
                    used["vaccination_fraction"] = *vac_fraction;
                } else {
                    const auto policy = vac.value("policy", "top-degree");
                    vac_policy = policy == "degree-equals" ? VaccinationPolicy::degree_equals(vac.at("k").get<std::size_t>())
                                                           : VaccinationPolicy::top_degree();
                    if (vac.at("count").is_string()) {
                        if (vac["count"] != "auto") throw invalid_argument("vaccination.count must be a number or \"auto\"");
                        if (!(gamma > 0.0)) throw invalid_argument("automatic targeted count needs a calibrated SIR-type model");
                        vac_count = targeted_vaccination_count(net, vac_layer, beta, gamma, *vac_policy);
                    } else {
                        vac_count = vac["count"].get<std::size_t>();
                    }
                    used["vaccination_count"] = *vac_count;
                }
            }

            const auto seeding = cfg.seeding;
            const std::size_t n = net.n_nodes();
            InitialStateFactory factory = [&](Rng& rng) {
                auto state = susceptible_state(n, model);
                for (const auto& sd : seeding) {
                    const auto comp = static_cast<std::uint16_t>(model.index_of(sd.value("compartment", "I")));
                    const auto strategy = sd.at("strategy").get<std::string>();
                    if (strategy == "random") {
                        infect_random(state, comp, sd.at("count").get<std::size_t>(), rng);
                    } else if (strategy == "hubs") {
                        const auto count = sd.at("count").get<std::size_t>();
                        std::size_t placed = 0;
                        for (NodeId v : nodes_by_degree(net, sd.value("layer", primary_layer))) {
                            if (placed == count) break;
                            if (state[v] != 0) continue;
                            state.set(v, comp);
                            ++placed;
                        }
                        if (placed < count) throw invalid_argument("not enough susceptible nodes for hub seeding");
                    } else {
                        for (auto v : sd.at("nodes").get<std::vector<NodeId>>()) {
                            if (v >= n) throw invalid_argument("seed node out of range");
                            state.set(v, comp);
                        }
                    }
                }
                if (cfg.vaccination) {
                    const auto immune = static_cast<std::uint16_t>(model.index_of(cfg.vaccination->at("compartment")));
                    if (vac_fraction) state = vaccinate_random(state, *vac_fraction, immune, rng);
                    else state = vaccinate_targeted(state, net, vac_layer, *vac_policy, *vac_count, immune);
                }
                return state;
            };
            sim.t_max = *cfg.t_max;
            sim.sample_grid = detail::build_grid(cfg.sample_grid, sim.t_max);
            res.batch = run_batch(net, model, factory, sim);
        }

        if (r0) used["final_size_fraction"] = final_size_fraction(*r0);
        res.calibration = used;
        res.series = aggregate_batch(res.batch);

        MetricsOptions mo;
        mo.outbreak_threshold = cfg.outbreak_threshold;
        mo.bivirus = std::find(res.batch.compartments.begin(), res.batch.compartments.end(), "I1") !=
                         res.batch.compartments.end() &&
                     std::find(res.batch.compartments.begin(), res.batch.compartments.end(), "I2") !=
                         res.batch.compartments.end();
        mo.bivirus_epsilon = cfg.bivirus_epsilon;
        if (!cfg.peak_compartment.empty()) mo.peak_compartment = cfg.peak_compartment;
        else if (mo.bivirus) mo.peak_compartment = "I1";
        else mo.peak_compartment = "I";
        if (cfg.analytic_reference) {
            const auto& a = *cfg.analytic_reference;
            if (a.is_number()) mo.analytic_final_size = a.get<double>();
            else if (a == "final_size") {
                if (!r0) throw invalid_argument("analytic_reference \"final_size\" needs calibration.r0");
                mo.analytic_final_size = final_size_fraction(*r0);
            } else throw invalid_argument("analytic_reference must be a number or \"final_size\"");
        }
        res.metrics = compute_metrics(res.batch, res.series, mo);
        return res;
    } catch (const validation_error&) {
        throw;
    } catch (const std::exception& e) {
        throw std::runtime_error("scenario " + cfg.scenario + "/" + cfg.name + ": " + e.what());
    }
}

inline json metrics_document(const ScenarioResult& r) {
    json j = metrics_json(r.metrics, r.batch, r.outbreak_threshold);
    j["scenario"] = r.scenario;
    j["sub_scenario"] = r.name;
    j["calibration"] = r.calibration;
    return j;
}

/// <out>/<scenario>/<sub>/{trajectories.csv, aggregate.csv, metrics.json, <compartment>.svg}
/// (+ events.csv when events were recorded). Returns the files written.
inline std::vector<std::filesystem::path> write_artifacts(const ScenarioResult& r, const std::filesystem::path& out_root,
                                                          const std::vector<std::string>& paper_silent = {}) {
    const auto dir = out_root / r.scenario / r.name;
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> files;
    auto open = [&](const std::string& name) {
        files.push_back(dir / name);
        std::ofstream f(files.back(), std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + files.back().string());
        return f;
    };
    {
        auto f = open("trajectories.csv");
        write_trajectories_csv(f, r.batch);
    }
    {
        auto f = open("aggregate.csv");
        write_aggregate_csv(f, r.series);
    }
    {
        auto f = open("metrics.json");
        json doc = metrics_document(r);
        doc["paper_silent"] = paper_silent;
        f << doc.dump(2) << '\n';
    }
    for (const auto& c : r.series.compartments) {
        auto f = open(c + ".svg");
        write_svg(f, r.series, c);
    }
    bool any_events = false;
    for (const auto& t : r.batch.trajectories) any_events = any_events || !t.events.empty();
    if (any_events) {
        auto f = open("events.csv");
        write_events_csv(f, r.batch);
    }
    return files;
}

} // namespace epinet
