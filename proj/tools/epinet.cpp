// Command-line front end: network generation, calibration, single runs,
// analysis of saved trajectories, and bundled scenarios.
//
// Exit codes: 0 success, 1 usage/validation/parse error, 2 runtime error.

#include <epinet/epinet.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifndef EPINET_SCENARIO_DIR
#define EPINET_SCENARIO_DIR "scenarios"
#endif

namespace fs = std::filesystem;
using epinet::json;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kRuntime = 2 };

// Thrown for bad argument combinations that CLI11 cannot express.
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::size_t> parse_degree_blocks(const std::string& text) {
    // "10x700,2x300" -> 700 tens then 300 twos
    std::vector<std::size_t> degrees;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto comma = text.find(',', pos);
        const std::string block = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        const auto x = block.find('x');
        std::size_t degree = 0, count = 1;
        if (x == std::string::npos) {
            if (!epinet::detail::parse_number(block, degree)) throw usage_error("bad degree block '" + block + "'");
        } else if (!epinet::detail::parse_number(block.substr(0, x), degree) ||
                   !epinet::detail::parse_number(block.substr(x + 1), count)) {
            throw usage_error("bad degree block '" + block + "' (expected DEGREExCOUNT)");
        }
        degrees.insert(degrees.end(), count, degree);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return degrees;
}

fs::path resolve_scenario(const std::string& arg, const fs::path& dir) {
    const fs::path p(arg);
    // a bare name such as "q2" means a bundled file, even if a same-named file exists here
    if (!p.has_parent_path() && !p.has_extension() && fs::is_regular_file(dir / (arg + ".json")))
        return dir / (arg + ".json");
    if (fs::exists(p)) return p;
    if (fs::exists(dir / p)) return dir / p;
    throw std::runtime_error("scenario '" + arg + "' not found (looked in " + dir.string() + ")");
}

void print_summary(const epinet::ScenarioResult& r) {
    const auto& m = r.metrics;
    std::printf("%-22s final_size_mean=%-9.2f std=%-9.2f outbreak_prob=%-6.3f peak_time=%-8.2f peak_size=%.2f",
                r.name.c_str(), m.final_size_mean, m.final_size_std, m.outbreak_probability, m.peak_time, m.peak_size);
    if (m.final_size_conditional_mean) std::printf(" conditional_mean=%.2f", *m.final_size_conditional_mean);
    if (m.regime) std::printf(" regime=%s", epinet::to_string(*m.regime).c_str());
    std::printf("\n");
}

int run_file(const epinet::ScenarioFile& file, const epinet::ScenarioOverrides& overrides, const fs::path& out,
             const std::vector<std::string>& only, const std::vector<std::string>& paper_silent) {
    std::size_t ran = 0;
    for (const auto& cfg : file.scenarios) {
        if (!only.empty() && std::find(only.begin(), only.end(), cfg.name) == only.end()) continue;
        const auto result = epinet::run_scenario(cfg, overrides);
        epinet::write_artifacts(result, out, paper_silent);
        print_summary(result);
        ++ran;
    }
    if (ran == 0) throw usage_error("no sub-scenario matched --only");
    std::printf("artifacts written under %s\n", (out / file.name).string().c_str());
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"epinet: stochastic epidemic simulation on static, multilayer and temporal networks"};
    app.require_subcommand(1);

    // generate-network
    auto* gen = app.add_subcommand("generate-network", "Generate a network and save it as an edge list");
    std::string g_kind, g_out, g_layer = std::string(epinet::kDefaultLayer), g_degrees;
    std::size_t g_n = 0, g_m = 0, g_steps = 1;
    double g_k = 0.0, g_alpha = 0.0, g_dt = 1.0;
    std::uint64_t g_seed = 0;
    gen->add_option("--kind", g_kind, "complete | er | ba | configuration | temporal-aggregate")
        ->required()
        ->check(CLI::IsMember({"complete", "er", "ba", "configuration", "temporal-aggregate"}));
    gen->add_option("--n", g_n, "Number of nodes");
    gen->add_option("--mean-degree", g_k, "Target mean degree (er)");
    gen->add_option("--m", g_m, "Links per new node (ba) or edges per activation (temporal-aggregate)");
    gen->add_option("--degrees", g_degrees, "Degree blocks DEGREExCOUNT,... (configuration)");
    gen->add_option("--alpha", g_alpha, "Activity rate (temporal-aggregate)");
    gen->add_option("--step-length", g_dt, "Step length (temporal-aggregate)");
    gen->add_option("--steps", g_steps, "Horizon in steps (temporal-aggregate)");
    gen->add_option("--layer", g_layer, "Layer name");
    gen->add_option("--seed", g_seed, "Random seed");
    gen->add_option("--out", g_out, "Output edge-list path")->required();

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "Per-contact rate from R0 (prints a JSON report)");
    double c_r0 = 0.0, c_gamma = 0.0;
    std::optional<double> c_k, c_lambda;
    std::string c_net, c_layer = std::string(epinet::kDefaultLayer), c_basis = "mean-degree";
    cal->add_option("--r0", c_r0, "Basic reproduction number")->required();
    cal->add_option("--gamma", c_gamma, "Recovery rate")->required();
    auto* c_k_opt = cal->add_option("--mean-degree", c_k, "Mean degree reference");
    auto* c_l_opt = cal->add_option("--lambda-max", c_lambda, "Spectral radius reference");
    auto* c_n_opt = cal->add_option("--network", c_net, "Edge-list file to measure");
    c_k_opt->excludes(c_l_opt)->excludes(c_n_opt);
    c_l_opt->excludes(c_n_opt);
    cal->add_option("--layer", c_layer, "Layer used with --network");
    cal->add_option("--basis", c_basis, "mean-degree | spectral (with --network)")
        ->check(CLI::IsMember({"mean-degree", "spectral"}));

    // run
    auto* run = app.add_subcommand("run", "Simulate a built-in model on an edge-list network");
    std::string r_net, r_model = "sir", r_schema, r_basis = "mean-degree", r_out = "results", r_name = "run";
    std::optional<double> r_beta, r_r0;
    double r_gamma = 0.1, r_sigma = 0.2, r_tmax = 100.0, r_step = 1.0;
    std::size_t r_seeds = 1, r_realizations = 100;
    std::uint64_t r_seed = 0;
    unsigned r_threads = 0;
    bool r_hubs = false, r_events = false;
    run->add_option("--network", r_net, "Edge-list file")->required();
    run->add_option("--model", r_model, "Built-in model")->check(CLI::IsMember({"sir", "seir", "sis", "sirv"}));
    run->add_option("--schema", r_schema, "Model schema JSON file (replaces --model)");
    run->add_option("--beta", r_beta, "Per-contact rate");
    run->add_option("--gamma", r_gamma, "Recovery rate (delta for sis)");
    run->add_option("--sigma", r_sigma, "Incubation rate (seir)");
    run->add_option("--r0", r_r0, "Calibrate beta from R0 instead of --beta");
    run->add_option("--basis", r_basis, "Calibration basis")->check(CLI::IsMember({"mean-degree", "spectral"}));
    run->add_option("--initial", r_seeds, "Number of initially infectious nodes");
    run->add_flag("--hubs", r_hubs, "Seed the highest-degree nodes instead of random ones");
    run->add_option("--t-max", r_tmax, "Simulation horizon");
    run->add_option("--grid-step", r_step, "Sampling interval");
    run->add_option("--realizations", r_realizations, "Number of realizations");
    run->add_option("--seed", r_seed, "Base seed");
    run->add_option("--threads", r_threads, "Worker threads (0: all cores)");
    run->add_flag("--events", r_events, "Also write events.csv");
    run->add_option("--name", r_name, "Output sub-directory name");
    run->add_option("--out", r_out, "Output root directory");

    // analyze
    auto* ana = app.add_subcommand("analyze", "Metrics from a trajectories.csv file (prints JSON)");
    std::string a_file, a_peak = "I", a_immune;
    double a_threshold = epinet::kOutbreakThreshold;
    std::optional<double> a_analytic;
    ana->add_option("trajectories", a_file, "trajectories.csv")->required();
    ana->add_option("--peak-compartment", a_peak, "Compartment for peak metrics");
    ana->add_option("--threshold", a_threshold, "Major-outbreak threshold as a fraction of N");
    ana->add_option("--analytic", a_analytic, "Analytic final-size fraction to compare against");
    ana->add_option("--immune", a_immune, "Compartment holding vaccinated nodes (excluded from the final size)");

    // scenario
    auto* scn = app.add_subcommand("scenario", "Bundled or user scenario files");
    scn->require_subcommand(1);
    std::string s_dir = EPINET_SCENARIO_DIR;
    scn->add_option("--dir", s_dir, "Scenario directory");
    auto* s_run = scn->add_subcommand("run", "Run every sub-scenario of a file");
    auto* s_list = scn->add_subcommand("list", "List bundled scenarios");
    std::string s_file, s_out = "results";
    std::optional<std::uint64_t> s_seed;
    std::optional<std::size_t> s_realizations;
    std::optional<unsigned> s_threads;
    std::vector<std::string> s_only;
    s_run->add_option("file", s_file, "Scenario file, or a bundled name such as q2")->required();
    s_run->add_option("--seed", s_seed, "Override base_seed");
    s_run->add_option("--realizations", s_realizations, "Override the realization count");
    s_run->add_option("--threads", s_threads, "Worker threads (0: all cores)");
    s_run->add_option("--out", s_out, "Output root directory");
    s_run->add_option("--only", s_only, "Run only the named sub-scenarios (comma-separated)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kValidation;
    }

    try {
        if (*gen) {
            epinet::Network net(0, {});
            if (g_kind == "complete") net = epinet::generate_complete(g_n, g_layer);
            else if (g_kind == "er") net = epinet::generate_er(g_n, g_k, g_seed, g_layer);
            else if (g_kind == "ba") net = epinet::generate_ba(g_n, g_m, g_seed, g_layer);
            else if (g_kind == "configuration")
                net = epinet::generate_configuration(parse_degree_blocks(g_degrees), g_seed, g_layer);
            else
                net = epinet::aggregate_temporal(epinet::TemporalNetworkSpec(g_n, g_alpha, g_m, g_dt, g_steps), g_seed,
                                                 g_layer);
            epinet::save_network(net, g_out);
            const auto& layer = net.layers().front();
            std::printf("wrote %s: %zu nodes, %zu edges, mean degree %.4f\n", g_out.c_str(), net.n_nodes(),
                        layer.edge_count(), epinet::mean_degree(net, layer.name()));
            return kOk;
        }
        if (*cal) {
            epinet::CalibrationReport report;
            if (c_k) report = epinet::per_contact_rate(c_r0, c_gamma, *c_k, epinet::CalibrationBasis::mean_degree);
            else if (c_lambda) report = epinet::per_contact_rate(c_r0, c_gamma, *c_lambda, epinet::CalibrationBasis::spectral);
            else if (!c_net.empty())
                report = epinet::per_contact_rate(c_r0, c_gamma, epinet::load_network(c_net), c_layer,
                                                  epinet::parse_basis(c_basis));
            else throw usage_error("calibrate needs one of --mean-degree, --lambda-max, --network");
            json j = epinet::calibration_json(report);
            j["final_size_fraction"] = epinet::final_size_fraction(c_r0);
            std::cout << j.dump(2) << '\n';
            return kOk;
        }
        if (*run) {
            if (!r_beta && !r_r0 && r_schema.empty()) throw usage_error("run needs --beta or --r0 (or --schema)");
            json doc = {{"schema_version", epinet::kScenarioSchemaVersion}, {"name", "cli"}};
            json sub = {{"name", r_name},
                        {"network", {{"kind", "file"}, {"path", fs::absolute(r_net).string()}}},
                        {"seeding", {{"strategy", r_hubs ? "hubs" : "random"}, {"count", r_seeds}}},
                        {"t_max", r_tmax},
                        {"sample_grid", {{"step", r_step}}},
                        {"realizations", r_realizations},
                        {"base_seed", r_seed},
                        {"threads", r_threads},
                        {"record_events", r_events}};
            if (!r_schema.empty()) {
                sub["model"] = {{"schema_file", fs::absolute(r_schema).string()}};
            } else {
                sub["model"] = {{"builtin", r_model}, {"beta", r_beta.value_or(0.0)}, {"gamma", r_gamma},
                                {"delta", r_gamma}, {"sigma", r_sigma}};
                if (r_r0) sub["calibration"] = {{"r0", *r_r0}, {"gamma", r_gamma}, {"basis", r_basis}};
            }
            doc["scenarios"] = json::array({sub});
            const auto file = epinet::parse_scenario(doc.dump(), fs::current_path());
            return run_file(file, {}, r_out, {}, {});
        }
        if (*ana) {
            std::ifstream in(a_file, std::ios::binary);
            if (!in) throw std::runtime_error("cannot open " + a_file);
            const auto batch = epinet::read_trajectories_csv(in, a_immune);
            const auto series = epinet::aggregate_batch(batch);
            epinet::MetricsOptions mo;
            mo.peak_compartment = a_peak;
            mo.outbreak_threshold = a_threshold;
            mo.analytic_final_size = a_analytic;
            const auto& cs = batch.compartments;
            mo.bivirus = std::count(cs.begin(), cs.end(), "I1") && std::count(cs.begin(), cs.end(), "I2");
            if (mo.bivirus && a_peak == "I") mo.peak_compartment = "I1";
            const auto metrics = epinet::compute_metrics(batch, series, mo);
            std::cout << epinet::metrics_json(metrics, batch, a_threshold).dump(2) << '\n';
            return kOk;
        }
        if (*s_list) {
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(s_dir))
                if (e.path().extension() == ".json") files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (const auto& p : files) {
                const auto f = epinet::load_scenario(p);
                std::printf("%-10s %zu sub-scenarios  %s\n", f.name.c_str(), f.scenarios.size(), f.description.c_str());
            }
            return kOk;
        }
        if (*s_run) {
            const auto file = epinet::load_scenario(resolve_scenario(s_file, s_dir));
            epinet::ScenarioOverrides ov{s_seed, s_realizations, s_threads};
            const auto silent = file.scenarios.empty() ? std::vector<std::string>{} : file.scenarios.front().paper_silent;
            return run_file(file, ov, s_out, s_only, silent);
        }
    } catch (const epinet::validation_error& e) {
        std::cerr << "validation failed:\n";
        for (const auto& msg : e.errors()) std::cerr << "  " << msg << '\n';
        return kValidation;
    } catch (const epinet::parse_error& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kValidation;
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kOk;
}
