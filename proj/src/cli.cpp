#include "diffpath/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "diffpath/evaluation.hpp"
#include "diffpath/inference.hpp"
#include "diffpath/io.hpp"
#include "diffpath/parallel.hpp"
#include "diffpath/synth.hpp"
#include "diffpath/version.hpp"

namespace diffpath {

namespace {

namespace fs = std::filesystem;

struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

transmission_model make_model(const std::string& name, double delta, bool delta_given) {
    transmission_model m;
    if (name == "exp")
        m.family = model_family::exponential;
    else if (name == "pow")
        m.family = model_family::power_law;
    else if (name == "ray")
        m.family = model_family::rayleigh;
    else
        throw usage_error("unknown model '" + name + "' (expected exp, pow or ray)");
    if (m.family == model_family::power_law) {
        if (!delta_given) throw usage_error("--delta is required for the pow model");
        if (!(delta > 0.0)) throw usage_error("--delta must be positive");
        m.delta = delta;
    }
    return m;
}

std::pair<double, double> parse_range(const std::vector<double>& v, const char* flag) {
    if (v.size() != 2 || !(v[0] <= v[1]))
        throw usage_error(std::string(flag) + " expects 'lo,hi' with lo <= hi");
    return {v[0], v[1]};
}

// ---- kronecker-gen ------------------------------------------------------

struct kronecker_options {
    std::vector<double> matrix{0.9, 0.5, 0.5, 0.3};
    int iterations = 10;
    int edges = 2048;
    std::uint64_t seed = 1;
    std::vector<double> peak_range{0.5, 2.0};
    double horizon = 100.0;
    std::vector<double> duration_range{20.0, 50.0};
    std::vector<double> period_range{20.0, 50.0};
    std::vector<std::string> kinds;
    std::string out;
};

int cmd_kronecker(const kronecker_options& opt) {
    if (opt.matrix.size() != 4) throw usage_error("--matrix expects 4 probabilities");
    kronecker_spec spec;
    spec.seed = {{{opt.matrix[0], opt.matrix[1]}, {opt.matrix[2], opt.matrix[3]}}};
    spec.iterations = opt.iterations;
    spec.target_edges = opt.edges;

    pattern_ranges ranges;
    ranges.peak = parse_range(opt.peak_range, "--peak-range");
    ranges.horizon = opt.horizon;
    ranges.duration = parse_range(opt.duration_range, "--duration-range");
    ranges.period = parse_range(opt.period_range, "--period-range");
    if (!opt.kinds.empty()) {
        ranges.kinds.clear();
        for (const auto& name : opt.kinds) {
            try {
                ranges.kinds.push_back(pattern_kind_from_name(name));
            } catch (const std::invalid_argument& e) {
                throw usage_error(e.what());
            }
        }
    }
    try {
        spec.validate();
        ranges.validate();
    } catch (const std::invalid_argument& e) {
        throw usage_error(e.what());
    }

    const auto edges = generate_kronecker(spec, opt.seed);
    const auto net = assign_patterns(spec.node_count(), edges, ranges, rng::mix(opt.seed, 1));
    write_ground_truth(opt.out, net);

    run_manifest manifest;
    manifest.command = "kronecker-gen";
    manifest.options = {{"matrix", format_double(opt.matrix[0]) + "," +
                                       format_double(opt.matrix[1]) + "," +
                                       format_double(opt.matrix[2]) + "," +
                                       format_double(opt.matrix[3])},
                        {"iterations", std::to_string(opt.iterations)},
                        {"edges", std::to_string(opt.edges)},
                        {"peak_range", format_double(ranges.peak.first) + "," +
                                           format_double(ranges.peak.second)},
                        {"horizon", format_double(ranges.horizon)}};
    manifest.output = opt.out;
    manifest.rng_seed = opt.seed;
    write_manifest(opt.out + ".manifest.json", manifest);

    std::cout << "wrote " << net.edges().size() << " edges over " << net.node_count()
              << " nodes to " << opt.out << "\n";
    return 0;
}

// ---- simulate -----------------------------------------------------------

struct simulate_options {
    std::string net;
    std::string model = "exp";
    double delta = 1.0;
    int horizon = 100;
    int per_step = 1000;
    double window = 10.0;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_simulate(const simulate_options& opt, bool delta_given) {
    const transmission_model model = make_model(opt.model, opt.delta, delta_given);
    if (!(opt.window > 0.0)) throw usage_error("--window must be positive");
    if (opt.horizon < 1) throw usage_error("--horizon must be >= 1");
    if (opt.per_step < 1) throw usage_error("--per-step must be >= 1");

    const auto net = read_ground_truth(opt.net);
    const auto cascades =
        generate_cascade_set(net, model, opt.horizon, opt.per_step, opt.window, opt.seed);

    std::vector<node_info> nodes(net.node_count());
    for (int i = 0; i < net.node_count(); ++i)
        nodes[i] = {static_cast<node_id>(i), std::to_string(i), node_label::unknown};
    write_cascade_file(opt.out, nodes, cascades);

    run_manifest manifest;
    manifest.command = "simulate";
    manifest.options = {{"model", opt.model},
                        {"delta", format_double(model.delta)},
                        {"horizon", std::to_string(opt.horizon)},
                        {"per_step", std::to_string(opt.per_step)},
                        {"window", format_double(opt.window)}};
    manifest.inputs = {opt.net};
    manifest.output = opt.out;
    manifest.rng_seed = opt.seed;
    write_manifest(opt.out + ".manifest.json", manifest);

    std::cout << "wrote " << cascades.size() << " cascades to " << opt.out << "\n";
    return 0;
}

// ---- infer / infer-static ----------------------------------------------

struct infer_options {
    std::string cascades;
    std::string model = "exp";
    double delta = 1.0;
    double epsilon = 1e-6;
    double rho = 0.95;
    double gamma = 0.1;
    int iters = -1;
    double window = 10.0;
    std::string sampling = "uniform";
    double tau = 0.0;
    double resolution = 1.0;
    double init_rate = 1e-2;
    double max_rate = 10.0;
    double output_floor = 0.0;
    double max_step = 0.0;  // 0: unclipped
    std::string schedule = "constant";
    std::uint64_t seed = 1;
    double t_start = std::numeric_limits<double>::quiet_NaN();
    double t_end = std::numeric_limits<double>::quiet_NaN();
    double cascade_window = 0.0;  // 0: use the file's window pragma
    std::string out;
    // static mode only
    int max_epochs = 100;
    double tol = 1e-4;
};

inference_config make_config(const infer_options& opt, bool delta_given) {
    inference_config config;
    config.model = make_model(opt.model, opt.delta, delta_given);
    config.epsilon = opt.epsilon;
    config.rho = opt.rho;
    config.gamma0 = opt.gamma;
    config.iterations = opt.iters;
    config.sample_window = opt.window;
    config.tau = opt.tau;
    config.time_resolution = opt.resolution;
    config.init_rate = opt.init_rate;
    config.max_rate = opt.max_rate;
    config.output_floor = opt.output_floor;
    if (opt.max_step > 0.0) config.max_step = opt.max_step;
    if (opt.sampling == "uniform")
        config.sampling = sampling_scheme::windowed_uniform;
    else if (opt.sampling == "exp")
        config.sampling = sampling_scheme::windowed_exponential;
    else
        throw usage_error("unknown sampling scheme '" + opt.sampling + "'");
    if (opt.schedule == "constant")
        config.schedule = step_schedule::constant;
    else if (opt.schedule == "invsqrt")
        config.schedule = step_schedule::inv_sqrt;
    else
        throw usage_error("unknown step schedule '" + opt.schedule + "'");
    try {
        config.validate();
    } catch (const std::invalid_argument& e) {
        throw usage_error(e.what());
    }
    return config;
}

cascade_store load_store(const infer_options& opt) {
    std::optional<double> override;
    if (opt.cascade_window > 0.0) override = opt.cascade_window;
    auto file = parse_cascade_file(opt.cascades, override);
    if (file.cascades.empty()) throw data_error("no cascades in " + opt.cascades);
    return cascade_store(std::move(file.cascades));
}

std::map<std::string, std::string> config_manifest_options(const infer_options& opt,
                                                           const inference_config& config) {
    return {{"model", opt.model},
            {"delta", format_double(config.model.delta)},
            {"epsilon", format_double(config.epsilon)},
            {"rho", format_double(config.rho)},
            {"gamma", format_double(config.gamma0)},
            {"iters", std::to_string(config.iterations)},
            {"window", format_double(config.sample_window)},
            {"sampling", opt.sampling},
            {"tau", format_double(config.tau_or_default())},
            {"resolution", format_double(config.time_resolution)},
            {"init_rate", format_double(config.init_rate)},
            {"max_rate", format_double(config.max_rate)},
            {"output_floor", format_double(config.output_floor)},
            {"max_step", format_double(config.max_step)},
            {"schedule", opt.schedule}};
}

int cmd_infer(const infer_options& opt, bool delta_given) {
    const inference_config config = make_config(opt, delta_given);
    const cascade_store store = load_store(opt);

    double t_start = opt.t_start;
    double t_end = opt.t_end;
    if (std::isnan(t_start)) t_start = store.all().front().start_time();
    if (std::isnan(t_end)) t_end = store.all().back().start_time() + config.time_resolution;
    if (!(t_end > t_start))
        t_end = t_start + config.time_resolution;  // single-step data

    fs::create_directories(opt.out);
    auto diag_out = std::ofstream(fs::path(opt.out) / "diagnostics.csv", std::ios::binary);
    diag_out << "step,t,n_cascades,n_edges,skips,step_norm\n";
    const auto snapshots = infer_dynamic(store, t_start, t_end, config, opt.seed,
                                         [&](const step_diag& d) {
                                             diag_out << d.step << ',' << format_double(d.t)
                                                      << ',' << d.n_cascades << ','
                                                      << d.n_edges << ',' << d.skips << ','
                                                      << format_rate(d.step_norm) << "\n";
                                         });
    write_snapshot_series(opt.out, snapshots);

    run_manifest manifest;
    manifest.command = "infer";
    manifest.options = config_manifest_options(opt, config);
    manifest.options["t_start"] = format_double(t_start);
    manifest.options["t_end"] = format_double(t_end);
    manifest.inputs = {opt.cascades};
    manifest.output = opt.out;
    manifest.rng_seed = opt.seed;
    write_manifest(fs::path(opt.out) / "manifest.json", manifest);

    std::cout << "wrote " << snapshots.size() << " snapshots to " << opt.out << "\n";
    return 0;
}

int cmd_infer_static(const infer_options& opt, bool delta_given) {
    const inference_config config = make_config(opt, delta_given);
    if (opt.max_epochs < 1) throw usage_error("--max-epochs must be >= 1");
    if (!(opt.tol >= 0.0)) throw usage_error("--tol must be non-negative");
    const cascade_store store = load_store(opt);

    static_options sopts;
    sopts.max_epochs = opt.max_epochs;
    sopts.tol = opt.tol;
    rate_snapshot snap = infer_static(store, config, sopts, opt.seed);
    snap.set_step(0, 0.0);
    write_snapshot_series(opt.out, {snap});

    run_manifest manifest;
    manifest.command = "infer-static";
    manifest.options = config_manifest_options(opt, config);
    manifest.options["max_epochs"] = std::to_string(opt.max_epochs);
    manifest.options["tol"] = format_double(opt.tol);
    manifest.inputs = {opt.cascades};
    manifest.output = opt.out;
    manifest.rng_seed = opt.seed;
    write_manifest(fs::path(opt.out) / "manifest.json", manifest);

    std::cout << "wrote static network (" << snap.size() << " edges) to " << opt.out << "\n";
    return 0;
}

// ---- evaluate -----------------------------------------------------------

struct evaluate_options {
    std::string snapshots;
    std::string truth;
    std::string out;
};

int cmd_evaluate(const evaluate_options& opt) {
    const auto net = read_ground_truth(opt.truth);
    const auto snapshots = read_snapshot_series(opt.snapshots);

    for (const auto& snap : snapshots)
        for (const node_id n : snap.node_set())
            if (n < 0 || n >= net.node_count())
                throw data_error("snapshot at t=" + format_double(snap.time()) +
                                 " references node " + std::to_string(n) +
                                 " outside the ground-truth universe [0, " +
                                 std::to_string(net.node_count()) + ")");

    std::vector<snapshot_score> scores(snapshots.size());
    parallel_for(snapshots.size(), [&](std::size_t i) {
        scores[i] = score_snapshot(snapshots[i], net.rates_at(snapshots[i].time()));
    });
    write_scores_csv(opt.out, scores);

    run_manifest manifest;
    manifest.command = "evaluate";
    manifest.inputs = {opt.snapshots, opt.truth};
    manifest.output = opt.out;
    write_manifest(opt.out + ".manifest.json", manifest);

    std::cout << "wrote " << scores.size() << " rows to " << opt.out << "\n";
    return 0;
}

// ---- analyze ------------------------------------------------------------

struct analyze_options {
    std::string snapshots;
    std::string labels;
    std::string out_centrality;
    std::string out_edge_types;
};

int cmd_analyze(const analyze_options& opt) {
    const auto nodes = read_node_table(opt.labels);
    const label_map labels = labels_of(nodes);
    const auto snapshots = read_snapshot_series(opt.snapshots);

    std::vector<std::vector<centrality_row>> centrality(snapshots.size());
    std::vector<edge_type_row> type_rows(snapshots.size());
    parallel_for(snapshots.size(), [&](std::size_t i) {
        const auto& snap = snapshots[i];
        for (const auto& [node, value] : harmonic_centrality_all(snap)) {
            auto it = labels.find(node);
            centrality[i].push_back({snap.time(), node,
                                     it == labels.end() ? node_label::unknown : it->second,
                                     value});
        }
        type_rows[i] = {snap.time(), edge_type_counts(snap, labels)};
    });

    std::vector<centrality_row> flat;
    for (const auto& rows : centrality) flat.insert(flat.end(), rows.begin(), rows.end());
    write_centrality_csv(opt.out_centrality, flat);
    write_edge_types_csv(opt.out_edge_types, type_rows);

    run_manifest manifest;
    manifest.command = "analyze";
    manifest.inputs = {opt.snapshots, opt.labels};
    manifest.output = opt.out_centrality;
    write_manifest(opt.out_centrality + ".manifest.json", manifest);

    std::cout << "wrote " << flat.size() << " centrality rows and " << type_rows.size()
              << " edge-type rows\n";
    return 0;
}

}  // namespace

int run_command(std::vector<std::string> args) {
    CLI::App app{"dynamic diffusion-network inference from cascades"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);

    kronecker_options kopt;
    auto* kron = app.add_subcommand("kronecker-gen",
                                    "generate a ground-truth network with rate patterns");
    kron->add_option("--matrix", kopt.matrix, "2x2 seed matrix, row major")->expected(4);
    kron->add_option("--iters", kopt.iterations, "kronecker levels (2^k nodes)");
    kron->add_option("--edges", kopt.edges, "number of directed edges");
    kron->add_option("--seed", kopt.seed, "rng seed");
    kron->add_option("--peak-range", kopt.peak_range, "peak rate range lo,hi")->expected(2);
    kron->add_option("--horizon", kopt.horizon, "simulation horizon (onset range)");
    kron->add_option("--duration-range", kopt.duration_range, "pattern duration range")
        ->expected(2);
    kron->add_option("--period-range", kopt.period_range, "pattern period range")->expected(2);
    kron->add_option("--kinds", kopt.kinds,
                     "pattern kinds to draw from (default: all five)");
    kron->add_option("--out", kopt.out, "output ground-truth file")->required();

    simulate_options sopt;
    auto* sim = app.add_subcommand("simulate", "simulate cascades from a ground-truth network");
    sim->add_option("--net", sopt.net, "ground-truth file")->required();
    sim->add_option("--model", sopt.model, "transmission model: exp, pow or ray");
    auto* sim_delta = sim->add_option("--delta", sopt.delta, "power-law offset");
    sim->add_option("--horizon", sopt.horizon, "number of time steps");
    sim->add_option("--per-step", sopt.per_step, "cascades per time step");
    sim->add_option("--window", sopt.window, "per-cascade observation window");
    sim->add_option("--seed", sopt.seed, "rng seed");
    sim->add_option("--out", sopt.out, "output cascade file")->required();

    infer_options iopt;
    auto* inf = app.add_subcommand("infer", "infer a dynamic network from cascades");
    auto add_common = [](CLI::App* cmd, infer_options& o) {
        cmd->add_option("--cascades", o.cascades, "cascade file")->required();
        cmd->add_option("--model", o.model, "transmission model: exp, pow or ray");
        auto* delta = cmd->add_option("--delta", o.delta, "power-law offset");
        cmd->add_option("--epsilon", o.epsilon, "feasible lower bound");
        cmd->add_option("--gamma", o.gamma, "base step size");
        cmd->add_option("--init-rate", o.init_rate, "starting rate for new edges");
        cmd->add_option("--max-rate", o.max_rate, "upper projection bound");
        cmd->add_option("--output-floor", o.output_floor,
                        "drop emitted rates at or below this (default: epsilon)");
        cmd->add_option("--max-step", o.max_step, "per-update step bound (0: unclipped)");
        cmd->add_option("--schedule", o.schedule, "step schedule: constant or invsqrt");
        cmd->add_option("--seed", o.seed, "rng seed");
        cmd->add_option("--cascade-window", o.cascade_window,
                        "override the cascade file's observation window");
        cmd->add_option("--out", o.out, "output directory")->required();
        return delta;
    };
    auto* inf_delta = add_common(inf, iopt);
    inf->add_option("--rho", iopt.rho, "aging factor");
    inf->add_option("--iters", iopt.iters, "iterations per step (negative: auto)");
    inf->add_option("--window", iopt.window, "sampling window length");
    inf->add_option("--sampling", iopt.sampling, "cascade sampling: uniform or exp");
    inf->add_option("--tau", iopt.tau, "exponential sampling scale (0: window/3)");
    inf->add_option("--resolution", iopt.resolution, "snapshot spacing");
    inf->add_option("--t-start", iopt.t_start, "first inference time (default: data start)");
    inf->add_option("--t-end", iopt.t_end, "last inference time (default: data end)");

    infer_options stat_opt;
    auto* stat = app.add_subcommand("infer-static", "infer a static network from all cascades");
    auto* stat_delta = add_common(stat, stat_opt);
    stat->add_option("--max-epochs", stat_opt.max_epochs, "maximum round-robin epochs");
    stat->add_option("--tol", stat_opt.tol, "relative NLL improvement stop");

    evaluate_options eopt;
    auto* eval = app.add_subcommand("evaluate", "score snapshots against ground truth");
    eval->add_option("--snapshots", eopt.snapshots, "snapshot directory")->required();
    eval->add_option("--truth", eopt.truth, "ground-truth file")->required();
    eval->add_option("--out", eopt.out, "output scores CSV")->required();

    analyze_options aopt;
    auto* ana = app.add_subcommand("analyze", "network analytics over snapshots");
    ana->add_option("--snapshots", aopt.snapshots, "snapshot directory")->required();
    ana->add_option("--labels", aopt.labels, "node table with labels")->required();
    ana->add_option("--out-centrality", aopt.out_centrality, "centrality CSV")->required();
    ana->add_option("--out-edge-types", aopt.out_edge_types, "edge-type counts CSV")
        ->required();

    std::vector<const char*> argv;
    argv.push_back("diffpath");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (kron->parsed()) return cmd_kronecker(kopt);
        if (sim->parsed()) return cmd_simulate(sopt, !sim_delta->empty());
        if (inf->parsed()) return cmd_infer(iopt, !inf_delta->empty());
        if (stat->parsed()) return cmd_infer_static(stat_opt, !stat_delta->empty());
        if (eval->parsed()) return cmd_evaluate(eopt);
        if (ana->parsed()) return cmd_analyze(aopt);
    } catch (const usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

int run_command(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_command(std::move(args));
}

}  // namespace diffpath
