#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ovnet/datasets.hpp"
#include "ovnet/metrics.hpp"
#include "ovnet/planner.hpp"
#include "ovnet/serialization.hpp"
#include "ovnet/synthesis.hpp"
#include "ovnet/trainer.hpp"

namespace ovnet {

namespace cli_detail {

namespace fs = std::filesystem;

inline std::string path_join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

inline const json& require_field(const json& cfg, const std::string& key) {
    if (!cfg.contains(key)) {
        throw ValidationError("config: missing field '" + key + "'");
    }
    return cfg.at(key);
}

inline std::size_t get_count(const json& cfg, const std::string& key) {
    const json& v = require_field(cfg, key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ValidationError("config: '" + key + "' must be a nonnegative integer");
    }
    return v.get<std::size_t>();
}

inline std::size_t get_count_or(const json& cfg, const std::string& key, std::size_t dflt) {
    return cfg.contains(key) ? get_count(cfg, key) : dflt;
}

inline double get_number(const json& cfg, const std::string& key) {
    const json& v = require_field(cfg, key);
    if (!v.is_number()) {
        throw ValidationError("config: '" + key + "' must be a number");
    }
    return v.get<double>();
}

inline double get_number_or(const json& cfg, const std::string& key, double dflt) {
    return cfg.contains(key) ? get_number(cfg, key) : dflt;
}

inline std::string get_string(const json& cfg, const std::string& key) {
    const json& v = require_field(cfg, key);
    if (!v.is_string()) {
        throw ValidationError("config: '" + key + "' must be a string");
    }
    return v.get<std::string>();
}

inline std::string get_string_or(const json& cfg, const std::string& key,
                                 const std::string& dflt) {
    return cfg.contains(key) ? get_string(cfg, key) : dflt;
}

inline json load_json_file(const std::string& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

inline std::vector<std::size_t> get_architecture(const json& value, const std::string& key) {
    if (!value.is_array() || value.size() < 2) {
        throw ValidationError("config: '" + key + "' must list at least input and output sizes");
    }
    std::vector<std::size_t> arch;
    for (const auto& v : value) {
        if (!v.is_number_integer() || v.get<long long>() < 1) {
            throw ValidationError("config: '" + key + "' entries must be positive integers");
        }
        arch.push_back(v.get<std::size_t>());
    }
    return arch;
}

inline std::string architecture_name(const std::vector<std::size_t>& arch) {
    std::ostringstream out;
    for (std::size_t i = 0; i < arch.size(); ++i) {
        if (i) out << '-';
        out << arch[i];
    }
    return out.str();
}

/// Context shared by every subcommand run: effective config, output dir,
/// seed, and the hash of the effective config.
struct RunContext {
    json cfg;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::string config_hash;

    std::string out_path(const std::string& name) const {
        return path_join(out_dir, name);
    }
    json meta(const std::string& command) const {
        return json{{"command", command}, {"seed", seed}, {"config_hash", config_hash}};
    }
    void write_json(const std::string& name, const json& j) const {
        write_text_file(out_path(name), j.dump(2) + "\n");
    }
};

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

inline void cmd_generate(RunContext& ctx) {
    NestedCubeSpec spec;
    spec.n = get_count(ctx.cfg, "n");
    spec.r = get_count(ctx.cfg, "r");
    spec.radius = get_number_or(ctx.cfg, "radius", default_radius(spec.r));
    spec.train_per_cluster = get_count(ctx.cfg, "train_per_cluster");
    spec.test_per_cluster = get_count(ctx.cfg, "test_per_cluster");
    spec.seed = ctx.seed;

    DatasetPair data = generate_level_r(spec);
    save_dataset_csv(data.train, ctx.out_path("train.csv"));
    save_dataset_csv(data.test, ctx.out_path("test.csv"));
    ctx.write_json("clusters.json", clusters_to_json(data.train.clusters));

    json meta = ctx.meta("generate");
    meta["spec"] = json{{"n", spec.n},
                        {"r", spec.r},
                        {"radius", spec.radius},
                        {"train_per_cluster", spec.train_per_cluster},
                        {"test_per_cluster", spec.test_per_cluster},
                        {"seed", spec.seed}};
    meta["cluster_count"] = data.train.clusters.size();
    meta["class_count"] = std::size_t{1} << (spec.n - 1);
    meta["train_samples"] = data.train.samples.size();
    meta["test_samples"] = data.test.samples.size();
    ctx.write_json("generate.meta.json", meta);
    std::cout << "wrote " << data.train.samples.size() << " train / "
              << data.test.samples.size() << " test samples over "
              << data.train.clusters.size() << " clusters to " << ctx.out_dir << "\n";
}

inline void cmd_planes(RunContext& ctx) {
    std::size_t n = get_count(ctx.cfg, "n");
    std::size_t r = get_count(ctx.cfg, "r");
    std::vector<Hyperplane> planes = canonical_planes(n, r);
    ctx.write_json("planes.json", planes_to_json(planes));
    json meta = ctx.meta("planes");
    meta["n"] = n;
    meta["r"] = r;
    meta["plane_count"] = planes.size();
    meta["plane_set_hash"] = hash_hex(plane_set_hash(planes));
    ctx.write_json("planes.meta.json", meta);
    std::cout << "wrote " << planes.size() << " planes to " << ctx.out_path("planes.json")
              << "\n";
}

inline void cmd_plan(RunContext& ctx) {
    std::vector<ClusterSummary> clusters = clusters_from_json(
        load_json_file(get_string(ctx.cfg, "clusters_file")), "clusters");
    std::vector<Hyperplane> initial;
    if (ctx.cfg.contains("initial_planes_file")) {
        initial = planes_from_json(
            load_json_file(get_string(ctx.cfg, "initial_planes_file")), "initial planes");
    }
    PlannerConfig pc;
    pc.margin_fraction = get_number_or(ctx.cfg, "margin_fraction", 0.4);
    pc.max_planes = get_count_or(ctx.cfg, "max_planes", 64);
    pc.pending_capacity = get_count_or(ctx.cfg, "pending_capacity", 0);
    pc.seed = ctx.seed;

    auto write_trace = [&ctx](const PlannerTrace& trace, const json& extras) {
        json tj = planner_trace_to_json(trace);
        tj["config_hash"] = ctx.config_hash;
        for (const auto& [k, v] : extras.items()) tj[k] = v;
        ctx.write_json("plan_trace.json", tj);
    };

    try {
        PlanResult result = incremental_separate(clusters, initial, pc);
        ctx.write_json("planes.json", planes_to_json(result.planes));
        write_trace(result.trace,
                    json{{"final_plane_count", result.planes.size()},
                         {"plane_set_hash", hash_hex(plane_set_hash(result.planes))}});
        json meta = ctx.meta("plan");
        meta["cluster_count"] = clusters.size();
        meta["initial_plane_count"] = initial.size();
        meta["final_plane_count"] = result.planes.size();
        meta["estimated_planes"] = result.trace.estimated_planes;
        ctx.write_json("plan.meta.json", meta);
        std::cout << "separated " << clusters.size() << " clusters with "
                  << result.planes.size() << " planes (" << initial.size()
                  << " given, estimate " << result.trace.estimated_planes << ")\n";
    } catch (const PlannerError& e) {
        write_trace(e.trace, json::object());
        throw std::runtime_error(std::string("planning failed: ") + e.what());
    }
}

inline void cmd_synthesize(RunContext& ctx) {
    SynthesisInput input;
    input.planes = planes_from_json(load_json_file(get_string(ctx.cfg, "planes_file")),
                                    "planes");
    input.clusters = clusters_from_json(load_json_file(get_string(ctx.cfg, "clusters_file")),
                                        "clusters");
    int max_label = 0;
    for (const auto& c : input.clusters) max_label = std::max(max_label, c.class_label);
    input.class_count = static_cast<int>(
        get_count_or(ctx.cfg, "class_count", static_cast<std::size_t>(max_label) + 1));
    input.beta = get_number_or(ctx.cfg, "beta", 5.0);
    std::string kind = get_string_or(ctx.cfg, "second_layer", "tanh");
    if (kind != "tanh" && kind != "unit_step") {
        throw ValidationError("config: 'second_layer' must be 'tanh' or 'unit_step'");
    }
    FeedForwardNet net = synthesize_three_layer(
        input, kind == "tanh" ? SecondLayerKind::tanh : SecondLayerKind::unit_step);

    ctx.write_json("model.json", net_to_json(net));
    json meta = ctx.meta("synthesize");
    meta["q"] = input.planes.size();
    meta["m"] = input.clusters.size();
    meta["k"] = input.class_count;
    meta["beta"] = input.beta;
    meta["second_layer"] = kind;
    meta["plane_set_hash"] = hash_hex(plane_set_hash(input.planes));
    meta["weight_count"] = count_weights(net);
    ctx.write_json("synthesize.meta.json", meta);
    std::cout << "synthesized " << net.input_dim << "-" << input.planes.size() << "-"
              << input.clusters.size() << "-" << input.class_count << " net ("
              << count_weights(net) << " weights) to " << ctx.out_path("model.json") << "\n";
}

inline TrainConfig train_config_from(const RunContext& ctx, std::uint64_t seed) {
    TrainConfig tc;
    tc.learning_rate = get_number_or(ctx.cfg, "learning_rate", 0.1);
    tc.epochs = get_count_or(ctx.cfg, "epochs", 100);
    tc.batch_size = get_count_or(ctx.cfg, "batch_size", 1);
    tc.seed = seed;
    tc.beta = get_number_or(ctx.cfg, "beta", 1.0);
    tc.init_scale = get_number_or(ctx.cfg, "init_scale", 1.0);
    tc.momentum = get_number_or(ctx.cfg, "momentum", 0.0);
    return tc;
}

inline void cmd_train(RunContext& ctx) {
    LabeledDataset train = load_dataset_csv(get_string(ctx.cfg, "train_file"));
    LabeledDataset test = load_dataset_csv(get_string(ctx.cfg, "test_file"));
    std::vector<std::size_t> arch =
        get_architecture(require_field(ctx.cfg, "architecture"), "architecture");
    if (arch.front() != train.dim) {
        std::ostringstream msg;
        msg << "config: architecture input size " << arch.front()
            << " does not match dataset dimension " << train.dim;
        throw ValidationError(msg.str());
    }
    TrainConfig tc = train_config_from(ctx, ctx.seed);
    FeedForwardNet net = init_weights(arch, ctx.seed, tc.init_scale, tc.beta);
    TrainResult result = train_backprop(std::move(net), train, test, tc);

    ctx.write_json("model.json", net_to_json(result.net));
    json report = train_report_to_json(result.report);
    report["seed"] = ctx.seed;
    report["config_hash"] = ctx.config_hash;
    report["architecture"] = arch;
    ctx.write_json("train_report.json", report);
    if (ctx.cfg.value("emit_losses", false)) {
        std::ostringstream csv;
        csv << "epoch,loss\n";
        for (std::size_t i = 0; i < result.report.epoch_losses.size(); ++i) {
            csv << (i + 1) << ',' << format_double(result.report.epoch_losses[i]) << '\n';
        }
        write_text_file(ctx.out_path("losses.csv"), csv.str());
    }
    json meta = ctx.meta("train");
    meta["architecture"] = arch;
    meta["epochs_run"] = result.report.epochs_run;
    ctx.write_json("train.meta.json", meta);
    std::cout << "trained " << architecture_name(arch) << ": train accuracy "
              << result.report.final_train_accuracy << ", test accuracy "
              << result.report.final_test_accuracy << " after "
              << result.report.epochs_run << " epochs\n";
}

inline void cmd_eval(RunContext& ctx) {
    FeedForwardNet net = net_from_json(load_json_file(get_string(ctx.cfg, "model_file")));
    LabeledDataset data = load_dataset_csv(get_string(ctx.cfg, "data_file"));
    double accuracy = evaluate_accuracy(net, data);
    json out{{"accuracy", accuracy},
             {"sample_count", data.samples.size()},
             {"model_file", get_string(ctx.cfg, "model_file")},
             {"data_file", get_string(ctx.cfg, "data_file")},
             {"seed", ctx.seed},
             {"config_hash", ctx.config_hash}};
    ctx.write_json("accuracy.json", out);
    std::cout << "accuracy " << accuracy << " over " << data.samples.size() << " samples\n";
}

inline void cmd_score(RunContext& ctx) {
    LabeledDataset train = load_dataset_csv(get_string(ctx.cfg, "train_file"));
    LabeledDataset test = load_dataset_csv(get_string(ctx.cfg, "test_file"));
    const json& archs_json = require_field(ctx.cfg, "architectures");
    if (!archs_json.is_array() || archs_json.empty()) {
        throw ValidationError("config: 'architectures' must be a nonempty array");
    }
    std::vector<ArchitectureScore> rows;
    json rows_json = json::array();
    for (std::size_t i = 0; i < archs_json.size(); ++i) {
        std::vector<std::size_t> arch = get_architecture(archs_json[i], "architectures");
        if (arch.front() != train.dim) {
            std::ostringstream msg;
            msg << "config: architectures[" << i << "] input size " << arch.front()
                << " does not match dataset dimension " << train.dim;
            throw ValidationError(msg.str());
        }
        TrainConfig tc = train_config_from(ctx, mix_seed(ctx.seed, 2 * i + 1));
        FeedForwardNet net =
            init_weights(arch, mix_seed(ctx.seed, 2 * i), tc.init_scale, tc.beta);
        TrainResult result = train_backprop(std::move(net), train, test, tc);
        KcrPew score = kcr_pew(result.net, train.samples.size(), arch.back(),
                               result.report.final_test_accuracy);
        ArchitectureScore row;
        row.architecture = arch;
        row.train_accuracy = result.report.final_train_accuracy;
        row.test_accuracy = result.report.final_test_accuracy;
        row.kcr = score.kcr;
        row.pew = score.pew;
        row.weight_count = score.weight_count;
        row.equation_count = score.equation_count;
        rows.push_back(row);
        rows_json.push_back(json{{"architecture", architecture_name(arch)},
                                 {"train_accuracy", row.train_accuracy},
                                 {"test_accuracy", row.test_accuracy},
                                 {"kcr", row.kcr},
                                 {"pew", row.pew},
                                 {"kcr_raw", score.kcr_raw},
                                 {"weight_count", row.weight_count},
                                 {"equation_count", row.equation_count},
                                 {"epochs_run", result.report.epochs_run}});
        std::cout << "scored " << architecture_name(arch) << ": kcr " << score.kcr
                  << ", pew " << score.pew << "\n";
    }
    std::ostringstream csv;
    csv << "architecture,train_percent,test_percent,kcr,pew\n";
    for (const auto& row : rows) {
        csv << architecture_name(row.architecture) << ','
            << format_double(row.train_accuracy * 100.0) << ','
            << format_double(row.test_accuracy * 100.0) << ',' << format_double(row.kcr)
            << ',' << format_double(row.pew) << '\n';
    }
    write_text_file(ctx.out_path("scores.csv"), csv.str());
    json scores{{"rows", std::move(rows_json)},
                {"train_samples", train.samples.size()},
                {"test_samples", test.samples.size()},
                {"seed", ctx.seed},
                {"config_hash", ctx.config_hash}};
    ctx.write_json("scores.json", scores);
    ctx.write_json("score.meta.json", ctx.meta("score"));
}

inline void cmd_compare(RunContext& ctx) {
    std::size_t planes = 0;
    std::size_t dim = 0;
    std::size_t clusters = 0;
    bool direct = ctx.cfg.contains("planes") || ctx.cfg.contains("clusters") ||
                  ctx.cfg.contains("dim");
    bool derived = ctx.cfg.contains("n") || ctx.cfg.contains("r");
    if (direct && derived) {
        throw ValidationError(
            "config: give either {planes, dim, clusters} or {n, r}, not both");
    }
    if (derived) {
        std::size_t n = get_count(ctx.cfg, "n");
        std::size_t r = get_count(ctx.cfg, "r");
        detail::check_cube_params(n, r);
        dim = n;
        planes = ((std::size_t{1} << r) - 1) * n;
        clusters = std::size_t{1} << (r * n);
    } else {
        planes = get_count(ctx.cfg, "planes");
        dim = get_count(ctx.cfg, "dim");
        clusters = get_count(ctx.cfg, "clusters");
    }
    OpCountReport report = op_count_report(planes, dim, clusters);
    json out{{"planes", planes},
             {"dim", dim},
             {"clusters", clusters},
             {"linear_ops", report.linear_ops},
             {"distance_ops", report.distance_ops},
             {"ratio", report.ratio},
             {"seed", ctx.seed},
             {"config_hash", ctx.config_hash}};
    ctx.write_json("opcount.json", out);
    std::cout << "per-sample cost: " << report.linear_ops << " linear multiply-adds vs "
              << report.distance_ops << " distance multiply-adds (ratio " << report.ratio
              << ")\n";
}

inline void cmd_verify(RunContext& ctx) {
    std::vector<Hyperplane> planes =
        planes_from_json(load_json_file(get_string(ctx.cfg, "planes_file")), "planes");
    std::vector<ClusterSummary> clusters = clusters_from_json(
        load_json_file(get_string(ctx.cfg, "clusters_file")), "clusters");
    SeparationReport report = verify_separation(planes, clusters);
    json out = separation_report_to_json(report);
    out["seed"] = ctx.seed;
    out["config_hash"] = ctx.config_hash;
    ctx.write_json("separation.json", out);
    std::cout << (report.separated() ? "separated: " : "NOT separated: ")
              << report.codes.size() << " coded clusters, "
              << report.duplicate_groups.size() << " duplicate groups, "
              << report.cut_clusters.size() << " cuts\n";
}

}  // namespace cli_detail

/// Entry point for the experiment driver. `args` excludes the program name.
/// Returns 0 on success, 2 on validation/usage errors, 3 on runtime failures.
inline int run_cli(const std::vector<std::string>& args) {
    using namespace cli_detail;

    CLI::App app{"separating-plane network toolkit"};
    app.require_subcommand(1);

    static const struct {
        const char* name;
        const char* help;
        void (*fn)(RunContext&);
    } kCommands[] = {
        {"generate", "generate a nested-hypercube benchmark dataset", cmd_generate},
        {"planes", "emit the canonical separating planes for a benchmark family", cmd_planes},
        {"plan", "incrementally plan separating planes for given clusters", cmd_plan},
        {"synthesize", "build a classifier net directly from planes and clusters",
         cmd_synthesize},
        {"train", "train a dense tanh net by backpropagation", cmd_train},
        {"eval", "evaluate a saved model on a dataset", cmd_eval},
        {"score", "train several architectures and tabulate KCR/PEW scores", cmd_score},
        {"compare", "compare linear vs distance-based per-sample operation counts",
         cmd_compare},
        {"verify", "check that planes separate clusters and report codes", cmd_verify},
    };

    std::string config_path;
    std::uint64_t seed_flag = 0;
    std::string out_flag;
    for (const auto& cmd : kCommands) {
        CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
        sub->add_option("--config", config_path, "JSON config file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", seed_flag, "override the config seed");
        sub->add_option("--out", out_flag, "override the output directory");
    }

    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.push_back("ovnet");
    for (const auto& a : args) argv_storage.push_back(a);
    std::vector<const char*> argv;
    argv.reserve(argv_storage.size());
    for (const auto& s : argv_storage) argv.push_back(s.c_str());

    try {
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);  // prints help, returns 0
        } catch (const CLI::ParseError& e) {
            app.exit(e);  // prints the usage message
            return 2;
        }

        CLI::App* sub = app.get_subcommands().front();

        RunContext ctx;
        ctx.cfg = load_json_file(config_path);
        if (!ctx.cfg.is_object()) {
            throw ValidationError(config_path + ": config must be a JSON object");
        }
        std::string declared = get_string(ctx.cfg, "command");
        if (declared != sub->get_name()) {
            throw ValidationError("config: 'command' is '" + declared +
                                  "' but the subcommand is '" + sub->get_name() + "'");
        }
        if (sub->count("--seed") > 0) ctx.cfg["seed"] = seed_flag;
        if (sub->count("--out") > 0) ctx.cfg["out_dir"] = out_flag;
        if (ctx.cfg.contains("seed")) {
            const json& sj = ctx.cfg["seed"];
            bool ok = sj.is_number_unsigned() ||
                      (sj.is_number_integer() && sj.get<long long>() >= 0);
            if (!ok) {
                throw ValidationError("config: 'seed' must be a nonnegative integer");
            }
            ctx.seed = sj.get<std::uint64_t>();
        }
        ctx.out_dir = get_string_or(ctx.cfg, "out_dir", ".");
        ctx.config_hash = fnv1a_hex(ctx.cfg.dump());

        std::error_code ec;
        fs::create_directories(ctx.out_dir, ec);
        if (ec) {
            throw std::runtime_error("cannot create output directory " + ctx.out_dir + ": " +
                                     ec.message());
        }

        for (const auto& cmd : kCommands) {
            if (sub->get_name() == cmd.name) {
                cmd.fn(ctx);
                return 0;
            }
        }
        throw std::logic_error("unreachable: unknown subcommand");
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SynthesisError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CutClusterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace ovnet
