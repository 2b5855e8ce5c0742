// skelgest: synthesize, ingest, train, evaluate, gradcheck, report.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skelgest/config.hpp"
#include "skelgest/ingest.hpp"
#include "skelgest/metrics.hpp"
#include "skelgest/nn/checkpoint.hpp"
#include "skelgest/nn/model.hpp"
#include "skelgest/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace skelgest;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

constexpr std::uint64_t kGradcheckSeed = 20240611;

void log(const std::string& msg) { std::cerr << "skelgest: " << msg << '\n'; }

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError("cannot read '" + p.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& p, const std::string& bytes) {
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary);
    if (!out || !(out << bytes)) throw DataError("cannot write '" + p.string() + "'");
}

/// Command-line settings layered on top of the config file.
struct Overrides {
    std::string config_path;
    std::vector<std::string> sets;
    std::map<std::string, std::string> keys;     // --<config.key> value
    std::map<std::string, std::string> aliases;  // short flags, already mapped to keys
};

void add_key_flags(CLI::App* cmd, Overrides& ov) {
    for (const auto& k : AppConfig::known_keys())
        cmd->add_option("--" + k.name, ov.keys[k.name], k.help)->group("Config keys");
}

void add_alias(CLI::App* cmd, Overrides& ov, const std::string& flag, const std::string& key,
               const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [&ov, key](const std::string& v) { ov.aliases[key] = v; }, help);
}

AppConfig resolve_config(const Overrides& ov, const std::optional<ordered_json>& manifest = std::nullopt) {
    AppConfig cfg;
    std::string path = ov.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("SKELGEST_CONFIG"); env && *env) path = env;
    }
    if (!path.empty()) cfg.merge_file(path);
    if (manifest) {
        for (const auto& [k, v] : manifest->at("config").items()) cfg.set(k, v.get<std::string>());
    }
    for (const auto& s : ov.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
        cfg.set(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [k, v] : ov.keys)
        if (!v.empty()) cfg.set(k, v);
    for (const auto& [k, v] : ov.aliases) cfg.set(k, v);

    std::cerr << "# resolved config\n" << cfg.resolved_text();
    return cfg;
}

fs::path output_dir(const AppConfig& cfg) { return fs::path(cfg.get("output.dir")); }

void echo_config(const AppConfig& cfg, const fs::path& dir) {
    write_file(dir / "config.resolved", cfg.resolved_text({"output.dir"}));
}

Dataset load_configured_dataset(const AppConfig& cfg) {
    if (!cfg.is_set("dataset.root")) throw ConfigError("dataset.root is required (pass --data)");
    const fs::path root = cfg.get("dataset.root");
    const fs::path manifest = cfg.is_set("dataset.manifest") ? fs::path(cfg.get("dataset.manifest")) : root / "manifest.csv";
    return load_dataset(root, manifest, joint_map(cfg));
}

ordered_json run_manifest(const std::string& command, const AppConfig& cfg, const Dataset& ds,
                          const std::vector<std::string>& outputs) {
    ordered_json j;
    j["tool"] = "skelgest";
    j["command"] = command;
    j["seed"] = cfg.get("train.seed");
    j["config_digest"] = hex64(cfg.digest());
    ordered_json c = ordered_json::object();
    for (const auto& [k, v] : cfg.values())
        if (k != "output.dir") c[k] = v;
    j["config"] = c;
    j["dataset"] = {{"sequences", ds.sequences.size()}, {"checksum", hex64(dataset_checksum(ds))}};
    j["outputs"] = outputs;
    return j;
}

// ---------------------------------------------------------------------------

int cmd_synth(const AppConfig& cfg) {
    const SynthConfig sc = synth_config(cfg);
    const Dataset ds = generate_synthetic(sc);
    const fs::path out = output_dir(cfg);
    write_dataset(ds, out);
    echo_config(cfg, out);
    std::cout << "wrote " << ds.sequences.size() << " sequences for " << sc.n_patients << " patients to "
              << out.string() << '\n';
    return kExitOk;
}

int cmd_ingest(const AppConfig& cfg) {
    const Dataset ds = load_configured_dataset(cfg);
    const FoldSplit split = assign_folds(ds, fold_boundaries(cfg));
    std::size_t n_static = 0;
    std::map<int, std::size_t> per_fold;
    for (const auto& s : ds.sequences) {
        n_static += s.label.kind == GestureKind::Static;
        ++per_fold[split.fold_of(s.patient_id)];
    }
    std::cout << "sequences: " << ds.sequences.size() << '\n'
              << "patients: " << split.fold_of_patient.size() << '\n'
              << "static: " << n_static << '\n'
              << "dynamic: " << ds.sequences.size() - n_static << '\n';
    for (const auto& [fold, n] : per_fold)
        std::cout << "fold " << fold << ": " << split.patients_in(fold).size() << " patients, " << n
                  << " sequences\n";
    std::cout << "checksum: " << hex64(dataset_checksum(ds)) << '\n';
    return kExitOk;
}

int cmd_train(const AppConfig& cfg) {
    const RunConfig rc = run_config(cfg);
    const Dataset ds = load_configured_dataset(cfg);
    const auto prepared = prepare_features(ds, rc);
    log("training " + std::string(to_string(rc.protocol)) + " models on " + std::to_string(ds.sequences.size()) +
        " sequences");
    const ModelSet set = train_protocol(prepared, rc, network_trainer(rc), rc.train.seed);

    const fs::path out = output_dir(cfg);
    std::vector<std::string> outputs;
    for (const auto& m : set.models) {
        auto ck = m.classifier->checkpoint();
        if (!ck) throw std::logic_error("model " + m.name + " cannot be checkpointed");
        ck->config_digest = cfg.digest();
        const std::string rel = "checkpoints/" + m.name + ".ckpt";
        fs::create_directories(out / "checkpoints");
        nn::save_checkpoint(*ck, out / rel);
        outputs.push_back(rel);
    }
    echo_config(cfg, out);
    outputs.push_back("config.resolved");
    write_file(out / "run_manifest.json", run_manifest("train", cfg, ds, outputs).dump(2) + "\n");
    std::cout << "wrote " << set.models.size() << " checkpoints to " << (out / "checkpoints").string() << '\n';
    return kExitOk;
}

/// Rebuilds a model set from checkpoints, refusing any whose preprocessing
/// differs from the current configuration.
ModelSet load_model_set(const fs::path& dir, const RunConfig& rc) {
    if (!fs::is_directory(dir)) throw DataError("checkpoint directory '" + dir.string() + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".ckpt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .ckpt files in '" + dir.string() + "'");

    ModelSet set;
    set.protocol = rc.protocol;
    set.route_threshold = rc.effective_threshold();
    for (const auto& f : files) {
        const nn::Checkpoint ck = nn::load_checkpoint(f);
        const auto& meta = ck.extra;
        auto expect = [&](const char* field, const nlohmann::json& want) {
            if (!meta.contains(field) || meta.at(field) != want)
                throw CheckpointMismatchError(f.filename().string() + ": " + field + " is " +
                                              (meta.contains(field) ? meta.at(field).dump() : "missing") +
                                              ", config wants " + want.dump());
        };
        expect("protocol", std::string(to_string(rc.protocol)));
        expect("method", static_cast<int>(rc.features.method));
        expect("include_confidence", rc.features.include_confidence);
        expect("stride", rc.stride);
        expect("savgol_m", rc.savgol.m);
        expect("savgol_order", rc.savgol.order);
        const auto window = meta.at("window").get<std::size_t>();
        if (std::find(rc.windows.begin(), rc.windows.end(), window) == rc.windows.end())
            throw CheckpointMismatchError(f.filename().string() + ": window " + std::to_string(window) +
                                          " is not among the configured window lengths");
        const auto positive = meta.at("positive").get<std::string>();
        ClassSpace space = positive.empty() ? ClassSpace::multiclass(meta.at("class_ids").get<std::vector<std::string>>())
                                            : ClassSpace::binary(positive);
        set.models.push_back(TrainedModel{meta.at("name").get<std::string>(), std::move(space), window,
                                          classifier_from_checkpoint(ck)});
    }
    std::vector<std::string> groups;
    if (rc.protocol == Protocol::MultiClass) groups = {"static", "dynamic"};
    else
        for (const auto& l : taxonomy()) groups.push_back(l.id);
    for (const auto& g : groups)
        for (auto w : rc.windows) {
            try {
                (void)set.find(g, w);
            } catch (const std::out_of_range&) {
                throw CheckpointMismatchError("no checkpoint for model '" + g + "' at window " + std::to_string(w));
            }
        }
    return set;
}

int cmd_evaluate(const AppConfig& cfg, const std::string& checkpoints, const std::optional<ordered_json>& manifest) {
    const RunConfig rc = run_config(cfg);
    const Dataset ds = load_configured_dataset(cfg);
    if (manifest) {
        const auto want = manifest->at("dataset").at("checksum").get<std::string>();
        if (hex64(dataset_checksum(ds)) != want)
            throw DataError("dataset checksum " + hex64(dataset_checksum(ds)) + " differs from the run manifest (" +
                            want + ")");
    }

    EvaluationReport report;
    if (!checkpoints.empty()) {
        const ModelSet set = load_model_set(checkpoints, rc);
        log("evaluating " + std::to_string(set.models.size()) + " checkpoints on " +
            std::to_string(ds.sequences.size()) + " sequences");
        report = evaluate(set, prepare_features(ds, rc));
    } else {
        report = cross_validate(ds, rc, network_trainer(rc),
                                [](int fold, const std::vector<int>& train, const std::vector<int>& test) {
                                    log("fold " + std::to_string(fold) + ": " + std::to_string(train.size()) +
                                        " training patients, " + std::to_string(test.size()) + " test patients");
                                });
    }

    const fs::path out = output_dir(cfg);
    std::vector<std::string> outputs{"report.json"};
    write_file(out / "report.json", render_report(report, ReportFormat::Json));
    if (report.confusion_static) {
        write_file(out / "confusion_static.csv", render_confusion_csv(*report.confusion_static));
        outputs.push_back("confusion_static.csv");
    }
    if (report.confusion_dynamic) {
        write_file(out / "confusion_dynamic.csv", render_confusion_csv(*report.confusion_dynamic));
        outputs.push_back("confusion_dynamic.csv");
    }
    echo_config(cfg, out);
    outputs.push_back("config.resolved");
    auto rm = run_manifest("evaluate", cfg, ds, outputs);
    rm["mode"] = checkpoints.empty() ? "cross_validate" : "checkpoints";
    if (!checkpoints.empty()) rm["checkpoints"] = checkpoints;
    write_file(out / "run_manifest.json", rm.dump(2) + "\n");
    std::cout << render_report(report, ReportFormat::Text);
    return kExitOk;
}

int cmd_gradcheck(const std::string& which, std::uint64_t seed, double tolerance) {
    if (which != "lstm" && which != "tcn" && which != "all")
        throw ConfigError("--net must be lstm, tcn or all");
    std::vector<std::pair<std::string, nn::ModelSpec>> specs;
    if (which != "tcn") specs.emplace_back("lstm", nn::ModelSpec{nn::LstmSpec{3, 4, 2, nn::HeadType::Softmax}});
    if (which != "lstm")
        specs.emplace_back("tcn", nn::ModelSpec{nn::TcnSpec{3, 4, 3, {1, 2}, 2, nn::HeadType::Softmax}});
    bool ok = true;
    for (const auto& [name, spec] : specs) {
        const auto r = nn::grad_check(spec, seed, tolerance);
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-5s params=%zu max_rel_err=%.3e worst=%zu tolerance=%.1e %s\n",
                      name.c_str(), r.n_params, r.max_relative_error, r.worst_index, tolerance,
                      r.pass ? "PASS" : "FAIL");
        std::cout << buf;
        ok = ok && r.pass;
    }
    return ok ? kExitOk : kExitCheckFailed;
}

int cmd_report(const fs::path& input, const std::string& format, const std::string& matrix) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(input));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(input.string() + ": " + e.what());
    }
    EvaluationReport report;
    try {
        report = report_from_json(j);
    } catch (const std::exception& e) {
        throw DataError(input.string() + ": not an evaluation report (" + e.what() + ")");
    }
    if (!matrix.empty()) {
        const auto& cm = matrix == "static" ? report.confusion_static : report.confusion_dynamic;
        if (!cm) throw DataError("report has no " + matrix + " confusion matrix");
        std::cout << render_confusion_csv(*cm);
        return kExitOk;
    }
    ReportFormat f;
    try {
        f = report_format_from_string(format);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    std::cout << render_report(report, f);
    return kExitOk;
}

int run(int argc, char** argv) {
    CLI::App app{"Skeleton-based hand gesture classification"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides ov;
    app.add_option("--config", ov.config_path, "config file (default: $SKELGEST_CONFIG)");
    app.add_option("--set", ov.sets, "override a config key (key=value), repeatable");

    auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
    add_alias(synth, ov, "--seed", "synth.seed", "generator seed (required)");
    add_alias(synth, ov, "--patients", "synth.patients", "number of patients");
    add_alias(synth, ov, "--noise", "synth.noise_sigma", "joint jitter in pixels");
    add_alias(synth, ov, "--out", "output.dir", "output directory");
    add_key_flags(synth, ov);

    auto* ingest = app.add_subcommand("ingest", "load and summarize a dataset");
    add_alias(ingest, ov, "--data", "dataset.root", "dataset directory");
    add_alias(ingest, ov, "--manifest", "dataset.manifest", "manifest CSV");
    add_key_flags(ingest, ov);

    bool rebalance = false;
    std::string checkpoints;
    std::string manifest_path;
    auto add_run_flags = [&](CLI::App* cmd) {
        add_alias(cmd, ov, "--seed", "train.seed", "training seed (required)");
        add_alias(cmd, ov, "--data", "dataset.root", "dataset directory");
        add_alias(cmd, ov, "--manifest", "dataset.manifest", "manifest CSV");
        add_alias(cmd, ov, "--out", "output.dir", "output directory");
        add_alias(cmd, ov, "--protocol", "pipeline.protocol", "multiclass or binary");
        add_alias(cmd, ov, "--method", "preprocess.method", "normalization method 1..5");
        add_alias(cmd, ov, "--frames", "preprocess.window", "window length or short,long");
        add_alias(cmd, ov, "--stride", "preprocess.stride", "window stride");
        add_alias(cmd, ov, "--net", "model.net", "lstm or tcn");
        add_alias(cmd, ov, "--hidden", "model.lstm.hidden", "LSTM hidden units");
        add_alias(cmd, ov, "--epochs", "train.epochs", "training epochs");
        add_alias(cmd, ov, "--lr", "train.lr", "learning rate");
        add_alias(cmd, ov, "--batch", "train.batch", "mini-batch size");
        add_alias(cmd, ov, "--threads", "pipeline.threads", "worker threads");
        add_alias(cmd, ov, "--route-threshold", "pipeline.route_threshold", "short/long routing threshold");
        cmd->add_flag("--rebalance", rebalance, "oversample positives of binary models");
        add_key_flags(cmd, ov);
    };
    auto* train = app.add_subcommand("train", "train the protocol's models and write checkpoints");
    add_run_flags(train);
    auto* evaluate_cmd = app.add_subcommand("evaluate", "cross-validate, or score saved checkpoints");
    add_run_flags(evaluate_cmd);
    evaluate_cmd->add_option("--checkpoints", checkpoints, "evaluate these checkpoints instead of training");
    evaluate_cmd->add_option("--run-manifest", manifest_path, "replay the configuration of a previous run");

    std::string which = "all";
    std::uint64_t gc_seed = kGradcheckSeed;
    double tolerance = 1e-5;
    auto* gradcheck = app.add_subcommand("gradcheck", "compare analytic and finite-difference gradients");
    gradcheck->add_option("--net", which, "lstm, tcn or all");
    gradcheck->add_option("--seed", gc_seed, "seed for the random model and inputs");
    gradcheck->add_option("--tolerance", tolerance, "maximum relative error");

    std::string input, format = "text", matrix;
    auto* report = app.add_subcommand("report", "render a saved report");
    report->add_option("--input", input, "report.json (default: <output.dir>/report.json)");
    report->add_option("--format", format, "json, text or csv");
    report->add_option("--confusion", matrix, "print the static or dynamic confusion matrix as CSV")
        ->check(CLI::IsMember({"static", "dynamic"}));
    add_key_flags(report, ov);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (rebalance) ov.aliases["pipeline.rebalance"] = "true";

    std::optional<ordered_json> manifest;
    if (!manifest_path.empty()) {
        try {
            manifest = ordered_json::parse(read_file(manifest_path));
            if (!manifest->contains("config")) throw DataError("run manifest has no config");
            if (checkpoints.empty() && manifest->contains("checkpoints"))
                checkpoints = manifest->at("checkpoints").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(manifest_path + ": " + e.what());
        }
    }

    const AppConfig cfg = resolve_config(ov, manifest);
    if (*gradcheck) return cmd_gradcheck(which, gc_seed, tolerance);
    if (*synth) return cmd_synth(cfg);
    if (*ingest) return cmd_ingest(cfg);
    if (*train) return cmd_train(cfg);
    if (*evaluate_cmd) return cmd_evaluate(cfg, checkpoints, manifest);
    return cmd_report(input.empty() ? output_dir(cfg) / "report.json" : fs::path(input), format, matrix);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        log("usage error: " + std::string(e.what()));
        return kExitUsage;
    } catch (const nn::DivergedError& e) {
        log("training diverged: " + std::string(e.what()));
        return kExitCheckFailed;
    } catch (const DataError& e) {
        log("data error: " + std::string(e.what()));
        return kExitData;
    } catch (const nn::CheckpointError& e) {
        log("checkpoint error: " + std::string(e.what()));
        return kExitData;
    } catch (const CheckpointMismatchError& e) {
        log("checkpoint/config mismatch: " + std::string(e.what()));
        return kExitData;
    } catch (const MissingClassError& e) {
        log("data error: " + std::string(e.what()));
        return kExitData;
    } catch (const FoldCoverageError& e) {
        log("data error: " + std::string(e.what()));
        return kExitData;
    } catch (const DegenerateReferenceError& e) {
        log("data error: " + std::string(e.what()));
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        log("i/o error: " + std::string(e.what()));
        return kExitData;
    } catch (const std::exception& e) {
        log("error: " + std::string(e.what()));
        return kExitCheckFailed;
    }
}
