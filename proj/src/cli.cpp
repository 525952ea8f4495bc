#include "dualmind/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dualmind/checkpoint.hpp"
#include "dualmind/errors.hpp"
#include "dualmind/experiments.hpp"
#include "dualmind/kernels.hpp"
#include "dualmind/rng.hpp"

namespace dualmind::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string timestamp() {
    const std::time_t now =
        std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("invalid " + what + " value '" + s + "'");
    }
}

bool parse_bool(const std::string& s, const std::string& what) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ValidationError("invalid " + what + " value '" + s +
                          "' (use true/false)");
}

std::vector<std::pair<std::string, std::string>> load_config_file(
    const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot read " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config: malformed JSON in " + path + ": " +
                              e.what());
    }
    if (!j.is_object()) {
        throw ValidationError("config: " + path + " must hold a flat object");
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, value] : j.items()) {
        if (value.is_string()) {
            out.emplace_back(key, value.get<std::string>());
        } else {
            out.emplace_back(key, value.dump());
        }
    }
    return out;
}

void write_run_manifest(const RunConfig& config, const std::string& status,
                        const json& extra) {
    json m;
    switch (config.command) {
        case RunConfig::Command::train1: m["command"] = "train1"; break;
        case RunConfig::Command::train2: m["command"] = "train2"; break;
        case RunConfig::Command::experiment: m["command"] = "experiment"; break;
        case RunConfig::Command::all: m["command"] = "all"; break;
    }
    if (!config.experiment_name.empty()) {
        m["experiment"] = config.experiment_name;
    }
    if (config.seed) m["seed"] = *config.seed;
    json overrides = json::object();
    for (const auto& [k, v] : config.overrides) overrides[k] = v;
    m["overrides"] = overrides;
    m["version"] = "1.0.0";
    m["kernels"] = kernels::backend_name(kernels::active_backend());
    m["status"] = status;
    m["timestamp"] = timestamp();
    if (!extra.is_null()) m["result"] = extra;

    fs::create_directories(config.out_dir);
    std::ofstream out(fs::path(config.out_dir) / "run-manifest.json");
    if (!out) {
        throw IoError("manifest: cannot write under " + config.out_dir);
    }
    out << m.dump(1) << "\n";
}

json seeds_json(std::uint64_t master) {
    json j;
    j["master"] = master;
    j["system1"] = child_seed(master, "system1");
    j["controller"] = child_seed(master, "controller");
    j["gate"] = child_seed(master, "gate");
    return j;
}

json loss_summary(const LossCurve& curve) {
    json j;
    j["epochs"] = curve.size();
    if (!curve.empty()) {
        j["first"] = curve.front();
        j["final"] = curve.back();
    }
    return j;
}

struct Phase1Result {
    ModelState state;
    LossCurve loss;
};

Phase1Result do_train1(const RunConfig& config, const TrainConfig& tc) {
    Curricula curricula;
    curricula.phase1 = make_curriculum(CurriculumKind::phase1_canonical);

    DimsConfig dims = tc.dims;
    dims.feature_dim = curricula.phase1.front().graph.feature_dim();
    Phase1Result result{
        init_model(dims, true, tc.variant, tc.seed), {}};
    result.loss = pretrain_system1(result.state, curricula.phase1, tc);

    std::ofstream curr(fs::path(config.out_dir) / "curriculum-phase1.txt");
    curr << export_curriculum(curricula.phase1);

    const std::string path = config.checkpoint_out.empty()
                                 ? (fs::path(config.out_dir) /
                                    "checkpoint-phase1.json")
                                       .string()
                                 : config.checkpoint_out;
    save_checkpoint(result.state, path);
    std::cout << "train1: " << result.loss.size() << " epochs, final loss "
              << (result.loss.empty() ? 0.0 : result.loss.back())
              << ", checkpoint " << path << "\n";
    return result;
}

LossCurve do_train2(const RunConfig& config, const TrainConfig& tc,
                    ModelState& state) {
    std::vector<Trial> phase2 = make_curriculum(CurriculumKind::phase2_diverse);
    LossCurve loss = train_system2(state, phase2, tc);

    std::ofstream curr(fs::path(config.out_dir) / "curriculum-phase2.txt");
    curr << export_curriculum(phase2);

    const std::string path = config.checkpoint_out.empty()
                                 ? (fs::path(config.out_dir) /
                                    "checkpoint-full.json")
                                       .string()
                                 : config.checkpoint_out;
    save_checkpoint(state, path);
    std::cout << "train2: " << loss.size() << " epochs, final loss "
              << (loss.empty() ? 0.0 : loss.back()) << ", checkpoint " << path
              << "\n";
    return loss;
}

json do_experiment(const RunConfig& config, const std::string& name) {
    ExperimentReport report = run_experiment_by_name(
        name, config.seed.value_or(0), config.seed.has_value(), config.jobs);
    const std::string dir = (fs::path(config.out_dir) / name).string();
    emit_report(report, dir);
    json j;
    j["out"] = dir;
    j["records"] = report.records.size();
    std::cout << "experiment " << name << ": " << report.records.size()
              << " records -> " << dir << "\n";
    return j;
}

}  // namespace

std::optional<RunConfig> parse_args(const std::vector<std::string>& args) {
    RunConfig config;
    std::vector<std::string> sets;

    CLI::App app{"dualmind: context-gated dual-process belief inference"};
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub) {
        sub->add_option_function<std::uint64_t>(
            "--seed", [&config](const std::uint64_t& s) { config.seed = s; },
            "master seed (expands to per-component seeds)");
        sub->add_option("--out", config.out_dir, "output directory")
            ->capture_default_str();
        sub->add_option("--config", config.config_file,
                        "JSON config file (CLI flags win on conflict)");
        sub->add_option("--set", sets,
                        "override key=value onto the train/dims config "
                        "(repeatable)");
        sub->add_option("--jobs", config.jobs,
                        "parallel workers for fold/seed grids (0 = auto)");
    };

    CLI::App* train1 = app.add_subcommand(
        "train1", "pretrain the habitual pathway on the canonical curriculum");
    add_common(train1);
    train1->add_option("--checkpoint-out", config.checkpoint_out,
                       "where to write the phase-1 checkpoint");

    CLI::App* train2 = app.add_subcommand(
        "train2", "train controller and gate on the diverse curriculum");
    add_common(train2);
    train2->add_option("--checkpoint-in", config.checkpoint_in,
                       "phase-1 checkpoint to start from");
    train2->add_option("--checkpoint-out", config.checkpoint_out,
                       "where to write the full checkpoint");

    CLI::App* experiment = app.add_subcommand(
        "experiment",
        "run one protocol: ablation, falsebelief, anchor, prime, fatigue, "
        "frame");
    add_common(experiment);
    experiment->add_option("name", config.experiment_name, "experiment name")
        ->required();

    CLI::App* all = app.add_subcommand(
        "all", "train both phases, then every experiment in fixed order");
    add_common(all);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw ValidationError(e.what());
    }

    if (train1->parsed()) config.command = RunConfig::Command::train1;
    else if (train2->parsed()) config.command = RunConfig::Command::train2;
    else if (experiment->parsed()) config.command = RunConfig::Command::experiment;
    else config.command = RunConfig::Command::all;

    if (config.command == RunConfig::Command::experiment) {
        const auto& names = experiment_names();
        if (std::find(names.begin(), names.end(), config.experiment_name) ==
            names.end()) {
            std::string valid;
            for (const std::string& n : names) {
                valid += valid.empty() ? n : ", " + n;
            }
            throw ValidationError("unknown experiment '" +
                                  config.experiment_name + "' (valid: " +
                                  valid + ")");
        }
    }

    if (!config.config_file.empty()) {
        config.overrides = load_config_file(config.config_file);
    }
    for (const std::string& s : sets) {
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ValidationError("--set expects key=value, got '" + s + "'");
        }
        config.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return config;
}

void apply_overrides(
    TrainConfig& config,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
    for (const auto& [key, value] : overrides) {
        if (key == "phase1_epochs") {
            config.phase1_epochs = static_cast<int>(parse_u64(value, key));
        } else if (key == "phase2_epochs") {
            config.phase2_epochs = static_cast<int>(parse_u64(value, key));
        } else if (key == "lr") {
            config.lr = std::stod(value);
        } else if (key == "seed") {
            config.seed = parse_u64(value, key);
        } else if (key == "freeze_meta_in_phase2") {
            config.freeze_meta_in_phase2 = parse_bool(value, key);
        } else if (key == "variant") {
            config.variant = parse_variant(value);
        } else if (key == "phase2_early_stop") {
            config.phase2_early_stop = std::stod(value);
        } else if (key == "hidden_dim") {
            config.dims.hidden_dim = parse_u64(value, key);
        } else if (key == "meta_dim") {
            config.dims.meta_dim = parse_u64(value, key);
        } else if (key == "head_hidden") {
            config.dims.head_hidden = parse_u64(value, key);
        } else {
            throw ValidationError(
                "unknown override key '" + key +
                "' (valid: phase1_epochs, phase2_epochs, lr, seed, "
                "freeze_meta_in_phase2, variant, phase2_early_stop, "
                "hidden_dim, meta_dim, head_hidden)");
        }
    }
}

namespace {

int execute_impl(const RunConfig& config) {
    write_run_manifest(config, "running", json());

    TrainConfig tc;
    apply_overrides(tc, config.overrides);
    if (config.seed) tc.seed = *config.seed;

    json result;
    result["seeds"] = seeds_json(tc.seed);

    switch (config.command) {
        case RunConfig::Command::train1: {
            Phase1Result r = do_train1(config, tc);
            result["phase1_loss"] = loss_summary(r.loss);
            result["theta_checksum"] = theta_checksum(r.state.system1);
            break;
        }
        case RunConfig::Command::train2: {
            if (config.checkpoint_in.empty()) {
                throw StateError("train2: --checkpoint-in is required");
            }
            ModelState state = load_checkpoint(config.checkpoint_in);
            if (!state.phase1_done) {
                throw StateError("train2: checkpoint has no pretrained phase 1");
            }
            LossCurve loss = do_train2(config, tc, state);
            result["phase2_loss"] = loss_summary(loss);
            result["theta_checksum"] = theta_checksum(state.system1);
            break;
        }
        case RunConfig::Command::experiment: {
            result["experiments"] =
                json::array({do_experiment(config, config.experiment_name)});
            break;
        }
        case RunConfig::Command::all: {
            Phase1Result r = do_train1(config, tc);
            result["phase1_loss"] = loss_summary(r.loss);
            LossCurve loss = do_train2(config, tc, r.state);
            result["phase2_loss"] = loss_summary(loss);
            json runs = json::array();
            for (const std::string& name : experiment_names()) {
                runs.push_back(do_experiment(config, name));
            }
            result["experiments"] = runs;
            break;
        }
    }

    write_run_manifest(config, "ok", result);
    return kExitOk;
}

}  // namespace

int execute(const RunConfig& config) {
    try {
        return execute_impl(config);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        write_run_manifest(config, "failed", json{{"error", e.what()}});
        return kExitUsage;
    } catch (const StateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        write_run_manifest(config, "failed", json{{"error", e.what()}});
        return kExitState;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        write_run_manifest(config, "failed", json{{"error", e.what()}});
        return kExitNumeric;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

    std::optional<RunConfig> config;
    try {
        config = parse_args(args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    if (!config) return kExitOk;
    return execute(*config);
}

}  // namespace dualmind::cli
