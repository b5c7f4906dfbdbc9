// Command-line front end: otadpd <fit-pa|pretrain-demapper|train|evaluate|sweep> [options]
#include <CLI11.hpp>

#include <iostream>

#include "otadpd/experiment.hpp"

using namespace otadpd;

namespace {

Json parse_value(const std::string& v) {
    try {
        return Json::parse(v);
    } catch (const nlohmann::json::exception&) {
        return Json(v);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Over-the-air DPD training and evaluation"};
    app.require_subcommand(1, 0);  // several stages per call
    app.fallthrough();

    std::string config_path, run_dir_opt;
    std::vector<std::string> sets;
    std::string trainer;
    app.add_option("-c,--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    app.add_option("-d,--run-dir", run_dir_opt, "run directory (default: $OTADPD_RUN_ROOT/<name or hash>)");
    app.add_option("-s,--set", sets, "override a config field, key=value (value parsed as JSON if possible)");

    std::optional<std::uint64_t> seed;
    std::optional<int> nb;
    std::optional<long> eval_symbols;
    std::optional<double> adc_rate;
    std::string dpd_kind, name;
    app.add_option("--seed", seed, "master seed");
    app.add_option("--nb", nb, "RL iterations N_B");
    app.add_option("--eval-symbols", eval_symbols, "symbols per SER point");
    app.add_option("--adc-rate", adc_rate, "feedback ADC rate for ILA (Hz)");
    app.add_option("--dpd-kind", dpd_kind, "gmp or r2tdnn")->check(CLI::IsMember({"gmp", "r2tdnn"}));
    app.add_option("--name", name, "run name");

    auto* fit = app.add_subcommand("fit-pa", "identify the reference PA (or copy pa_file)");
    auto* pre = app.add_subcommand("pretrain-demapper", "pretrain the NN demapper (or store the ML demapper)");
    auto* train = app.add_subcommand("train", "train a DPD");
    train->add_option("--trainer", trainer, "rl or ila")->check(CLI::IsMember({"rl", "ila"}));
    auto* eval = app.add_subcommand("evaluate", "evaluate every trained DPD at the operating point");
    auto* sweep = app.add_subcommand("sweep", "SER / NMSE / ACPR against output power for every scheme");

    CLI11_PARSE(app, argc, argv);

    try {
        Json j = config_path.empty() ? Json::object() : read_json_file(config_path);
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError(s, "expected key=value");
            j[s.substr(0, eq)] = parse_value(s.substr(eq + 1));
        }
        if (seed) j["seed"] = *seed;
        if (nb) j["N_B"] = *nb;
        if (eval_symbols) j["eval_symbols"] = *eval_symbols;
        if (adc_rate) j["adc_rate"] = *adc_rate;
        if (!dpd_kind.empty()) j["dpd_kind"] = dpd_kind;
        if (!name.empty()) j["name"] = name;
        if (!trainer.empty()) j["trainer"] = trainer;
        const ExperimentConfig cfg = config_from_json(j);

        std::vector<Stage> stages;
        if (*fit) stages.push_back(Stage::FitPa);
        if (*pre) stages.push_back(Stage::PretrainDemapper);
        if (*train) stages.push_back(Stage::Train);
        if (*eval) stages.push_back(Stage::Evaluate);
        if (*sweep) stages.push_back(Stage::Sweep);

        const auto dir = run_dir_opt.empty() ? run(cfg, stages) : run(cfg, stages, run_dir_opt);
        std::cout << dir.string() << "\n";
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
