// Command-line front end: single runs, strategy comparisons and parameter sweeps.

#include "feddct/commands.hpp"
#include "feddct/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace feddct;

std::vector<std::uint64_t> parse_seeds(const std::string& text)
{
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) {
            try {
                seeds.push_back(std::stoull(item));
            } catch (const std::exception&) {
                throw InvalidConfig("seeds", "not an integer: " + item);
            }
        }
    return seeds;
}

std::vector<Strategy> parse_strategies(const std::string& text)
{
    std::vector<Strategy> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) {
            auto s = parse_strategy(item);
            if (!s)
                throw InvalidConfig("strategies", "unknown strategy " + item);
            out.push_back(*s);
        }
    return out;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn)
{
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path);
    fn(out);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Virtual-time federated learning simulator with dynamic cross-tier client selection"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    int window = kDefaultSmoothingWindow;
    int jobs = 1;

    auto* run_cmd = app.add_subcommand("run", "Run one experiment and write trace.csv, summary.json, config.resolved.json");
    RunOptions run_opts;
    run_cmd->add_option("-c,--config", config_path, "JSON config (defaults when omitted)");
    run_cmd->add_option("-o,--out", out_path, "Output directory")->required();
    run_cmd->add_option("-w,--window", run_opts.window, "Smoothing window for best_accuracy")->check(CLI::PositiveNumber);
    run_cmd->add_flag("--export-shards", run_opts.export_shards, "Also write shards.csv");
    run_cmd->add_flag("--checkpoint", run_opts.write_checkpoint, "Also write the final model to model.bin");

    auto* cmp_cmd = app.add_subcommand("compare", "Compare strategies over several configs (medians over seeds)");
    std::vector<std::string> cmp_paths;
    cmp_cmd->add_option("configs", cmp_paths, "Config files differing only in strategy and/or seed")->required();
    cmp_cmd->add_option("-o,--out", out_path, "CSV output file (stdout when omitted)");
    cmp_cmd->add_option("-w,--window", window, "Smoothing window")->check(CLI::PositiveNumber);
    cmp_cmd->add_option("-j,--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

    auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter over values and seeds");
    std::string axis_name;
    std::string values_text;
    std::string seeds_text;
    std::string strategies_text;
    sweep_cmd->add_option("-c,--config", config_path, "Base JSON config (defaults when omitted)");
    sweep_cmd->add_option("-a,--axis", axis_name, "mu | noniid_fraction | base_delay_means_s")->required();
    sweep_cmd->add_option("-v,--values", values_text, "JSON array of values, e.g. '[0,0.2,0.4]'")->required();
    sweep_cmd->add_option("-s,--seeds", seeds_text, "Comma-separated seeds (default: the config seed)");
    sweep_cmd->add_option("--strategies", strategies_text, "Comma-separated strategies (default: the config strategy)");
    sweep_cmd->add_option("-o,--out", out_path, "CSV output file (stdout when omitted)");
    sweep_cmd->add_option("-w,--window", window, "Smoothing window")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("-j,--jobs", jobs, "Parallel runs")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*run_cmd) {
            const SimConfig cfg = config_path.empty() ? validate(SimConfig{}) : load_config(config_path);
            const auto summary = cmd_run(cfg, out_path, run_opts);
            std::cout << to_json(summary).dump(2) << '\n';
        } else if (*cmp_cmd) {
            std::vector<SimConfig> configs;
            for (const auto& p : cmp_paths)
                configs.push_back(load_config(p));
            const auto rows = cmd_compare(configs, window, jobs);
            with_output(out_path, [&](std::ostream& out) { write_compare_csv(out, rows); });
        } else if (*sweep_cmd) {
            const SimConfig base = config_path.empty() ? validate(SimConfig{}) : load_config(config_path);
            const auto axis = parse_sweep_axis(axis_name);
            if (!axis)
                throw InvalidConfig("axis", "unrecognised sweep axis " + axis_name);
            nlohmann::json values;
            try {
                values = nlohmann::json::parse(values_text);
            } catch (const nlohmann::json::parse_error&) {
                throw InvalidConfig("values", "not a JSON array");
            }
            auto seeds = seeds_text.empty() ? std::vector<std::uint64_t>{base.seed} : parse_seeds(seeds_text);
            const auto rows = cmd_sweep(base, *axis, values, seeds, parse_strategies(strategies_text), window, jobs);
            with_output(out_path, [&](std::ostream& out) { write_sweep_csv(out, *axis, rows); });
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const InvalidConfig& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IncompatibleConfigs& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}
