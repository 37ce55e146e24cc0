#include "feddct/commands.hpp"

#include "feddct/errors.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace feddct {

namespace fs = std::filesystem;

std::vector<RunResult> run_all(const std::vector<SimConfig>& configs, int jobs)
{
    std::vector<RunResult> results(configs.size());
    const auto workers = static_cast<std::size_t>(std::clamp<int>(jobs, 1, std::max<int>(1, static_cast<int>(configs.size()))));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            try {
                results[i] = run(configs[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(work);
    }
    if (failure)
        std::rethrow_exception(failure);
    return results;
}

namespace {

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out)
{
    std::ofstream out(p, mode);
    if (!out)
        throw IoError("cannot write " + p.string());
    return out;
}

RunSummary summarize_result(const SimConfig& config, const RunResult& result, int window)
{
    std::vector<TraceRow> rows;
    rows.reserve(result.reports.size());
    for (const auto& r : result.reports)
        rows.push_back(to_row(r));
    return summarize(rows, config.target_accuracy, window, config_digest(config));
}

} // namespace

RunSummary cmd_run(const SimConfig& config, const fs::path& out_dir, const RunOptions& opts)
{
    const SimConfig cfg = validate(config);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    const Environment env = build_environment(cfg);
    RunResult result;
    switch (cfg.strategy) {
    case Strategy::FedDCT:
        result = run_feddct(env);
        break;
    case Strategy::FedAvg:
        result = run_fedavg(env);
        break;
    case Strategy::TiFL:
        result = run_tifl(env);
        break;
    case Strategy::FedAsync:
        result = run_fedasync(env);
        break;
    }

    {
        auto out = open_out(out_dir / "trace.csv");
        write_trace_csv(out, result.reports);
    }
    const RunSummary summary = summarize_result(cfg, result, opts.window);
    open_out(out_dir / "summary.json") << to_json(summary).dump(2) << '\n';
    open_out(out_dir / "config.resolved.json") << to_json(cfg).dump(2) << '\n';
    if (opts.export_shards) {
        auto out = open_out(out_dir / "shards.csv");
        write_shards_csv(out, env.data, env.shards);
    }
    if (opts.write_checkpoint) {
        auto out = open_out(out_dir / "model.bin", std::ios::out | std::ios::binary);
        write_checkpoint(out, result.final_model);
    }
    return summary;
}

std::vector<CompareRow> cmd_compare(const std::vector<SimConfig>& configs, int window, int jobs)
{
    if (configs.size() < 2)
        throw InvalidConfig("<configs>", "compare needs at least two configs");
    check_compatible(configs);
    const auto results = run_all(configs, jobs);
    std::vector<RunSummary> summaries;
    for (std::size_t i = 0; i < configs.size(); ++i)
        summaries.push_back(summarize_result(configs[i], results[i], window));
    return compare_summaries(summaries);
}

std::optional<SweepAxis> parse_sweep_axis(std::string_view name) noexcept
{
    if (name == "mu")
        return SweepAxis::Mu;
    if (name == "noniid_fraction")
        return SweepAxis::NoniidFraction;
    if (name == "base_delay_means_s")
        return SweepAxis::BaseDelayMeans;
    return std::nullopt;
}

std::string_view to_string(SweepAxis axis) noexcept
{
    switch (axis) {
    case SweepAxis::Mu:
        return "mu";
    case SweepAxis::NoniidFraction:
        return "noniid_fraction";
    case SweepAxis::BaseDelayMeans:
        return "base_delay_means_s";
    }
    return "?";
}

SimConfig apply_sweep_value(const SimConfig& base, SweepAxis axis, const nlohmann::json& value)
{
    auto doc = to_json(base);
    doc[std::string(to_string(axis))] = value;
    SimConfig c = config_from_json(doc);
    // knobs outside the JSON schema carry over unchanged
    c.dataset = base.dataset;
    c.fedasync_alpha = base.fedasync_alpha;
    c.fedasync_report_every = base.fedasync_report_every;
    c.tifl_credits_per_tier = base.tifl_credits_per_tier;
    c.charge_profiling_time = base.charge_profiling_time;
    return validate(std::move(c));
}

std::vector<SweepRow> cmd_sweep(const SimConfig& base, SweepAxis axis, const nlohmann::json& values,
                                const std::vector<std::uint64_t>& seeds, const std::vector<Strategy>& strategies,
                                int window, int jobs)
{
    if (!values.is_array() || values.empty())
        throw InvalidConfig(std::string(to_string(axis)), "sweep needs a non-empty list of values");
    if (seeds.empty())
        throw InvalidConfig("seed", "sweep needs at least one seed");

    std::vector<SimConfig> configs;
    std::vector<SweepRow> rows;
    const std::vector<Strategy> strats = strategies.empty() ? std::vector<Strategy>{base.strategy} : strategies;
    for (const auto& v : values) {
        const SimConfig at_value = apply_sweep_value(base, axis, v);
        for (auto seed : seeds)
            for (auto s : strats) {
                SimConfig c = at_value;
                c.seed = seed;
                c.strategy = s;
                configs.push_back(c);
                rows.push_back({v.is_string() ? v.get<std::string>() : v.dump(), seed, {}});
            }
    }
    const auto results = run_all(configs, jobs);
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows[i].summary = summarize_result(configs[i], results[i], window);
    return rows;
}

void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows)
{
    out << to_string(axis) << ",seed,strategy,best_accuracy,time_to_target_s,rounds,total_stragglers\n";
    for (const auto& r : rows) {
        std::string value = r.value;
        if (value.find(',') != std::string::npos)
            value = '"' + value + '"';
        out << value << ',' << r.seed << ',' << to_string(r.summary.strategy) << ','
            << format_double(r.summary.best_accuracy) << ','
            << (r.summary.time_to_target_s ? format_double(*r.summary.time_to_target_s) : "NA") << ','
            << r.summary.rounds << ',' << r.summary.total_stragglers << '\n';
    }
}

} // namespace feddct
