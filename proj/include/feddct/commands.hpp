#pragma once

#include "feddct/config.hpp"
#include "feddct/report.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace feddct {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

struct RunOptions
{
    int window = kDefaultSmoothingWindow;
    bool export_shards = false;
    bool write_checkpoint = false;
};

/// Runs configs on up to `jobs` threads. Results keep the input order.
std::vector<RunResult> run_all(const std::vector<SimConfig>& configs, int jobs);

/// Writes trace.csv, summary.json and config.resolved.json into `out_dir` (created if needed),
/// optionally shards.csv and model.bin.
RunSummary cmd_run(const SimConfig& config, const std::filesystem::path& out_dir, const RunOptions& opts = {});

std::vector<CompareRow> cmd_compare(const std::vector<SimConfig>& configs, int window, int jobs);

enum class SweepAxis
{
    Mu,
    NoniidFraction,
    BaseDelayMeans,
};

/// Accepts "mu", "noniid_fraction" and "base_delay_means_s".
std::optional<SweepAxis> parse_sweep_axis(std::string_view name) noexcept;
std::string_view to_string(SweepAxis axis) noexcept;

/// Applies one sweep value to a copy of `base` and validates it.
SimConfig apply_sweep_value(const SimConfig& base, SweepAxis axis, const nlohmann::json& value);

struct SweepRow
{
    std::string value;
    std::uint64_t seed = 0;
    RunSummary summary;
};

/// One run per (value, seed, strategy). Throws InvalidConfig for an empty value or seed list.
std::vector<SweepRow> cmd_sweep(const SimConfig& base, SweepAxis axis, const nlohmann::json& values,
                                const std::vector<std::uint64_t>& seeds, const std::vector<Strategy>& strategies,
                                int window, int jobs);

void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows);

} // namespace feddct
