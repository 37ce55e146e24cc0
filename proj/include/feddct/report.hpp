#pragma once

#include "feddct/config.hpp"
#include "feddct/engine.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace feddct {

/// The CSV projection of a RoundReport:
/// round,virtual_time_s,strategy,selected_tier,num_selected,num_completed,num_timed_out,
/// accuracy,round_duration_s,dmax_per_tier (semicolon-separated).
struct TraceRow
{
    int round = 0;
    double virtual_time_s = 0.0;
    Strategy strategy = Strategy::FedDCT;
    int selected_tier = 0;
    int num_selected = 0;
    int num_completed = 0;
    int num_timed_out = 0;
    double accuracy = 0.0;
    double round_duration_s = 0.0;
    std::vector<double> dmax_per_tier;

    bool operator==(const TraceRow&) const = default;
};

inline constexpr std::string_view kTraceHeader =
    "round,virtual_time_s,strategy,selected_tier,num_selected,num_completed,num_timed_out,accuracy,"
    "round_duration_s,dmax_per_tier";

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

TraceRow to_row(const RoundReport& report);
std::string format_row(const TraceRow& row);
/// Throws IoError on malformed input.
TraceRow parse_row(std::string_view line);

void write_trace_csv(std::ostream& out, std::span<const RoundReport> reports);
std::vector<TraceRow> read_trace_csv(std::istream& in);

struct RunSummary
{
    Strategy strategy = Strategy::FedDCT;
    double best_accuracy = 0.0;
    std::optional<double> time_to_target_s;
    int rounds = 0;
    int total_stragglers = 0;
    std::string config_digest;
};

inline constexpr int kDefaultSmoothingWindow = 60;
inline constexpr int kTargetConsecutiveReports = 3;

/// Trailing moving average. Position i (i >= window-1) averages rows i-window+1..i. A series
/// shorter than the window yields a single value, its overall mean.
std::vector<double> smooth(std::span<const double> values, int window);

/// Virtual time of the first report that starts a run of kTargetConsecutiveReports reports at or
/// above `target`.
std::optional<double> time_to_target(std::span<const TraceRow> rows, double target);

/// Summaries depend on the trace alone. total_stragglers counts timed-out dispatches.
RunSummary summarize(std::span<const TraceRow> rows, double target, int window, std::string digest);

nlohmann::json to_json(const RunSummary& s);

struct CompareRow
{
    Strategy strategy = Strategy::FedDCT;
    int runs = 0;
    double best_accuracy = 0.0;
    std::optional<double> time_to_target_s;
    /// Relative accuracy gain over the best other strategy, in percent.
    double impr_a_pct = 0.0;
    /// Relative reduction of time-to-target over the fastest other strategy, in percent.
    std::optional<double> impr_b_pct;
};

double median(std::vector<double> v);

/// Groups by strategy, takes medians over seeds, and scores each strategy against the best of
/// the others (against itself when it is the only one). Rows follow the order strategies first
/// appear in `runs`.
std::vector<CompareRow> compare_summaries(std::span<const RunSummary> runs);

/// Throws IncompatibleConfigs if any field other than strategy and seed differs.
void check_compatible(std::span<const SimConfig> configs);

void write_compare_csv(std::ostream& out, std::span<const CompareRow> rows);

} // namespace feddct
