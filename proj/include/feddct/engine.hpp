#pragma once

#include "feddct/config.hpp"
#include "feddct/dataset.hpp"
#include "feddct/latency.hpp"
#include "feddct/model.hpp"
#include "feddct/tiering.hpp"

#include <cstdint>
#include <queue>
#include <span>
#include <vector>

namespace feddct {

/// One row of a run's trace. Synchronous strategies emit one per global round; FedAsync emits
/// one per `fedasync_report_every` merges.
struct RoundReport
{
    int round = 0;
    double virtual_time_s = 0.0;
    Strategy strategy = Strategy::FedDCT;
    /// 1-based tier pointer (FedDCT) or chosen tier (TiFL); 0 when the strategy has no tiers.
    int selected_tier = 0;
    std::vector<int> participants;
    std::vector<int> completed;
    std::vector<int> timed_out;
    std::vector<double> dmax_per_tier;
    double accuracy = 0.0;
    double duration_s = 0.0;
    /// No eligible participant existed; the model and accuracy carried over.
    bool degenerate = false;
};

struct RunResult
{
    std::vector<RoundReport> reports;
    ModelState final_model;
    std::vector<ClientProfile> final_profiles;
    /// Virtual seconds charged for the initial profiling waves.
    double profiling_s = 0.0;
    /// FedAsync only: staleness of every merge, in merge order.
    std::vector<int> staleness;
};

enum class EventKind : int
{
    ReevaluationDone = 0,
    ClientCompletion = 1,
};

struct Event
{
    double time = 0.0;
    EventKind kind = EventKind::ReevaluationDone;
    int client = 0;
    std::vector<double> draws;
};

/// Virtual time plus a pending-event queue. Events pop in (time, kind, client) order and time
/// never moves backwards.
class VirtualClock
{
public:
    explicit VirtualClock(double start = 0.0) : now_(start) {}

    double now() const noexcept { return now_; }
    /// Throws std::logic_error when `t` is in the past.
    void advance_to(double t);
    void schedule(Event e);
    bool has_due(double t) const noexcept;
    bool empty() const noexcept { return queue_.empty(); }
    const Event& peek() const { return queue_.top(); }
    /// Removes the next event without moving the clock.
    Event pop();

private:
    struct Later
    {
        bool operator()(const Event& a, const Event& b) const noexcept
        {
            if (a.time != b.time)
                return a.time > b.time;
            if (a.kind != b.kind)
                return a.kind > b.kind;
            return a.client > b.client;
        }
    };

    double now_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
};

/// Per-tier wait min(max(times), dmax[k], omega) for every tier that dispatched clients, and the
/// round lasts as long as the slowest tier. Tiers with no times contribute nothing.
double round_duration(const std::vector<std::vector<double>>& times_per_tier, std::span<const double> dmax,
                      double omega_s);

/// Everything a run needs that is a pure function of the seed and independent of strategy.
struct Environment
{
    SimConfig config;
    Dataset data;
    std::vector<ClientShard> shards;
    LatencyModel latency;
    ModelState initial_model;
    ProfilingResult profiling;
    double start_time_s = 0.0;
};

Environment build_environment(const SimConfig& config);

/// Draws k distinct indices from [0, n) uniformly.
std::vector<int> choose_uniform(int n, int k, RngStream& rng);

RunResult run_feddct(const Environment& env);
RunResult run_fedavg(const Environment& env);
RunResult run_tifl(const Environment& env);
RunResult run_fedasync(const Environment& env);

/// Validates, builds the environment and dispatches on config.strategy.
RunResult run(const SimConfig& config);

} // namespace feddct
