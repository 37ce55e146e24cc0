#pragma once

#include "feddct/latency.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace feddct {

enum class ClientState
{
    Active,
    UnderEvaluation,
    Excluded,
};

/// Per-client bookkeeping. `at` is the historic average training time and `ct` the number of
/// rounds the client finished inside its tier's threshold.
struct ClientProfile
{
    int client_id = 0;
    double at = 0.0;
    int ct = 0;
    ClientState state = ClientState::Active;
    int latency_group = 0;
};

struct ClientTime
{
    int client_id = 0;
    double at = 0.0;
};

/// Clients grouped into ordered tiers, tier 0 fastest.
struct TierTable
{
    std::vector<std::vector<int>> tiers;
    std::vector<ClientTime> built_from;

    std::size_t size() const noexcept { return tiers.size(); }
    /// Index of the tier holding `client`, or -1.
    int tier_of(int client) const noexcept;
};

struct ProfilingResult
{
    std::vector<ClientProfile> profiles;
    /// Virtual duration of each profiling wave (slowest client of the wave).
    std::vector<double> wave_seconds;
};

/// Runs kappa profiling waves for every client. `at` is the mean of the client's draws and
/// `ct` starts at 0. Clients whose `at` reaches omega are Excluded.
ProfilingResult profile_clients(const LatencyModel& latency, int num_clients, int kappa, double omega_s);

/// Sorts ascending by `at` (ties by client_id) and fills tiers in chunks of m. When
/// `num_tiers` is larger than needed the trailing tiers are empty; when it is 0 the table has
/// ceil(n / m) tiers.
TierTable tier(std::span<const ClientTime> at, std::size_t m, std::size_t num_tiers = 0);

/// Tiers the Active clients only.
TierTable tier(std::span<const ClientProfile> profiles, std::size_t m, std::size_t num_tiers);

/// Running average at = (at * ct + t) / (ct + 1), then ct += 1.
void update_profile(ClientProfile& profile, double observed_seconds);

/// Marks the client UnderEvaluation; it is not selectable until complete_reevaluation runs.
void begin_reevaluation(ClientProfile& profile);

/// Replaces `at` with the mean of the evaluation draws and keeps `ct`. Returns true when the
/// client is Active again (new `at` below omega). Otherwise the evaluation did not complete
/// properly: the client stays UnderEvaluation and the caller schedules another cycle.
bool complete_reevaluation(ClientProfile& profile, std::span<const double> draws, double omega_s);

} // namespace feddct
