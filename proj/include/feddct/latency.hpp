#pragma once

#include "feddct/config.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace feddct {

class RngStream;

/// Which part of a run a training-time draw belongs to. Draws for the same
/// (phase, client, index) are identical across strategies sharing a seed.
enum class DrawPhase : std::uint64_t
{
    Profiling = 0,
    Round = 1,
    Reevaluation = 2,
};

struct TrainingTime
{
    double seconds = 0.0;
    bool straggler = false;
};

/// Equal-size latency groups drawn once per run. Throws IndivisibleGroups.
std::vector<int> assign_groups(int num_clients, int num_groups, RngStream& rng);

/// Per-group Gaussian base delay plus transient straggler injection.
class LatencyModel
{
public:
    static constexpr double kMinBaseDelay = 0.1;

    LatencyModel(const SimConfig& config, std::vector<int> client_groups);

    /// base ~ Normal(group mean, stddev) clamped at 0.1 s; with probability mu add
    /// Uniform(lo, hi). Keyed by (phase, client, index, sub), never by call order.
    TrainingTime sample(int client, DrawPhase phase, std::uint64_t index, std::uint64_t sub = 0) const;

    int group_of(int client) const { return groups_.at(static_cast<std::size_t>(client)); }
    const std::vector<int>& groups() const noexcept { return groups_; }

private:
    std::uint64_t seed_;
    std::vector<double> means_;
    double stddev_;
    double mu_;
    std::array<double, 2> straggler_range_;
    std::vector<int> groups_;
};

} // namespace feddct
