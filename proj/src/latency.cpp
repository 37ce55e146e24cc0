#include "feddct/latency.hpp"

#include "feddct/errors.hpp"
#include "feddct/rng.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace feddct {

std::vector<int> assign_groups(int num_clients, int num_groups, RngStream& rng)
{
    if (num_groups <= 0 || num_clients <= 0 || num_clients % num_groups != 0)
        throw IndivisibleGroups(std::to_string(num_clients) + " clients cannot form " + std::to_string(num_groups) +
                                " equal groups");
    std::vector<int> order(static_cast<std::size_t>(num_clients));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    const int per_group = num_clients / num_groups;
    std::vector<int> groups(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        groups[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos) / per_group;
    return groups;
}

LatencyModel::LatencyModel(const SimConfig& config, std::vector<int> client_groups)
    : seed_(config.seed)
    , means_(config.base_delay_means_s)
    , stddev_(config.base_delay_stddev_s)
    , mu_(config.mu)
    , straggler_range_(config.straggler_delay_range_s)
    , groups_(std::move(client_groups))
{
}

TrainingTime LatencyModel::sample(int client, DrawPhase phase, std::uint64_t index, std::uint64_t sub) const
{
    const auto key = {static_cast<std::uint64_t>(phase), static_cast<std::uint64_t>(client), index, sub};
    RngStream base_rng(seed_, StreamId::Latency, key);
    RngStream fail_rng(seed_, StreamId::Straggler, key);

    const double mean = means_[static_cast<std::size_t>(group_of(client))];
    TrainingTime t;
    t.seconds = std::max(kMinBaseDelay, base_rng.normal(mean, stddev_));
    t.straggler = fail_rng.bernoulli(mu_);
    if (t.straggler)
        t.seconds += fail_rng.uniform(straggler_range_[0], straggler_range_[1]);
    return t;
}

} // namespace feddct
