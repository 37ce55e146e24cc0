#pragma once

#include "feddct/rng.hpp"
#include "feddct/tiering.hpp"

#include <span>
#include <vector>

namespace feddct {

/// Tier pointer movement. `t` is 1-based. Accuracy that held or improved moves one tier
/// faster, a drop moves one tier slower; the result is clamped to [1, num_tiers].
int move_tier(int t, double accuracy, double previous_accuracy, int num_tiers) noexcept;

/// probs[c] = ct[c] / sum of ct over the tier, uniform when the sum is zero.
/// `profiles` is indexed by client_id.
std::vector<double> selection_probs(std::span<const int> tier_members, std::span<const ClientProfile> profiles);

struct Selection
{
    /// per_tier[k] lists the clients chosen from tier k (0-based).
    std::vector<std::vector<int>> per_tier;

    std::vector<int> flat() const;
    std::size_t count() const noexcept;
};

/// For every tier 1..t takes the tau members with the smallest selection probability, ties
/// broken uniformly at random. Tiers smaller than tau contribute all their members.
Selection select_participants(const TierTable& tiers, int t, std::span<const ClientProfile> profiles, int tau,
                              RngStream& rng);

/// Per-tier timeout thresholds for tiers 1..t: min(mean at of the tier * beta, omega).
/// Empty tiers get omega.
std::vector<double> compute_thresholds(const TierTable& tiers, std::span<const ClientProfile> profiles, double beta,
                                       double omega_s, int t);

} // namespace feddct
