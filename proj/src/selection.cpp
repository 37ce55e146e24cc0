#include "feddct/selection.hpp"

#include <algorithm>
#include <numeric>

namespace feddct {

int move_tier(int t, double accuracy, double previous_accuracy, int num_tiers) noexcept
{
    if (accuracy >= previous_accuracy)
        return std::clamp(t - 1, 1, std::max(num_tiers, 1));
    return std::clamp(t + 1, 1, std::max(num_tiers, 1));
}

std::vector<double> selection_probs(std::span<const int> tier_members, std::span<const ClientProfile> profiles)
{
    std::vector<double> probs(tier_members.size());
    double total = 0.0;
    for (int c : tier_members)
        total += profiles[static_cast<std::size_t>(c)].ct;
    for (std::size_t i = 0; i < tier_members.size(); ++i) {
        probs[i] = total > 0.0 ? profiles[static_cast<std::size_t>(tier_members[i])].ct / total
                               : 1.0 / static_cast<double>(tier_members.size());
    }
    return probs;
}

std::vector<int> Selection::flat() const
{
    std::vector<int> out;
    for (const auto& t : per_tier)
        out.insert(out.end(), t.begin(), t.end());
    return out;
}

std::size_t Selection::count() const noexcept
{
    std::size_t n = 0;
    for (const auto& t : per_tier)
        n += t.size();
    return n;
}

Selection select_participants(const TierTable& tiers, int t, std::span<const ClientProfile> profiles, int tau,
                              RngStream& rng)
{
    Selection sel;
    const auto upto = std::min(static_cast<std::size_t>(std::max(t, 0)), tiers.size());
    sel.per_tier.resize(upto);
    for (std::size_t k = 0; k < upto; ++k) {
        const auto& members = tiers.tiers[k];
        const auto probs = selection_probs(members, profiles);

        struct Candidate
        {
            double prob;
            double tie;
            int client;
        };
        std::vector<Candidate> cands;
        cands.reserve(members.size());
        for (std::size_t i = 0; i < members.size(); ++i)
            cands.push_back({probs[i], rng.uniform(), members[i]});
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            if (a.prob != b.prob)
                return a.prob < b.prob;
            if (a.tie != b.tie)
                return a.tie < b.tie;
            return a.client < b.client;
        });
        const auto take = std::min(cands.size(), static_cast<std::size_t>(tau));
        for (std::size_t i = 0; i < take; ++i)
            sel.per_tier[k].push_back(cands[i].client);
    }
    return sel;
}

std::vector<double> compute_thresholds(const TierTable& tiers, std::span<const ClientProfile> profiles, double beta,
                                       double omega_s, int t)
{
    std::vector<double> out;
    const auto upto = std::min(static_cast<std::size_t>(std::max(t, 0)), tiers.size());
    for (std::size_t k = 0; k < upto; ++k) {
        const auto& members = tiers.tiers[k];
        if (members.empty()) {
            out.push_back(omega_s);
            continue;
        }
        double sum = 0.0;
        for (int c : members)
            sum += profiles[static_cast<std::size_t>(c)].at;
        out.push_back(std::min(sum / static_cast<double>(members.size()) * beta, omega_s));
    }
    return out;
}

} // namespace feddct
