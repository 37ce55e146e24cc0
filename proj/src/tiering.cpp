#include "feddct/tiering.hpp"

#include <algorithm>
#include <numeric>

namespace feddct {

int TierTable::tier_of(int client) const noexcept
{
    for (std::size_t k = 0; k < tiers.size(); ++k)
        if (std::find(tiers[k].begin(), tiers[k].end(), client) != tiers[k].end())
            return static_cast<int>(k);
    return -1;
}

ProfilingResult profile_clients(const LatencyModel& latency, int num_clients, int kappa, double omega_s)
{
    ProfilingResult r;
    r.wave_seconds.assign(static_cast<std::size_t>(kappa), 0.0);
    r.profiles.resize(static_cast<std::size_t>(num_clients));
    for (int c = 0; c < num_clients; ++c) {
        double sum = 0.0;
        for (int w = 0; w < kappa; ++w) {
            const double s = latency.sample(c, DrawPhase::Profiling, static_cast<std::uint64_t>(w)).seconds;
            sum += s;
            auto& wave = r.wave_seconds[static_cast<std::size_t>(w)];
            wave = std::max(wave, s);
        }
        auto& p = r.profiles[static_cast<std::size_t>(c)];
        p.client_id = c;
        p.at = sum / kappa;
        p.ct = 0;
        p.latency_group = latency.group_of(c);
        p.state = p.at >= omega_s ? ClientState::Excluded : ClientState::Active;
    }
    return r;
}

TierTable tier(std::span<const ClientTime> at, std::size_t m, std::size_t num_tiers)
{
    TierTable t;
    t.built_from.assign(at.begin(), at.end());
    if (m == 0)
        return t;
    std::stable_sort(t.built_from.begin(), t.built_from.end(), [](const ClientTime& a, const ClientTime& b) {
        if (a.at != b.at)
            return a.at < b.at;
        return a.client_id < b.client_id;
    });
    const std::size_t needed = m == 0 ? 0 : (t.built_from.size() + m - 1) / m;
    t.tiers.resize(std::max(needed, num_tiers));
    for (std::size_t i = 0; i < t.built_from.size(); ++i)
        t.tiers[i / m].push_back(t.built_from[i].client_id);
    return t;
}

TierTable tier(std::span<const ClientProfile> profiles, std::size_t m, std::size_t num_tiers)
{
    std::vector<ClientTime> active;
    for (const auto& p : profiles)
        if (p.state == ClientState::Active)
            active.push_back({p.client_id, p.at});
    return tier(active, m, num_tiers);
}

void update_profile(ClientProfile& p, double observed_seconds)
{
    p.at = (p.at * p.ct + observed_seconds) / (p.ct + 1);
    p.ct += 1;
}

void begin_reevaluation(ClientProfile& p)
{
    p.state = ClientState::UnderEvaluation;
}

bool complete_reevaluation(ClientProfile& p, std::span<const double> draws, double omega_s)
{
    if (draws.empty())
        return p.state == ClientState::Active;
    p.at = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(draws.size());
    p.state = p.at >= omega_s ? ClientState::UnderEvaluation : ClientState::Active;
    return p.state == ClientState::Active;
}

} // namespace feddct
