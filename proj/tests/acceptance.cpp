// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any criterion fails.

#include "feddct/commands.hpp"
#include "feddct/engine.hpp"
#include "feddct/report.hpp"
#include "feddct/selection.hpp"
#include "feddct/tiering.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

using namespace feddct;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
    bool pass = true;
    std::string detail;
};

bool rel_eq(double a, double b)
{
    return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

std::string fmt(double v)
{
    std::ostringstream o;
    o.precision(4);
    o << v;
    return o.str();
}

std::string fmt_time(std::optional<double> t)
{
    return t ? fmt(*t) + " s" : "never";
}

// ---------------------------------------------------------------------------------------------
// 1. equation oracles

Outcome equation_oracles()
{
    const auto start = std::chrono::steady_clock::now();
    RngStream rng(2024, StreamId::Selection, {1});
    int mismatches = 0;

    for (int trial = 0; trial < 1000; ++trial) {
        // Eq. running average: closed form (at0 * ct0 + sum t) / (ct0 + n)
        ClientProfile p;
        p.at = rng.uniform(0.1, 40.0);
        p.ct = static_cast<int>(rng.index(6));
        const double at0 = p.at;
        const int ct0 = p.ct;
        const std::size_t n = 1 + rng.index(20);
        long double sum = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = rng.uniform(0.1, 60.0);
            sum += t;
            update_profile(p, t);
        }
        const double closed = static_cast<double>((static_cast<long double>(at0) * ct0 + sum) /
                                                  static_cast<long double>(ct0 + static_cast<int>(n)));
        if (!rel_eq(p.at, closed) || p.ct != ct0 + static_cast<int>(n))
            ++mismatches;

        // selection probabilities: ct / sum ct, uniform when the sum is zero
        const std::size_t size = 1 + rng.index(12);
        std::vector<ClientProfile> ps(size);
        std::vector<int> members(size);
        const bool all_zero = rng.bernoulli(0.1);
        for (std::size_t i = 0; i < size; ++i) {
            ps[i].client_id = static_cast<int>(i);
            ps[i].ct = all_zero ? 0 : static_cast<int>(rng.index(30));
            members[i] = static_cast<int>(i);
        }
        long double total = 0.0L;
        for (std::size_t i = size; i-- > 0;)
            total += ps[i].ct;
        const auto probs = selection_probs(members, ps);
        for (std::size_t i = 0; i < size; ++i) {
            const double want = total == 0.0L ? 1.0 / static_cast<double>(size)
                                               : static_cast<double>(ps[i].ct / total);
            if (!rel_eq(probs[i], want))
                ++mismatches;
        }

        // per-tier duration: min(max draw, dmax, omega) from a sorted copy
        const double omega = rng.uniform(5.0, 40.0);
        const std::size_t tiers = 1 + rng.index(5);
        std::vector<std::vector<double>> times(tiers);
        std::vector<double> dmax(tiers);
        for (std::size_t k = 0; k < tiers; ++k) {
            dmax[k] = rng.uniform(1.0, 50.0);
            const std::size_t cnt = 1 + rng.index(6);
            for (std::size_t i = 0; i < cnt; ++i)
                times[k].push_back(rng.uniform(0.1, 60.0));
        }
        auto sorted = times[0];
        std::sort(sorted.begin(), sorted.end());
        const double one = round_duration({times[0]}, std::span(dmax.data(), 1), omega);
        if (!rel_eq(one, std::min({sorted.back(), dmax[0], omega})))
            ++mismatches;

        // overall duration by event replay: walk arrivals in time order, each tier closes at its
        // last arrival before the cap, or at the cap once a later arrival is seen
        struct Arrival
        {
            double t;
            std::size_t tier;
        };
        std::vector<Arrival> arrivals;
        for (std::size_t k = 0; k < tiers; ++k)
            for (double t : times[k])
                arrivals.push_back({t, k});
        std::sort(arrivals.begin(), arrivals.end(), [](const Arrival& a, const Arrival& b) { return a.t < b.t; });
        std::vector<double> close(tiers, 0.0);
        for (const auto& a : arrivals) {
            const double cap = std::min(dmax[a.tier], omega);
            close[a.tier] = a.t < cap ? a.t : cap;
        }
        if (!rel_eq(round_duration(times, dmax, omega), *std::max_element(close.begin(), close.end())))
            ++mismatches;

        // thresholds: mean at of the tier times beta, capped; empty tiers get omega
        const std::size_t clients = 2 + rng.index(20);
        std::vector<ClientProfile> prof(clients);
        TierTable table;
        table.tiers.resize(1 + rng.index(5));
        for (std::size_t c = 0; c < clients; ++c) {
            prof[c].client_id = static_cast<int>(c);
            prof[c].at = rng.uniform(0.1, 40.0);
            table.tiers[rng.index(table.tiers.size())].push_back(static_cast<int>(c));
        }
        const double beta = rng.uniform(1.0, 2.0);
        const int t = 1 + static_cast<int>(rng.index(table.tiers.size()));
        const auto d = compute_thresholds(table, prof, beta, omega, t);
        if (d.size() != static_cast<std::size_t>(t))
            ++mismatches;
        for (std::size_t k = 0; k < d.size(); ++k) {
            const auto& members_k = table.tiers[k];
            double want = omega;
            if (!members_k.empty()) {
                long double s = 0.0L;
                for (int c : members_k)
                    s += prof[static_cast<std::size_t>(c)].at;
                want = std::min(static_cast<double>(s / members_k.size()) * beta, omega);
            }
            if (!rel_eq(d[k], want))
                ++mismatches;
        }
    }

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {mismatches == 0 && secs < 5.0, std::to_string(mismatches) + " mismatches, " + fmt(secs) + " s"};
}

// ---------------------------------------------------------------------------------------------
// 2. tiering hand trace

std::vector<std::vector<int>> hand_trace(std::vector<ClientTime> at, std::size_t m, std::size_t num_tiers)
{
    for (std::size_t i = 1; i < at.size(); ++i)
        for (std::size_t j = i; j > 0; --j) {
            const auto& a = at[j - 1];
            const auto& b = at[j];
            if (b.at < a.at || (b.at == a.at && b.client_id < a.client_id))
                std::swap(at[j - 1], at[j]);
            else
                break;
        }
    std::vector<std::vector<int>> ts(num_tiers);
    for (std::size_t i = 0; i < at.size(); ++i) {
        auto& row = ts[i / m];
        if (row.size() <= i % m)
            row.resize(i % m + 1);
        row[i % m] = at[i].client_id;
    }
    return ts;
}

Outcome tiering_oracle()
{
    RngStream rng(2024, StreamId::Selection, {2});
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t num_tiers = 1 + rng.index(10);
        const std::size_t m = std::max((3 + num_tiers) / num_tiers, (4 + rng.index(97)) / num_tiers);
        const std::size_t n = m * num_tiers;
        std::vector<ClientProfile> ps(n);
        std::vector<ClientTime> active;
        // coarse values so equal at values and the id tie-break show up
        const bool coarse = rng.bernoulli(0.5);
        for (std::size_t c = 0; c < n; ++c) {
            ps[c].client_id = static_cast<int>(c);
            ps[c].at = coarse ? static_cast<double>(1 + rng.index(8)) : rng.uniform(0.1, 30.0);
            const double u = rng.uniform();
            ps[c].state = u < 0.7 ? ClientState::Active : u < 0.85 ? ClientState::UnderEvaluation : ClientState::Excluded;
            if (ps[c].state == ClientState::Active)
                active.push_back({ps[c].client_id, ps[c].at});
        }
        // Active count divisible by m or not, the table keeps num_tiers rows
        if (tier(ps, m, num_tiers).tiers != hand_trace(active, m, num_tiers))
            ++mismatches;

        std::vector<ClientTime> all;
        for (const auto& p : ps)
            all.push_back({p.client_id, p.at});
        const std::size_t m2 = 1 + rng.index(n);
        const std::size_t rows = (n + m2 - 1) / m2;
        if (tier(all, m2).tiers != hand_trace(all, m2, rows))
            ++mismatches;
    }
    return {mismatches == 0, std::to_string(mismatches) + " mismatches over 2000 tables"};
}

// ---------------------------------------------------------------------------------------------
// 3. tier pointer state machine

Outcome pointer_state_machine()
{
    int checked = 0;
    int mismatches = 0;
    for (int M = 1; M <= 10; ++M)
        for (int t = 1; t <= M; ++t)
            for (double change : {-0.1, 0.0, 0.1}) {
                const double prev = 0.5;
                const double acc = prev + change;
                const int want = acc >= prev ? std::max(t - 1, 1) : std::min(t + 1, M);
                const int got = move_tier(t, acc, prev, M);
                ++checked;
                if (got != want || got < 1 || got > M)
                    ++mismatches;
            }
    return {mismatches == 0, std::to_string(checked) + " cases, " + std::to_string(mismatches) + " mismatches"};
}

// ---------------------------------------------------------------------------------------------
// 4. determinism

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism()
{
    const fs::path root = fs::temp_directory_path() / "feddct_acceptance_determinism";
    fs::remove_all(root);
    Outcome out;
    for (auto s : {Strategy::FedDCT, Strategy::FedAvg, Strategy::TiFL, Strategy::FedAsync}) {
        SimConfig c;
        c.strategy = s;
        const std::string name(to_string(s));
        cmd_run(c, root / (name + "_a"));
        cmd_run(c, root / (name + "_b"));
        const std::string a = slurp(root / (name + "_a") / "trace.csv");
        const bool same = !a.empty() && a == slurp(root / (name + "_b") / "trace.csv");
        out.pass = out.pass && same;
        out.detail += name + (same ? " identical" : " DIFFERS") + (s == Strategy::FedAsync ? "" : ", ");
    }
    fs::remove_all(root);
    return out;
}

// ---------------------------------------------------------------------------------------------
// 5. straggler frequency

Outcome straggler_frequency()
{
    SimConfig c;
    c.mu = 0.2;
    RngStream group_rng(c.seed, StreamId::Latency);
    const LatencyModel lat(c, assign_groups(c.num_clients, static_cast<int>(c.base_delay_means_s.size()), group_rng));
    const int rounds = 2000;
    long hits = 0;
    for (int r = 1; r <= rounds; ++r)
        for (int client = 0; client < c.num_clients; ++client)
            hits += lat.sample(client, DrawPhase::Round, static_cast<std::uint64_t>(r)).straggler ? 1 : 0;
    const double freq = static_cast<double>(hits) / (rounds * c.num_clients);
    return {std::abs(freq - 0.2) <= 0.01, "frequency " + fmt(freq) + " over " + std::to_string(rounds * c.num_clients) +
                                              " draws"};
}

// ---------------------------------------------------------------------------------------------
// 6. fairness

Outcome fairness()
{
    SimConfig c;
    c.mu = 0.0;
    // zero spread keeps every at equal to its group mean, so the tiers never change
    c.base_delay_stddev_s = 0.0;
    const RunResult r = run(c);
    Outcome out;
    for (const auto& rep : r.reports)
        if (!rep.timed_out.empty())
            out.pass = false;
    const TierTable tiers = tier(r.final_profiles, static_cast<std::size_t>(c.clients_per_tier()),
                                 static_cast<std::size_t>(c.num_tiers));
    for (std::size_t k = 0; k < tiers.size(); ++k) {
        const auto& members = tiers.tiers[k];
        int lo = std::numeric_limits<int>::max();
        int hi = 0;
        for (int m : members) {
            lo = std::min(lo, r.final_profiles[static_cast<std::size_t>(m)].ct);
            hi = std::max(hi, r.final_profiles[static_cast<std::size_t>(m)].ct);
        }
        const auto size = static_cast<int>(members.size());
        const int bound = 2 * ((size + c.tau - 1) / c.tau);
        if (members.empty() || hi - lo > bound)
            out.pass = false;
        out.detail += "tier " + std::to_string(k + 1) + " spread " + std::to_string(hi - lo) + "/" +
                      std::to_string(bound) + (k + 1 < tiers.size() ? ", " : "");
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// 7-9. trends over seeds

RunSummary summary_of(const SimConfig& c, const RunResult& r)
{
    std::vector<TraceRow> rows;
    for (const auto& rep : r.reports)
        rows.push_back(to_row(rep));
    return summarize(rows, c.target_accuracy, kDefaultSmoothingWindow, config_digest(c));
}

struct Medians
{
    double accuracy = 0.0;
    std::optional<double> time;
};

// Missing target times count as infinitely late; the median is missing when most runs missed.
Medians medians_over_seeds(SimConfig c, const std::vector<std::uint64_t>& seeds)
{
    std::vector<double> acc;
    std::vector<double> time;
    for (auto seed : seeds) {
        c.seed = seed;
        const RunSummary s = summary_of(c, run(c));
        acc.push_back(s.best_accuracy);
        time.push_back(s.time_to_target_s.value_or(std::numeric_limits<double>::infinity()));
    }
    Medians m;
    m.accuracy = median(acc);
    const double t = median(time);
    if (std::isfinite(t))
        m.time = t;
    return m;
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

std::map<Strategy, Medians>& default_medians()
{
    static std::map<Strategy, Medians> cache;
    if (cache.empty())
        for (auto s : {Strategy::FedDCT, Strategy::FedAvg, Strategy::TiFL}) {
            SimConfig c;
            c.strategy = s;
            cache[s] = medians_over_seeds(c, kSeeds);
        }
    return cache;
}

Outcome time_to_target_trend()
{
    const auto& m = default_medians();
    const auto dct = m.at(Strategy::FedDCT).time;
    const auto avg = m.at(Strategy::FedAvg).time;
    Outcome out;
    out.pass = dct.has_value() && (!avg || *dct <= 0.7 * *avg);
    out.detail = "median FedDCT " + fmt_time(dct) + ", FedAvg " + fmt_time(avg);
    if (dct && avg)
        out.detail += ", reduction " + fmt(100.0 * (1.0 - *dct / *avg)) + "%";
    return out;
}

Outcome accuracy_trend()
{
    const auto& m = default_medians();
    const double dct = m.at(Strategy::FedDCT).accuracy;
    const double avg = m.at(Strategy::FedAvg).accuracy;
    const double tifl = m.at(Strategy::TiFL).accuracy;
    Outcome out;
    out.pass = dct >= avg - 0.005 && dct >= tifl;
    out.detail = "median best accuracy FedDCT " + fmt(dct) + ", FedAvg " + fmt(avg) + ", TiFL " + fmt(tifl);
    return out;
}

Outcome mu_robustness()
{
    std::map<Strategy, std::vector<double>> times;
    for (auto s : {Strategy::FedDCT, Strategy::FedAvg})
        for (double mu : {0.0, 0.2, 0.4}) {
            SimConfig c;
            c.strategy = s;
            c.mu = mu;
            const auto t = medians_over_seeds(c, kSeeds).time;
            times[s].push_back(t.value_or(std::numeric_limits<double>::infinity()));
        }
    Outcome out;
    const auto& dct = times[Strategy::FedDCT];
    const auto& avg = times[Strategy::FedAvg];
    out.pass = std::isfinite(dct[0]) && std::isfinite(avg[0]);
    for (std::size_t i = 1; i < 3; ++i) {
        const double rd = dct[i] / dct[0];
        const double ra = avg[i] / avg[0];
        out.pass = out.pass && rd < ra;
        out.detail += "mu " + fmt(0.2 * static_cast<double>(i)) + " ratio FedDCT " + fmt(rd) + " vs FedAvg " + fmt(ra) +
                      (i == 1 ? ", " : "");
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// 10. tier trajectory

Outcome tier_trajectory()
{
    SimConfig c;
    const RunResult r = run(c);
    const std::size_t q = r.reports.size() / 4;
    double first = 0.0;
    double last = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        first += r.reports[i].selected_tier;
        last += r.reports[r.reports.size() - q + i].selected_tier;
    }
    first /= static_cast<double>(q);
    last /= static_cast<double>(q);
    return {last > first, "mean tier first quartile " + fmt(first) + ", last quartile " + fmt(last)};
}

// ---------------------------------------------------------------------------------------------
// 11. degenerate configs

Outcome degenerate_configs()
{
    Outcome out;

    // every draw is a straggler slower than omega: nobody ever completes
    SimConfig stall;
    stall.mu = 1.0;
    stall.rounds = 200;
    const Environment stall_env = build_environment(validate(stall));
    const RunResult s = run_feddct(stall_env);
    int completed = 0;
    double prev_time = stall_env.start_time_s;
    for (const auto& rep : s.reports) {
        completed += static_cast<int>(rep.completed.size());
        if (!(rep.virtual_time_s > prev_time) || !std::isfinite(rep.virtual_time_s))
            out.pass = false;
        prev_time = rep.virtual_time_s;
    }
    const bool stalled = completed == 0 && s.reports.size() == 200 && s.final_model.params == stall_env.initial_model.params;
    out.pass = out.pass && stalled;
    out.detail = std::string(stalled ? "mu 1 stalls" : "mu 1 did NOT stall") + " (" + std::to_string(completed) +
                 " completions in 200 rounds)";

    // one tier: replay the trace as tau-client FedAvg with a timeout cap
    SimConfig one;
    one.num_tiers = 1;
    one.rounds = 200;
    const Environment env = build_environment(validate(one));
    const RunResult r = run_feddct(env);
    ModelState global = env.initial_model;
    double clock = env.start_time_s;
    int mismatches = 0;
    for (const auto& rep : r.reports) {
        if (rep.selected_tier != 1 || rep.participants.size() != static_cast<std::size_t>(one.tau) ||
            rep.dmax_per_tier.size() != 1 || rep.dmax_per_tier[0] > one.omega_s) {
            ++mismatches;
            continue;
        }
        const double dmax = rep.dmax_per_tier[0];
        double slowest = 0.0;
        std::vector<int> done;
        for (int c : rep.participants) {
            const double t = env.latency.sample(c, DrawPhase::Round, static_cast<std::uint64_t>(rep.round)).seconds;
            slowest = std::max(slowest, t);
            if (t < dmax)
                done.push_back(c);
        }
        std::sort(done.begin(), done.end());
        auto completed_sorted = rep.completed;
        std::sort(completed_sorted.begin(), completed_sorted.end());
        if (done != completed_sorted)
            ++mismatches;

        std::vector<ModelState> updates;
        for (int c : done) {
            RngStream order(one.seed, StreamId::BatchOrder,
                            {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(rep.round)});
            updates.push_back(train_client(global, env.data, env.shards[static_cast<std::size_t>(c)],
                                           TrainOptions{one.local_epochs, one.batch_size, one.learning_rate}, order));
        }
        if (!updates.empty()) {
            std::vector<WeightedUpdate> weighted;
            for (std::size_t i = 0; i < updates.size(); ++i)
                weighted.push_back({&updates[i], env.shards[static_cast<std::size_t>(done[i])].size()});
            global = aggregate(weighted);
        }
        clock += std::min({slowest, dmax, one.omega_s});
        if (!rel_eq(rep.duration_s, std::min({slowest, dmax, one.omega_s})) || !rel_eq(rep.virtual_time_s, clock) ||
            rep.accuracy != evaluate(global, env.data, env.data.test))
            ++mismatches;
    }
    if (global.params != r.final_model.params)
        ++mismatches;
    out.pass = out.pass && mismatches == 0;
    out.detail += ", one-tier replay " + std::to_string(mismatches) + " mismatches over " +
                  std::to_string(r.reports.size()) + " rounds";
    return out;
}

} // namespace

int main()
{
    struct Criterion
    {
        int id;
        const char* name;
        std::function<Outcome()> check;
    };
    const std::vector<Criterion> criteria{
        {1, "equation oracles", equation_oracles},
        {2, "tiering hand trace", tiering_oracle},
        {3, "tier pointer state machine", pointer_state_machine},
        {4, "determinism", determinism},
        {5, "straggler frequency", straggler_frequency},
        {6, "fairness", fairness},
        {7, "time-to-target trend", time_to_target_trend},
        {8, "final accuracy trend", accuracy_trend},
        {9, "mu robustness", mu_robustness},
        {10, "tier trajectory", tier_trajectory},
        {11, "degenerate configs", degenerate_configs},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << "criterion " << c.id << " " << c.name << ": " << (o.pass ? "PASS" : "FAIL") << " (" << o.detail
                  << ")" << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
