#include "feddct/engine.hpp"

#include "feddct/errors.hpp"
#include "feddct/rng.hpp"
#include "feddct/selection.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace feddct {

void VirtualClock::advance_to(double t)
{
    if (t < now_)
        throw std::logic_error("virtual clock cannot move backwards");
    now_ = t;
}

void VirtualClock::schedule(Event e)
{
    queue_.push(std::move(e));
}

bool VirtualClock::has_due(double t) const noexcept
{
    return !queue_.empty() && queue_.top().time <= t;
}

Event VirtualClock::pop()
{
    Event e = queue_.top();
    queue_.pop();
    return e;
}

double round_duration(const std::vector<std::vector<double>>& times_per_tier, std::span<const double> dmax,
                      double omega_s)
{
    double d = 0.0;
    for (std::size_t k = 0; k < times_per_tier.size(); ++k) {
        const auto& times = times_per_tier[k];
        if (times.empty())
            continue;
        const double slowest = *std::max_element(times.begin(), times.end());
        const double cap = k < dmax.size() ? dmax[k] : omega_s;
        d = std::max(d, std::min({slowest, cap, omega_s}));
    }
    return d;
}

Environment build_environment(const SimConfig& config)
{
    RngStream part(config.seed, StreamId::Partition);
    Dataset data = generate_synthetic(config.dataset, part);
    auto shards = partition(data, config.num_clients, config.noniid_fraction, part);

    RngStream group_rng(config.seed, StreamId::Latency);
    auto groups = assign_groups(config.num_clients, static_cast<int>(config.base_delay_means_s.size()), group_rng);
    LatencyModel latency(config, std::move(groups));

    RngStream init_rng(config.seed, StreamId::ModelInit);
    ModelState init = init_model(config.dataset.num_classes, config.dataset.num_features, init_rng);

    auto profiling = profile_clients(latency, config.num_clients, config.kappa, config.omega_s);
    double start = 0.0;
    if (config.charge_profiling_time)
        start = std::accumulate(profiling.wave_seconds.begin(), profiling.wave_seconds.end(), 0.0);

    return Environment{config,           std::move(data),      std::move(shards), std::move(latency),
                       std::move(init), std::move(profiling), start};
}

std::vector<int> choose_uniform(int n, int k, RngStream& rng)
{
    std::vector<int> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), 0);
    const auto take = static_cast<std::size_t>(std::clamp(k, 0, n));
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t j = i + rng.index(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(take);
    return pool;
}

namespace {

TrainOptions train_options(const SimConfig& c)
{
    return TrainOptions{c.local_epochs, c.batch_size, c.learning_rate};
}

ModelState train_one(const Environment& env, const ModelState& global, int client, std::uint64_t round)
{
    RngStream batch_rng(env.config.seed, StreamId::BatchOrder,
                        {static_cast<std::uint64_t>(client), round});
    return train_client(global, env.data, env.shards[static_cast<std::size_t>(client)], train_options(env.config),
                        batch_rng);
}

/// Sample-weighted average of the completers, reduced in client_id order.
ModelState aggregate_round(const Environment& env, const std::vector<ModelState>& updates)
{
    std::vector<WeightedUpdate> weighted;
    weighted.reserve(updates.size());
    for (const auto& u : updates)
        weighted.push_back({&u, env.shards[static_cast<std::size_t>(*u.client_id)].size()});
    return aggregate(weighted);
}

double test_accuracy(const Environment& env, const ModelState& m)
{
    return evaluate(m, env.data, env.data.test);
}

} // namespace

RunResult run_feddct(const Environment& env)
{
    const auto& cfg = env.config;
    const auto m = static_cast<std::size_t>(cfg.clients_per_tier());
    const auto num_tiers = static_cast<std::size_t>(cfg.num_tiers);

    RunResult result;
    result.profiling_s = env.start_time_s;
    auto profiles = env.profiling.profiles;
    VirtualClock clock(env.start_time_s);
    RngStream sel_rng(cfg.seed, StreamId::Selection);

    // Each evaluation cycle of a client draws kappa sequential trainings keyed by the client's
    // cycle counter.
    std::vector<std::uint64_t> cycles(profiles.size(), 0);
    auto schedule_evaluation = [&](int c, double start) {
        Event e;
        e.kind = EventKind::ReevaluationDone;
        e.client = c;
        const auto cycle = cycles[static_cast<std::size_t>(c)]++;
        double total = 0.0;
        for (int j = 0; j < cfg.kappa; ++j) {
            const double s = env.latency
                                 .sample(c, DrawPhase::Reevaluation, cycle, static_cast<std::uint64_t>(j))
                                 .seconds;
            e.draws.push_back(s);
            total += s;
        }
        e.time = start + total;
        clock.schedule(std::move(e));
    };

    // Clients dropped at profiling are not discarded; they go straight into evaluation.
    for (auto& p : profiles)
        if (p.state == ClientState::Excluded) {
            begin_reevaluation(p);
            schedule_evaluation(p.client_id, clock.now());
        }

    ModelState global = env.initial_model;
    int t = 1;
    double prev_acc = 0.0;
    double cur_acc = test_accuracy(env, global);

    for (int r = 1; r <= cfg.rounds; ++r) {
        while (clock.has_due(clock.now())) {
            Event e = clock.pop();
            if (!complete_reevaluation(profiles[static_cast<std::size_t>(e.client)], e.draws, cfg.omega_s))
                schedule_evaluation(e.client, e.time);
        }

        const TierTable tiers = tier(profiles, m, num_tiers);
        t = move_tier(t, cur_acc, prev_acc, cfg.num_tiers);
        const Selection sel = select_participants(tiers, t, profiles, cfg.tau, sel_rng);

        RoundReport rep;
        rep.round = r;
        rep.strategy = Strategy::FedDCT;
        rep.selected_tier = t;
        rep.dmax_per_tier = compute_thresholds(tiers, profiles, cfg.beta, cfg.omega_s, t);

        std::vector<std::vector<double>> times(sel.per_tier.size());
        std::vector<ModelState> updates;
        for (std::size_t k = 0; k < sel.per_tier.size(); ++k) {
            for (int c : sel.per_tier[k]) {
                rep.participants.push_back(c);
                const double st = env.latency.sample(c, DrawPhase::Round, static_cast<std::uint64_t>(r)).seconds;
                times[k].push_back(st);
                auto& prof = profiles[static_cast<std::size_t>(c)];
                if (st >= rep.dmax_per_tier[k]) {
                    rep.timed_out.push_back(c);
                    begin_reevaluation(prof);
                } else {
                    rep.completed.push_back(c);
                    update_profile(prof, st);
                    updates.push_back(train_one(env, global, c, static_cast<std::uint64_t>(r)));
                }
            }
        }

        if (sel.count() == 0) {
            // Nobody to dispatch: the server waits out the maximum timeout.
            rep.degenerate = true;
            rep.duration_s = cfg.omega_s;
        } else {
            rep.duration_s = round_duration(times, rep.dmax_per_tier, cfg.omega_s);
        }
        if (!updates.empty()) {
            global = aggregate_round(env, updates);
            global.round_produced = r;
        }
        clock.advance_to(clock.now() + rep.duration_s);

        // Evaluation starts once the server has closed the round.
        for (int c : rep.timed_out)
            schedule_evaluation(c, clock.now());

        const double acc = updates.empty() ? cur_acc : test_accuracy(env, global);
        rep.accuracy = acc;
        rep.virtual_time_s = clock.now();
        result.reports.push_back(std::move(rep));
        prev_acc = cur_acc;
        cur_acc = acc;
    }

    result.final_model = std::move(global);
    result.final_profiles = std::move(profiles);
    return result;
}

RunResult run_fedavg(const Environment& env)
{
    const auto& cfg = env.config;
    RunResult result;
    result.profiling_s = env.start_time_s;
    result.final_profiles = env.profiling.profiles;
    VirtualClock clock(env.start_time_s);
    RngStream sel_rng(cfg.seed, StreamId::Selection);
    ModelState global = env.initial_model;

    for (int r = 1; r <= cfg.rounds; ++r) {
        RoundReport rep;
        rep.round = r;
        rep.strategy = Strategy::FedAvg;
        rep.participants = choose_uniform(cfg.num_clients, cfg.tau, sel_rng);
        std::sort(rep.participants.begin(), rep.participants.end());

        std::vector<ModelState> updates;
        for (int c : rep.participants) {
            const double st = env.latency.sample(c, DrawPhase::Round, static_cast<std::uint64_t>(r)).seconds;
            rep.duration_s = std::max(rep.duration_s, st);
            rep.completed.push_back(c);
            updates.push_back(train_one(env, global, c, static_cast<std::uint64_t>(r)));
        }
        global = aggregate_round(env, updates);
        global.round_produced = r;
        clock.advance_to(clock.now() + rep.duration_s);
        rep.accuracy = test_accuracy(env, global);
        rep.virtual_time_s = clock.now();
        result.reports.push_back(std::move(rep));
    }
    result.final_model = std::move(global);
    return result;
}

RunResult run_tifl(const Environment& env)
{
    const auto& cfg = env.config;
    RunResult result;
    result.profiling_s = env.start_time_s;
    auto profiles = env.profiling.profiles;
    VirtualClock clock(env.start_time_s);
    RngStream sel_rng(cfg.seed, StreamId::Selection);
    ModelState global = env.initial_model;
    double acc = test_accuracy(env, global);

    const TierTable tiers = tier(profiles, static_cast<std::size_t>(cfg.clients_per_tier()),
                                 static_cast<std::size_t>(cfg.num_tiers));
    const std::size_t n_tiers = tiers.size();

    // Tier data used for the accuracy signal: the union of the members' shards.
    std::vector<std::vector<std::size_t>> tier_data(n_tiers);
    for (std::size_t k = 0; k < n_tiers; ++k)
        for (int c : tiers.tiers[k]) {
            const auto& idx = env.shards[static_cast<std::size_t>(c)].indices;
            tier_data[k].insert(tier_data[k].end(), idx.begin(), idx.end());
        }
    std::vector<double> tier_acc(n_tiers, 0.0);
    for (std::size_t k = 0; k < n_tiers; ++k)
        tier_acc[k] = evaluate(global, env.data, tier_data[k]);

    std::vector<int> credits(n_tiers, 0);
    auto reset_credits = [&] {
        for (std::size_t k = 0; k < n_tiers; ++k)
            credits[k] = tiers.tiers[k].empty() ? 0 : cfg.tifl_credits_per_tier;
    };
    reset_credits();

    for (int r = 1; r <= cfg.rounds; ++r) {
        RoundReport rep;
        rep.round = r;
        rep.strategy = Strategy::TiFL;

        std::vector<std::size_t> eligible;
        for (std::size_t k = 0; k < n_tiers; ++k)
            if (credits[k] > 0)
                eligible.push_back(k);
        if (eligible.empty()) {
            reset_credits();
            for (std::size_t k = 0; k < n_tiers; ++k)
                if (credits[k] > 0)
                    eligible.push_back(k);
        }

        if (eligible.empty()) {
            rep.degenerate = true;
            rep.duration_s = cfg.omega_s;
            rep.dmax_per_tier = {cfg.omega_s};
            clock.advance_to(clock.now() + rep.duration_s);
            rep.accuracy = acc;
            rep.virtual_time_s = clock.now();
            result.reports.push_back(std::move(rep));
            continue;
        }

        // Lowest accuracy ranks first and receives the largest weight.
        std::stable_sort(eligible.begin(), eligible.end(),
                         [&](std::size_t a, std::size_t b) { return tier_acc[a] < tier_acc[b]; });
        const std::size_t n = eligible.size();
        const double total_weight = static_cast<double>(n * (n + 1) / 2);
        double u = sel_rng.uniform() * total_weight;
        std::size_t chosen = eligible.back();
        for (std::size_t i = 0; i < n; ++i) {
            u -= static_cast<double>(n - i);
            if (u < 0.0) {
                chosen = eligible[i];
                break;
            }
        }
        --credits[chosen];
        rep.selected_tier = static_cast<int>(chosen) + 1;
        rep.dmax_per_tier = {cfg.omega_s};

        const auto& members = tiers.tiers[chosen];
        for (int i : choose_uniform(static_cast<int>(members.size()), cfg.tau, sel_rng))
            rep.participants.push_back(members[static_cast<std::size_t>(i)]);
        std::sort(rep.participants.begin(), rep.participants.end());

        std::vector<ModelState> updates;
        double slowest = 0.0;
        for (int c : rep.participants) {
            const double st = env.latency.sample(c, DrawPhase::Round, static_cast<std::uint64_t>(r)).seconds;
            slowest = std::max(slowest, st);
            if (st >= cfg.omega_s) {
                rep.timed_out.push_back(c);
            } else {
                rep.completed.push_back(c);
                updates.push_back(train_one(env, global, c, static_cast<std::uint64_t>(r)));
            }
        }
        rep.duration_s = std::min(slowest, cfg.omega_s);
        if (!updates.empty()) {
            global = aggregate_round(env, updates);
            global.round_produced = r;
            acc = test_accuracy(env, global);
            tier_acc[chosen] = evaluate(global, env.data, tier_data[chosen]);
        }
        clock.advance_to(clock.now() + rep.duration_s);
        rep.accuracy = acc;
        rep.virtual_time_s = clock.now();
        result.reports.push_back(std::move(rep));
    }
    result.final_model = std::move(global);
    result.final_profiles = std::move(profiles);
    return result;
}

RunResult run_fedasync(const Environment& env)
{
    const auto& cfg = env.config;
    const auto n = static_cast<std::size_t>(cfg.num_clients);
    RunResult result;
    result.profiling_s = env.start_time_s;
    result.final_profiles = env.profiling.profiles;
    VirtualClock clock(env.start_time_s);

    ModelState global = env.initial_model;
    int version = 0;
    std::vector<int> jobs(n, 0);
    std::vector<int> start_version(n, 0);
    std::vector<ModelState> pending(n);

    // Each client trains on the model current at dispatch; the result lands at completion.
    auto dispatch = [&](int c) {
        const auto i = static_cast<std::size_t>(c);
        start_version[i] = version;
        const auto job = static_cast<std::uint64_t>(jobs[i]);
        pending[i] = train_one(env, global, c, job);
        Event e;
        e.kind = EventKind::ClientCompletion;
        e.client = c;
        e.time = clock.now() + env.latency.sample(c, DrawPhase::Round, job).seconds;
        clock.schedule(std::move(e));
    };
    for (int c = 0; c < cfg.num_clients; ++c) {
        jobs[static_cast<std::size_t>(c)] = 1;
        dispatch(c);
    }

    double last_report = clock.now();
    RoundReport rep;
    while (static_cast<int>(result.reports.size()) < cfg.rounds) {
        Event e = clock.pop();
        clock.advance_to(e.time);
        const auto i = static_cast<std::size_t>(e.client);
        const int staleness = version - start_version[i];
        result.staleness.push_back(staleness);
        global = fedasync_merge(global, pending[i], staleness, cfg.fedasync_alpha);
        ++version;
        global.round_produced = version;
        rep.participants.push_back(e.client);
        rep.completed.push_back(e.client);

        ++jobs[i];
        dispatch(e.client);

        if (version % cfg.fedasync_report_every == 0) {
            rep.round = static_cast<int>(result.reports.size()) + 1;
            rep.strategy = Strategy::FedAsync;
            rep.accuracy = test_accuracy(env, global);
            rep.virtual_time_s = clock.now();
            rep.duration_s = clock.now() - last_report;
            last_report = clock.now();
            result.reports.push_back(std::move(rep));
            rep = RoundReport{};
        }
    }
    result.final_model = std::move(global);
    return result;
}

RunResult run(const SimConfig& config)
{
    const Environment env = build_environment(validate(config));
    switch (config.strategy) {
    case Strategy::FedDCT:
        return run_feddct(env);
    case Strategy::FedAvg:
        return run_fedavg(env);
    case Strategy::TiFL:
        return run_tifl(env);
    case Strategy::FedAsync:
        return run_fedasync(env);
    }
    throw std::logic_error("unhandled strategy");
}

} // namespace feddct
