#pragma once

#include <json.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace feddct {

enum class Strategy
{
    FedDCT,
    FedAvg,
    TiFL,
    FedAsync,
};

std::string_view to_string(Strategy s) noexcept;
std::optional<Strategy> parse_strategy(std::string_view name) noexcept;

/// Shape of the synthetic classification task. Not part of the JSON schema.
struct DatasetShape
{
    int num_classes = 10;
    int num_features = 32;
    int train_per_class = 600;
    int test_per_class = 1000;
    /// Distance of each class mean from the origin, in units of the per-feature noise stddev.
    double class_separation = 4.5;
};

struct SimConfig
{
    Strategy strategy = Strategy::FedDCT;
    int num_clients = 50;
    int num_tiers = 5;
    int tau = 5;
    double beta = 1.2;
    int kappa = 1;
    double omega_s = 30.0;
    double mu = 0.1;
    /// Master-class share of every shard; empty means iid.
    std::optional<double> noniid_fraction = 0.7;
    std::vector<double> base_delay_means_s{5.0, 10.0, 15.0, 20.0, 25.0};
    double base_delay_stddev_s = std::sqrt(2.0);
    std::array<double, 2> straggler_delay_range_s{30.0, 60.0};
    int rounds = 1000;
    double target_accuracy = 0.8;
    double learning_rate = 0.001;
    int batch_size = 10;
    int local_epochs = 1;
    std::uint64_t seed = 42;

    // Knobs below have fixed defaults and are not read from JSON.
    DatasetShape dataset{};
    double fedasync_alpha = 0.6;
    int fedasync_report_every = 5;
    int tifl_credits_per_tier = 50;
    bool charge_profiling_time = true;

    /// m: clients per tier.
    int clients_per_tier() const noexcept { return num_tiers > 0 ? num_clients / num_tiers : 0; }
};

/// Returns the config unchanged iff every constraint holds; throws InvalidConfig naming
/// the first violated field otherwise.
SimConfig validate(SimConfig config);

/// Missing keys take defaults; unknown keys are rejected. The result is validated.
SimConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SimConfig& config);
SimConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical JSON dump, rendered as 16 hex digits.
std::string config_digest(const SimConfig& config);

} // namespace feddct
