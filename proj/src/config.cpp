#include "feddct/config.hpp"

#include "feddct/errors.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <set>

namespace feddct {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Strategy, std::string_view>, 4> kStrategies{{
    {Strategy::FedDCT, "FedDCT"},
    {Strategy::FedAvg, "FedAvg"},
    {Strategy::TiFL, "TiFL"},
    {Strategy::FedAsync, "FedAsync"},
}};

const std::set<std::string, std::less<>> kKeys{
    "strategy", "num_clients", "num_tiers", "tau", "beta", "kappa", "omega_s", "mu",
    "noniid_fraction", "base_delay_means_s", "base_delay_stddev_s", "straggler_delay_range_s",
    "rounds", "target_accuracy", "learning_rate", "batch_size", "local_epochs", "seed",
};

template <typename T>
void read(const json& doc, const char* key, T& out)
{
    auto it = doc.find(key);
    if (it == doc.end())
        return;
    try {
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw InvalidConfig(key, std::string("wrong type: ") + e.what());
    }
}

void read_int(const json& doc, const char* key, int& out)
{
    auto it = doc.find(key);
    if (it == doc.end())
        return;
    if (!it->is_number_integer())
        throw InvalidConfig(key, "expected an integer");
    out = it->get<int>();
}

} // namespace

std::string_view to_string(Strategy s) noexcept
{
    for (const auto& [id, name] : kStrategies)
        if (id == s)
            return name;
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) noexcept
{
    for (const auto& [id, n] : kStrategies)
        if (n == name)
            return id;
    return std::nullopt;
}

SimConfig validate(SimConfig c)
{
    if (c.num_clients <= 0)
        throw InvalidConfig("num_clients", "must be positive");
    if (c.num_tiers <= 0)
        throw InvalidConfig("num_tiers", "must be positive");
    if (c.num_clients % c.num_tiers != 0)
        throw InvalidConfig("num_clients", "not divisible by num_tiers");
    if (c.tau <= 0)
        throw InvalidConfig("tau", "must be positive");
    if (c.tau > c.clients_per_tier())
        throw InvalidConfig("tau", "exceeds tier size");
    if (!(c.beta > 1.0))
        throw InvalidConfig("beta", "must be > 1");
    if (c.kappa <= 0)
        throw InvalidConfig("kappa", "must be positive");
    if (!(c.omega_s > 0.0))
        throw InvalidConfig("omega_s", "must be > 0");
    if (!(c.mu >= 0.0 && c.mu <= 1.0))
        throw InvalidConfig("mu", "must lie in [0, 1]");
    if (c.noniid_fraction) {
        double lo = 1.0 / c.dataset.num_classes;
        double f = *c.noniid_fraction;
        if (!(f >= lo - 1e-12 && f <= 1.0))
            throw InvalidConfig("noniid_fraction", "must be \"iid\" or lie in [1/num_classes, 1]");
    }
    if (c.base_delay_means_s.empty())
        throw InvalidConfig("base_delay_means_s", "must list at least one group");
    for (double m : c.base_delay_means_s)
        if (!(m >= 0.0) || !std::isfinite(m))
            throw InvalidConfig("base_delay_means_s", "means must be finite and >= 0");
    if (c.num_clients % static_cast<int>(c.base_delay_means_s.size()) != 0)
        throw InvalidConfig("base_delay_means_s", "group count does not divide num_clients");
    if (!(c.base_delay_stddev_s >= 0.0) || !std::isfinite(c.base_delay_stddev_s))
        throw InvalidConfig("base_delay_stddev_s", "must be >= 0");
    auto [lo, hi] = c.straggler_delay_range_s;
    if (!(lo >= 0.0) || !(lo <= hi) || !std::isfinite(hi))
        throw InvalidConfig("straggler_delay_range_s", "need 0 <= lo <= hi");
    if (c.rounds <= 0)
        throw InvalidConfig("rounds", "must be positive");
    if (!(c.target_accuracy > 0.0 && c.target_accuracy <= 1.0))
        throw InvalidConfig("target_accuracy", "must lie in (0, 1]");
    if (!(c.learning_rate >= 0.0) || !std::isfinite(c.learning_rate))
        throw InvalidConfig("learning_rate", "must be finite and >= 0");
    if (c.batch_size <= 0)
        throw InvalidConfig("batch_size", "must be positive");
    if (c.local_epochs <= 0)
        throw InvalidConfig("local_epochs", "must be positive");

    const auto& d = c.dataset;
    if (d.num_classes <= 0 || d.num_features <= 0 || d.train_per_class <= 0 || d.test_per_class <= 0)
        throw InvalidConfig("dataset", "all counts must be positive");
    if (!(c.fedasync_alpha > 0.0 && c.fedasync_alpha <= 1.0))
        throw InvalidConfig("fedasync_alpha", "must lie in (0, 1]");
    if (c.fedasync_report_every <= 0)
        throw InvalidConfig("fedasync_report_every", "must be positive");
    if (c.tifl_credits_per_tier <= 0)
        throw InvalidConfig("tifl_credits_per_tier", "must be positive");
    return c;
}

SimConfig config_from_json(const json& doc)
{
    if (!doc.is_object())
        throw InvalidConfig("<root>", "config must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (!kKeys.contains(key))
            throw InvalidConfig(key, "unknown key");

    SimConfig c;
    if (auto it = doc.find("strategy"); it != doc.end()) {
        if (!it->is_string())
            throw InvalidConfig("strategy", "expected a string");
        auto s = parse_strategy(it->get<std::string>());
        if (!s)
            throw InvalidConfig("strategy", "expected one of FedDCT, FedAvg, TiFL, FedAsync");
        c.strategy = *s;
    }
    read_int(doc, "num_clients", c.num_clients);
    read_int(doc, "num_tiers", c.num_tiers);
    read_int(doc, "tau", c.tau);
    read(doc, "beta", c.beta);
    read_int(doc, "kappa", c.kappa);
    read(doc, "omega_s", c.omega_s);
    read(doc, "mu", c.mu);
    if (auto it = doc.find("noniid_fraction"); it != doc.end()) {
        if (it->is_string() && it->get<std::string>() == "iid")
            c.noniid_fraction.reset();
        else if (it->is_number())
            c.noniid_fraction = it->get<double>();
        else
            throw InvalidConfig("noniid_fraction", "expected a number or \"iid\"");
    }
    read(doc, "base_delay_means_s", c.base_delay_means_s);
    read(doc, "base_delay_stddev_s", c.base_delay_stddev_s);
    if (auto it = doc.find("straggler_delay_range_s"); it != doc.end()) {
        if (!it->is_array() || it->size() != 2)
            throw InvalidConfig("straggler_delay_range_s", "expected [lo, hi]");
        read(doc, "straggler_delay_range_s", c.straggler_delay_range_s);
    }
    read_int(doc, "rounds", c.rounds);
    read(doc, "target_accuracy", c.target_accuracy);
    read(doc, "learning_rate", c.learning_rate);
    read_int(doc, "batch_size", c.batch_size);
    read_int(doc, "local_epochs", c.local_epochs);
    if (auto it = doc.find("seed"); it != doc.end()) {
        if (!it->is_number_integer())
            throw InvalidConfig("seed", "expected an integer");
        c.seed = it->is_number_unsigned() ? it->get<std::uint64_t>()
                                          : static_cast<std::uint64_t>(it->get<std::int64_t>());
    }
    return validate(std::move(c));
}

json to_json(const SimConfig& c)
{
    json j;
    j["strategy"] = std::string(to_string(c.strategy));
    j["num_clients"] = c.num_clients;
    j["num_tiers"] = c.num_tiers;
    j["tau"] = c.tau;
    j["beta"] = c.beta;
    j["kappa"] = c.kappa;
    j["omega_s"] = c.omega_s;
    j["mu"] = c.mu;
    if (c.noniid_fraction)
        j["noniid_fraction"] = *c.noniid_fraction;
    else
        j["noniid_fraction"] = "iid";
    j["base_delay_means_s"] = c.base_delay_means_s;
    j["base_delay_stddev_s"] = c.base_delay_stddev_s;
    j["straggler_delay_range_s"] = c.straggler_delay_range_s;
    j["rounds"] = c.rounds;
    j["target_accuracy"] = c.target_accuracy;
    j["learning_rate"] = c.learning_rate;
    j["batch_size"] = c.batch_size;
    j["local_epochs"] = c.local_epochs;
    j["seed"] = c.seed;
    return j;
}

SimConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidConfig("<root>", std::string("malformed JSON: ") + e.what());
    }
    return config_from_json(doc);
}

std::string config_digest(const SimConfig& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_json(config).dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace feddct
