#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace feddct {

/// Named substreams. Every random decision in a run draws from exactly one of these,
/// so strategies sharing a seed see the same data, latencies and model init.
enum class StreamId : std::uint32_t
{
    Partition = 1,
    Latency = 2,
    Straggler = 3,
    Selection = 4,
    ModelInit = 5,
    BatchOrder = 6,
};

std::string_view stream_name(StreamId id) noexcept;

/// Throws UnknownStream for names outside the declared set.
StreamId parse_stream_name(std::string_view name);

class RngStream
{
public:
    using engine_type = std::mt19937_64;
    using result_type = engine_type::result_type;

    /// The sequence is a pure function of (seed, id, keys). Keys address per-entity
    /// substreams such as (client_id, round).
    RngStream(std::uint64_t seed, StreamId id, std::initializer_list<std::uint64_t> keys = {});

    static constexpr result_type min() { return engine_type::min(); }
    static constexpr result_type max() { return engine_type::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);
    double normal(double mean, double stddev);
    bool bernoulli(double p);
    /// Uniform index in [0, n).
    std::size_t index(std::size_t n);

private:
    engine_type engine_;
};

RngStream derive_stream(std::uint64_t seed, std::string_view name);
RngStream derive_stream(std::uint64_t seed, std::string_view name, std::initializer_list<std::uint64_t> keys);

} // namespace feddct
