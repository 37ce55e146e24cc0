#include "feddct/rng.hpp"

#include "feddct/errors.hpp"

#include <array>
#include <string>
#include <vector>

namespace feddct {

namespace {

constexpr std::array<std::pair<StreamId, std::string_view>, 6> kStreams{{
    {StreamId::Partition, "partition"},
    {StreamId::Latency, "latency"},
    {StreamId::Straggler, "straggler"},
    {StreamId::Selection, "selection"},
    {StreamId::ModelInit, "model_init"},
    {StreamId::BatchOrder, "batch_order"},
}};

void push_u64(std::vector<std::uint32_t>& words, std::uint64_t v)
{
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
}

} // namespace

std::string_view stream_name(StreamId id) noexcept
{
    for (const auto& [sid, name] : kStreams)
        if (sid == id)
            return name;
    return "?";
}

StreamId parse_stream_name(std::string_view name)
{
    for (const auto& [sid, n] : kStreams)
        if (n == name)
            return sid;
    throw UnknownStream(std::string(name));
}

RngStream::RngStream(std::uint64_t seed, StreamId id, std::initializer_list<std::uint64_t> keys)
{
    std::vector<std::uint32_t> words;
    words.reserve(4 + 2 * keys.size());
    push_u64(words, seed);
    words.push_back(static_cast<std::uint32_t>(id));
    // key count is part of the material so (a) and (a, 0) differ
    words.push_back(static_cast<std::uint32_t>(keys.size()));
    for (auto k : keys)
        push_u64(words, k);
    std::seed_seq seq(words.begin(), words.end());
    engine_.seed(seq);
}

double RngStream::uniform()
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double RngStream::uniform(double lo, double hi)
{
    if (lo == hi)
        return lo;
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

double RngStream::normal(double mean, double stddev)
{
    if (stddev == 0.0)
        return mean;
    return std::normal_distribution<double>(mean, stddev)(engine_);
}

bool RngStream::bernoulli(double p)
{
    return uniform() < p;
}

std::size_t RngStream::index(std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

RngStream derive_stream(std::uint64_t seed, std::string_view name)
{
    return RngStream(seed, parse_stream_name(name));
}

RngStream derive_stream(std::uint64_t seed, std::string_view name, std::initializer_list<std::uint64_t> keys)
{
    return RngStream(seed, parse_stream_name(name), keys);
}

} // namespace feddct
