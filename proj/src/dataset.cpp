#include "feddct/dataset.hpp"

#include "feddct/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace feddct {

Dataset generate_synthetic(const DatasetShape& shape, RngStream& rng)
{
    const auto k = static_cast<std::size_t>(shape.num_classes);
    const auto f = static_cast<std::size_t>(shape.num_features);

    std::vector<double> means(k * f);
    for (std::size_t c = 0; c < k; ++c) {
        double norm = 0.0;
        for (std::size_t j = 0; j < f; ++j) {
            double v = rng.normal(0.0, 1.0);
            means[c * f + j] = v;
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (std::size_t j = 0; j < f; ++j)
            means[c * f + j] *= shape.class_separation / norm;
    }

    Dataset d;
    d.num_classes = shape.num_classes;
    d.num_features = shape.num_features;
    const std::size_t total = k * static_cast<std::size_t>(shape.train_per_class + shape.test_per_class);
    d.features.reserve(total * f);
    d.labels.reserve(total);

    auto emit = [&](std::size_t c, int count, std::vector<std::size_t>& split) {
        for (int n = 0; n < count; ++n) {
            split.push_back(d.labels.size());
            d.labels.push_back(static_cast<int>(c));
            for (std::size_t j = 0; j < f; ++j)
                d.features.push_back(means[c * f + j] + rng.normal(0.0, 1.0));
        }
    };
    for (std::size_t c = 0; c < k; ++c)
        emit(c, shape.train_per_class, d.train);
    for (std::size_t c = 0; c < k; ++c)
        emit(c, shape.test_per_class, d.test);
    return d;
}

namespace {

std::vector<std::vector<std::size_t>> class_pools(const Dataset& data, RngStream& rng)
{
    std::vector<std::vector<std::size_t>> pools(static_cast<std::size_t>(data.num_classes));
    for (auto i : data.train)
        pools[static_cast<std::size_t>(data.labels[i])].push_back(i);
    for (auto& p : pools)
        std::shuffle(p.begin(), p.end(), rng);
    return pools;
}

std::vector<ClientShard> partition_iid(const Dataset& data, int num_clients, RngStream& rng)
{
    std::vector<ClientShard> shards(static_cast<std::size_t>(num_clients));
    for (int c = 0; c < num_clients; ++c)
        shards[static_cast<std::size_t>(c)].client_id = c;

    std::size_t next = 0;
    for (auto& pool : class_pools(data, rng))
        for (auto idx : pool)
            shards[next++ % shards.size()].indices.push_back(idx);
    return shards;
}

std::vector<ClientShard> partition_master(const Dataset& data, int num_clients, double fraction, RngStream& rng)
{
    const auto n = static_cast<std::size_t>(num_clients);
    const std::size_t total = data.train.size();
    auto pools = class_pools(data, rng);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<ClientShard> shards(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& s = shards[static_cast<std::size_t>(order[i])];
        s.client_id = order[i];
        s.master_class = static_cast<int>(i % static_cast<std::size_t>(data.num_classes));
    }

    std::vector<std::size_t> sizes(n, total / n);
    for (std::size_t c = 0; c < total % n; ++c)
        ++sizes[c];

    std::vector<std::size_t> master_count(n);
    for (std::size_t c = 0; c < n; ++c) {
        const int mc = *shards[c].master_class;
        auto& pool = pools[static_cast<std::size_t>(mc)];
        // guard against 0.7 * 120 = 84.00000000000001
        const auto want = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(sizes[c]) - 1e-9));
        master_count[c] = std::min(want, sizes[c]);
        if (pool.size() < master_count[c])
            throw InsufficientSamples(mc);
        shards[c].indices.assign(pool.end() - static_cast<std::ptrdiff_t>(master_count[c]), pool.end());
        pool.resize(pool.size() - master_count[c]);
    }

    std::vector<std::size_t> rest;
    for (auto& p : pools)
        rest.insert(rest.end(), p.begin(), p.end());
    std::shuffle(rest.begin(), rest.end(), rng);
    std::size_t next = 0;
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t k = master_count[c]; k < sizes[c]; ++k)
            shards[c].indices.push_back(rest[next++]);

    // The deal above can hand a client leftovers of its own master class; swap those with a
    // random non-master sample of a random other client so every master share stays exact
    // without skewing any one shard.
    auto label = [&](std::size_t idx) { return data.labels[idx]; };
    std::vector<std::size_t> partners(n);
    std::iota(partners.begin(), partners.end(), std::size_t{0});
    for (std::size_t a = 0; a < n; ++a) {
        const int ma = *shards[a].master_class;
        for (std::size_t i = master_count[a]; i < shards[a].indices.size(); ++i) {
            std::size_t& s = shards[a].indices[i];
            if (label(s) != ma)
                continue;
            std::shuffle(partners.begin(), partners.end(), rng);
            bool swapped = false;
            for (std::size_t b : partners) {
                if (b == a || *shards[b].master_class == ma)
                    continue;
                const int mb = *shards[b].master_class;
                const std::size_t span = shards[b].indices.size() - master_count[b];
                if (span == 0)
                    continue;
                const std::size_t offset = rng.index(span);
                for (std::size_t k = 0; k < span; ++k) {
                    std::size_t& t = shards[b].indices[master_count[b] + (offset + k) % span];
                    if (label(t) != ma && label(t) != mb) {
                        std::swap(s, t);
                        swapped = true;
                        break;
                    }
                }
                if (swapped)
                    break;
            }
            if (!swapped)
                throw InsufficientSamples(ma);
        }
    }
    return shards;
}

} // namespace

std::vector<ClientShard> partition(const Dataset& data, int num_clients, std::optional<double> master_fraction,
                                   RngStream& rng)
{
    if (num_clients <= 0 || data.train.size() < static_cast<std::size_t>(num_clients))
        throw InsufficientSamples(0);
    auto shards = master_fraction ? partition_master(data, num_clients, *master_fraction, rng)
                                  : partition_iid(data, num_clients, rng);
    for (auto& s : shards)
        std::sort(s.indices.begin(), s.indices.end());
    return shards;
}

void write_shards_csv(std::ostream& out, const Dataset& data, const std::vector<ClientShard>& shards)
{
    out << "client_id,sample_index,label\n";
    for (const auto& s : shards)
        for (auto idx : s.indices)
            out << s.client_id << ',' << idx << ',' << data.labels[idx] << '\n';
}

} // namespace feddct
