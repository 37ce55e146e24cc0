#pragma once

#include "feddct/config.hpp"
#include "feddct/rng.hpp"

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace feddct {

/// Row-major feature matrix with labels and a fixed train/test split.
struct Dataset
{
    int num_classes = 0;
    int num_features = 0;
    std::vector<double> features;
    std::vector<int> labels;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;

    std::size_t size() const noexcept { return labels.size(); }

    std::span<const double> row(std::size_t i) const noexcept
    {
        return {features.data() + i * static_cast<std::size_t>(num_features), static_cast<std::size_t>(num_features)};
    }
};

struct ClientShard
{
    int client_id = 0;
    std::vector<std::size_t> indices;
    /// Empty for iid partitions.
    std::optional<int> master_class;

    std::size_t size() const noexcept { return indices.size(); }
};

/// Class-conditional Gaussian blobs: class k is drawn around a random mean of norm
/// `class_separation` with unit per-feature noise. Train samples are stored first, class-major.
Dataset generate_synthetic(const DatasetShape& shape, RngStream& rng);

/// Splits the train set into one shard per client.
///
/// iid: a stratified deal, so every shard holds the same number of samples of each class.
/// Otherwise each client gets ceil(fraction * shard_size) samples of its master class and the
/// rest from the other classes. Master classes are assigned round-robin over a shuffled client
/// order. Shard sizes differ by at most one.
///
/// Throws InsufficientSamples when a class pool cannot meet the demand.
std::vector<ClientShard> partition(const Dataset& data, int num_clients, std::optional<double> master_fraction,
                                   RngStream& rng);

/// Writes `client_id,sample_index,label` rows for every shard.
void write_shards_csv(std::ostream& out, const Dataset& data, const std::vector<ClientShard>& shards);

} // namespace feddct
