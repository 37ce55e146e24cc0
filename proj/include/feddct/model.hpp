#pragma once

#include "feddct/dataset.hpp"
#include "feddct/rng.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace feddct {

/// Multinomial logistic regression. `params` holds the weight matrix
/// [num_classes x num_features] row-major followed by num_classes biases.
struct ModelState
{
    int num_classes = 0;
    int num_features = 0;
    std::vector<double> params;
    int round_produced = 0;
    /// Set for client updates, empty for the global model.
    std::optional<int> client_id;

    static std::size_t param_count(int num_classes, int num_features) noexcept
    {
        return static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_features + 1);
    }
};

struct TrainOptions
{
    int epochs = 1;
    int batch_size = 10;
    double learning_rate = 0.001;
};

struct WeightedUpdate
{
    const ModelState* model = nullptr;
    std::size_t samples = 0;
};

/// Weights uniform in [-0.05, 0.05], biases zero.
ModelState init_model(int num_classes, int num_features, RngStream& rng);

/// Mean softmax cross-entropy over `batch`, and its gradient written into `grad`
/// (same layout as params).
double loss_and_gradient(std::span<const double> params, int num_classes, const Dataset& data,
                         std::span<const std::size_t> batch, std::span<double> grad);

/// Mini-batch SGD over the shard for `opts.epochs` epochs. Each epoch reshuffles the shard
/// with `rng`. Throws NonFinite if the loss or parameters blow up.
ModelState train_client(const ModelState& global, const Dataset& data, const ClientShard& shard,
                        const TrainOptions& opts, RngStream& rng);

/// Sample-weighted average. Inputs are reduced in ascending client_id order so the result does
/// not depend on the order of `updates`. Throws EmptyAggregation on an empty list.
ModelState aggregate(std::span<const WeightedUpdate> updates);

/// Argmax accuracy over `indices`; ties go to the lowest class index.
double evaluate(const ModelState& model, const Dataset& data, std::span<const std::size_t> indices);

/// Staleness-discounted mixing weight alpha_base * (staleness + 1)^-0.5.
double fedasync_alpha(int staleness, double alpha_base) noexcept;

/// (1 - alpha) * global + alpha * update.
ModelState fedasync_merge(const ModelState& global, const ModelState& update, int staleness, double alpha_base);

/// Little-endian checkpoint: "FDCT", u32 version, u32 num_classes, u32 num_features, then f64 params.
void write_checkpoint(std::ostream& out, const ModelState& model);
ModelState read_checkpoint(std::istream& in);

} // namespace feddct
