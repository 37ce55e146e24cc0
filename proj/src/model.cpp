#include "feddct/model.hpp"

#include "feddct/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

namespace feddct {

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

bool all_finite(std::span<const double> v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

template <typename T>
T to_little(T v)
{
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return v;
}

template <typename T>
void put(std::ostream& out, T v)
{
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(to_little(v));
    out.write(bytes.data(), bytes.size());
}

template <typename T>
T get(std::istream& in)
{
    std::array<char, sizeof(T)> bytes{};
    if (!in.read(bytes.data(), bytes.size()))
        throw IoError("truncated checkpoint");
    return to_little(std::bit_cast<T>(bytes));
}

} // namespace

ModelState init_model(int num_classes, int num_features, RngStream& rng)
{
    ModelState m;
    m.num_classes = num_classes;
    m.num_features = num_features;
    m.params.assign(ModelState::param_count(num_classes, num_features), 0.0);
    const std::size_t weights = static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_features);
    for (std::size_t i = 0; i < weights; ++i)
        m.params[i] = rng.uniform(-0.05, 0.05);
    return m;
}

double loss_and_gradient(std::span<const double> params, int num_classes, const Dataset& data,
                         std::span<const std::size_t> batch, std::span<double> grad)
{
    const auto k = static_cast<std::size_t>(num_classes);
    const auto f = static_cast<std::size_t>(data.num_features);
    const double* bias = params.data() + k * f;
    double* gbias = grad.data() + k * f;
    std::fill(grad.begin(), grad.end(), 0.0);

    std::vector<double> z(k);
    double loss = 0.0;
    for (auto idx : batch) {
        auto x = data.row(idx);
        for (std::size_t c = 0; c < k; ++c) {
            const double* w = params.data() + c * f;
            z[c] = bias[c] + std::inner_product(x.begin(), x.end(), w, 0.0);
        }
        const double zmax = *std::max_element(z.begin(), z.end());
        double denom = 0.0;
        for (auto& v : z) {
            v = std::exp(v - zmax);
            denom += v;
        }
        const auto y = static_cast<std::size_t>(data.labels[idx]);
        loss -= std::log(z[y] / denom);
        for (std::size_t c = 0; c < k; ++c) {
            const double delta = z[c] / denom - (c == y ? 1.0 : 0.0);
            double* g = grad.data() + c * f;
            for (std::size_t j = 0; j < f; ++j)
                g[j] += delta * x[j];
            gbias[c] += delta;
        }
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& g : grad)
        g *= inv;
    return loss * inv;
}

ModelState train_client(const ModelState& global, const Dataset& data, const ClientShard& shard,
                        const TrainOptions& opts, RngStream& rng)
{
    ModelState local = global;
    local.client_id = shard.client_id;
    if (shard.indices.empty())
        return local;

    std::vector<std::size_t> order;
    std::vector<double> grad(local.params.size());
    const auto bs = static_cast<std::size_t>(opts.batch_size);
    for (int e = 0; e < opts.epochs; ++e) {
        // Every epoch permutes the shard from its stored order, so E epochs equal E chained calls.
        order = shard.indices;
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t len = std::min(bs, order.size() - start);
            const double loss = loss_and_gradient(local.params, local.num_classes, data,
                                                  std::span(order).subspan(start, len), grad);
            if (!std::isfinite(loss) || !all_finite(grad))
                throw NonFinite("non-finite loss or gradient on client " + std::to_string(shard.client_id));
            for (std::size_t i = 0; i < grad.size(); ++i)
                local.params[i] -= opts.learning_rate * grad[i];
        }
    }
    if (!all_finite(local.params))
        throw NonFinite("non-finite parameters on client " + std::to_string(shard.client_id));
    return local;
}

ModelState aggregate(std::span<const WeightedUpdate> updates)
{
    if (updates.empty())
        throw EmptyAggregation();

    std::vector<const WeightedUpdate*> order;
    order.reserve(updates.size());
    for (const auto& u : updates)
        order.push_back(&u);
    std::stable_sort(order.begin(), order.end(), [](const WeightedUpdate* a, const WeightedUpdate* b) {
        return a->model->client_id.value_or(-1) < b->model->client_id.value_or(-1);
    });

    double total = 0.0;
    for (const auto* u : order)
        total += static_cast<double>(u->samples);

    ModelState out = *order.front()->model;
    out.client_id.reset();
    std::fill(out.params.begin(), out.params.end(), 0.0);
    for (const auto* u : order) {
        const double w = total > 0.0 ? static_cast<double>(u->samples) / total : 1.0 / static_cast<double>(order.size());
        const auto& p = u->model->params;
        for (std::size_t i = 0; i < p.size(); ++i)
            out.params[i] += w * p[i];
    }
    return out;
}

double evaluate(const ModelState& model, const Dataset& data, std::span<const std::size_t> indices)
{
    if (indices.empty())
        return 0.0;
    const auto k = static_cast<std::size_t>(model.num_classes);
    const auto f = static_cast<std::size_t>(model.num_features);
    const double* bias = model.params.data() + k * f;
    std::size_t correct = 0;
    for (auto idx : indices) {
        auto x = data.row(idx);
        std::size_t best = 0;
        double best_score = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double s = bias[c] + std::inner_product(x.begin(), x.end(), model.params.data() + c * f, 0.0);
            if (c == 0 || s > best_score) {
                best = c;
                best_score = s;
            }
        }
        if (static_cast<int>(best) == data.labels[idx])
            ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(indices.size());
}

double fedasync_alpha(int staleness, double alpha_base) noexcept
{
    return alpha_base / std::sqrt(static_cast<double>(staleness) + 1.0);
}

ModelState fedasync_merge(const ModelState& global, const ModelState& update, int staleness, double alpha_base)
{
    const double a = fedasync_alpha(staleness, alpha_base);
    ModelState out = global;
    for (std::size_t i = 0; i < out.params.size(); ++i)
        out.params[i] = (1.0 - a) * global.params[i] + a * update.params[i];
    return out;
}

void write_checkpoint(std::ostream& out, const ModelState& model)
{
    out.write("FDCT", 4);
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.num_classes));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.num_features));
    for (double v : model.params)
        put<double>(out, v);
    if (!out)
        throw IoError("failed writing checkpoint");
}

ModelState read_checkpoint(std::istream& in)
{
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "FDCT", 4) != 0)
        throw IoError("not a checkpoint (bad magic)");
    if (get<std::uint32_t>(in) != kCheckpointVersion)
        throw IoError("unsupported checkpoint version");
    ModelState m;
    m.num_classes = static_cast<int>(get<std::uint32_t>(in));
    m.num_features = static_cast<int>(get<std::uint32_t>(in));
    m.params.resize(ModelState::param_count(m.num_classes, m.num_features));
    for (auto& v : m.params)
        v = get<double>(in);
    return m;
}

} // namespace feddct
