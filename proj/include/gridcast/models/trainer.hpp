#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gridcast/models/nn_util.hpp"
#include "gridcast/nn/optim.hpp"

namespace gridcast::models {

struct TrainConfig {
    std::size_t max_epochs = 10;
    double early_stop_delta = 0.01;  // standardized-MSE units
    std::size_t min_epochs = 1;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    bool shuffle = true;
};

inline void validate(const TrainConfig& config) {
    if (config.min_epochs < 1 || config.max_epochs < config.min_epochs) {
        throw ConfigError("training epochs must satisfy max_epochs >= min_epochs >= 1");
    }
    if (config.early_stop_delta < 0.0 || !std::isfinite(config.early_stop_delta)) {
        throw ConfigError("early_stop_delta must be a finite non-negative number");
    }
    if (config.batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
        throw ConfigError("learning rate must be positive and finite");
    }
}

/// Supervised windows over one standardized row-major [n_rows x n_channels]
/// matrix: each origin o pairs the context rows [o, o+L) with the target rows
/// [o+L, o+L+H).
struct WindowSet {
    std::vector<double> matrix;
    std::size_t n_channels = 1;
    std::size_t input_len = 96;
    std::size_t horizon = 96;
    std::vector<std::size_t> origins;
};

/// Every stride-1 origin whose context and target both fit in n_rows.
inline std::vector<std::size_t> enumerate_train_origins(std::size_t n_rows,
                                                        std::size_t input_len,
                                                        std::size_t horizon) {
    std::vector<std::size_t> origins;
    if (n_rows >= input_len + horizon) {
        origins.reserve(n_rows - input_len - horizon + 1);
        for (std::size_t o = 0; o + input_len + horizon <= n_rows; ++o) origins.push_back(o);
    }
    return origins;
}

/// Stack matrix rows [origin + offset, origin + offset + len) for each origin
/// of the batch into an untracked [B, len, C] tensor.
template <typename T>
Tensor<T> gather_rows(const WindowSet& data, const std::vector<std::size_t>& origins,
                      std::size_t offset, std::size_t len) {
    const std::size_t chans = data.n_channels;
    auto out = Tensor<T>::zeros({origins.size(), len, chans});
    for (std::size_t b = 0; b < origins.size(); ++b) {
        const double* src = data.matrix.data() + (origins[b] + offset) * chans;
        T* dst = out.value().data() + b * len * chans;
        for (std::size_t i = 0; i < len * chans; ++i) dst[i] = static_cast<T>(src[i]);
    }
    return out;
}

/// The early-stopping decision given the per-epoch losses so far: stop at
/// max_epochs, or once an epoch-over-epoch improvement falls below
/// early_stop_delta (never before the second reading, and a zero delta
/// disables the rule entirely).
inline bool should_stop(const std::vector<double>& history, const TrainConfig& config) {
    const std::size_t n = history.size();
    if (n >= config.max_epochs) return true;
    if (config.early_stop_delta > 0.0 && n >= std::max<std::size_t>(config.min_epochs, 2)) {
        const double improvement = history[n - 2] - history[n - 1];
        if (improvement < config.early_stop_delta) return true;
    }
    return false;
}

struct TrainResult {
    std::vector<double> loss_history;  // window-weighted mean MSE per epoch
    bool stopped_early = false;
};

/// Mini-batch Adam training with per-epoch reshuffling and the early-stopping
/// rule above. The model is updated in place; optimizer state lives and dies
/// inside this call, so a warm-started model always trains with fresh state.
template <typename Model>
TrainResult train_model(Model& model, const WindowSet& data, const TrainConfig& config) {
    using T = typename Model::value_type;
    validate(config);
    if (data.origins.empty()) throw DataError("training requires at least one window");
    const std::size_t min_rows =
        (*std::max_element(data.origins.begin(), data.origins.end())) + data.input_len +
        data.horizon;
    if (data.matrix.size() < min_rows * data.n_channels) {
        throw DataError("window origins reach past the end of the training matrix");
    }

    auto params = param_tensors(model.parameters());
    nn::AdamConfig<T> adam_config;
    adam_config.lr = static_cast<T>(config.learning_rate);
    nn::Adam<T> adam(params, adam_config);

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order = data.origins;
    TrainResult result;

    while (true) {
        if (config.shuffle) std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t window_count = 0;
        std::vector<std::size_t> batch;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            batch.assign(order.begin() + start, order.begin() + stop);

            auto context = gather_rows<T>(data, batch, 0, data.input_len);
            auto target = gather_rows<T>(data, batch, data.input_len, data.horizon);
            adam.zero_grad();
            Tape<T> tape;
            auto prediction = model.forward(tape, context);
            auto loss = tape.mse_loss(prediction, target);
            const double loss_value = static_cast<double>(loss.item());
            if (!std::isfinite(loss_value)) {
                throw Error("training diverged: non-finite loss in epoch " +
                            std::to_string(result.loss_history.size() + 1));
            }
            tape.backward(loss);
            adam.step();
            loss_sum += loss_value * static_cast<double>(batch.size());
            window_count += batch.size();
        }
        result.loss_history.push_back(loss_sum / static_cast<double>(window_count));
        if (should_stop(result.loss_history, config)) {
            result.stopped_early = result.loss_history.size() < config.max_epochs;
            break;
        }
    }
    return result;
}

/// Copy every parameter of `source` into `model` (same architecture required).
/// Optimizer state is not carried over — training always restarts Adam.
template <typename Model>
void warm_start(Model& model, const Model& source) {
    auto dst = model.parameters();
    auto src = source.parameters();
    if (dst.size() != src.size()) {
        throw ConfigError("warm start between models with different parameter counts");
    }
    for (std::size_t i = 0; i < dst.size(); ++i) {
        if (dst[i].first != src[i].first || dst[i].second.shape() != src[i].second.shape()) {
            throw ConfigError("warm start architecture mismatch at parameter '" +
                              dst[i].first + "'");
        }
    }
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i].second.value() = src[i].second.value();
        dst[i].second.zero_grad();
    }
}

}  // namespace gridcast::models
