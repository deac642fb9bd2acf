#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

#include "gridcast/models/decompose.hpp"
#include "gridcast/models/nn_util.hpp"
#include "gridcast/nn/tensor.hpp"

namespace gridcast::models {

struct LinearConfig {
    std::size_t input_len = 96;
    std::size_t horizon = 96;
};

/// One linear map from the level-adjusted context to the horizon: the last
/// context value is subtracted before the layer and restored afterwards, so
/// a zero-initialized model IS the last-value naive forecast.
template <typename T>
class NLinear {
public:
    using value_type = T;

    NLinear(LinearConfig config, std::uint64_t seed) : config_(config) {
        std::mt19937_64 rng(seed);
        weight_ = nn::uniform_init<T>({config.input_len, config.horizon}, config.input_len, rng);
        bias_ = nn::uniform_init<T>({config.horizon}, config.input_len, rng);
    }

    Tensor<T> forward(Tape<T>& tape, const Tensor<T>& context) const {
        require_context_shape(context.shape(), config_.input_len);
        const std::size_t batch = context.extent(0), channels = context.extent(2);
        const std::size_t len = config_.input_len, horizon = config_.horizon;

        auto rows = channel_rows(context);
        auto last = Tensor<T>::zeros({batch * channels, horizon});
        for (std::size_t r = 0; r < batch * channels; ++r) {
            const T level = rows.value()[r * len + len - 1];
            for (std::size_t l = 0; l < len; ++l) rows.value()[r * len + l] -= level;
            for (std::size_t h = 0; h < horizon; ++h) last.value()[r * horizon + h] = level;
        }

        auto mapped = tape.add(tape.matmul(rows, weight_), bias_);
        auto restored = tape.add(mapped, last);
        return rows_to_forecast(tape, restored, batch, channels);
    }

    ParamList<T> parameters() const { return {{"weight", weight_}, {"bias", bias_}}; }
    const LinearConfig& config() const { return config_; }

private:
    LinearConfig config_;
    Tensor<T> weight_, bias_;
};

struct DLinearConfig {
    std::size_t input_len = 96;
    std::size_t horizon = 96;
    std::size_t kernel_size = 25;
};

/// Moving-average decomposition feeding two per-channel linear heads: trend
/// and seasonal parts each map input_len -> horizon, then sum.
template <typename T>
class DLinear {
public:
    using value_type = T;

    DLinear(DLinearConfig config, std::uint64_t seed) : config_(config) {
        if (config.kernel_size % 2 == 0) {
            throw ConfigError("decomposition kernel must be odd");
        }
        std::mt19937_64 rng(seed);
        trend_weight_ =
            nn::uniform_init<T>({config.input_len, config.horizon}, config.input_len, rng);
        trend_bias_ = nn::uniform_init<T>({config.horizon}, config.input_len, rng);
        seasonal_weight_ =
            nn::uniform_init<T>({config.input_len, config.horizon}, config.input_len, rng);
        seasonal_bias_ = nn::uniform_init<T>({config.horizon}, config.input_len, rng);
    }

    Tensor<T> forward(Tape<T>& tape, const Tensor<T>& context) const {
        require_context_shape(context.shape(), config_.input_len);
        const std::size_t batch = context.extent(0), channels = context.extent(2);
        const std::size_t len = config_.input_len;

        auto rows = channel_rows(context);
        auto trend = Tensor<T>::zeros(rows.shape());
        auto seasonal = Tensor<T>::zeros(rows.shape());
        std::vector<T> series(len);
        for (std::size_t r = 0; r < batch * channels; ++r) {
            std::copy_n(rows.value().data() + r * len, len, series.data());
            auto [t, s] = decompose_series(series, config_.kernel_size);
            std::copy_n(t.data(), len, trend.value().data() + r * len);
            std::copy_n(s.data(), len, seasonal.value().data() + r * len);
        }

        auto trend_out = tape.add(tape.matmul(trend, trend_weight_), trend_bias_);
        auto seasonal_out = tape.add(tape.matmul(seasonal, seasonal_weight_), seasonal_bias_);
        auto summed = tape.add(trend_out, seasonal_out);
        return rows_to_forecast(tape, summed, batch, channels);
    }

    ParamList<T> parameters() const {
        return {{"trend.weight", trend_weight_},
                {"trend.bias", trend_bias_},
                {"seasonal.weight", seasonal_weight_},
                {"seasonal.bias", seasonal_bias_}};
    }
    const DLinearConfig& config() const { return config_; }

private:
    DLinearConfig config_;
    Tensor<T> trend_weight_, trend_bias_, seasonal_weight_, seasonal_bias_;
};

}  // namespace gridcast::models
