#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gridcast/nn/tape.hpp"

namespace gridcast::models {

using nn::Shape;
using nn::Tape;
using nn::Tensor;

/// Named parameter list; the order is the checkpoint order.
template <typename T>
using ParamList = std::vector<std::pair<std::string, Tensor<T>>>;

template <typename T>
std::vector<Tensor<T>> param_tensors(const ParamList<T>& params) {
    std::vector<Tensor<T>> out;
    out.reserve(params.size());
    for (const auto& [name, t] : params) out.push_back(t);
    return out;
}

inline void require_context_shape(const Shape& shape, std::size_t input_len) {
    if (shape.size() != 3 || shape[1] != input_len) {
        throw nn::ShapeError("expected a [batch, " + std::to_string(input_len) +
                             ", channels] context, got " + nn::shape_str(shape));
    }
}

/// Rearrange an untracked [B, L, C] context into per-channel rows [B*C, L].
/// Channel-shared models treat every (batch, channel) pair as one series.
template <typename T>
Tensor<T> channel_rows(const Tensor<T>& x) {
    const std::size_t batch = x.extent(0), len = x.extent(1), channels = x.extent(2);
    auto rows = Tensor<T>::zeros({batch * channels, len});
    for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t c = 0; c < channels; ++c) {
            T* dst = rows.value().data() + (b * channels + c) * len;
            for (std::size_t l = 0; l < len; ++l) dst[l] = x.value()[(b * len + l) * channels + c];
        }
    }
    return rows;
}

/// Inverse of channel_rows on the tape: [B*C, H] rows back to [B, H, C].
template <typename T>
Tensor<T> rows_to_forecast(Tape<T>& tape, const Tensor<T>& rows, std::size_t batch,
                           std::size_t channels) {
    const std::size_t horizon = rows.extent(1);
    auto grouped = tape.reshape(rows, {batch, channels, horizon});
    return tape.transpose(grouped, 1, 2);
}

}  // namespace gridcast::models
