#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast::models {

/// Centered moving average with replicated-edge padding, and its residual.
/// trend[i] averages the kernel window around i, reusing the first/last
/// element beyond the boundaries; seasonal = x - trend.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> decompose_series(const std::vector<T>& x,
                                                           std::size_t kernel_size) {
    if (kernel_size == 0 || kernel_size % 2 == 0) {
        throw ConfigError("decomposition kernel must be odd, got " +
                          std::to_string(kernel_size));
    }
    const std::size_t n = x.size();
    if (n == 0) throw DataError("cannot decompose an empty series");
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kernel_size / 2);

    std::vector<T> trend(n);
    std::vector<T> seasonal(n);
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        T sum = T(0);
        for (std::ptrdiff_t k = i - half; k <= i + half; ++k) {
            const std::ptrdiff_t j = std::clamp<std::ptrdiff_t>(k, 0, n - 1);
            sum += x[static_cast<std::size_t>(j)];
        }
        trend[i] = sum / static_cast<T>(kernel_size);
        seasonal[i] = x[i] - trend[i];
    }
    return {std::move(trend), std::move(seasonal)};
}

}  // namespace gridcast::models
