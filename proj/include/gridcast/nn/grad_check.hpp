#pragma once

#include <cmath>
#include <functional>

#include "gridcast/nn/tape.hpp"

namespace gridcast::nn {

/// Compare analytic gradients against central finite differences.
///
/// `build` constructs the scalar loss on a fresh tape each call (parameters
/// are captured by the caller). Returns the max over all parameter
/// coordinates of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
///
/// Step sizes default to 1e-3 * scale in 32-bit (the forward's own rounding
/// dominates below that) and 1e-5 * scale in 64-bit; pass `step` to override.
/// Finite differences are meaningless within one step of a relu kink;
/// callers keep inputs away from it.
template <typename T, typename BuildFn>
double grad_check(const std::vector<Tensor<T>>& params, BuildFn&& build, double step = 0.0) {
    const double step_factor = step > 0.0 ? step : (sizeof(T) == 4 ? 1e-3 : 1e-5);

    auto eval = [&]() -> double {
        Tape<T> tape;
        Tensor<T> loss = build(tape);
        const double v = static_cast<double>(loss.item());
        if (!std::isfinite(v)) throw Error("grad_check: non-finite loss");
        return v;
    };

    // analytic pass
    for (const auto& p : params) p.zero_grad();
    std::vector<std::vector<T>> analytic;
    {
        Tape<T> tape;
        Tensor<T> loss = build(tape);
        tape.backward(loss);
        for (const auto& p : params) analytic.push_back(p.grad());
    }

    double max_rel_error = 0.0;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& value = params[pi].value();
        for (std::size_t j = 0; j < value.size(); ++j) {
            const T saved = value[j];
            const T h = static_cast<T>(step_factor) *
                        std::max(T(1), std::abs(saved));
            value[j] = saved + h;
            const double f_plus = eval();
            value[j] = saved - h;
            const double f_minus = eval();
            value[j] = saved;

            const double numeric = (f_plus - f_minus) / (2.0 * static_cast<double>(h));
            const double a = static_cast<double>(analytic[pi][j]);
            const double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
            max_rel_error = std::max(max_rel_error, std::fabs(a - numeric) / denom);
        }
    }
    return max_rel_error;
}

}  // namespace gridcast::nn
