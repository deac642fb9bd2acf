#pragma once

#include <cmath>

#include "gridcast/nn/tensor.hpp"

namespace gridcast::nn {

template <typename T>
struct AdamConfig {
    T lr = T(1e-3);
    T beta1 = T(0.9);
    T beta2 = T(0.999);
    T eps = T(1e-8);
};

/// Adam with bias correction over a fixed parameter list. Re-constructing (or
/// reset()) gives the fresh state a warm start requires.
template <typename T>
class Adam {
public:
    explicit Adam(std::vector<Tensor<T>> params, AdamConfig<T> config = {})
        : params_(std::move(params)), config_(config) {
        for (const auto& p : params_) {
            if (!p.tracked()) throw Error("Adam parameter does not track gradients");
            m_.emplace_back(p.size(), T(0));
            v_.emplace_back(p.size(), T(0));
        }
    }

    /// One update from the gradients currently stored on the parameters.
    void step() {
        ++t_;
        const T bc1 = T(1) - std::pow(config_.beta1, static_cast<T>(t_));
        const T bc2 = T(1) - std::pow(config_.beta2, static_cast<T>(t_));
        for (std::size_t i = 0; i < params_.size(); ++i) {
            auto& value = params_[i].value();
            const auto& grad = params_[i].grad();
            auto& m = m_[i];
            auto& v = v_[i];
            for (std::size_t j = 0; j < value.size(); ++j) {
                const T g = grad[j];
                m[j] = config_.beta1 * m[j] + (T(1) - config_.beta1) * g;
                v[j] = config_.beta2 * v[j] + (T(1) - config_.beta2) * g * g;
                const T m_hat = m[j] / bc1;
                const T v_hat = v[j] / bc2;
                value[j] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
            }
        }
    }

    void zero_grad() {
        for (auto& p : params_) p.zero_grad();
    }

    /// Drop all moment state; the next step behaves like the first.
    void reset() {
        t_ = 0;
        for (std::size_t i = 0; i < params_.size(); ++i) {
            std::fill(m_[i].begin(), m_[i].end(), T(0));
            std::fill(v_[i].begin(), v_[i].end(), T(0));
        }
    }

    std::size_t step_count() const { return t_; }
    const AdamConfig<T>& config() const { return config_; }

private:
    std::vector<Tensor<T>> params_;
    std::vector<std::vector<T>> m_, v_;
    std::size_t t_ = 0;
    AdamConfig<T> config_;
};

/// Plain gradient step on each parameter.
template <typename T>
void sgd_step(const std::vector<Tensor<T>>& params, T lr) {
    for (const auto& p : params) {
        auto& value = p.value();
        const auto& grad = p.grad();
        for (std::size_t j = 0; j < value.size(); ++j) value[j] -= lr * grad[j];
    }
}

}  // namespace gridcast::nn
