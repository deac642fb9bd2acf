#pragma once

#include <cstddef>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gridcast/common.hpp"

namespace gridcast::nn {

/// Shape-mismatch and misuse errors raised by the tensor engine.
struct ShapeError : Error {
    using Error::Error;
};

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<std::size_t>());
}

inline std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

template <typename T>
struct TensorImpl {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;  // allocated only while tracked
    bool tracked = false;
};

/// Shared-ownership handle to a dense row-major tensor. Copies alias the same
/// storage; the autodiff tape holds handles to everything it touched.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool tracked = false) {
        return Tensor(std::move(shape), {}, tracked, true);
    }
    static Tensor full(Shape shape, T fill, bool tracked = false) {
        auto t = zeros(std::move(shape), tracked);
        std::fill(t.value().begin(), t.value().end(), fill);
        return t;
    }
    static Tensor from(Shape shape, std::vector<T> data, bool tracked = false) {
        if (shape_size(shape) != data.size()) {
            throw ShapeError("data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(shape));
        }
        return Tensor(std::move(shape), std::move(data), tracked, false);
    }
    static Tensor scalar(T v) { return from({1}, {v}); }

    bool valid() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    std::size_t rank() const { return impl_->shape.size(); }
    std::size_t size() const { return impl_->value.size(); }
    std::size_t extent(std::size_t axis) const { return impl_->shape[axis]; }

    // The handle has pointer semantics: copies alias the same storage, so
    // value/grad give mutable access through a const handle, like shared_ptr.
    std::vector<T>& value() const { return impl_->value; }

    bool tracked() const { return impl_->tracked; }
    void set_tracked(bool tracked) const {
        impl_->tracked = tracked;
        impl_->grad.assign(tracked ? impl_->value.size() : 0, T(0));
    }

    std::vector<T>& grad() const {
        require_tracked();
        return impl_->grad;
    }
    void zero_grad() const {
        if (impl_->tracked) std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
    }

    /// Value of a single-element tensor.
    T item() const {
        if (size() != 1) {
            throw ShapeError("item() requires a scalar, got shape " + shape_str(shape()));
        }
        return impl_->value[0];
    }

    /// Identity of the underlying storage (used to key optimizer state).
    const TensorImpl<T>* id() const { return impl_.get(); }
    bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

private:
    Tensor(Shape shape, std::vector<T> data, bool tracked, bool zero_fill)
        : impl_(std::make_shared<TensorImpl<T>>()) {
        impl_->shape = std::move(shape);
        if (zero_fill) {
            impl_->value.assign(shape_size(impl_->shape), T(0));
        } else {
            impl_->value = std::move(data);
        }
        impl_->tracked = tracked;
        if (tracked) impl_->grad.assign(impl_->value.size(), T(0));
    }

    void require_tracked() const {
        if (!impl_->tracked) throw Error("tensor does not track gradients");
    }

    std::shared_ptr<TensorImpl<T>> impl_;
};

/// Seeded uniform initialization on (-1/sqrt(fan_in), +1/sqrt(fan_in)),
/// the conventional default for linear layers. Always tracked.
template <typename T>
Tensor<T> uniform_init(Shape shape, std::size_t fan_in, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in == 0 ? 1 : fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto t = Tensor<T>::zeros(std::move(shape), true);
    for (T& v : t.value()) v = static_cast<T>(dist(rng));
    return t;
}

}  // namespace gridcast::nn
