#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <numbers>

#include "gridcast/nn/tensor.hpp"

namespace gridcast::nn {

/// Reverse-mode tape. Each primitive computes its forward value eagerly and,
/// when the result tracks gradients, records a pullback closure. backward()
/// replays the pullbacks in reverse topological order (which is simply the
/// recording order). One backward per tape unless reset.
template <typename T>
class Tape {
public:
    using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    using Map = Eigen::Map<Matrix>;
    using ConstMap = Eigen::Map<const Matrix>;

    /// a: [..., m, k]; b: [k, n] (shared) or [..., k, n] (batched alike).
    Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
        if (a.rank() < 2 || b.rank() < 2) {
            throw ShapeError("matmul needs rank >= 2, got " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
        }
        const bool shared_b = b.rank() == 2;
        if (!shared_b && b.rank() != a.rank()) {
            throw ShapeError("matmul operands must have equal rank or a rank-2 right side");
        }
        const std::size_t m = a.shape()[a.rank() - 2];
        const std::size_t k = a.shape()[a.rank() - 1];
        const std::size_t kb = b.shape()[b.rank() - 2];
        const std::size_t n = b.shape()[b.rank() - 1];
        if (k != kb) {
            throw ShapeError("matmul inner dimensions differ: " + shape_str(a.shape()) + " x " +
                             shape_str(b.shape()));
        }
        std::size_t batch = 1;
        Shape out_shape;
        for (std::size_t i = 0; i + 2 < a.rank(); ++i) {
            batch *= a.shape()[i];
            out_shape.push_back(a.shape()[i]);
        }
        if (!shared_b) {
            for (std::size_t i = 0; i + 2 < b.rank(); ++i) {
                if (b.shape()[i] != a.shape()[i]) {
                    throw ShapeError("matmul batch dimensions differ: " + shape_str(a.shape()) +
                                     " x " + shape_str(b.shape()));
                }
            }
        }
        out_shape.push_back(m);
        out_shape.push_back(n);

        auto out = Tensor<T>::zeros(out_shape, a.tracked() || b.tracked());
        for (std::size_t i = 0; i < batch; ++i) {
            ConstMap ma(a.value().data() + i * m * k, m, k);
            ConstMap mb(b.value().data() + (shared_b ? 0 : i * k * n), k, n);
            Map mo(out.value().data() + i * m * n, m, n);
            mo.noalias() = ma * mb;
        }
        record(out, [a, b, out, m, k, n, batch, shared_b]() {
            for (std::size_t i = 0; i < batch; ++i) {
                ConstMap ma(a.value().data() + i * m * k, m, k);
                ConstMap mb(b.value().data() + (shared_b ? 0 : i * k * n), k, n);
                ConstMap mg(out.grad().data() + i * m * n, m, n);
                if (a.tracked()) {
                    Map da(a.grad().data() + i * m * k, m, k);
                    da.noalias() += mg * mb.transpose();
                }
                if (b.tracked()) {
                    Map db(b.grad().data() + (shared_b ? 0 : i * k * n),
                           k, n);
                    db.noalias() += ma.transpose() * mg;
                }
            }
        });
        return out;
    }

    /// Equal shapes, or b's shape a suffix of a's (bias-style broadcast).
    Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
        require_suffix(a, b, "add");
        auto out = Tensor<T>::zeros(a.shape(), a.tracked() || b.tracked());
        const std::size_t bs = b.size();
        for (std::size_t i = 0; i < a.size(); ++i) {
            out.value()[i] = a.value()[i] + b.value()[i % bs];
        }
        record(out, [a, b, out, bs]() {
            if (a.tracked()) {
                auto& da = a.grad();
                for (std::size_t i = 0; i < da.size(); ++i) da[i] += out.grad()[i];
            }
            if (b.tracked()) {
                auto& db = b.grad();
                for (std::size_t i = 0; i < out.grad().size(); ++i) {
                    db[i % bs] += out.grad()[i];
                }
            }
        });
        return out;
    }

    /// Equal shapes, or b's shape a suffix of a's.
    Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
        require_suffix(a, b, "sub");
        auto out = Tensor<T>::zeros(a.shape(), a.tracked() || b.tracked());
        const std::size_t bs = b.size();
        for (std::size_t i = 0; i < a.size(); ++i) {
            out.value()[i] = a.value()[i] - b.value()[i % bs];
        }
        record(out, [a, b, out, bs]() {
            if (a.tracked()) {
                auto& da = a.grad();
                for (std::size_t i = 0; i < da.size(); ++i) da[i] += out.grad()[i];
            }
            if (b.tracked()) {
                auto& db = b.grad();
                for (std::size_t i = 0; i < out.grad().size(); ++i) {
                    db[i % bs] -= out.grad()[i];
                }
            }
        });
        return out;
    }

    /// Elementwise product; equal shapes or b a suffix of a.
    Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
        require_suffix(a, b, "mul");
        auto out = Tensor<T>::zeros(a.shape(), a.tracked() || b.tracked());
        const std::size_t bs = b.size();
        for (std::size_t i = 0; i < a.size(); ++i) {
            out.value()[i] = a.value()[i] * b.value()[i % bs];
        }
        record(out, [a, b, out, bs]() {
            if (a.tracked()) {
                auto& da = a.grad();
                for (std::size_t i = 0; i < da.size(); ++i) {
                    da[i] += out.grad()[i] * b.value()[i % bs];
                }
            }
            if (b.tracked()) {
                auto& db = b.grad();
                for (std::size_t i = 0; i < out.grad().size(); ++i) {
                    db[i % bs] += out.grad()[i] * a.value()[i];
                }
            }
        });
        return out;
    }

    /// Multiply by a compile-time-known constant (e.g. attention 1/sqrt(d)).
    Tensor<T> scale(const Tensor<T>& x, T factor) {
        auto out = Tensor<T>::zeros(x.shape(), x.tracked());
        for (std::size_t i = 0; i < x.size(); ++i) out.value()[i] = x.value()[i] * factor;
        record(out, [x, out, factor]() {
            if (!x.tracked()) return;
            auto& dx = x.grad();
            for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += out.grad()[i] * factor;
        });
        return out;
    }

    Tensor<T> relu(const Tensor<T>& x) {
        auto out = Tensor<T>::zeros(x.shape(), x.tracked());
        for (std::size_t i = 0; i < x.size(); ++i) {
            out.value()[i] = x.value()[i] > T(0) ? x.value()[i] : T(0);
        }
        record(out, [x, out]() {
            if (!x.tracked()) return;
            auto& dx = x.grad();
            for (std::size_t i = 0; i < dx.size(); ++i) {
                if (x.value()[i] > T(0)) dx[i] += out.grad()[i];
            }
        });
        return out;
    }

    /// Exact-erf gelu: 0.5 x (1 + erf(x / sqrt(2))).
    Tensor<T> gelu(const Tensor<T>& x) {
        auto out = Tensor<T>::zeros(x.shape(), x.tracked());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double v = static_cast<double>(x.value()[i]);
            out.value()[i] = static_cast<T>(0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2)));
        }
        record(out, [x, out]() {
            if (!x.tracked()) return;
            auto& dx = x.grad();
            const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
            for (std::size_t i = 0; i < dx.size(); ++i) {
                const double v = static_cast<double>(x.value()[i]);
                const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
                const double pdf = inv_sqrt2pi * std::exp(-0.5 * v * v);
                dx[i] += out.grad()[i] * static_cast<T>(cdf + v * pdf);
            }
        });
        return out;
    }

    /// Softmax over the last axis.
    Tensor<T> softmax(const Tensor<T>& x) {
        const std::size_t last = x.shape().back();
        const std::size_t rows = x.size() / last;
        auto out = Tensor<T>::zeros(x.shape(), x.tracked());
        for (std::size_t r = 0; r < rows; ++r) {
            const T* in = x.value().data() + r * last;
            T* dst = out.value().data() + r * last;
            T max = in[0];
            for (std::size_t j = 1; j < last; ++j) max = std::max(max, in[j]);
            T sum = T(0);
            for (std::size_t j = 0; j < last; ++j) {
                dst[j] = std::exp(in[j] - max);
                sum += dst[j];
            }
            for (std::size_t j = 0; j < last; ++j) dst[j] /= sum;
        }
        record(out, [x, out, rows, last]() {
            if (!x.tracked()) return;
            auto& dx = x.grad();
            for (std::size_t r = 0; r < rows; ++r) {
                const T* y = out.value().data() + r * last;
                const T* dy = out.grad().data() + r * last;
                T dot = T(0);
                for (std::size_t j = 0; j < last; ++j) dot += dy[j] * y[j];
                for (std::size_t j = 0; j < last; ++j) {
                    dx[r * last + j] += y[j] * (dy[j] - dot);
                }
            }
        });
        return out;
    }

    /// Layer normalization over the last axis with elementwise affine
    /// parameters gamma/beta of shape [last].
    Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                         T eps = T(1e-5)) {
        const std::size_t last = x.shape().back();
        if (gamma.size() != last || beta.size() != last) {
            throw ShapeError("layer_norm affine parameters must have the last-axis extent " +
                             std::to_string(last));
        }
        const std::size_t rows = x.size() / last;
        auto out =
            Tensor<T>::zeros(x.shape(), x.tracked() || gamma.tracked() || beta.tracked());
        // cache per-row mean and inverse std for the pullback
        auto stats = std::make_shared<std::vector<T>>(2 * rows);
        for (std::size_t r = 0; r < rows; ++r) {
            const T* in = x.value().data() + r * last;
            T mean = T(0);
            for (std::size_t j = 0; j < last; ++j) mean += in[j];
            mean /= static_cast<T>(last);
            T var = T(0);
            for (std::size_t j = 0; j < last; ++j) {
                const T d = in[j] - mean;
                var += d * d;
            }
            var /= static_cast<T>(last);
            const T inv_std = T(1) / std::sqrt(var + eps);
            (*stats)[2 * r] = mean;
            (*stats)[2 * r + 1] = inv_std;
            T* dst = out.value().data() + r * last;
            for (std::size_t j = 0; j < last; ++j) {
                dst[j] = (in[j] - mean) * inv_std * gamma.value()[j] + beta.value()[j];
            }
        }
        record(out, [x, gamma, beta, out, stats, rows, last]() {
            for (std::size_t r = 0; r < rows; ++r) {
                const T mean = (*stats)[2 * r];
                const T inv_std = (*stats)[2 * r + 1];
                const T* in = x.value().data() + r * last;
                const T* dy = out.grad().data() + r * last;
                if (gamma.tracked() || beta.tracked()) {
                    for (std::size_t j = 0; j < last; ++j) {
                        const T xhat = (in[j] - mean) * inv_std;
                        if (gamma.tracked()) {
                            gamma.grad()[j] += dy[j] * xhat;
                        }
                        if (beta.tracked()) beta.grad()[j] += dy[j];
                    }
                }
                if (!x.tracked()) continue;
                // dx = (g - mean(g) - xhat * mean(g * xhat)) * inv_std,
                // with g = dy * gamma
                T g_mean = T(0), gx_mean = T(0);
                for (std::size_t j = 0; j < last; ++j) {
                    const T g = dy[j] * gamma.value()[j];
                    const T xhat = (in[j] - mean) * inv_std;
                    g_mean += g;
                    gx_mean += g * xhat;
                }
                g_mean /= static_cast<T>(last);
                gx_mean /= static_cast<T>(last);
                auto& dx = x.grad();
                for (std::size_t j = 0; j < last; ++j) {
                    const T g = dy[j] * gamma.value()[j];
                    const T xhat = (in[j] - mean) * inv_std;
                    dx[r * last + j] += (g - g_mean - xhat * gx_mean) * inv_std;
                }
            }
        });
        return out;
    }

    /// Swap two axes.
    Tensor<T> transpose(const Tensor<T>& x, std::size_t axis0, std::size_t axis1) {
        if (axis0 >= x.rank() || axis1 >= x.rank()) {
            throw ShapeError("transpose axes out of range for " + shape_str(x.shape()));
        }
        Shape out_shape = x.shape();
        std::swap(out_shape[axis0], out_shape[axis1]);
        auto out = Tensor<T>::zeros(out_shape, x.tracked());
        permute_copy(x.value(), x.shape(), out.value(), axis0, axis1);
        record(out, [x, out, axis0, axis1]() {
            if (!x.tracked()) return;
            // transposing the gradient back is the exact pullback
            std::vector<T> tmp(x.size(), T(0));
            permute_copy(out.grad(), out.shape(), tmp, axis0, axis1);
            auto& dx = x.grad();
            for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += tmp[i];
        });
        return out;
    }

    /// Same data, new shape (sizes must agree).
    Tensor<T> reshape(const Tensor<T>& x, Shape new_shape) {
        if (shape_size(new_shape) != x.size()) {
            throw ShapeError("reshape " + shape_str(x.shape()) + " -> " + shape_str(new_shape) +
                             " changes the element count");
        }
        auto out = Tensor<T>::from(std::move(new_shape), x.value(), x.tracked());
        record(out, [x, out]() {
            if (!x.tracked()) return;
            auto& dx = x.grad();
            for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += out.grad()[i];
        });
        return out;
    }

    /// Elements [begin, end) along one axis.
    Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t begin, std::size_t end) {
        if (axis >= x.rank() || begin >= end || end > x.shape()[axis]) {
            throw ShapeError("invalid slice [" + std::to_string(begin) + ", " +
                             std::to_string(end) + ") on axis " + std::to_string(axis) + " of " +
                             shape_str(x.shape()));
        }
        Shape out_shape = x.shape();
        out_shape[axis] = end - begin;
        std::size_t outer = 1, inner = 1;
        for (std::size_t i = 0; i < axis; ++i) outer *= x.shape()[i];
        for (std::size_t i = axis + 1; i < x.rank(); ++i) inner *= x.shape()[i];
        const std::size_t in_axis = x.shape()[axis];
        const std::size_t out_axis = end - begin;

        auto out = Tensor<T>::zeros(out_shape, x.tracked());
        for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t j = 0; j < out_axis; ++j) {
                const T* src = x.value().data() + (o * in_axis + begin + j) * inner;
                T* dst = out.value().data() + (o * out_axis + j) * inner;
                std::copy(src, src + inner, dst);
            }
        }
        record(out, [x, out, outer, inner, in_axis, out_axis, begin]() {
            if (!x.tracked()) return;
            auto& dx = x.grad();
            for (std::size_t o = 0; o < outer; ++o) {
                for (std::size_t j = 0; j < out_axis; ++j) {
                    const T* src = out.grad().data() + (o * out_axis + j) * inner;
                    T* dst = dx.data() + (o * in_axis + begin + j) * inner;
                    for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
                }
            }
        });
        return out;
    }

    /// Concatenate along one axis; shapes must agree elsewhere.
    Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
        if (parts.empty()) throw ShapeError("concat of zero tensors");
        const Shape& first = parts.front().shape();
        if (axis >= first.size()) throw ShapeError("concat axis out of range");
        std::size_t total_axis = 0;
        bool tracked = false;
        for (const auto& p : parts) {
            if (p.rank() != first.size()) throw ShapeError("concat rank mismatch");
            for (std::size_t i = 0; i < first.size(); ++i) {
                if (i != axis && p.shape()[i] != first[i]) {
                    throw ShapeError("concat extents differ outside the join axis");
                }
            }
            total_axis += p.shape()[axis];
            tracked = tracked || p.tracked();
        }
        Shape out_shape = first;
        out_shape[axis] = total_axis;
        std::size_t outer = 1, inner = 1;
        for (std::size_t i = 0; i < axis; ++i) outer *= first[i];
        for (std::size_t i = axis + 1; i < first.size(); ++i) inner *= first[i];

        auto out = Tensor<T>::zeros(out_shape, tracked);
        std::size_t offset = 0;
        for (const auto& p : parts) {
            const std::size_t p_axis = p.shape()[axis];
            for (std::size_t o = 0; o < outer; ++o) {
                const T* src = p.value().data() + o * p_axis * inner;
                T* dst = out.value().data() + (o * total_axis + offset) * inner;
                std::copy(src, src + p_axis * inner, dst);
            }
            offset += p_axis;
        }
        record(out, [parts, out, outer, inner, total_axis, axis]() {
            std::size_t offset = 0;
            for (const auto& p : parts) {
                const std::size_t p_axis = p.shape()[axis];
                if (p.tracked()) {
                    auto& dp = p.grad();
                    for (std::size_t o = 0; o < outer; ++o) {
                        const T* src = out.grad().data() + (o * total_axis + offset) * inner;
                        T* dst = dp.data() + o * p_axis * inner;
                        for (std::size_t i = 0; i < p_axis * inner; ++i) dst[i] += src[i];
                    }
                }
                offset += p_axis;
            }
        });
        return out;
    }

    /// Mean over all elements, as a scalar tensor.
    Tensor<T> mean(const Tensor<T>& x) {
        T sum = T(0);
        for (T v : x.value()) sum += v;
        auto out = Tensor<T>::from({1}, {sum / static_cast<T>(x.size())}, x.tracked());
        record(out, [x, out]() {
            if (!x.tracked()) return;
            const T g = out.grad()[0] / static_cast<T>(x.size());
            auto& dx = x.grad();
            for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g;
        });
        return out;
    }

    /// Mean squared error between equal-shape tensors, as a scalar.
    Tensor<T> mse_loss(const Tensor<T>& prediction, const Tensor<T>& target) {
        if (prediction.shape() != target.shape()) {
            throw ShapeError("mse_loss shapes differ: " + shape_str(prediction.shape()) +
                             " vs " + shape_str(target.shape()));
        }
        T sum = T(0);
        for (std::size_t i = 0; i < prediction.size(); ++i) {
            const T d = prediction.value()[i] - target.value()[i];
            sum += d * d;
        }
        auto out = Tensor<T>::from({1}, {sum / static_cast<T>(prediction.size())},
                                   prediction.tracked() || target.tracked());
        record(out, [prediction, target, out]() {
            const T g = out.grad()[0] * T(2) / static_cast<T>(prediction.size());
            for (std::size_t i = 0; i < prediction.size(); ++i) {
                const T d = prediction.value()[i] - target.value()[i];
                if (prediction.tracked()) {
                    prediction.grad()[i] += g * d;
                }
                if (target.tracked()) target.grad()[i] -= g * d;
            }
        });
        return out;
    }

    /// Seed the scalar loss with gradient 1 and replay all pullbacks.
    void backward(const Tensor<T>& loss) {
        if (exhausted_) {
            throw Error("tape already consumed by backward(); call reset() to reuse it");
        }
        if (loss.size() != 1) {
            throw ShapeError("backward needs a scalar loss, got " + shape_str(loss.shape()));
        }
        if (!loss.tracked()) {
            throw Error("loss does not track gradients; nothing to differentiate");
        }
        loss.grad()[0] += T(1);
        for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
        exhausted_ = true;
    }

    void reset() {
        entries_.clear();
        exhausted_ = false;
    }

    std::size_t recorded_ops() const { return entries_.size(); }

private:
    static void require_suffix(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
        if (a.shape() == b.shape()) return;
        if (b.rank() > a.rank()) {
            throw ShapeError(std::string(op) + ": shape " + shape_str(b.shape()) +
                             " is not a suffix of " + shape_str(a.shape()));
        }
        for (std::size_t i = 0; i < b.rank(); ++i) {
            if (b.shape()[b.rank() - 1 - i] != a.shape()[a.rank() - 1 - i]) {
                throw ShapeError(std::string(op) + ": shape " + shape_str(b.shape()) +
                                 " is not a suffix of " + shape_str(a.shape()));
            }
        }
    }

    static void permute_copy(const std::vector<T>& src, const Shape& src_shape,
                             std::vector<T>& dst, std::size_t axis0, std::size_t axis1) {
        const std::size_t rank = src_shape.size();
        Shape dst_shape = src_shape;
        std::swap(dst_shape[axis0], dst_shape[axis1]);
        std::vector<std::size_t> src_strides(rank, 1), dst_strides(rank, 1);
        for (std::size_t i = rank - 1; i-- > 0;) {
            src_strides[i] = src_strides[i + 1] * src_shape[i + 1];
            dst_strides[i] = dst_strides[i + 1] * dst_shape[i + 1];
        }
        std::vector<std::size_t> coord(rank, 0);
        for (std::size_t lin = 0; lin < src.size(); ++lin) {
            std::size_t rem = lin;
            for (std::size_t i = 0; i < rank; ++i) {
                coord[i] = rem / src_strides[i];
                rem %= src_strides[i];
            }
            std::swap(coord[axis0], coord[axis1]);
            std::size_t dst_lin = 0;
            for (std::size_t i = 0; i < rank; ++i) dst_lin += coord[i] * dst_strides[i];
            dst[dst_lin] = src[lin];
        }
    }

    void record(const Tensor<T>& out, std::function<void()> pullback) {
        check_finite(out);
        if (out.tracked()) entries_.push_back(std::move(pullback));
    }

    static void check_finite(const Tensor<T>& out) {
#ifndef NDEBUG
        for (T v : out.value()) {
            if (!std::isfinite(static_cast<double>(v))) {
                throw Error("non-finite value produced by a tensor primitive");
            }
        }
#endif
        (void)out;
    }

    std::vector<std::function<void()>> entries_;
    bool exhausted_ = false;
};

}  // namespace gridcast::nn
