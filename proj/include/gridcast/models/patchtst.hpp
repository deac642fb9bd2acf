#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "gridcast/models/nn_util.hpp"
#include "gridcast/nn/tensor.hpp"

namespace gridcast::models {

struct PatchTSTConfig {
    std::size_t input_len = 96;
    std::size_t horizon = 96;
    std::size_t patch_len = 16;
    std::size_t stride = 8;
    std::size_t d_model = 64;
    std::size_t n_layers = 2;
    std::size_t n_heads = 4;
    std::size_t ff_dim = 128;
};

/// Channel-independent patch transformer: each (batch, channel) series is
/// instance-normalized, cut into overlapping patches, embedded, run through
/// pre-norm attention/feed-forward layers, and flattened into a linear
/// forecast head. Parameters never depend on the channel count.
template <typename T>
class PatchTST {
public:
    using value_type = T;

    PatchTST(PatchTSTConfig config, std::uint64_t seed) : config_(config) {
        if (config.patch_len == 0 || config.stride == 0) {
            throw ConfigError("patch length and stride must be positive");
        }
        if (config.patch_len > config.input_len) {
            throw ConfigError("patch length " + std::to_string(config.patch_len) +
                              " exceeds input length " + std::to_string(config.input_len));
        }
        if (config.n_heads == 0 || config.d_model % config.n_heads != 0) {
            throw ConfigError("d_model " + std::to_string(config.d_model) +
                              " must be divisible by n_heads " + std::to_string(config.n_heads));
        }
        n_patches_ = (config.input_len - config.patch_len) / config.stride + 1;

        std::mt19937_64 rng(seed);
        const std::size_t d = config.d_model;
        embed_weight_ = nn::uniform_init<T>({config.patch_len, d}, config.patch_len, rng);
        embed_bias_ = nn::uniform_init<T>({d}, config.patch_len, rng);
        pos_embed_ = nn::uniform_init<T>({n_patches_, d}, d, rng);
        layers_.reserve(config.n_layers);
        for (std::size_t i = 0; i < config.n_layers; ++i) {
            Layer layer;
            layer.attn_norm_gamma = Tensor<T>::full({d}, T(1), true);
            layer.attn_norm_beta = Tensor<T>::zeros({d}, true);
            layer.wq = nn::uniform_init<T>({d, d}, d, rng);
            layer.bq = nn::uniform_init<T>({d}, d, rng);
            layer.wk = nn::uniform_init<T>({d, d}, d, rng);
            layer.wv = nn::uniform_init<T>({d, d}, d, rng);
            layer.bv = nn::uniform_init<T>({d}, d, rng);
            layer.wo = nn::uniform_init<T>({d, d}, d, rng);
            layer.bo = nn::uniform_init<T>({d}, d, rng);
            layer.ff_norm_gamma = Tensor<T>::full({d}, T(1), true);
            layer.ff_norm_beta = Tensor<T>::zeros({d}, true);
            layer.w1 = nn::uniform_init<T>({d, config.ff_dim}, d, rng);
            layer.b1 = nn::uniform_init<T>({config.ff_dim}, d, rng);
            layer.w2 = nn::uniform_init<T>({config.ff_dim, d}, config.ff_dim, rng);
            layer.b2 = nn::uniform_init<T>({d}, config.ff_dim, rng);
            layers_.push_back(std::move(layer));
        }
        head_weight_ = nn::uniform_init<T>({n_patches_ * d, config.horizon}, n_patches_ * d, rng);
        head_bias_ = nn::uniform_init<T>({config.horizon}, n_patches_ * d, rng);
    }

    Tensor<T> forward(Tape<T>& tape, const Tensor<T>& context) const {
        require_context_shape(context.shape(), config_.input_len);
        const std::size_t batch = context.extent(0), channels = context.extent(2);
        const std::size_t len = config_.input_len, horizon = config_.horizon;
        const std::size_t n_rows = batch * channels;
        const std::size_t p = config_.patch_len, stride = config_.stride;
        const std::size_t d = config_.d_model, heads = config_.n_heads;
        const std::size_t dk = d / heads;

        // Instance normalization per series, undone at the output.
        auto rows = channel_rows(context);
        auto shift = Tensor<T>::zeros({n_rows, horizon});
        auto rescale = Tensor<T>::zeros({n_rows, horizon});
        for (std::size_t r = 0; r < n_rows; ++r) {
            T* series = rows.value().data() + r * len;
            T mean = T(0);
            for (std::size_t l = 0; l < len; ++l) mean += series[l];
            mean /= static_cast<T>(len);
            T var = T(0);
            for (std::size_t l = 0; l < len; ++l) {
                const T dev = series[l] - mean;
                var += dev * dev;
            }
            var /= static_cast<T>(len);
            const T scale = std::sqrt(var + static_cast<T>(1e-5));
            for (std::size_t l = 0; l < len; ++l) series[l] = (series[l] - mean) / scale;
            for (std::size_t h = 0; h < horizon; ++h) {
                shift.value()[r * horizon + h] = mean;
                rescale.value()[r * horizon + h] = scale;
            }
        }

        auto patches = Tensor<T>::zeros({n_rows, n_patches_, p});
        for (std::size_t r = 0; r < n_rows; ++r) {
            for (std::size_t i = 0; i < n_patches_; ++i) {
                const T* src = rows.value().data() + r * len + i * stride;
                T* dst = patches.value().data() + (r * n_patches_ + i) * p;
                for (std::size_t j = 0; j < p; ++j) dst[j] = src[j];
            }
        }

        auto h = tape.add(tape.matmul(patches, embed_weight_), embed_bias_);
        h = tape.add(h, pos_embed_);  // [n_rows, n_patches, d]

        const T inv_sqrt_dk = static_cast<T>(1.0 / std::sqrt(static_cast<double>(dk)));
        for (const Layer& layer : layers_) {
            auto a = tape.layer_norm(h, layer.attn_norm_gamma, layer.attn_norm_beta);
            auto q = tape.add(tape.matmul(a, layer.wq), layer.bq);
            // No key bias: softmax is invariant to a per-row constant shift,
            // so a key bias can never influence the output.
            auto k = tape.matmul(a, layer.wk);
            auto v = tape.add(tape.matmul(a, layer.wv), layer.bv);
            auto qh = tape.transpose(tape.reshape(q, {n_rows, n_patches_, heads, dk}), 1, 2);
            auto kh = tape.transpose(tape.reshape(k, {n_rows, n_patches_, heads, dk}), 1, 2);
            auto vh = tape.transpose(tape.reshape(v, {n_rows, n_patches_, heads, dk}), 1, 2);
            auto scores = tape.scale(tape.matmul(qh, tape.transpose(kh, 2, 3)), inv_sqrt_dk);
            auto att = tape.matmul(tape.softmax(scores), vh);
            auto merged =
                tape.reshape(tape.transpose(att, 1, 2), {n_rows, n_patches_, d});
            auto o = tape.add(tape.matmul(merged, layer.wo), layer.bo);
            h = tape.add(o, h);

            auto f = tape.layer_norm(h, layer.ff_norm_gamma, layer.ff_norm_beta);
            auto ff = tape.add(
                tape.matmul(tape.gelu(tape.add(tape.matmul(f, layer.w1), layer.b1)), layer.w2),
                layer.b2);
            h = tape.add(ff, h);
        }

        auto flat = tape.reshape(h, {n_rows, n_patches_ * d});
        auto out = tape.add(tape.matmul(flat, head_weight_), head_bias_);
        auto denormed = tape.add(tape.mul(out, rescale), shift);
        return rows_to_forecast(tape, denormed, batch, channels);
    }

    ParamList<T> parameters() const {
        ParamList<T> out;
        out.emplace_back("embed.weight", embed_weight_);
        out.emplace_back("embed.bias", embed_bias_);
        out.emplace_back("embed.pos", pos_embed_);
        for (std::size_t i = 0; i < layers_.size(); ++i) {
            const std::string prefix = "layer" + std::to_string(i) + ".";
            const Layer& l = layers_[i];
            out.emplace_back(prefix + "attn_norm.gamma", l.attn_norm_gamma);
            out.emplace_back(prefix + "attn_norm.beta", l.attn_norm_beta);
            out.emplace_back(prefix + "attn.wq", l.wq);
            out.emplace_back(prefix + "attn.bq", l.bq);
            out.emplace_back(prefix + "attn.wk", l.wk);
            out.emplace_back(prefix + "attn.wv", l.wv);
            out.emplace_back(prefix + "attn.bv", l.bv);
            out.emplace_back(prefix + "attn.wo", l.wo);
            out.emplace_back(prefix + "attn.bo", l.bo);
            out.emplace_back(prefix + "ff_norm.gamma", l.ff_norm_gamma);
            out.emplace_back(prefix + "ff_norm.beta", l.ff_norm_beta);
            out.emplace_back(prefix + "ff.w1", l.w1);
            out.emplace_back(prefix + "ff.b1", l.b1);
            out.emplace_back(prefix + "ff.w2", l.w2);
            out.emplace_back(prefix + "ff.b2", l.b2);
        }
        out.emplace_back("head.weight", head_weight_);
        out.emplace_back("head.bias", head_bias_);
        return out;
    }
    const PatchTSTConfig& config() const { return config_; }
    std::size_t n_patches() const { return n_patches_; }

private:
    struct Layer {
        Tensor<T> attn_norm_gamma, attn_norm_beta;
        Tensor<T> wq, bq, wk, wv, bv, wo, bo;
        Tensor<T> ff_norm_gamma, ff_norm_beta;
        Tensor<T> w1, b1, w2, b2;
    };

    PatchTSTConfig config_;
    std::size_t n_patches_ = 0;
    Tensor<T> embed_weight_, embed_bias_, pos_embed_;
    std::vector<Layer> layers_;
    Tensor<T> head_weight_, head_bias_;
};

}  // namespace gridcast::models
