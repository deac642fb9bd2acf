#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "gridcast/models/nn_util.hpp"
#include "gridcast/nn/tensor.hpp"

namespace gridcast::models {

struct TSMixerConfig {
    std::size_t input_len = 96;
    std::size_t horizon = 96;
    std::size_t channels = 1;
    std::size_t n_blocks = 2;
    std::size_t hidden_dim = 64;
};

/// Alternating time-mixing and feature-mixing MLP blocks with residual
/// connections, then a linear projection from input_len to horizon applied
/// per channel. The only model here that mixes across channels, so the
/// channel count is part of its configuration.
template <typename T>
class TSMixer {
public:
    using value_type = T;

    TSMixer(TSMixerConfig config, std::uint64_t seed) : config_(config) {
        if (config.channels == 0) throw ConfigError("TSMixer needs at least one channel");
        if (config.n_blocks == 0) throw ConfigError("TSMixer needs at least one block");
        std::mt19937_64 rng(seed);
        const std::size_t len = config.input_len, chans = config.channels;
        blocks_.reserve(config.n_blocks);
        for (std::size_t i = 0; i < config.n_blocks; ++i) {
            Block blk;
            blk.time_norm_gamma = Tensor<T>::full({chans}, T(1), true);
            blk.time_norm_beta = Tensor<T>::zeros({chans}, true);
            blk.time_weight = nn::uniform_init<T>({len, len}, len, rng);
            blk.time_bias = nn::uniform_init<T>({len}, len, rng);
            blk.feat_norm_gamma = Tensor<T>::full({chans}, T(1), true);
            blk.feat_norm_beta = Tensor<T>::zeros({chans}, true);
            blk.feat_weight_in = nn::uniform_init<T>({chans, config.hidden_dim}, chans, rng);
            blk.feat_bias_in = nn::uniform_init<T>({config.hidden_dim}, chans, rng);
            blk.feat_weight_out =
                nn::uniform_init<T>({config.hidden_dim, chans}, config.hidden_dim, rng);
            blk.feat_bias_out = nn::uniform_init<T>({chans}, config.hidden_dim, rng);
            blocks_.push_back(std::move(blk));
        }
        proj_weight_ = nn::uniform_init<T>({len, config.horizon}, len, rng);
        proj_bias_ = nn::uniform_init<T>({config.horizon}, len, rng);
    }

    Tensor<T> forward(Tape<T>& tape, const Tensor<T>& context) const {
        require_context_shape(context.shape(), config_.input_len);
        if (context.extent(2) != config_.channels) {
            throw nn::ShapeError("TSMixer was configured for " +
                                 std::to_string(config_.channels) + " channels, got " +
                                 std::to_string(context.extent(2)));
        }
        auto h = context;
        for (const Block& blk : blocks_) {
            // Time mixing: normalize over channels, map along the time axis.
            auto t = tape.layer_norm(h, blk.time_norm_gamma, blk.time_norm_beta);
            auto tt = tape.transpose(t, 1, 2);  // [B, C, L]
            auto tm = tape.relu(tape.add(tape.matmul(tt, blk.time_weight), blk.time_bias));
            h = tape.add(tape.transpose(tm, 1, 2), h);

            // Feature mixing: two-layer MLP across channels.
            auto f = tape.layer_norm(h, blk.feat_norm_gamma, blk.feat_norm_beta);
            auto u = tape.relu(tape.add(tape.matmul(f, blk.feat_weight_in), blk.feat_bias_in));
            auto v = tape.add(tape.matmul(u, blk.feat_weight_out), blk.feat_bias_out);
            h = tape.add(v, h);
        }
        auto swapped = tape.transpose(h, 1, 2);  // [B, C, L]
        auto projected = tape.add(tape.matmul(swapped, proj_weight_), proj_bias_);
        return tape.transpose(projected, 1, 2);  // [B, H, C]
    }

    ParamList<T> parameters() const {
        ParamList<T> out;
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            const std::string prefix = "block" + std::to_string(i) + ".";
            const Block& blk = blocks_[i];
            out.emplace_back(prefix + "time_norm.gamma", blk.time_norm_gamma);
            out.emplace_back(prefix + "time_norm.beta", blk.time_norm_beta);
            out.emplace_back(prefix + "time.weight", blk.time_weight);
            out.emplace_back(prefix + "time.bias", blk.time_bias);
            out.emplace_back(prefix + "feat_norm.gamma", blk.feat_norm_gamma);
            out.emplace_back(prefix + "feat_norm.beta", blk.feat_norm_beta);
            out.emplace_back(prefix + "feat_in.weight", blk.feat_weight_in);
            out.emplace_back(prefix + "feat_in.bias", blk.feat_bias_in);
            out.emplace_back(prefix + "feat_out.weight", blk.feat_weight_out);
            out.emplace_back(prefix + "feat_out.bias", blk.feat_bias_out);
        }
        out.emplace_back("proj.weight", proj_weight_);
        out.emplace_back("proj.bias", proj_bias_);
        return out;
    }
    const TSMixerConfig& config() const { return config_; }

private:
    struct Block {
        Tensor<T> time_norm_gamma, time_norm_beta;
        Tensor<T> time_weight, time_bias;
        Tensor<T> feat_norm_gamma, feat_norm_beta;
        Tensor<T> feat_weight_in, feat_bias_in;
        Tensor<T> feat_weight_out, feat_bias_out;
    };

    TSMixerConfig config_;
    std::vector<Block> blocks_;
    Tensor<T> proj_weight_, proj_bias_;
};

}  // namespace gridcast::models
