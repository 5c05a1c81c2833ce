#pragma once

// Multi-head self-attention encoder over region tokens. Each layer runs H
// attention heads on the previous layer's output, concatenates them, applies
// an output projection, and (unless disabled) a residual + layer-norm and an
// FFN sub-block. No positional encoding: the encoder is permutation
// equivariant over tokens.

#include "braintune/rng.hpp"
#include "braintune/tensor.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace braintune {

struct EncoderConfig {
    std::size_t depth = 2;
    std::size_t heads = 4;
    std::size_t embed = 64;      // token width B; must be divisible by heads
    std::size_t ffn_hidden = 256;
    bool use_ffn = true;
    bool use_norm = true; // residual + layer norm around each sub-block

    std::size_t head_dim() const { return embed / heads; }
    void validate() const;
};

struct EncoderLayerParams {
    std::vector<Tensor> wq, wk, wv; // one (embed x head_dim) each per head
    Tensor wo;                      // embed x embed
    Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    Tensor ln1_gain, ln1_shift, ln2_gain, ln2_shift;
};

struct EncoderParams {
    EncoderConfig config;
    std::vector<EncoderLayerParams> layers;
    bool frozen = false;

    /// Applies requires_grad to every tensor; frozen params receive no
    /// gradients and stay bit-identical through training.
    void set_frozen(bool frozen);

    /// Visits every tensor in canonical (serialization) order.
    void for_each_tensor(const std::function<void(const std::string&, Tensor&)>& fn);

    void validate() const;
};

EncoderParams init_encoder(const EncoderConfig& config, Rng& rng);

/// softmax(Q K^T / sqrt(d_k)) V for one head, Q = x wq etc.
Tensor attention_head(const Tensor& x, const Tensor& wq, const Tensor& wk, const Tensor& wv);

/// V x embed in, V x embed out; depth 0 returns the input unchanged.
Tensor encoder_forward(const Tensor& x, const EncoderParams& params);

} // namespace braintune
