#pragma once

// Model bundle and the two optimization loops: self-supervised pretraining
// (everything trainable) and frozen-encoder fine-tuning. Both phases share
// the same objective: reconstruction MSE of the original connectivity matrix
// plus an InfoNCE term over two stochastically masked views per subject,
// with in-batch negatives.

#include "braintune/adapter.hpp"
#include "braintune/connectome.hpp"
#include "braintune/encoder.hpp"
#include "braintune/objectives.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace braintune {

struct ModelConfig {
    std::size_t regions = kAtlasRegions; // overridden by the dataset's V
    std::size_t adapter_hidden = 1024;
    std::size_t latent_dim = 32;
    AdapterActivation adapter_activation = AdapterActivation::relu;
    EncoderConfig encoder; // embed doubles as the adapter output width B

    void validate() const;
};

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

struct ModelBundle {
    ModelConfig config;
    AdapterParams adapter;
    EncoderParams encoder;
    HeadParams heads;
    std::uint64_t rng_seed = 0;

    /// Every parameter in canonical order (adapter, encoder layers, heads).
    /// The order fixes serialization, hashing and optimizer traversal.
    std::vector<NamedTensor> named_tensors();

    /// Deep copy with fresh storage.
    ModelBundle clone() const;

    void set_encoder_frozen(bool frozen) { encoder.set_frozen(frozen); }

    /// Raw little-endian bytes of the encoder tensors in canonical order.
    std::vector<std::uint8_t> encoder_bytes();

    void validate();
};

ModelBundle init_bundle(const ModelConfig& config, std::uint64_t seed);

/// adapter -> encoder, producing the V x B token embedding.
Tensor encode_tokens(const Tensor& fc, const ModelBundle& bundle);

enum class TrainPhase { pretrain, finetune };

struct TrainConfig {
    TrainPhase phase = TrainPhase::finetune;
    double lr = 3e-4;
    double weight_decay = 5e-5;
    std::size_t epochs = 500;
    std::size_t batch_size = 16;
    LossWeights weights{};
    double mask_fraction = 0.1; // off-diagonal fraction zeroed per view
    std::uint64_t seed = 42;

    void validate() const;
};

struct EpochStats {
    std::size_t epoch = 0; // 1-based
    double contrastive = 0.0;
    double reconstruction = 0.0;
    double combined = 0.0;
};

using EpochHook = std::function<void(const EpochStats&)>;

/// Joint self-supervised training of adapter, encoder and heads. Requires an
/// unfrozen encoder. Returns the trained copy; the input bundle is untouched.
ModelBundle pretrain(std::span<const ConnectivityMatrix> cohort, const ModelBundle& bundle,
                     const TrainConfig& config, const EpochHook& hook = {});

/// Adapter + head training against a frozen encoder. Throws ConfigError when
/// the encoder is not frozen.
ModelBundle finetune(std::span<const ConnectivityMatrix> cohort, const ModelBundle& bundle,
                     const TrainConfig& config, const EpochHook& hook = {});

/// Symmetric random mask: zeroes `fraction` of the off-diagonal pairs.
/// Exposed for tests; the trainer applies it to each view.
Tensor masked_view(const ConnectivityMatrix& fc, double fraction, Rng& rng);

} // namespace braintune
