#include "braintune/trainer.hpp"

#include "braintune/errors.hpp"
#include "braintune/ops.hpp"
#include "braintune/optim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

namespace braintune {

void ModelConfig::validate() const {
    if (regions < 2) throw ConfigError("model: regions must be >= 2");
    if (adapter_hidden == 0) throw ConfigError("model: adapter_hidden must be positive");
    if (latent_dim == 0) throw ConfigError("model: latent_dim must be positive");
    encoder.validate();
}

std::vector<NamedTensor> ModelBundle::named_tensors() {
    std::vector<NamedTensor> out;
    out.push_back({"adapter.w1", adapter.w1});
    out.push_back({"adapter.b1", adapter.b1});
    out.push_back({"adapter.w2", adapter.w2});
    out.push_back({"adapter.b2", adapter.b2});
    encoder.for_each_tensor(
        [&out](const std::string& name, Tensor& t) { out.push_back({name, t}); });
    out.push_back({"heads.recon_w", heads.recon_w});
    out.push_back({"heads.cls_w", heads.cls_w});
    return out;
}

ModelBundle ModelBundle::clone() const {
    ModelBundle copy = *this;
    auto deep = [](Tensor& t) { t = t.clone(); };
    deep(copy.adapter.w1);
    deep(copy.adapter.b1);
    deep(copy.adapter.w2);
    deep(copy.adapter.b2);
    copy.encoder.for_each_tensor([&deep](const std::string&, Tensor& t) { deep(t); });
    deep(copy.heads.recon_w);
    deep(copy.heads.cls_w);
    return copy;
}

std::vector<std::uint8_t> ModelBundle::encoder_bytes() {
    std::vector<std::uint8_t> bytes;
    encoder.for_each_tensor([&bytes](const std::string&, Tensor& t) {
        const auto span = t.data();
        const std::size_t offset = bytes.size();
        bytes.resize(offset + span.size() * sizeof(double));
        std::memcpy(bytes.data() + offset, span.data(), span.size() * sizeof(double));
    });
    return bytes;
}

void ModelBundle::validate() {
    config.validate();
    adapter.validate();
    encoder.validate();
    heads.validate();
    if (adapter.regions != config.regions || adapter.out_dim != config.encoder.embed ||
        heads.embed != config.encoder.embed || heads.regions != config.regions ||
        heads.latent_dim != config.latent_dim)
        throw DimensionError("bundle: module shapes inconsistent with the model config");
}

ModelBundle init_bundle(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    ModelBundle bundle;
    bundle.config = config;
    bundle.rng_seed = seed;
    Rng rng(derive_seed(seed, 0xb0d1));
    bundle.adapter = init_adapter(config.regions, config.adapter_hidden, config.encoder.embed,
                                  rng, config.adapter_activation);
    bundle.encoder = init_encoder(config.encoder, rng);
    bundle.heads = init_heads(config.encoder.embed, config.regions, config.latent_dim, rng);
    return bundle;
}

Tensor encode_tokens(const Tensor& fc, const ModelBundle& bundle) {
    return encoder_forward(adapter_forward(fc, bundle.adapter), bundle.encoder);
}

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw ConfigError("train: lr must be positive");
    if (epochs == 0) throw ConfigError("train: epochs must be >= 1");
    if (batch_size == 0) throw ConfigError("train: batch_size must be >= 1");
    if (!(mask_fraction >= 0.0 && mask_fraction < 1.0))
        throw ConfigError("train: mask_fraction must lie in [0, 1)");
    weights.validate();
}

Tensor masked_view(const ConnectivityMatrix& fc, double fraction, Rng& rng) {
    const std::size_t v = fc.regions;
    std::vector<double> data = fc.values;
    const std::size_t n_pairs = v * (v - 1) / 2;
    const std::size_t n_mask =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_pairs)));
    if (n_mask > 0) {
        std::vector<std::size_t> pairs(n_pairs);
        std::iota(pairs.begin(), pairs.end(), 0);
        // partial Fisher-Yates: the first n_mask entries are the sample
        for (std::size_t i = 0; i < n_mask; ++i) {
            const std::size_t j = i + rng.index(n_pairs - i);
            std::swap(pairs[i], pairs[j]);
        }
        for (std::size_t i = 0; i < n_mask; ++i) {
            // decode the flat upper-triangle index
            std::size_t p = pairs[i];
            std::size_t row = 0;
            std::size_t row_len = v - 1;
            while (p >= row_len) {
                p -= row_len;
                --row_len;
                ++row;
            }
            const std::size_t col = row + 1 + p;
            data[row * v + col] = 0.0;
            data[col * v + row] = 0.0;
        }
    }
    return Tensor::from_data({v, v}, std::move(data), false);
}

namespace {

struct BatchLosses {
    Tensor contrastive;
    Tensor reconstruction;
};

// builds the forward graph of one batch and returns the two loss scalars
BatchLosses batch_losses(std::span<const ConnectivityMatrix> cohort,
                         std::span<const std::size_t> batch, const ModelBundle& bundle,
                         const TrainConfig& config, Rng& mask_rng) {
    std::vector<Tensor> queries, keys, recon_losses;
    queries.reserve(batch.size());
    keys.reserve(batch.size());
    recon_losses.reserve(batch.size());
    for (std::size_t idx : batch) {
        const ConnectivityMatrix& fc = cohort[idx];
        Tensor view_a = masked_view(fc, config.mask_fraction, mask_rng);
        Tensor view_b = masked_view(fc, config.mask_fraction, mask_rng);
        Tensor tokens_a = encode_tokens(view_a, bundle);
        Tensor tokens_b = encode_tokens(view_b, bundle);
        queries.push_back(cls_forward(tokens_a, bundle.heads));
        keys.push_back(cls_forward(tokens_b, bundle.heads));
        recon_losses.push_back(
            mse_loss(recon_forward(tokens_a, bundle.heads), fc.to_tensor(false)));
    }
    Tensor recon = recon_losses.front();
    for (std::size_t i = 1; i < recon_losses.size(); ++i) recon = add(recon, recon_losses[i]);
    recon = mul_scalar(recon, 1.0 / static_cast<double>(recon_losses.size()));

    Tensor contrastive;
    if (batch.size() < 2) {
        // a singleton batch has no in-batch negatives; the contrastive term
        // degenerates to a constant
        contrastive = Tensor::scalar(0.0, false);
    } else {
        std::vector<Tensor> terms;
        terms.reserve(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            std::vector<Tensor> negatives;
            negatives.reserve(batch.size() - 1);
            for (std::size_t j = 0; j < batch.size(); ++j)
                if (j != i) negatives.push_back(keys[j]);
            terms.push_back(infonce_loss(queries[i], keys[i], negatives, config.weights.tau));
        }
        contrastive = terms.front();
        for (std::size_t i = 1; i < terms.size(); ++i) contrastive = add(contrastive, terms[i]);
        contrastive = mul_scalar(contrastive, 1.0 / static_cast<double>(terms.size()));
    }
    return {contrastive, recon};
}

ModelBundle run_training(std::span<const ConnectivityMatrix> cohort, const ModelBundle& input,
                         const TrainConfig& config, const EpochHook& hook) {
    config.validate();
    if (cohort.empty()) throw DegenerateInputError("training: cohort is empty");
    ModelBundle bundle = input.clone();
    bundle.validate();
    for (const auto& fc : cohort)
        if (fc.regions != bundle.config.regions)
            throw DimensionError("training: subject '" + fc.subject_id + "' has " +
                                 std::to_string(fc.regions) + " regions, model expects " +
                                 std::to_string(bundle.config.regions));

    std::vector<Tensor> params;
    for (auto& nt : bundle.named_tensors()) params.push_back(nt.tensor);
    AdamConfig adam_config;
    adam_config.lr = config.lr;
    adam_config.weight_decay = config.weight_decay;
    Adam optimizer(params, adam_config);

    std::vector<std::size_t> order(cohort.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng shuffle_rng(derive_seed(config.seed, 0x5f17, epoch));
        Rng mask_rng(derive_seed(config.seed, 0xa51c, epoch));
        shuffle_rng.shuffle(order);

        EpochStats stats;
        stats.epoch = epoch;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            std::span<const std::size_t> batch(order.data() + start, end - start);

            GradTape tape;
            BatchLosses losses;
            try {
                losses = batch_losses(cohort, batch, bundle, config, mask_rng);
            } catch (const DegenerateInputError& e) {
                // inputs were validated up front; a degenerate state here is
                // numerical divergence (e.g. an embedding collapsing to zero)
                throw NumericError("training: degenerate state at epoch " +
                                   std::to_string(epoch) + ": " + e.what());
            }
            Tensor total = combined_loss(losses.contrastive, losses.reconstruction,
                                         config.weights);
            tape.backward(total);
            optimizer.step();
            optimizer.zero_grad();

            const double w = static_cast<double>(batch.size());
            stats.contrastive += losses.contrastive.value() * w;
            stats.reconstruction += losses.reconstruction.value() * w;
            stats.combined += total.value() * w;
            seen += batch.size();
        }
        stats.contrastive /= static_cast<double>(seen);
        stats.reconstruction /= static_cast<double>(seen);
        stats.combined /= static_cast<double>(seen);
        if (!std::isfinite(stats.combined) || !std::isfinite(stats.contrastive) ||
            !std::isfinite(stats.reconstruction))
            throw NumericError("training: non-finite loss at epoch " + std::to_string(epoch));
        if (hook) hook(stats);
    }
    return bundle;
}

} // namespace

ModelBundle pretrain(std::span<const ConnectivityMatrix> cohort, const ModelBundle& bundle,
                     const TrainConfig& config, const EpochHook& hook) {
    if (config.phase != TrainPhase::pretrain)
        throw ConfigError("pretrain: config phase must be 'pretrain'");
    if (bundle.encoder.frozen)
        throw ConfigError("pretrain: all parameters must be trainable (encoder is frozen)");
    return run_training(cohort, bundle, config, hook);
}

ModelBundle finetune(std::span<const ConnectivityMatrix> cohort, const ModelBundle& bundle,
                     const TrainConfig& config, const EpochHook& hook) {
    if (config.phase != TrainPhase::finetune)
        throw ConfigError("finetune: config phase must be 'finetune'");
    if (!bundle.encoder.frozen)
        throw ConfigError("finetune: the encoder must be frozen first");
    return run_training(cohort, bundle, config, hook);
}

} // namespace braintune
