#include "braintune/objectives.hpp"

#include "braintune/errors.hpp"
#include "braintune/ops.hpp"

#include <cmath>
#include <vector>

namespace braintune {

namespace {

Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    std::vector<double> data(n);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : data) v = rng.uniform(-bound, bound);
    return Tensor::from_data(std::move(shape), std::move(data), true);
}

} // namespace

void HeadParams::validate() const {
    if (embed == 0 || regions == 0 || latent_dim == 0)
        throw ConfigError("heads: embed/regions/latent_dim must all be positive");
    if (recon_w.shape() != std::vector<std::size_t>{embed, regions} ||
        cls_w.shape() != std::vector<std::size_t>{embed, latent_dim})
        throw DimensionError("heads: parameter shapes inconsistent with configured sizes");
}

HeadParams init_heads(std::size_t embed, std::size_t regions, std::size_t latent_dim, Rng& rng) {
    HeadParams heads;
    heads.embed = embed;
    heads.regions = regions;
    heads.latent_dim = latent_dim;
    heads.recon_w = uniform_init({embed, regions}, embed, rng);
    heads.cls_w = uniform_init({embed, latent_dim}, embed, rng);
    return heads;
}

Tensor recon_forward(const Tensor& tokens, const HeadParams& heads) {
    heads.validate();
    return matmul(tokens, heads.recon_w);
}

Tensor cls_forward(const Tensor& tokens, const HeadParams& heads) {
    heads.validate();
    return l2_normalize(matmul(mean_rows(tokens), heads.cls_w));
}

void LossWeights::validate() const {
    if (lambda_c < 0.0 || lambda_r < 0.0)
        throw ConfigError("loss weights: lambda_c and lambda_r must be nonnegative");
    if (lambda_c == 0.0 && lambda_r == 0.0)
        throw ConfigError("loss weights: lambda_c and lambda_r cannot both be zero");
    if (!(tau > 0.0)) throw ConfigError("loss weights: tau must be positive");
}

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
    if (pred.shape() != target.shape())
        throw DimensionError("mse_loss: shapes disagree: " + pred.shape_str() + " vs " +
                             target.shape_str());
    Tensor diff = sub(pred, target);
    return mul_scalar(sum(square(diff)), 1.0 / static_cast<double>(pred.numel()));
}

Tensor infonce_loss(const Tensor& query, const Tensor& positive,
                    std::span<const Tensor> negatives, double tau) {
    if (!(tau > 0.0)) throw ConfigError("infonce_loss: tau must be positive");
    if (negatives.empty())
        throw ContractError("infonce_loss: at least one negative sample is required");
    std::vector<Tensor> sims;
    sims.reserve(negatives.size() + 1);
    sims.push_back(cosine_similarity(query, positive));
    for (const Tensor& neg : negatives) sims.push_back(cosine_similarity(query, neg));
    Tensor logits = reshape(mul_scalar(stack_scalars(sims), 1.0 / tau), {1, sims.size()});
    Tensor probs = softmax_rows(logits);
    return mul_scalar(log(select(probs, 0)), -1.0);
}

Tensor combined_loss(const Tensor& contrastive, const Tensor& reconstruction,
                     const LossWeights& weights) {
    weights.validate();
    if (contrastive.numel() != 1 || reconstruction.numel() != 1)
        throw DimensionError("combined_loss: inputs must be scalars");
    return add(mul_scalar(contrastive, weights.lambda_c),
               mul_scalar(reconstruction, weights.lambda_r));
}

} // namespace braintune
