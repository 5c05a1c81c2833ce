#pragma once

// Reconstruction and classification heads plus the training losses: MSE for
// reconstruction, InfoNCE for the contrastive objective, and their weighted
// combination.

#include "braintune/rng.hpp"
#include "braintune/tensor.hpp"

#include <cstddef>
#include <span>

namespace braintune {

struct HeadParams {
    Tensor recon_w; // embed x regions: maps V x B tokens back to V x V
    Tensor cls_w;   // embed x latent_dim
    std::size_t embed = 0;
    std::size_t regions = 0;
    std::size_t latent_dim = 0;

    void validate() const;
};

HeadParams init_heads(std::size_t embed, std::size_t regions, std::size_t latent_dim, Rng& rng);

/// tokens (V x B) * recon_w -> V x V reconstruction.
Tensor recon_forward(const Tensor& tokens, const HeadParams& heads);

/// Mean-pool tokens, project to latent_dim, L2-normalize. Returns 1 x E.
Tensor cls_forward(const Tensor& tokens, const HeadParams& heads);

struct LossWeights {
    double lambda_c = 0.2;
    double lambda_r = 5.0;
    double tau = 0.07; // InfoNCE temperature

    void validate() const; // lambdas >= 0, not both zero, tau > 0
};

/// Mean squared error over all elements.
Tensor mse_loss(const Tensor& pred, const Tensor& target);

/// -log( exp(sim(q,k+)/tau) / sum_j exp(sim(q,k_j)/tau) ) with the sum over
/// the positive plus all negatives; sim is cosine similarity.
Tensor infonce_loss(const Tensor& query, const Tensor& positive,
                    std::span<const Tensor> negatives, double tau);

/// lambda_c * contrastive + lambda_r * reconstruction.
Tensor combined_loss(const Tensor& contrastive, const Tensor& reconstruction,
                     const LossWeights& weights);

} // namespace braintune
