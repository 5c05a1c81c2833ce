#pragma once

// Trainable two-projection module mapping a V x V connectivity matrix to a
// V x B token embedding, applied independently to each region row.

#include "braintune/rng.hpp"
#include "braintune/tensor.hpp"

#include <cstddef>

namespace braintune {

enum class AdapterActivation { relu, identity };

struct AdapterParams {
    Tensor w1; // regions x hidden
    Tensor b1; // hidden
    Tensor w2; // hidden x out_dim
    Tensor b2; // out_dim
    std::size_t regions = 0;
    std::size_t hidden = 0;
    std::size_t out_dim = 0;
    AdapterActivation activation = AdapterActivation::relu;

    void validate() const;
};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
AdapterParams init_adapter(std::size_t regions, std::size_t hidden, std::size_t out_dim, Rng& rng,
                           AdapterActivation activation = AdapterActivation::relu);

/// act(x * w1 + b1) * w2 + b2 for a V x V input; output V x out_dim.
Tensor adapter_forward(const Tensor& x, const AdapterParams& p);

} // namespace braintune
