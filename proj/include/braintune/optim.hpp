#pragma once

// Adam with decoupled weight decay. Frozen parameters (requires_grad off)
// keep their state slots but are never touched by step().

#include "braintune/tensor.hpp"

#include <cstddef>
#include <vector>

namespace braintune {

struct AdamConfig {
    double lr = 3e-4;
    double weight_decay = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam(std::vector<Tensor> params, AdamConfig config);

    /// Decoupled weight decay (p -= lr*wd*p) followed by the bias-corrected
    /// Adam update. Throws ContractError when a trainable parameter has no
    /// gradient buffer.
    void step();

    /// Zero-fills (allocating if needed) every trainable parameter's
    /// gradient.
    void zero_grad();

    std::size_t step_count() const { return t_; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    AdamConfig config_;
    std::size_t t_ = 0;
};

} // namespace braintune
