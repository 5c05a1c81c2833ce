#include "braintune/optim.hpp"

#include "braintune/errors.hpp"
#include "braintune/kernels.hpp"

#include <cmath>
#include <string>

namespace braintune {

Adam::Adam(std::vector<Tensor> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

void Adam::zero_grad() {
    for (Tensor& p : params_) p.zero_grad();
}

void Adam::step() {
    ++t_;
    const double ibc1 = 1.0 / (1.0 - std::pow(config_.beta1, static_cast<double>(t_)));
    const double ibc2 = 1.0 / (1.0 - std::pow(config_.beta2, static_cast<double>(t_)));
    const auto& k = kernels::active();
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Tensor& p = params_[i];
        if (!p.requires_grad()) continue; // frozen
        if (!p.has_grad())
            throw ContractError("adam: missing gradient on trainable parameter " +
                                std::to_string(i));
        auto data = p.mutable_data();
        if (config_.weight_decay != 0.0)
            k.scale(data.data(), 1.0 - config_.lr * config_.weight_decay, data.data(),
                    data.size());
        k.adam_update(data.data(), p.grad_span().data(), m_[i].data(), v_[i].data(), data.size(),
                      config_.lr, config_.beta1, config_.beta2, config_.eps, ibc1, ibc2);
    }
}

} // namespace braintune
