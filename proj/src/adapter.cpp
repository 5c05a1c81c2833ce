#include "braintune/adapter.hpp"

#include "braintune/errors.hpp"
#include "braintune/ops.hpp"

#include <cmath>

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

void AdapterParams::validate() const {
    if (regions == 0 || hidden == 0 || out_dim == 0)
        throw ConfigError("adapter: regions/hidden/out_dim must all be positive");
    if (w1.shape() != std::vector<std::size_t>{regions, hidden} ||
        b1.shape() != std::vector<std::size_t>{hidden} ||
        w2.shape() != std::vector<std::size_t>{hidden, out_dim} ||
        b2.shape() != std::vector<std::size_t>{out_dim})
        throw DimensionError("adapter: parameter shapes inconsistent with configured sizes");
}

AdapterParams init_adapter(std::size_t regions, std::size_t hidden, std::size_t out_dim, Rng& rng,
                           AdapterActivation activation) {
    AdapterParams p;
    p.regions = regions;
    p.hidden = hidden;
    p.out_dim = out_dim;
    p.activation = activation;
    p.w1 = uniform_init({regions, hidden}, regions, rng);
    p.b1 = Tensor::zeros({hidden}, true);
    p.w2 = uniform_init({hidden, out_dim}, hidden, rng);
    p.b2 = Tensor::zeros({out_dim}, true);
    return p;
}

Tensor adapter_forward(const Tensor& x, const AdapterParams& p) {
    p.validate();
    if (x.ndim() != 2 || x.rows() != p.regions || x.cols() != p.regions)
        throw DimensionError("adapter_forward: input " + x.shape_str() + " is not " +
                             std::to_string(p.regions) + " x " + std::to_string(p.regions));
    Tensor h = add_rowvec(matmul(x, p.w1), p.b1);
    if (p.activation == AdapterActivation::relu) h = relu(h);
    return add_rowvec(matmul(h, p.w2), p.b2);
}

} // namespace braintune
