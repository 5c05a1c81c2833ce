#include "braintune/encoder.hpp"

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

void EncoderConfig::validate() const {
    if (heads == 0) throw ConfigError("encoder: heads must be positive");
    if (embed == 0 || embed % heads != 0)
        throw ConfigError("encoder: embed (" + std::to_string(embed) +
                          ") must be a positive multiple of heads (" + std::to_string(heads) + ")");
    if (use_ffn && ffn_hidden == 0) throw ConfigError("encoder: ffn_hidden must be positive");
}

void EncoderParams::set_frozen(bool value) {
    frozen = value;
    for_each_tensor([value](const std::string&, Tensor& t) { t.set_requires_grad(!value); });
}

void EncoderParams::for_each_tensor(const std::function<void(const std::string&, Tensor&)>& fn) {
    for (std::size_t d = 0; d < layers.size(); ++d) {
        EncoderLayerParams& layer = layers[d];
        const std::string prefix = "encoder.layer" + std::to_string(d) + ".";
        for (std::size_t h = 0; h < layer.wq.size(); ++h) {
            const std::string head = prefix + "head" + std::to_string(h) + ".";
            fn(head + "wq", layer.wq[h]);
            fn(head + "wk", layer.wk[h]);
            fn(head + "wv", layer.wv[h]);
        }
        fn(prefix + "wo", layer.wo);
        if (config.use_ffn) {
            fn(prefix + "ffn.w1", layer.ffn_w1);
            fn(prefix + "ffn.b1", layer.ffn_b1);
            fn(prefix + "ffn.w2", layer.ffn_w2);
            fn(prefix + "ffn.b2", layer.ffn_b2);
        }
        if (config.use_norm) {
            fn(prefix + "ln1.gain", layer.ln1_gain);
            fn(prefix + "ln1.shift", layer.ln1_shift);
            if (config.use_ffn) {
                fn(prefix + "ln2.gain", layer.ln2_gain);
                fn(prefix + "ln2.shift", layer.ln2_shift);
            }
        }
    }
}

void EncoderParams::validate() const {
    config.validate();
    if (layers.size() != config.depth)
        throw DimensionError("encoder: layer count does not match configured depth");
    const std::size_t b = config.embed;
    const std::size_t dk = config.head_dim();
    for (const auto& layer : layers) {
        if (layer.wq.size() != config.heads || layer.wk.size() != config.heads ||
            layer.wv.size() != config.heads)
            throw DimensionError("encoder: head count mismatch in layer parameters");
        for (std::size_t h = 0; h < config.heads; ++h) {
            if (layer.wq[h].shape() != std::vector<std::size_t>{b, dk} ||
                layer.wk[h].shape() != std::vector<std::size_t>{b, dk} ||
                layer.wv[h].shape() != std::vector<std::size_t>{b, dk})
                throw DimensionError("encoder: head projection shapes inconsistent");
        }
        if (layer.wo.shape() != std::vector<std::size_t>{b, b})
            throw DimensionError("encoder: output projection must be embed x embed");
    }
}

EncoderParams init_encoder(const EncoderConfig& config, Rng& rng) {
    config.validate();
    EncoderParams params;
    params.config = config;
    params.layers.resize(config.depth);
    const std::size_t b = config.embed;
    const std::size_t dk = config.head_dim();
    for (auto& layer : params.layers) {
        layer.wq.reserve(config.heads);
        layer.wk.reserve(config.heads);
        layer.wv.reserve(config.heads);
        for (std::size_t h = 0; h < config.heads; ++h) {
            layer.wq.push_back(uniform_init({b, dk}, b, rng));
            layer.wk.push_back(uniform_init({b, dk}, b, rng));
            layer.wv.push_back(uniform_init({b, dk}, b, rng));
        }
        layer.wo = uniform_init({b, b}, b, rng);
        if (config.use_ffn) {
            layer.ffn_w1 = uniform_init({b, config.ffn_hidden}, b, rng);
            layer.ffn_b1 = Tensor::zeros({config.ffn_hidden}, true);
            layer.ffn_w2 = uniform_init({config.ffn_hidden, b}, config.ffn_hidden, rng);
            layer.ffn_b2 = Tensor::zeros({b}, true);
        }
        if (config.use_norm) {
            layer.ln1_gain = Tensor::full({b}, 1.0, true);
            layer.ln1_shift = Tensor::zeros({b}, true);
            if (config.use_ffn) {
                layer.ln2_gain = Tensor::full({b}, 1.0, true);
                layer.ln2_shift = Tensor::zeros({b}, true);
            }
        }
    }
    return params;
}

Tensor attention_head(const Tensor& x, const Tensor& wq, const Tensor& wk, const Tensor& wv) {
    Tensor q = matmul(x, wq);
    Tensor k = matmul(x, wk);
    Tensor v = matmul(x, wv);
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(wq.cols()));
    Tensor scores = mul_scalar(matmul(q, transpose(k)), inv_sqrt_dk);
    return matmul(softmax_rows(scores), v);
}

Tensor encoder_forward(const Tensor& x, const EncoderParams& params) {
    params.validate();
    if (x.ndim() != 2 || x.cols() != params.config.embed)
        throw DimensionError("encoder_forward: input " + x.shape_str() + " does not match embed " +
                             std::to_string(params.config.embed));
    Tensor h = x;
    for (const auto& layer : params.layers) {
        std::vector<Tensor> heads;
        heads.reserve(layer.wq.size());
        for (std::size_t i = 0; i < layer.wq.size(); ++i)
            heads.push_back(attention_head(h, layer.wq[i], layer.wk[i], layer.wv[i]));
        Tensor attn = matmul(concat_lastdim(heads), layer.wo);
        Tensor y = params.config.use_norm
                       ? layer_norm_rows(add(h, attn), layer.ln1_gain, layer.ln1_shift)
                       : attn;
        if (params.config.use_ffn) {
            Tensor f = add_rowvec(
                matmul(relu(add_rowvec(matmul(y, layer.ffn_w1), layer.ffn_b1)), layer.ffn_w2),
                layer.ffn_b2);
            y = params.config.use_norm
                    ? layer_norm_rows(add(y, f), layer.ln2_gain, layer.ln2_shift)
                    : f;
        }
        h = y;
    }
    return h;
}

} // namespace braintune
