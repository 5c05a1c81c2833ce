#include "braintune/encoder.hpp"
#include "braintune/errors.hpp"
#include "braintune/ops.hpp"

#include "support/gradcheck.hpp"

#include <doctest.h>

#include <cmath>

using namespace braintune;
using namespace braintune::testing;

TEST_CASE("zero query/key weights give uniform attention = column mean of values") {
    Rng rng(60);
    const std::size_t v = 4, b = 6, dk = 3;
    Tensor x = random_tensor({v, b}, rng, -1, 1, false);
    Tensor wq = Tensor::zeros({b, dk});
    Tensor wk = Tensor::zeros({b, dk});
    Tensor wv = random_tensor({b, dk}, rng, -1, 1, false);
    Tensor out = attention_head(x, wq, wk, wv);
    Tensor vals = matmul(x, wv);
    Tensor col_mean = mean_rows(vals);
    for (std::size_t i = 0; i < v; ++i)
        for (std::size_t j = 0; j < dk; ++j)
            CHECK(out.at(i, j) == doctest::Approx(col_mean.at(0, j)).epsilon(1e-12));
}

TEST_CASE("V=2, d_k=1 attention head matches scalar arithmetic") {
    // x = [[1],[2]], wq = [2], wk = [1], wv = [3]
    Tensor x = Tensor::from_data({2, 1}, {1, 2});
    Tensor wq = Tensor::from_data({1, 1}, {2});
    Tensor wk = Tensor::from_data({1, 1}, {1});
    Tensor wv = Tensor::from_data({1, 1}, {3});
    // q = [2,4], k = [1,2], vv = [3,6]; scores = q k^T / 1
    // row 0: [2,4] -> softmax = [e2, e4]/(e2+e4); out0 = p0*3 + p1*6
    // row 1: [4,8] -> softmax = [e4, e8]/(e4+e8); out1 = p0*3 + p1*6
    const double p01 = std::exp(2.0) / (std::exp(2.0) + std::exp(4.0));
    const double p11 = std::exp(4.0) / (std::exp(4.0) + std::exp(8.0));
    Tensor out = attention_head(x, wq, wk, wv);
    CHECK(out.at(0, 0) == doctest::Approx(p01 * 3.0 + (1 - p01) * 6.0).epsilon(1e-12));
    CHECK(out.at(1, 0) == doctest::Approx(p11 * 3.0 + (1 - p11) * 6.0).epsilon(1e-12));
}

TEST_CASE("attention weight rows sum to 1 on random inputs") {
    Rng rng(61);
    const std::size_t v = 5, b = 4, dk = 2;
    for (int trial = 0; trial < 20; ++trial) {
        Tensor x = random_tensor({v, b}, rng, -2, 2, false);
        Tensor wq = random_tensor({b, dk}, rng, -1, 1, false);
        Tensor wk = random_tensor({b, dk}, rng, -1, 1, false);
        Tensor scores = mul_scalar(matmul(matmul(x, wq), transpose(matmul(x, wk))),
                                   1.0 / std::sqrt(double(dk)));
        Tensor weights = softmax_rows(scores);
        for (std::size_t i = 0; i < v; ++i) {
            double row = 0.0;
            for (std::size_t j = 0; j < v; ++j) row += weights.at(i, j);
            CHECK(std::abs(row - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("depth 0 encoder is the identity") {
    Rng rng(62);
    EncoderConfig cfg;
    cfg.depth = 0;
    cfg.heads = 2;
    cfg.embed = 4;
    EncoderParams params = init_encoder(cfg, rng);
    Tensor x = random_tensor({3, 4}, rng, -1, 1, false);
    Tensor y = encoder_forward(x, params);
    for (std::size_t i = 0; i < x.numel(); ++i) CHECK(y.data()[i] == x.data()[i]);
}

TEST_CASE("encoder preserves V x B shape in all modes") {
    Rng rng(63);
    for (bool use_ffn : {true, false}) {
        for (bool use_norm : {true, false}) {
            EncoderConfig cfg;
            cfg.depth = 2;
            cfg.heads = 2;
            cfg.embed = 6;
            cfg.ffn_hidden = 5;
            cfg.use_ffn = use_ffn;
            cfg.use_norm = use_norm;
            EncoderParams params = init_encoder(cfg, rng);
            Tensor x = random_tensor({5, 6}, rng, -1, 1, false);
            Tensor y = encoder_forward(x, params);
            CHECK(y.rows() == 5);
            CHECK(y.cols() == 6);
        }
    }
}

TEST_CASE("permuting token rows permutes output rows identically") {
    Rng rng(64);
    EncoderConfig cfg;
    cfg.depth = 2;
    cfg.heads = 2;
    cfg.embed = 6;
    cfg.ffn_hidden = 8;
    EncoderParams params = init_encoder(cfg, rng);
    const std::size_t v = 5;
    Tensor x = random_tensor({v, 6}, rng, -1, 1, false);
    const std::size_t perm[v] = {3, 0, 4, 1, 2};
    Tensor xp = Tensor::zeros({v, 6});
    for (std::size_t i = 0; i < v; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            xp.mutable_data()[i * 6 + j] = x.at(perm[i], j);
    Tensor y = encoder_forward(x, params);
    Tensor yp = encoder_forward(xp, params);
    for (std::size_t i = 0; i < v; ++i)
        for (std::size_t j = 0; j < 6; ++j)
            CHECK(std::abs(yp.at(i, j) - y.at(perm[i], j)) < 1e-9);
}

TEST_CASE("encoder gradient w.r.t. input matches finite differences (D=1,H=2,B=4,V=3)") {
    Rng rng(65);
    EncoderConfig cfg;
    cfg.depth = 1;
    cfg.heads = 2;
    cfg.embed = 4;
    cfg.ffn_hidden = 6;
    EncoderParams params = init_encoder(cfg, rng);
    Tensor x = random_tensor({3, 4}, rng, -1.0, 1.0, true);
    auto fn = [x, params]() { return braintune::sum(encoder_forward(x, params)); };
    auto report = gradcheck(fn, {x}, 1e-5, 1e-4);
    CHECK_MESSAGE(report.ok, "worst analytic=", report.worst_analytic,
                  " numeric=", report.worst_numeric);
}

TEST_CASE("frozen encoder parameters receive no gradients and keep their bytes") {
    Rng rng(66);
    EncoderConfig cfg;
    cfg.depth = 1;
    cfg.heads = 2;
    cfg.embed = 4;
    EncoderParams params = init_encoder(cfg, rng);
    params.set_frozen(true);
    std::vector<double> before = {params.layers[0].wq[0].data().begin(),
                                  params.layers[0].wq[0].data().end()};
    Tensor x = random_tensor({3, 4}, rng, -1, 1, true);
    GradTape tape;
    Tensor loss = braintune::sum(encoder_forward(x, params));
    tape.backward(loss);
    params.for_each_tensor([](const std::string&, Tensor& t) {
        CHECK_FALSE(t.requires_grad());
        CHECK_FALSE(t.has_grad());
    });
    CHECK(x.has_grad()); // input gradient still flows through the frozen weights
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(params.layers[0].wq[0].data()[i] == before[i]);
}

TEST_CASE("config validation rejects embed not divisible by heads") {
    EncoderConfig cfg;
    cfg.heads = 3;
    cfg.embed = 8;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
