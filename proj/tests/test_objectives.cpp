#include "braintune/errors.hpp"
#include "braintune/objectives.hpp"
#include "braintune/ops.hpp"

#include "support/gradcheck.hpp"

#include <doctest.h>

#include <cmath>

using namespace braintune;
using namespace braintune::testing;

TEST_CASE("mse trivial and hand values") {
    Tensor a = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    CHECK(mse_loss(a, a).value() == 0.0);

    Tensor pred = Tensor::from_data({2}, {0, 0});
    Tensor target = Tensor::from_data({2}, {1, 3});
    CHECK(mse_loss(pred, target).value() == doctest::Approx(5.0).epsilon(1e-12)); // (1+9)/2

    CHECK_THROWS_AS(mse_loss(a, pred), DimensionError);
}

TEST_CASE("mse is nonnegative and zero only at equality") {
    Rng rng(70);
    for (int trial = 0; trial < 30; ++trial) {
        Tensor p = random_tensor({3, 3}, rng, -2, 2, false);
        Tensor t = random_tensor({3, 3}, rng, -2, 2, false);
        const double l = mse_loss(p, t).value();
        CHECK(l >= 0.0);
        bool equal = true;
        for (std::size_t i = 0; i < p.numel(); ++i) equal &= p.data()[i] == t.data()[i];
        if (!equal) CHECK(l > 0.0);
    }
}

TEST_CASE("mse gradient is 2(pred-target)/N, cross-checked by finite differences") {
    Rng rng(71);
    Tensor pred = random_tensor({2, 3}, rng);
    Tensor target = random_tensor({2, 3}, rng, -1, 1, false);
    {
        GradTape tape;
        Tensor loss = mse_loss(pred, target);
        tape.backward(loss);
        const double n = 6.0;
        for (std::size_t i = 0; i < pred.numel(); ++i) {
            const double expect = 2.0 * (pred.data()[i] - target.data()[i]) / n;
            CHECK(pred.grad()[i] == doctest::Approx(expect).epsilon(1e-10));
        }
    }
    pred.zero_grad();
    auto fn = [pred, target]() { return mse_loss(pred, target); };
    CHECK(gradcheck(fn, {pred}).ok);
}

namespace {

// q of unit norm plus M negatives orthogonal to both q and each other
std::vector<Tensor> orthogonal_negatives(std::size_t m, std::size_t dim) {
    std::vector<Tensor> negs;
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> v(dim, 0.0);
        v[j + 1] = 1.0;
        negs.push_back(Tensor::from_data({dim}, std::move(v)));
    }
    return negs;
}

} // namespace

TEST_CASE("infonce closed forms: orthogonal negatives and uniform candidates") {
    for (std::size_t m : {1u, 3u, 7u}) {
        const std::size_t dim = m + 2;
        std::vector<double> qv(dim, 0.0);
        qv[0] = 1.0;
        Tensor q = Tensor::from_data({dim}, qv);
        auto negs = orthogonal_negatives(m, dim);

        // q == k+, negatives orthogonal, tau = 1: -ln(e / (e + M))
        const double expect = -std::log(std::exp(1.0) / (std::exp(1.0) + double(m)));
        CHECK(infonce_loss(q, q, negs, 1.0).value() == doctest::Approx(expect).epsilon(1e-9));

        // all candidates identical to q: ln(M + 1)
        std::vector<Tensor> same(m, q);
        CHECK(infonce_loss(q, q, same, 1.0).value() ==
              doctest::Approx(std::log(double(m + 1))).epsilon(1e-9));
    }
}

TEST_CASE("decreasing tau with a perfect positive strictly decreases the loss") {
    const std::size_t dim = 6;
    std::vector<double> qv(dim, 0.0);
    qv[0] = 1.0;
    Tensor q = Tensor::from_data({dim}, qv);
    auto negs = orthogonal_negatives(3, dim);
    const double at_1 = infonce_loss(q, q, negs, 1.0).value();
    const double at_01 = infonce_loss(q, q, negs, 0.1).value();
    CHECK(at_01 < at_1);
}

TEST_CASE("infonce decreases as sim(q, k+) increases with negatives fixed") {
    Rng rng(72);
    const std::size_t dim = 5;
    std::vector<double> qv(dim, 0.0);
    qv[0] = 1.0;
    Tensor q = Tensor::from_data({dim}, qv);
    std::vector<Tensor> negs;
    for (int j = 0; j < 4; ++j) negs.push_back(random_away_from_zero({dim}, rng, 0.3, 1.0, false));
    double prev = 1e300;
    for (double angle : {1.2, 0.9, 0.6, 0.3, 0.0}) {
        std::vector<double> kv(dim, 0.0);
        kv[0] = std::cos(angle);
        kv[1] = std::sin(angle);
        const double loss = infonce_loss(q, Tensor::from_data({dim}, kv), negs, 0.5).value();
        CHECK(loss < prev);
        prev = loss;
    }
}

TEST_CASE("infonce contract errors") {
    Tensor q = Tensor::from_data({3}, {1, 0, 0});
    std::vector<Tensor> negs{Tensor::from_data({3}, {0, 1, 0})};
    CHECK_THROWS_AS(infonce_loss(q, Tensor::zeros({3}), negs, 1.0), DegenerateInputError);
    CHECK_THROWS_AS(infonce_loss(q, q, {}, 1.0), ContractError);
    CHECK_THROWS_AS(infonce_loss(q, q, negs, 0.0), ConfigError);
}

TEST_CASE("infonce gradients match finite differences") {
    Rng rng(73);
    Tensor q = random_away_from_zero({4}, rng, 0.4, 1.2);
    Tensor pos = random_away_from_zero({4}, rng, 0.4, 1.2);
    Tensor n1 = random_away_from_zero({4}, rng, 0.4, 1.2);
    Tensor n2 = random_away_from_zero({4}, rng, 0.4, 1.2);
    auto fn = [q, pos, n1, n2]() {
        std::vector<Tensor> negs{n1, n2};
        return infonce_loss(q, pos, negs, 0.3);
    };
    CHECK(gradcheck(fn, {q, pos, n1, n2}).ok);
}

TEST_CASE("combined loss values and linearity") {
    LossWeights w;
    w.lambda_c = 0.2;
    w.lambda_r = 5.0;
    CHECK(combined_loss(Tensor::scalar(1.0), Tensor::scalar(0.1), w).value() ==
          doctest::Approx(0.7).epsilon(1e-12));

    w.lambda_c = 0.0;
    w.lambda_r = 2.5;
    CHECK(combined_loss(Tensor::scalar(9.0), Tensor::scalar(0.4), w).value() ==
          doctest::Approx(1.0).epsilon(1e-12));

    w.lambda_c = 1.0;
    w.lambda_r = 1.0;
    CHECK(combined_loss(Tensor::scalar(0.3), Tensor::scalar(0.3), w).value() ==
          doctest::Approx(0.6).epsilon(1e-12));

    Rng rng(74);
    for (int trial = 0; trial < 30; ++trial) {
        LossWeights wr;
        wr.lambda_c = rng.uniform(0.0, 3.0);
        wr.lambda_r = rng.uniform(0.1, 3.0);
        const double lc = rng.uniform(-2.0, 2.0), lr = rng.uniform(-2.0, 2.0);
        const double scale = rng.uniform(0.1, 4.0);
        const double base = combined_loss(Tensor::scalar(lc), Tensor::scalar(lr), wr).value();
        const double scaled_c =
            combined_loss(Tensor::scalar(scale * lc), Tensor::scalar(lr), wr).value();
        // linear in the contrastive component
        CHECK(scaled_c - base ==
              doctest::Approx(wr.lambda_c * (scale - 1.0) * lc).epsilon(1e-9));
    }
}

TEST_CASE("loss weight validation") {
    LossWeights w;
    w.lambda_c = 0.0;
    w.lambda_r = 0.0;
    CHECK_THROWS_AS(w.validate(), ConfigError);
    w = LossWeights{};
    w.tau = 0.0;
    CHECK_THROWS_AS(w.validate(), ConfigError);
    w = LossWeights{};
    w.lambda_c = -1.0;
    CHECK_THROWS_AS(w.validate(), ConfigError);
}

TEST_CASE("head shapes and readout normalization") {
    Rng rng(75);
    HeadParams heads = init_heads(6, 4, 3, rng);
    Tensor tokens = random_tensor({4, 6}, rng, -1, 1, false);
    Tensor recon = recon_forward(tokens, heads);
    CHECK(recon.rows() == 4);
    CHECK(recon.cols() == 4);
    Tensor latent = cls_forward(tokens, heads);
    CHECK(latent.numel() == 3);
    double norm = 0.0;
    for (double v : latent.data()) norm += v * v;
    CHECK(std::abs(std::sqrt(norm) - 1.0) < 1e-9);
}
