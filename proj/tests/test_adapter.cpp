#include "braintune/adapter.hpp"
#include "braintune/errors.hpp"
#include "braintune/ops.hpp"

#include "support/gradcheck.hpp"

#include <doctest.h>

using namespace braintune;
using namespace braintune::testing;

TEST_CASE("zero weights reduce the adapter to its output bias") {
    Rng rng(50);
    AdapterParams p = init_adapter(3, 4, 2, rng);
    p.w1 = Tensor::zeros({3, 4}, true);
    p.w2 = Tensor::zeros({4, 2}, true);
    p.b2 = Tensor::from_data({2}, {0.5, -1.5}, true);
    Tensor x = random_tensor({3, 3}, rng, -1, 1, false);
    Tensor y = adapter_forward(x, p);
    REQUIRE(y.rows() == 3);
    REQUIRE(y.cols() == 2);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(y.at(i, 0) == 0.5);
        CHECK(y.at(i, 1) == -1.5);
    }
}

TEST_CASE("hand-set 2x2 adapter matches a by-hand computation") {
    AdapterParams p;
    p.regions = 2;
    p.hidden = 2;
    p.out_dim = 2;
    p.w1 = Tensor::from_data({2, 2}, {1, 0, 0, 1}, true);
    p.b1 = Tensor::from_data({2}, {0, -2}, true);
    p.w2 = Tensor::from_data({2, 2}, {2, 1, 1, 2}, true);
    p.b2 = Tensor::from_data({2}, {0.5, 0}, true);
    Tensor x = Tensor::from_data({2, 2}, {1, 1, -1, 3});
    // row 0: h = relu([1, 1-2]) = [1, 0]; y = [1*2+0.5, 1*1+0] = [2.5, 1]
    // row 1: h = relu([-1, 3-2]) = [0, 1]; y = [0+1+0.5, 0+2] = [1.5, 2]
    Tensor y = adapter_forward(x, p);
    CHECK(y.at(0, 0) == doctest::Approx(2.5));
    CHECK(y.at(0, 1) == doctest::Approx(1.0));
    CHECK(y.at(1, 0) == doctest::Approx(1.5));
    CHECK(y.at(1, 1) == doctest::Approx(2.0));
}

TEST_CASE("gradient of sum(adapter_forward) w.r.t. w1 matches finite differences") {
    Rng rng(51);
    AdapterParams p = init_adapter(3, 5, 4, rng);
    Tensor x = random_away_from_zero({3, 3}, rng, 0.2, 1.2, false);
    auto fn = [x, p]() { return braintune::sum(adapter_forward(x, p)); };
    auto report = gradcheck(fn, {p.w1, p.b1, p.w2, p.b2});
    CHECK(report.ok);
    CHECK(report.checked == 3 * 5 + 5 + 5 * 4 + 4);
}

TEST_CASE("changing one input row changes only that output row") {
    Rng rng(52);
    AdapterParams p = init_adapter(4, 6, 3, rng);
    Tensor x = random_tensor({4, 4}, rng, -1, 1, false);
    Tensor y0 = adapter_forward(x, p);
    Tensor x2 = x.clone();
    x2.mutable_data()[2 * 4 + 1] += 0.7; // row 2 only
    Tensor y1 = adapter_forward(x2, p);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            if (i == 2) continue;
            CHECK(y0.at(i, j) == y1.at(i, j));
        }
    bool row2_changed = false;
    for (std::size_t j = 0; j < 3; ++j) row2_changed |= y0.at(2, j) != y1.at(2, j);
    CHECK(row2_changed);
}

TEST_CASE("identity activation stacks to a single affine map") {
    Rng rng(53);
    AdapterParams p = init_adapter(3, 4, 2, rng, AdapterActivation::identity);
    Tensor x = random_tensor({3, 3}, rng, -1, 1, false);
    Tensor y = adapter_forward(x, p);
    // (x w1 + b1) w2 + b2 computed directly
    Tensor expect = add_rowvec(matmul(add_rowvec(matmul(x, p.w1), p.b1), p.w2), p.b2);
    for (std::size_t i = 0; i < y.numel(); ++i)
        CHECK(y.data()[i] == doctest::Approx(expect.data()[i]).epsilon(1e-12));
}

TEST_CASE("shape mismatches are dimension errors") {
    Rng rng(54);
    AdapterParams p = init_adapter(3, 4, 2, rng);
    Tensor bad = Tensor::zeros({4, 4});
    CHECK_THROWS_AS(adapter_forward(bad, p), DimensionError);
}
