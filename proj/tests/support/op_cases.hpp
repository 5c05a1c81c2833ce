#pragma once

// One gradcheck case generator per differentiable op. Shared by the unit
// tests (many trials each) and the acceptance suite (fewer trials, same
// coverage). Each generator returns a loss closure plus the leaf tensors
// whose gradients the finite-difference oracle verifies.

#include "support/gradcheck.hpp"

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace braintune::testing {

using OpCaseFn =
    std::function<std::pair<std::function<Tensor()>, std::vector<Tensor>>(Rng&)>;

struct OpCase {
    std::string name;
    OpCaseFn make;
};

inline std::vector<OpCase> all_op_cases() {
    std::vector<OpCase> cases;

    cases.push_back({"matmul", [](Rng& r) {
        const std::size_t m = 1 + r.index(4), k = 1 + r.index(4), n = 1 + r.index(4);
        Tensor a = random_tensor({m, k}, r);
        Tensor b = random_tensor({k, n}, r);
        Tensor probe = random_tensor({m, n}, r, -1, 1, false);
        auto fn = [a, b, probe]() { return weighted_probe(matmul(a, b), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a, b});
    }});

    cases.push_back({"add", [](Rng& r) {
        const std::size_t n = 1 + r.index(6);
        Tensor a = random_tensor({n}, r), b = random_tensor({n}, r);
        Tensor probe = random_tensor({n}, r, -1, 1, false);
        auto fn = [a, b, probe]() { return weighted_probe(add(a, b), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a, b});
    }});

    cases.push_back({"sub", [](Rng& r) {
        const std::size_t n = 1 + r.index(6);
        Tensor a = random_tensor({n}, r), b = random_tensor({n}, r);
        Tensor probe = random_tensor({n}, r, -1, 1, false);
        auto fn = [a, b, probe]() { return weighted_probe(sub(a, b), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a, b});
    }});

    cases.push_back({"mul", [](Rng& r) {
        const std::size_t n = 1 + r.index(6);
        Tensor a = random_tensor({n}, r), b = random_tensor({n}, r);
        Tensor probe = random_tensor({n}, r, -1, 1, false);
        auto fn = [a, b, probe]() { return weighted_probe(mul(a, b), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a, b});
    }});

    cases.push_back({"mul_scalar", [](Rng& r) {
        const std::size_t n = 1 + r.index(6);
        Tensor a = random_tensor({n}, r);
        Tensor probe = random_tensor({n}, r, -1, 1, false);
        const double c = r.uniform(-2.0, 2.0);
        auto fn = [a, probe, c]() { return weighted_probe(mul_scalar(a, c), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a});
    }});

    cases.push_back({"transpose", [](Rng& r) {
        const std::size_t m = 1 + r.index(3), n = 1 + r.index(4);
        Tensor a = random_tensor({m, n}, r);
        Tensor probe = random_tensor({n, m}, r, -1, 1, false);
        auto fn = [a, probe]() { return weighted_probe(transpose(a), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a});
    }});

    cases.push_back({"reshape", [](Rng& r) {
        const std::size_t m = 1 + r.index(3), n = 1 + r.index(4);
        Tensor a = random_tensor({m, n}, r);
        Tensor probe = random_tensor({m * n}, r, -1, 1, false);
        auto fn = [a, probe, m, n]() {
            return weighted_probe(reshape(a, {m * n}), probe);
        };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a});
    }});

    cases.push_back({"select", [](Rng& r) {
        const std::size_t n = 1 + r.index(6);
        Tensor a = random_tensor({n}, r);
        const std::size_t idx = r.index(n);
        auto fn = [a, idx]() { return square(select(a, idx)); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a});
    }});

    cases.push_back({"relu", [](Rng& r) {
        const std::size_t n = 1 + r.index(6);
        Tensor a = random_away_from_zero({n}, r);
        Tensor probe = random_tensor({n}, r, -1, 1, false);
        auto fn = [a, probe]() { return weighted_probe(relu(a), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a});
    }});

    cases.push_back({"square", [](Rng& r) {
        const std::size_t n = 1 + r.index(6);
        Tensor a = random_tensor({n}, r);
        Tensor probe = random_tensor({n}, r, -1, 1, false);
        auto fn = [a, probe]() { return weighted_probe(square(a), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a});
    }});

    cases.push_back({"sqrt", [](Rng& r) {
        const std::size_t n = 1 + r.index(6);
        Tensor a = random_tensor({n}, r, 0.3, 2.0);
        Tensor probe = random_tensor({n}, r, -1, 1, false);
        auto fn = [a, probe]() { return weighted_probe(braintune::sqrt(a), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a});
    }});

    cases.push_back({"exp", [](Rng& r) {
        const std::size_t n = 1 + r.index(6);
        Tensor a = random_tensor({n}, r);
        Tensor probe = random_tensor({n}, r, -1, 1, false);
        auto fn = [a, probe]() { return weighted_probe(braintune::exp(a), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a});
    }});

    cases.push_back({"log", [](Rng& r) {
        const std::size_t n = 1 + r.index(6);
        Tensor a = random_tensor({n}, r, 0.3, 2.0);
        Tensor probe = random_tensor({n}, r, -1, 1, false);
        auto fn = [a, probe]() { return weighted_probe(braintune::log(a), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a});
    }});

    cases.push_back({"sum", [](Rng& r) {
        const std::size_t n = 1 + r.index(6);
        Tensor a = random_tensor({n}, r);
        auto fn = [a]() { return square(braintune::sum(a)); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a});
    }});

    cases.push_back({"mean_rows", [](Rng& r) {
        const std::size_t m = 1 + r.index(4), n = 1 + r.index(4);
        Tensor a = random_tensor({m, n}, r);
        Tensor probe = random_tensor({1, n}, r, -1, 1, false);
        auto fn = [a, probe]() { return weighted_probe(mean_rows(a), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a});
    }});

    cases.push_back({"add_rowvec", [](Rng& r) {
        const std::size_t m = 1 + r.index(4), n = 1 + r.index(4);
        Tensor x = random_tensor({m, n}, r);
        Tensor v = random_tensor({n}, r);
        Tensor probe = random_tensor({m, n}, r, -1, 1, false);
        auto fn = [x, v, probe]() { return weighted_probe(add_rowvec(x, v), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{x, v});
    }});

    cases.push_back({"softmax_rows", [](Rng& r) {
        const std::size_t m = 1 + r.index(3), n = 2 + r.index(4);
        Tensor x = random_tensor({m, n}, r, -2.0, 2.0);
        Tensor probe = random_tensor({m, n}, r, -1, 1, false);
        auto fn = [x, probe]() { return weighted_probe(softmax_rows(x), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{x});
    }});

    cases.push_back({"concat_lastdim", [](Rng& r) {
        const std::size_t m = 1 + r.index(3);
        Tensor a = random_tensor({m, 1 + r.index(3)}, r);
        Tensor b = random_tensor({m, 1 + r.index(3)}, r);
        Tensor probe = random_tensor({m, a.cols() + b.cols()}, r, -1, 1, false);
        auto fn = [a, b, probe]() {
            std::vector<Tensor> parts{a, b};
            return weighted_probe(concat_lastdim(parts), probe);
        };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a, b});
    }});

    cases.push_back({"stack_scalars", [](Rng& r) {
        Tensor a = random_tensor({2 + r.index(3)}, r);
        Tensor b = random_tensor({1 + r.index(3)}, r);
        auto fn = [a, b]() {
            std::vector<Tensor> scalars{braintune::sum(a), braintune::sum(square(b))};
            return braintune::sum(square(stack_scalars(scalars)));
        };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a, b});
    }});

    cases.push_back({"cosine_similarity", [](Rng& r) {
        const std::size_t n = 2 + r.index(5);
        Tensor a = random_away_from_zero({n}, r, 0.3, 1.5);
        Tensor b = random_away_from_zero({n}, r, 0.3, 1.5);
        auto fn = [a, b]() { return square(cosine_similarity(a, b)); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a, b});
    }});

    cases.push_back({"l2_normalize", [](Rng& r) {
        const std::size_t n = 2 + r.index(5);
        Tensor a = random_away_from_zero({n}, r, 0.3, 1.5);
        Tensor probe = random_tensor({n}, r, -1, 1, false);
        auto fn = [a, probe]() { return weighted_probe(l2_normalize(a), probe); };
        return std::make_pair(std::function<Tensor()>(fn), std::vector<Tensor>{a});
    }});

    cases.push_back({"layer_norm_rows", [](Rng& r) {
        const std::size_t m = 1 + r.index(3), n = 2 + r.index(4);
        Tensor x = random_tensor({m, n}, r, -2.0, 2.0);
        // keep row variance well above the stabilizer
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                x.mutable_data()[i * n + j] += static_cast<double>(j) * 2.0;
        Tensor gain = random_tensor({n}, r, 0.5, 1.5);
        Tensor shift = random_tensor({n}, r, -0.5, 0.5);
        Tensor probe = random_tensor({m, n}, r, -1, 1, false);
        auto fn = [x, gain, shift, probe]() {
            return weighted_probe(layer_norm_rows(x, gain, shift), probe);
        };
        return std::make_pair(std::function<Tensor()>(fn),
                              std::vector<Tensor>{x, gain, shift});
    }});

    return cases;
}

} // namespace braintune::testing
