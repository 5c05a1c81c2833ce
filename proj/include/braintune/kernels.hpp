#pragma once

// Data-parallel inner loops behind the tensor ops: scalar reference
// implementations plus an AVX2+FMA variant selected at runtime. The two
// backends are equivalence-tested against each other in tests/test_kernels.

#include <cstddef>
#include <string_view>

namespace braintune::kernels {

struct Backend {
    const char* name;

    // elementwise; out may alias either input
    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    void (*scale)(const double* a, double c, double* out, std::size_t n);
    void (*add_scalar)(const double* a, double c, double* out, std::size_t n);

    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out += a * b elementwise
    void (*fmadd)(const double* a, const double* b, double* out, std::size_t n);

    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    double (*max_val)(const double* a, std::size_t n); // n >= 1

    void (*relu)(const double* a, double* out, std::size_t n);
    // dx += dy where x > 0
    void (*relu_grad)(const double* x, const double* dy, double* dx, std::size_t n);

    // c (m x n) = a (m x k) * b (k x n); accumulates into c when acc is set
    void (*matmul_nn)(double* c, const double* a, const double* b,
                      std::size_t m, std::size_t k, std::size_t n, bool acc);
    // c (m x n) = a (m x k) * b^T with b stored n x k
    void (*matmul_nt)(double* c, const double* a, const double* b,
                      std::size_t m, std::size_t k, std::size_t n, bool acc);
    // c (m x n) = a^T * b with a stored k x m and b stored k x n
    void (*matmul_tn)(double* c, const double* a, const double* b,
                      std::size_t m, std::size_t k, std::size_t n, bool acc);

    // bias-corrected Adam update; ibc1 = 1/(1-beta1^t), ibc2 = 1/(1-beta2^t).
    // Decoupled weight decay is applied by the caller beforehand.
    void (*adam_update)(double* p, const double* g, double* m, double* v,
                        std::size_t n, double lr, double beta1, double beta2,
                        double eps, double ibc1, double ibc2);
};

// Scalar reference backend, always available.
const Backend& scalar();

// AVX2+FMA backend, or nullptr when the CPU lacks support.
const Backend* avx2();

// Currently selected backend. Defaults to the best available; the
// BRAINTUNE_KERNELS environment variable ("scalar" or "avx2") overrides the
// default at startup.
const Backend& active();

// Force a backend by name: "scalar", "avx2" or "auto". Returns false when
// the request cannot be satisfied. Not safe against concurrent kernel use.
bool select(std::string_view name);

} // namespace braintune::kernels
