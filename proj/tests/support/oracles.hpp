#pragma once

// Independent reference implementations used by tests only. These stay
// deliberately naive (plain double loops, no kernel layer) so they cannot
// share a bug with the code under test.

#include "braintune/connectome.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace braintune::testing {

// Pearson correlation by direct double-loop covariance, population moments.
inline std::vector<double> pearson_oracle(const BoldRecording& rec) {
    const std::size_t v = rec.regions, t = rec.timepoints;
    std::vector<double> mean(v, 0.0);
    for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t k = 0; k < t; ++k) mean[i] += rec.signal[i * t + k];
        mean[i] /= static_cast<double>(t);
    }
    std::vector<double> out(v * v, 0.0);
    for (std::size_t i = 0; i < v; ++i) {
        for (std::size_t j = 0; j < v; ++j) {
            double cov = 0.0, var_i = 0.0, var_j = 0.0;
            for (std::size_t k = 0; k < t; ++k) {
                const double di = rec.signal[i * t + k] - mean[i];
                const double dj = rec.signal[j * t + k] - mean[j];
                cov += di * dj;
                var_i += di * di;
                var_j += dj * dj;
            }
            out[i * v + j] = cov / std::sqrt(var_i * var_j);
        }
    }
    return out;
}

// naive triple-loop matrix product
inline std::vector<double> matmul_oracle(const std::vector<double>& a,
                                         const std::vector<double>& b, std::size_t m,
                                         std::size_t k, std::size_t n) {
    std::vector<double> c(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t kk = 0; kk < k; ++kk) acc += a[i * k + kk] * b[kk * n + j];
            c[i * n + j] = acc;
        }
    return c;
}

// Welch t-statistic between two samples
inline double welch_t(const std::vector<double>& x, const std::vector<double>& y) {
    auto moments = [](const std::vector<double>& s, double& mean, double& var) {
        mean = 0.0;
        for (double v : s) mean += v;
        mean /= static_cast<double>(s.size());
        var = 0.0;
        for (double v : s) var += (v - mean) * (v - mean);
        var /= static_cast<double>(s.size() - 1);
    };
    double mx, vx, my, vy;
    moments(x, mx, vx);
    moments(y, my, vy);
    return (mx - my) / std::sqrt(vx / static_cast<double>(x.size()) +
                                 vy / static_cast<double>(y.size()));
}

} // namespace braintune::testing
