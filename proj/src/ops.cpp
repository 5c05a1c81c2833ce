#include "braintune/ops.hpp"

#include "braintune/errors.hpp"
#include "braintune/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace braintune {

namespace {

using kernels::active;

void require_2d(const Tensor& t, const char* op) {
    if (t.ndim() != 2)
        throw DimensionError(std::string(op) + ": expected a 2-d tensor, got " + t.shape_str());
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shapes disagree: " + a.shape_str() + " vs " +
                             b.shape_str());
}

bool recording(const Tensor& out) {
    return GradTape::active() != nullptr && out.requires_grad();
}

// Accumulates delta into t's gradient if t is trainable.
void accumulate(Tensor t, std::span<const double> delta) {
    if (!t.requires_grad()) return;
    t.ensure_grad();
    active().axpy(1.0, delta.data(), t.grad_span().data(), delta.size());
}

double checked_norm(const Tensor& t, const char* op) {
    const double sq = active().dot(t.data().data(), t.data().data(), t.numel());
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0))
        throw DegenerateInputError(std::string(op) + ": zero-norm vector");
    return norm;
}

} // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_2d(a, "matmul");
    require_2d(b, "matmul");
    if (a.cols() != b.rows())
        throw DimensionError("matmul: inner dimensions disagree: " + a.shape_str() + " vs " +
                             b.shape_str());
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = Tensor::zeros({m, n}, a.requires_grad() || b.requires_grad());
    active().matmul_nn(out.mutable_data().data(), a.data().data(), b.data().data(), m, k, n,
                       false);
    if (recording(out)) {
        GradTape::active()->record([a, b, out, m, k, n]() mutable {
            auto dy = out.grad_span();
            if (dy.empty()) return;
            if (a.requires_grad()) {
                a.ensure_grad();
                // dA += dC * B^T
                active().matmul_nt(a.grad_span().data(), dy.data(), b.data().data(), m, n, k,
                                   true);
            }
            if (b.requires_grad()) {
                b.ensure_grad();
                // dB += A^T * dC
                active().matmul_tn(b.grad_span().data(), a.data().data(), dy.data(), k, m, n,
                                   true);
            }
        });
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    require_2d(a, "transpose");
    const std::size_t m = a.rows(), n = a.cols();
    Tensor out = Tensor::zeros({n, m}, a.requires_grad());
    auto src = a.data();
    auto dst = out.mutable_data();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) dst[j * m + i] = src[i * n + j];
    if (recording(out)) {
        GradTape::active()->record([a, out, m, n]() mutable {
            auto dy = out.grad_span();
            if (dy.empty() || !a.requires_grad()) return;
            a.ensure_grad();
            auto da = a.grad_span();
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) da[i * n + j] += dy[j * m + i];
        });
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad() || b.requires_grad());
    active().add(a.data().data(), b.data().data(), out.mutable_data().data(), a.numel());
    if (recording(out)) {
        GradTape::active()->record([a, b, out]() mutable {
            auto dy = out.grad_span();
            if (dy.empty()) return;
            accumulate(a, dy);
            accumulate(b, dy);
        });
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad() || b.requires_grad());
    active().sub(a.data().data(), b.data().data(), out.mutable_data().data(), a.numel());
    if (recording(out)) {
        GradTape::active()->record([a, b, out]() mutable {
            auto dy = out.grad_span();
            if (dy.empty()) return;
            accumulate(a, dy);
            if (b.requires_grad()) {
                b.ensure_grad();
                active().axpy(-1.0, dy.data(), b.grad_span().data(), dy.size());
            }
        });
    }
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad() || b.requires_grad());
    active().mul(a.data().data(), b.data().data(), out.mutable_data().data(), a.numel());
    if (recording(out)) {
        GradTape::active()->record([a, b, out]() mutable {
            auto dy = out.grad_span();
            if (dy.empty()) return;
            if (a.requires_grad()) {
                a.ensure_grad();
                active().fmadd(b.data().data(), dy.data(), a.grad_span().data(), dy.size());
            }
            if (b.requires_grad()) {
                b.ensure_grad();
                active().fmadd(a.data().data(), dy.data(), b.grad_span().data(), dy.size());
            }
        });
    }
    return out;
}

Tensor mul_scalar(const Tensor& a, double c) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    active().scale(a.data().data(), c, out.mutable_data().data(), a.numel());
    if (recording(out)) {
        GradTape::active()->record([a, out, c]() mutable {
            auto dy = out.grad_span();
            if (dy.empty() || !a.requires_grad()) return;
            a.ensure_grad();
            active().axpy(c, dy.data(), a.grad_span().data(), dy.size());
        });
    }
    return out;
}

Tensor add_rowvec(const Tensor& x, const Tensor& v) {
    require_2d(x, "add_rowvec");
    if (v.numel() != x.cols() || v.ndim() > 2 || (v.ndim() == 2 && v.rows() != 1))
        throw DimensionError("add_rowvec: vector " + v.shape_str() + " does not match columns of " +
                             x.shape_str());
    const std::size_t m = x.rows(), n = x.cols();
    Tensor out = Tensor::zeros(x.shape(), x.requires_grad() || v.requires_grad());
    auto dst = out.mutable_data();
    for (std::size_t i = 0; i < m; ++i)
        active().add(x.data().data() + i * n, v.data().data(), dst.data() + i * n, n);
    if (recording(out)) {
        GradTape::active()->record([x, v, out, m, n]() mutable {
            auto dy = out.grad_span();
            if (dy.empty()) return;
            accumulate(x, dy);
            if (v.requires_grad()) {
                v.ensure_grad();
                auto dv = v.grad_span();
                for (std::size_t i = 0; i < m; ++i)
                    active().axpy(1.0, dy.data() + i * n, dv.data(), n);
            }
        });
    }
    return out;
}

Tensor relu(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    active().relu(a.data().data(), out.mutable_data().data(), a.numel());
    if (recording(out)) {
        GradTape::active()->record([a, out]() mutable {
            auto dy = out.grad_span();
            if (dy.empty() || !a.requires_grad()) return;
            a.ensure_grad();
            active().relu_grad(a.data().data(), dy.data(), a.grad_span().data(), dy.size());
        });
    }
    return out;
}

Tensor square(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    active().mul(a.data().data(), a.data().data(), out.mutable_data().data(), a.numel());
    if (recording(out)) {
        GradTape::active()->record([a, out]() mutable {
            auto dy = out.grad_span();
            if (dy.empty() || !a.requires_grad()) return;
            a.ensure_grad();
            auto da = a.grad_span();
            auto x = a.data();
            for (std::size_t i = 0; i < dy.size(); ++i) da[i] += 2.0 * x[i] * dy[i];
        });
    }
    return out;
}

Tensor sqrt(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto src = a.data();
    auto dst = out.mutable_data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::sqrt(src[i]);
    if (recording(out)) {
        GradTape::active()->record([a, out]() mutable {
            auto dy = out.grad_span();
            if (dy.empty() || !a.requires_grad()) return;
            a.ensure_grad();
            auto da = a.grad_span();
            auto y = out.data();
            for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] / (2.0 * y[i]);
        });
    }
    return out;
}

Tensor exp(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto src = a.data();
    auto dst = out.mutable_data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::exp(src[i]);
    if (recording(out)) {
        GradTape::active()->record([a, out]() mutable {
            auto dy = out.grad_span();
            if (dy.empty() || !a.requires_grad()) return;
            a.ensure_grad();
            active().fmadd(out.data().data(), dy.data(), a.grad_span().data(), dy.size());
        });
    }
    return out;
}

Tensor log(const Tensor& a) {
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto src = a.data();
    auto dst = out.mutable_data();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::log(std::max(src[i], kLogFloor));
    if (recording(out)) {
        GradTape::active()->record([a, out]() mutable {
            auto dy = out.grad_span();
            if (dy.empty() || !a.requires_grad()) return;
            a.ensure_grad();
            auto da = a.grad_span();
            auto x = a.data();
            for (std::size_t i = 0; i < dy.size(); ++i)
                da[i] += dy[i] / std::max(x[i], kLogFloor);
        });
    }
    return out;
}

Tensor sum(const Tensor& a) {
    Tensor out = Tensor::scalar(active().sum(a.data().data(), a.numel()), a.requires_grad());
    if (recording(out)) {
        GradTape::active()->record([a, out]() mutable {
            auto dy = out.grad_span();
            if (dy.empty() || !a.requires_grad()) return;
            a.ensure_grad();
            auto da = a.grad_span();
            active().add_scalar(da.data(), dy[0], da.data(), da.size());
        });
    }
    return out;
}

Tensor mean_rows(const Tensor& a) {
    require_2d(a, "mean_rows");
    const std::size_t m = a.rows(), n = a.cols();
    Tensor out = Tensor::zeros({1, n}, a.requires_grad());
    auto dst = out.mutable_data();
    for (std::size_t i = 0; i < m; ++i) active().axpy(1.0, a.data().data() + i * n, dst.data(), n);
    active().scale(dst.data(), 1.0 / static_cast<double>(m), dst.data(), n);
    if (recording(out)) {
        GradTape::active()->record([a, out, m, n]() mutable {
            auto dy = out.grad_span();
            if (dy.empty() || !a.requires_grad()) return;
            a.ensure_grad();
            auto da = a.grad_span();
            const double inv_m = 1.0 / static_cast<double>(m);
            for (std::size_t i = 0; i < m; ++i)
                active().axpy(inv_m, dy.data(), da.data() + i * n, n);
        });
    }
    return out;
}

Tensor softmax_rows(const Tensor& a) {
    require_2d(a, "softmax_rows");
    const std::size_t m = a.rows(), n = a.cols();
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    auto src = a.data();
    auto dst = out.mutable_data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = src.data() + i * n;
        double* orow = dst.data() + i * n;
        const double mx = active().max_val(row, n); // guards exp overflow
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            orow[j] = std::exp(row[j] - mx);
            total += orow[j];
        }
        active().scale(orow, 1.0 / total, orow, n);
    }
    if (recording(out)) {
        GradTape::active()->record([a, out, m, n]() mutable {
            auto dy = out.grad_span();
            if (dy.empty() || !a.requires_grad()) return;
            a.ensure_grad();
            auto da = a.grad_span();
            auto y = out.data();
            for (std::size_t i = 0; i < m; ++i) {
                const double* yrow = y.data() + i * n;
                const double* dyrow = dy.data() + i * n;
                double* darow = da.data() + i * n;
                const double dot = active().dot(dyrow, yrow, n);
                for (std::size_t j = 0; j < n; ++j) darow[j] += yrow[j] * (dyrow[j] - dot);
            }
        });
    }
    return out;
}

Tensor concat_lastdim(std::span<const Tensor> parts) {
    if (parts.empty()) throw DimensionError("concat_lastdim: no inputs");
    const std::size_t m = parts[0].rows();
    std::size_t total = 0;
    bool rg = false;
    for (const Tensor& p : parts) {
        require_2d(p, "concat_lastdim");
        if (p.rows() != m)
            throw DimensionError("concat_lastdim: row counts disagree: " + parts[0].shape_str() +
                                 " vs " + p.shape_str());
        total += p.cols();
        rg = rg || p.requires_grad();
    }
    Tensor out = Tensor::zeros({m, total}, rg);
    auto dst = out.mutable_data();
    std::size_t col = 0;
    for (const Tensor& p : parts) {
        const std::size_t w = p.cols();
        for (std::size_t i = 0; i < m; ++i)
            std::copy_n(p.data().data() + i * w, w, dst.data() + i * total + col);
        col += w;
    }
    if (recording(out)) {
        std::vector<Tensor> held(parts.begin(), parts.end());
        GradTape::active()->record([held, out, m, total]() mutable {
            auto dy = out.grad_span();
            if (dy.empty()) return;
            std::size_t col = 0;
            for (Tensor& p : held) {
                const std::size_t w = p.cols();
                if (p.requires_grad()) {
                    p.ensure_grad();
                    auto dp = p.grad_span();
                    for (std::size_t i = 0; i < m; ++i)
                        active().axpy(1.0, dy.data() + i * total + col, dp.data() + i * w, w);
                }
                col += w;
            }
        });
    }
    return out;
}

Tensor reshape(const Tensor& a, std::vector<std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    if (n != a.numel())
        throw DimensionError("reshape: cannot view " + a.shape_str() + " as " +
                             std::to_string(n) + " elements");
    Tensor out = Tensor::from_data(std::move(shape),
                                   std::vector<double>(a.data().begin(), a.data().end()),
                                   a.requires_grad());
    if (recording(out)) {
        GradTape::active()->record([a, out]() mutable {
            auto dy = out.grad_span();
            if (dy.empty()) return;
            accumulate(a, dy);
        });
    }
    return out;
}

Tensor select(const Tensor& a, std::size_t flat_index) {
    if (flat_index >= a.numel())
        throw DimensionError("select: index " + std::to_string(flat_index) +
                             " out of range for " + a.shape_str());
    Tensor out = Tensor::scalar(a.data()[flat_index], a.requires_grad());
    if (recording(out)) {
        GradTape::active()->record([a, out, flat_index]() mutable {
            auto dy = out.grad_span();
            if (dy.empty() || !a.requires_grad()) return;
            a.ensure_grad();
            a.grad_span()[flat_index] += dy[0];
        });
    }
    return out;
}

Tensor stack_scalars(std::span<const Tensor> xs) {
    if (xs.empty()) throw DimensionError("stack_scalars: no inputs");
    std::vector<double> vals(xs.size());
    bool rg = false;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (xs[i].numel() != 1)
            throw DimensionError("stack_scalars: input " + std::to_string(i) +
                                 " is not a scalar: " + xs[i].shape_str());
        vals[i] = xs[i].value();
        rg = rg || xs[i].requires_grad();
    }
    Tensor out = Tensor::from_data({xs.size()}, std::move(vals), rg);
    if (recording(out)) {
        std::vector<Tensor> held(xs.begin(), xs.end());
        GradTape::active()->record([held, out]() mutable {
            auto dy = out.grad_span();
            if (dy.empty()) return;
            for (std::size_t i = 0; i < held.size(); ++i) {
                if (!held[i].requires_grad()) continue;
                held[i].ensure_grad();
                held[i].grad_span()[0] += dy[i];
            }
        });
    }
    return out;
}

Tensor cosine_similarity(const Tensor& a, const Tensor& b) {
    if (a.numel() != b.numel())
        throw DimensionError("cosine_similarity: sizes disagree: " + a.shape_str() + " vs " +
                             b.shape_str());
    const double na = checked_norm(a, "cosine_similarity");
    const double nb = checked_norm(b, "cosine_similarity");
    const double dot_ab = active().dot(a.data().data(), b.data().data(), a.numel());
    const double sim = dot_ab / (na * nb);
    Tensor out = Tensor::scalar(sim, a.requires_grad() || b.requires_grad());
    if (recording(out)) {
        GradTape::active()->record([a, b, out, na, nb, sim]() mutable {
            auto dy = out.grad_span();
            if (dy.empty()) return;
            const double g = dy[0];
            const std::size_t n = a.numel();
            if (a.requires_grad()) {
                a.ensure_grad();
                auto da = a.grad_span();
                const double c1 = g / (na * nb);
                const double c2 = g * sim / (na * na);
                active().axpy(c1, b.data().data(), da.data(), n);
                active().axpy(-c2, a.data().data(), da.data(), n);
            }
            if (b.requires_grad()) {
                b.ensure_grad();
                auto db = b.grad_span();
                const double c1 = g / (na * nb);
                const double c2 = g * sim / (nb * nb);
                active().axpy(c1, a.data().data(), db.data(), n);
                active().axpy(-c2, b.data().data(), db.data(), n);
            }
        });
    }
    return out;
}

Tensor l2_normalize(const Tensor& a) {
    const double norm = checked_norm(a, "l2_normalize");
    Tensor out = Tensor::zeros(a.shape(), a.requires_grad());
    active().scale(a.data().data(), 1.0 / norm, out.mutable_data().data(), a.numel());
    if (recording(out)) {
        GradTape::active()->record([a, out, norm]() mutable {
            auto dy = out.grad_span();
            if (dy.empty() || !a.requires_grad()) return;
            a.ensure_grad();
            auto da = a.grad_span();
            auto y = out.data();
            const std::size_t n = dy.size();
            const double proj = active().dot(y.data(), dy.data(), n);
            for (std::size_t i = 0; i < n; ++i) da[i] += (dy[i] - y[i] * proj) / norm;
        });
    }
    return out;
}

Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps) {
    require_2d(x, "layer_norm_rows");
    const std::size_t m = x.rows(), n = x.cols();
    if (gain.numel() != n || shift.numel() != n)
        throw DimensionError("layer_norm_rows: gain/shift do not match columns of " +
                             x.shape_str());
    Tensor out = Tensor::zeros(x.shape(),
                               x.requires_grad() || gain.requires_grad() || shift.requires_grad());
    // cache the normalized rows and inverse stddevs for the backward rule
    auto xhat = std::make_shared<std::vector<double>>(m * n);
    auto inv_sd = std::make_shared<std::vector<double>>(m);
    auto src = x.data();
    auto dst = out.mutable_data();
    for (std::size_t i = 0; i < m; ++i) {
        const double* row = src.data() + i * n;
        const double mean = active().sum(row, n) / static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = row[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        const double isd = 1.0 / std::sqrt(var + eps);
        (*inv_sd)[i] = isd;
        for (std::size_t j = 0; j < n; ++j) {
            const double xh = (row[j] - mean) * isd;
            (*xhat)[i * n + j] = xh;
            dst[i * n + j] = gain.data()[j] * xh + shift.data()[j];
        }
    }
    if (recording(out)) {
        GradTape::active()->record([x, gain, shift, out, xhat, inv_sd, m, n]() mutable {
            auto dy = out.grad_span();
            if (dy.empty()) return;
            if (shift.requires_grad()) {
                shift.ensure_grad();
                auto ds = shift.grad_span();
                for (std::size_t i = 0; i < m; ++i) active().axpy(1.0, dy.data() + i * n, ds.data(), n);
            }
            if (gain.requires_grad()) {
                gain.ensure_grad();
                auto dg = gain.grad_span();
                for (std::size_t i = 0; i < m; ++i)
                    active().fmadd(dy.data() + i * n, xhat->data() + i * n, dg.data(), n);
            }
            if (x.requires_grad()) {
                x.ensure_grad();
                auto dx = x.grad_span();
                const double inv_n = 1.0 / static_cast<double>(n);
                for (std::size_t i = 0; i < m; ++i) {
                    const double* dyrow = dy.data() + i * n;
                    const double* xhrow = xhat->data() + i * n;
                    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                    for (std::size_t j = 0; j < n; ++j) {
                        const double dxh = dyrow[j] * gain.data()[j];
                        sum_dxhat += dxh;
                        sum_dxhat_xhat += dxh * xhrow[j];
                    }
                    const double isd = (*inv_sd)[i];
                    for (std::size_t j = 0; j < n; ++j) {
                        const double dxh = dyrow[j] * gain.data()[j];
                        dx[i * n + j] +=
                            isd * (dxh - inv_n * sum_dxhat - xhrow[j] * inv_n * sum_dxhat_xhat);
                    }
                }
            }
        });
    }
    return out;
}

} // namespace braintune
