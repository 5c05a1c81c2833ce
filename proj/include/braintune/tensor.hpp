#pragma once

// Dense 64-bit tensor with reverse-mode automatic differentiation on a
// dynamic (define-by-run) tape. Values are row-major; gradients live next to
// the values and are allocated lazily on first accumulation.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace braintune {

class GradTape;

/// Shared-storage handle to an n-dimensional array of doubles. Copying a
/// Tensor aliases the underlying storage, which is what the tape relies on.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
    static Tensor full(std::vector<std::size_t> shape, double value, bool requires_grad = false);
    static Tensor from_data(std::vector<std::size_t> shape, std::vector<double> data,
                            bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const std::vector<std::size_t>& shape() const;
    std::size_t ndim() const;
    std::size_t numel() const;
    /// Row/column counts; requires a 2-d tensor.
    std::size_t rows() const;
    std::size_t cols() const;

    std::span<const double> data() const;
    std::span<double> mutable_data();
    /// Value of a one-element tensor.
    double value() const;
    /// 2-d element access (tests and tooling).
    double at(std::size_t r, std::size_t c) const;

    bool requires_grad() const;
    void set_requires_grad(bool rg);

    // Tensor is a shared handle: const applies to the handle, not the
    // storage. The gradient buffer is shared state mutated during backward,
    // so the accessors below are const.
    bool has_grad() const;
    std::span<const double> grad() const;
    /// Allocates a zeroed gradient buffer when requires_grad is set and the
    /// buffer is absent; no-op otherwise. Frozen tensors never get one.
    void ensure_grad() const;
    /// Mutable view of the gradient buffer (empty when absent).
    std::span<double> grad_span() const;
    /// Allocates (if needed) and zero-fills the gradient buffer.
    void zero_grad();

    /// Deep copy: fresh storage, same values/flags, no gradient.
    Tensor clone() const;

    /// "[2 x 3]"-style shape string for error messages.
    std::string shape_str() const;

private:
    struct Impl {
        std::vector<std::size_t> shape;
        std::vector<double> data;
        std::vector<double> grad; // empty until first use
        bool requires_grad = false;
    };

    explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
    const Impl& impl() const;
    Impl& impl();

    std::shared_ptr<Impl> impl_;
};

/// Records the backward rules of operations executed while it is the active
/// tape. Construction pushes the tape onto a thread-local stack; destruction
/// pops it. One backward pass per tape unless reset() is called.
class GradTape {
public:
    GradTape();
    ~GradTape();
    GradTape(const GradTape&) = delete;
    GradTape& operator=(const GradTape&) = delete;

    /// Runs the recorded backward rules in reverse order, seeding the scalar
    /// loss with gradient 1. Throws ContractError if loss is not a scalar or
    /// if backward already ran on this tape.
    void backward(const Tensor& loss);

    /// Clears recorded nodes and re-arms the tape for another forward pass.
    void reset();

    std::size_t node_count() const { return nodes_.size(); }
    bool consumed() const { return consumed_; }

    /// Active tape of the current thread, or nullptr outside any tape scope.
    static GradTape* active();

    /// Used by the op implementations to register a backward rule.
    void record(std::function<void()> backward_step);

private:
    std::vector<std::function<void()>> nodes_;
    bool consumed_ = false;
    GradTape* prev_ = nullptr;
};

} // namespace braintune
