#include "braintune/tensor.hpp"

#include "braintune/errors.hpp"

#include <algorithm>
#include <numeric>

namespace braintune {

namespace {

std::size_t shape_numel(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

} // namespace

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value, bool requires_grad) {
    auto impl = std::make_shared<Impl>();
    impl->data.assign(shape_numel(shape), value);
    impl->shape = std::move(shape);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::from_data(std::vector<std::size_t> shape, std::vector<double> data,
                         bool requires_grad) {
    if (shape_numel(shape) != data.size())
        throw ContractError("Tensor::from_data: shape does not match data length");
    auto impl = std::make_shared<Impl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    impl->requires_grad = requires_grad;
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from_data({1}, {value}, requires_grad);
}

const Tensor::Impl& Tensor::impl() const {
    if (!impl_) throw ContractError("use of an undefined Tensor");
    return *impl_;
}

Tensor::Impl& Tensor::impl() {
    if (!impl_) throw ContractError("use of an undefined Tensor");
    return *impl_;
}

const std::vector<std::size_t>& Tensor::shape() const { return impl().shape; }

std::size_t Tensor::ndim() const { return impl().shape.size(); }

std::size_t Tensor::numel() const { return impl().data.size(); }

std::size_t Tensor::rows() const {
    if (ndim() != 2) throw ContractError("rows(): tensor is not 2-d, shape " + shape_str());
    return impl().shape[0];
}

std::size_t Tensor::cols() const {
    if (ndim() != 2) throw ContractError("cols(): tensor is not 2-d, shape " + shape_str());
    return impl().shape[1];
}

std::span<const double> Tensor::data() const { return impl().data; }

std::span<double> Tensor::mutable_data() { return impl().data; }

double Tensor::value() const {
    if (numel() != 1)
        throw ContractError("value(): tensor has " + std::to_string(numel()) + " elements");
    return impl().data[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
    if (ndim() != 2 || r >= impl().shape[0] || c >= impl().shape[1])
        throw ContractError("at(): index out of range for shape " + shape_str());
    return impl().data[r * impl().shape[1] + c];
}

bool Tensor::requires_grad() const { return impl().requires_grad; }

void Tensor::set_requires_grad(bool rg) {
    impl().requires_grad = rg;
    if (!rg) impl().grad.clear();
}

bool Tensor::has_grad() const { return !impl().grad.empty(); }

std::span<const double> Tensor::grad() const {
    if (impl().grad.empty())
        throw ContractError("grad(): no gradient present (call backward first)");
    return impl().grad;
}

void Tensor::ensure_grad() const {
    if (!impl_) throw ContractError("use of an undefined Tensor");
    Impl& im = *impl_;
    if (im.requires_grad && im.grad.empty()) im.grad.assign(im.data.size(), 0.0);
}

std::span<double> Tensor::grad_span() const {
    if (!impl_) throw ContractError("use of an undefined Tensor");
    return impl_->grad;
}

void Tensor::zero_grad() {
    Impl& im = impl();
    if (!im.requires_grad) return;
    im.grad.assign(im.data.size(), 0.0);
}

Tensor Tensor::clone() const {
    auto copy = std::make_shared<Impl>();
    copy->shape = impl().shape;
    copy->data = impl().data;
    copy->requires_grad = impl().requires_grad;
    return Tensor(std::move(copy));
}

std::string Tensor::shape_str() const {
    const auto& s = impl().shape;
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += " x ";
        out += std::to_string(s[i]);
    }
    out += "]";
    return out;
}

namespace {
thread_local GradTape* g_active_tape = nullptr;
}

GradTape::GradTape() : prev_(g_active_tape) { g_active_tape = this; }

GradTape::~GradTape() { g_active_tape = prev_; }

GradTape* GradTape::active() { return g_active_tape; }

void GradTape::record(std::function<void()> backward_step) {
    nodes_.push_back(std::move(backward_step));
}

void GradTape::backward(const Tensor& loss) {
    if (consumed_)
        throw ContractError("backward() called twice on the same tape without reset()");
    if (loss.numel() != 1)
        throw ContractError("backward(): loss must be a scalar, got shape " + loss.shape_str());
    consumed_ = true;
    Tensor seed = loss;
    if (seed.requires_grad()) {
        seed.ensure_grad();
        seed.grad_span()[0] += 1.0;
    }
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
}

void GradTape::reset() {
    nodes_.clear();
    consumed_ = false;
}

} // namespace braintune
