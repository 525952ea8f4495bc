#include "dualmind/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <sstream>
#include <utility>

#include "dualmind/errors.hpp"
#include "dualmind/kernels.hpp"

namespace dualmind {

namespace {

using Data = std::shared_ptr<detail::TensorData>;

std::atomic<long> g_next_tape_id{1};

void ensure_grad(const Data& d) {
    if (d->grad.empty()) d->grad.assign(d->values.size(), 0.0);
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        std::ostringstream msg;
        msg << op << ": shape mismatch " << shape_str(a.shape()) << " vs "
            << shape_str(b.shape());
        throw ShapeError(msg.str());
    }
}

double stable_sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> transposed(const double* src, std::size_t rows,
                               std::size_t cols) {
    std::vector<double> out(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            out[j * rows + i] = src[i * cols + j];
        }
    }
    return out;
}

}  // namespace

std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << " ";
        os << s[i];
    }
    os << "]";
    return os.str();
}

// ---------------------------------------------------------------- Tensor

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    auto d = std::make_shared<detail::TensorData>();
    d->values.assign(shape_numel(shape), 0.0);
    d->shape = std::move(shape);
    d->requires_grad = requires_grad;
    return Tensor(std::move(d));
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
    if (shape_numel(shape) != values.size()) {
        throw ShapeError("constant: " + shape_str(shape) + " does not hold " +
                         std::to_string(values.size()) + " values");
    }
    auto d = std::make_shared<detail::TensorData>();
    d->shape = std::move(shape);
    d->values = std::move(values);
    return Tensor(std::move(d));
}

Tensor Tensor::vector(std::vector<double> values) {
    Shape s{values.size()};
    return constant(std::move(s), std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
    return constant(Shape{rows, cols}, std::move(values));
}

Tensor Tensor::scalar(double v) { return constant(Shape{1}, {v}); }

const Shape& Tensor::shape() const { return d_->shape; }
std::size_t Tensor::numel() const { return d_->values.size(); }
std::size_t Tensor::rank() const { return d_->shape.size(); }

std::span<const double> Tensor::values() const { return d_->values; }
std::span<double> Tensor::values_mut() { return d_->values; }

double Tensor::at(std::size_t i) const { return d_->values.at(i); }

double Tensor::item() const {
    if (numel() != 1) {
        throw ShapeError("item: tensor has shape " + shape_str(d_->shape));
    }
    return d_->values[0];
}

bool Tensor::requires_grad() const { return d_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool v) {
    d_->requires_grad = v;
    return *this;
}

bool Tensor::grad_present() const { return d_ && !d_->grad.empty(); }

std::span<const double> Tensor::grad() const {
    if (!grad_present()) {
        throw StateError("grad: no gradient populated for this tensor");
    }
    return d_->grad;
}

std::span<double> Tensor::grad_mut() {
    if (!grad_present()) {
        throw StateError("grad: no gradient populated for this tensor");
    }
    return d_->grad;
}

void Tensor::zero_grad() { d_->grad.assign(d_->values.size(), 0.0); }

bool bit_equal(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) return false;
    const auto av = a.values();
    const auto bv = b.values();
    return std::memcmp(av.data(), bv.data(), av.size() * sizeof(double)) == 0;
}

std::uint64_t value_checksum(std::span<const double> v) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    const auto* bytes = reinterpret_cast<const unsigned char*>(v.data());
    for (std::size_t i = 0; i < v.size() * sizeof(double); ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t value_checksum(const Tensor& t) {
    return value_checksum(t.values());
}

std::vector<double> softmax_values(std::span<const double> logits) {
    double mx = logits[0];
    for (double x : logits) mx = std::max(mx, x);
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

// ------------------------------------------------------------------ Tape

Tape::Tape() : id_(g_next_tape_id.fetch_add(1)) {}

Tensor Tape::make_result(Shape shape, std::vector<double> values,
                         std::initializer_list<const Tensor*> inputs,
                         std::function<void()> backward_step) {
    auto out = std::make_shared<detail::TensorData>();
    out->shape = std::move(shape);
    out->values = std::move(values);
    bool needs_grad = false;
    for (const Tensor* in : inputs) needs_grad |= in->requires_grad();
    out->requires_grad = needs_grad;
    out->tape_id = id_;
    out->node = static_cast<long>(steps_.size());
    Tensor result(out);
    if (needs_grad) steps_.push_back(std::move(backward_step));
    return result;
}

Tensor Tape::matmul(const Tensor& a, const Tensor& b) {
    const bool a_vec = a.rank() == 1;
    const bool b_vec = b.rank() == 1;
    if (a.rank() > 2 || b.rank() > 2 || (a_vec && b_vec)) {
        throw ShapeError("matmul: unsupported ranks " + shape_str(a.shape()) +
                         " x " + shape_str(b.shape()));
    }
    const std::size_t m = a_vec ? 1 : a.shape()[0];
    const std::size_t k = a_vec ? a.shape()[0] : a.shape()[1];
    const std::size_t k2 = b_vec ? b.shape()[0] : b.shape()[0];
    const std::size_t n = b_vec ? 1 : b.shape()[1];
    if (k != k2) {
        throw ShapeError("matmul: inner dimensions disagree " +
                         shape_str(a.shape()) + " x " + shape_str(b.shape()));
    }
    std::vector<double> out(m * n);
    kernels::matmul(out.data(), a.values().data(), b.values().data(), m, k, n);

    Shape out_shape;
    if (a_vec) out_shape = {n};
    else if (b_vec) out_shape = {m};
    else out_shape = {m, n};

    auto ad = a.d_;
    auto bd = b.d_;
    Tensor result = make_result(std::move(out_shape), std::move(out), {&a, &b},
                                std::function<void()>());
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [ad, bd, od, m, k, n]() {
            if (od->grad.empty()) return;
            const double* dout = od->grad.data();
            if (ad->requires_grad) {
                // dA += dOut * B^T
                ensure_grad(ad);
                std::vector<double> bt = transposed(bd->values.data(), k, n);
                std::vector<double> tmp(m * k);
                kernels::matmul(tmp.data(), dout, bt.data(), m, n, k);
                kernels::axpy(ad->grad.data(), 1.0, tmp.data(), m * k);
            }
            if (bd->requires_grad) {
                // dB += A^T * dOut
                ensure_grad(bd);
                std::vector<double> at = transposed(ad->values.data(), m, k);
                std::vector<double> tmp(k * n);
                kernels::matmul(tmp.data(), at.data(), dout, k, m, n);
                kernels::axpy(bd->grad.data(), 1.0, tmp.data(), k * n);
            }
        };
    }
    return result;
}

Tensor Tape::add(const Tensor& a, const Tensor& b) {
    check_same_shape("add", a, b);
    const std::size_t n = a.numel();
    std::vector<double> out(n);
    kernels::add(out.data(), a.values().data(), b.values().data(), n);
    auto ad = a.d_;
    auto bd = b.d_;
    Tensor result = make_result(a.shape(), std::move(out), {&a, &b}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [ad, bd, od, n]() {
            if (od->grad.empty()) return;
            if (ad->requires_grad) {
                ensure_grad(ad);
                kernels::axpy(ad->grad.data(), 1.0, od->grad.data(), n);
            }
            if (bd->requires_grad) {
                ensure_grad(bd);
                kernels::axpy(bd->grad.data(), 1.0, od->grad.data(), n);
            }
        };
    }
    return result;
}

Tensor Tape::sub(const Tensor& a, const Tensor& b) {
    check_same_shape("sub", a, b);
    const std::size_t n = a.numel();
    std::vector<double> out(n);
    kernels::sub(out.data(), a.values().data(), b.values().data(), n);
    auto ad = a.d_;
    auto bd = b.d_;
    Tensor result = make_result(a.shape(), std::move(out), {&a, &b}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [ad, bd, od, n]() {
            if (od->grad.empty()) return;
            if (ad->requires_grad) {
                ensure_grad(ad);
                kernels::axpy(ad->grad.data(), 1.0, od->grad.data(), n);
            }
            if (bd->requires_grad) {
                ensure_grad(bd);
                kernels::axpy(bd->grad.data(), -1.0, od->grad.data(), n);
            }
        };
    }
    return result;
}

Tensor Tape::mul(const Tensor& a, const Tensor& b) {
    check_same_shape("mul", a, b);
    const std::size_t n = a.numel();
    std::vector<double> out(n);
    kernels::mul(out.data(), a.values().data(), b.values().data(), n);
    auto ad = a.d_;
    auto bd = b.d_;
    Tensor result = make_result(a.shape(), std::move(out), {&a, &b}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [ad, bd, od, n]() {
            if (od->grad.empty()) return;
            if (ad->requires_grad) {
                ensure_grad(ad);
                kernels::mul_acc(ad->grad.data(), bd->values.data(),
                                 od->grad.data(), n);
            }
            if (bd->requires_grad) {
                ensure_grad(bd);
                kernels::mul_acc(bd->grad.data(), ad->values.data(),
                                 od->grad.data(), n);
            }
        };
    }
    return result;
}

Tensor Tape::scale(const Tensor& a, double s) {
    const std::size_t n = a.numel();
    std::vector<double> out(n);
    kernels::scale(out.data(), a.values().data(), s, n);
    auto ad = a.d_;
    Tensor result = make_result(a.shape(), std::move(out), {&a}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [ad, od, s, n]() {
            if (od->grad.empty()) return;
            ensure_grad(ad);
            kernels::axpy(ad->grad.data(), s, od->grad.data(), n);
        };
    }
    return result;
}

Tensor Tape::mul_scalar(const Tensor& a, const Tensor& s) {
    if (s.numel() != 1) {
        throw ShapeError("mul_scalar: scalar operand has shape " +
                         shape_str(s.shape()));
    }
    const std::size_t n = a.numel();
    const double sv = s.at(0);
    std::vector<double> out(n);
    kernels::scale(out.data(), a.values().data(), sv, n);
    auto ad = a.d_;
    auto sd = s.d_;
    Tensor result = make_result(a.shape(), std::move(out), {&a, &s}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [ad, sd, od, sv, n]() {
            if (od->grad.empty()) return;
            if (ad->requires_grad) {
                ensure_grad(ad);
                kernels::axpy(ad->grad.data(), sv, od->grad.data(), n);
            }
            if (sd->requires_grad) {
                ensure_grad(sd);
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += ad->values[i] * od->grad[i];
                }
                sd->grad[0] += acc;
            }
        };
    }
    return result;
}

Tensor Tape::relu(const Tensor& a) {
    const std::size_t n = a.numel();
    std::vector<double> out(n);
    kernels::relu(out.data(), a.values().data(), n);
    auto ad = a.d_;
    Tensor result = make_result(a.shape(), std::move(out), {&a}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [ad, od, n]() {
            if (od->grad.empty()) return;
            ensure_grad(ad);
            kernels::relu_grad(ad->grad.data(), ad->values.data(),
                               od->grad.data(), n);
        };
    }
    return result;
}

Tensor Tape::sigmoid(const Tensor& a) {
    const std::size_t n = a.numel();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = stable_sigmoid(a.at(i));
    auto ad = a.d_;
    Tensor result = make_result(a.shape(), std::move(out), {&a}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [ad, od, n]() {
            if (od->grad.empty()) return;
            ensure_grad(ad);
            for (std::size_t i = 0; i < n; ++i) {
                const double s = od->values[i];
                ad->grad[i] += s * (1.0 - s) * od->grad[i];
            }
        };
    }
    return result;
}

Tensor Tape::tanh(const Tensor& a) {
    const std::size_t n = a.numel();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::tanh(a.at(i));
    auto ad = a.d_;
    Tensor result = make_result(a.shape(), std::move(out), {&a}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [ad, od, n]() {
            if (od->grad.empty()) return;
            ensure_grad(ad);
            for (std::size_t i = 0; i < n; ++i) {
                const double t = od->values[i];
                ad->grad[i] += (1.0 - t * t) * od->grad[i];
            }
        };
    }
    return result;
}

Tensor Tape::concat(const Tensor& a, const Tensor& b) {
    if (a.rank() != 1 || b.rank() != 1) {
        throw ShapeError("concat: rank-1 operands required, got " +
                         shape_str(a.shape()) + " and " + shape_str(b.shape()));
    }
    const std::size_t p = a.numel();
    const std::size_t q = b.numel();
    std::vector<double> out(p + q);
    std::copy(a.values().begin(), a.values().end(), out.begin());
    std::copy(b.values().begin(), b.values().end(), out.begin() + p);
    auto ad = a.d_;
    auto bd = b.d_;
    Tensor result = make_result(Shape{p + q}, std::move(out), {&a, &b}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [ad, bd, od, p, q]() {
            if (od->grad.empty()) return;
            if (ad->requires_grad && p > 0) {
                ensure_grad(ad);
                kernels::axpy(ad->grad.data(), 1.0, od->grad.data(), p);
            }
            if (bd->requires_grad && q > 0) {
                ensure_grad(bd);
                kernels::axpy(bd->grad.data(), 1.0, od->grad.data() + p, q);
            }
        };
    }
    return result;
}

Tensor Tape::softmax(const Tensor& logits) {
    if (logits.rank() != 1 || logits.numel() == 0) {
        throw ShapeError("softmax: non-empty vector required, got " +
                         shape_str(logits.shape()));
    }
    for (double x : logits.values()) {
        if (!std::isfinite(x)) {
            throw NumericError("softmax: non-finite logit");
        }
    }
    const std::size_t n = logits.numel();
    std::vector<double> out = softmax_values(logits.values());
    auto ad = logits.d_;
    Tensor result = make_result(Shape{n}, std::move(out), {&logits}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [ad, od, n]() {
            if (od->grad.empty()) return;
            ensure_grad(ad);
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                dot += od->grad[i] * od->values[i];
            }
            for (std::size_t i = 0; i < n; ++i) {
                ad->grad[i] += od->values[i] * (od->grad[i] - dot);
            }
        };
    }
    return result;
}

Tensor Tape::cross_entropy(const Tensor& logits, std::size_t target) {
    if (logits.rank() != 1 || logits.numel() == 0) {
        throw ShapeError("cross_entropy: non-empty vector required, got " +
                         shape_str(logits.shape()));
    }
    const std::size_t n = logits.numel();
    if (target >= n) {
        throw IndexError("cross_entropy: target " + std::to_string(target) +
                         " out of range for " + std::to_string(n) + " classes");
    }
    double mx = logits.at(0);
    for (double x : logits.values()) mx = std::max(mx, x);
    double sum = 0.0;
    for (double x : logits.values()) sum += std::exp(x - mx);
    const double loss = std::log(sum) + mx - logits.at(target);

    auto probs = std::make_shared<std::vector<double>>(
        softmax_values(logits.values()));
    auto ad = logits.d_;
    Tensor result = make_result(Shape{1}, {loss}, {&logits}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [ad, od, probs, target, n]() {
            if (od->grad.empty()) return;
            ensure_grad(ad);
            const double d = od->grad[0];
            for (std::size_t i = 0; i < n; ++i) {
                const double onehot = (i == target) ? 1.0 : 0.0;
                ad->grad[i] += ((*probs)[i] - onehot) * d;
            }
        };
    }
    return result;
}

Tensor Tape::sum(const Tensor& a) {
    double acc = 0.0;
    for (double x : a.values()) acc += x;
    auto ad = a.d_;
    Tensor result = make_result(Shape{1}, {acc}, {&a}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [ad, od]() {
            if (od->grad.empty()) return;
            ensure_grad(ad);
            const double d = od->grad[0];
            for (double& g : ad->grad) g += d;
        };
    }
    return result;
}

Tensor Tape::row(const Tensor& m, std::size_t r) {
    if (m.rank() != 2) {
        throw ShapeError("row: matrix required, got " + shape_str(m.shape()));
    }
    const std::size_t rows = m.shape()[0];
    const std::size_t cols = m.shape()[1];
    if (r >= rows) {
        throw IndexError("row: index " + std::to_string(r) +
                         " out of range for " + std::to_string(rows) + " rows");
    }
    std::vector<double> out(m.values().begin() + r * cols,
                            m.values().begin() + (r + 1) * cols);
    auto md = m.d_;
    Tensor result = make_result(Shape{cols}, std::move(out), {&m}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [md, od, r, cols]() {
            if (od->grad.empty()) return;
            ensure_grad(md);
            kernels::axpy(md->grad.data() + r * cols, 1.0, od->grad.data(),
                          cols);
        };
    }
    return result;
}

Tensor Tape::slice(const Tensor& v, std::size_t offset, std::size_t len) {
    if (v.rank() != 1) {
        throw ShapeError("slice: vector required, got " + shape_str(v.shape()));
    }
    if (offset + len > v.numel()) {
        throw ShapeError("slice: [" + std::to_string(offset) + ", " +
                         std::to_string(offset + len) + ") exceeds length " +
                         std::to_string(v.numel()));
    }
    std::vector<double> out(v.values().begin() + offset,
                            v.values().begin() + offset + len);
    auto vd = v.d_;
    Tensor result = make_result(Shape{len}, std::move(out), {&v}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        steps_.back() = [vd, od, offset, len]() {
            if (od->grad.empty()) return;
            ensure_grad(vd);
            kernels::axpy(vd->grad.data() + offset, 1.0, od->grad.data(), len);
        };
    }
    return result;
}

Tensor Tape::reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel()) {
        throw ShapeError("reshape: cannot view " + shape_str(a.shape()) +
                         " as " + shape_str(shape));
    }
    std::vector<double> out(a.values().begin(), a.values().end());
    auto ad = a.d_;
    Tensor result = make_result(std::move(shape), std::move(out), {&a}, {});
    auto od = result.d_;
    if (result.requires_grad()) {
        const std::size_t n = a.numel();
        steps_.back() = [ad, od, n]() {
            if (od->grad.empty()) return;
            ensure_grad(ad);
            kernels::axpy(ad->grad.data(), 1.0, od->grad.data(), n);
        };
    }
    return result;
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw ShapeError("backward: loss must be a single element, got " +
                         (loss.defined() ? shape_str(loss.shape()) : "<null>"));
    }
    if (loss.d_->tape_id != id_) {
        throw TapeError("backward: loss was not produced on this tape");
    }
    ensure_grad(loss.d_);
    loss.d_->grad[0] = 1.0;
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
        (*it)();
    }
}

}  // namespace dualmind
