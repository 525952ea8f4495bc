#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dualmind {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

namespace detail {
struct TensorData {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty until first accumulation
    bool requires_grad = false;
    long tape_id = -1;  // tape that produced this tensor, -1 for leaves
    long node = -1;     // op index on that tape
};
}  // namespace detail

/// Dense n-dimensional array of doubles with an optional gradient slot.
/// Tensors are cheap shared handles; ops on a Tape produce new tensors and
/// record how to push gradients back to their inputs.
class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor constant(Shape shape, std::vector<double> values);
    static Tensor vector(std::vector<double> values);
    static Tensor matrix(std::size_t rows, std::size_t cols,
                         std::vector<double> values);
    static Tensor scalar(double v);

    bool defined() const { return static_cast<bool>(d_); }
    const Shape& shape() const;
    std::size_t numel() const;
    std::size_t rank() const;

    std::span<const double> values() const;
    std::span<double> values_mut();
    double at(std::size_t i) const;
    /// Value of a one-element tensor; ShapeError otherwise.
    double item() const;

    bool requires_grad() const;
    Tensor& set_requires_grad(bool v);

    bool grad_present() const;
    /// StateError if no gradient has been populated.
    std::span<const double> grad() const;
    std::span<double> grad_mut();
    /// Allocate-and-zero the gradient buffer.
    void zero_grad();

    /// Identity of the underlying storage (two handles to one buffer).
    bool same_storage(const Tensor& other) const { return d_ == other.d_; }

  private:
    explicit Tensor(std::shared_ptr<detail::TensorData> d) : d_(std::move(d)) {}
    std::shared_ptr<detail::TensorData> d_;
    friend class Tape;
};

/// True when shapes and value bit patterns agree exactly.
bool bit_equal(const Tensor& a, const Tensor& b);

/// FNV-1a over the raw value bytes; used for freeze-contract checks.
std::uint64_t value_checksum(const Tensor& t);
std::uint64_t value_checksum(std::span<const double> v);

/// Numerically stable softmax of a plain buffer (no tape involvement).
std::vector<double> softmax_values(std::span<const double> logits);

/// Define-by-run gradient tape. A tape and the tensors it produced belong to
/// one logical thread; a fresh tape is built for every forward pass. Ops are
/// recorded only when some input requires a gradient, and backward() walks
/// the records exactly once in reverse order, accumulating additively into
/// each input's grad buffer (callers zero grads between steps).
class Tape {
  public:
    Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Matrix product. Accepts [m,k]x[k,n] and the rank-1 promotions
    /// vec[k]x[k,n] -> vec[n] and [m,k]xvec[k] -> vec[m].
    Tensor matmul(const Tensor& a, const Tensor& b);

    Tensor add(const Tensor& a, const Tensor& b);
    Tensor sub(const Tensor& a, const Tensor& b);
    Tensor mul(const Tensor& a, const Tensor& b);
    /// s * a for a plain constant s.
    Tensor scale(const Tensor& a, double s);
    /// Elementwise product with a one-element tensor, differentiable in both.
    Tensor mul_scalar(const Tensor& a, const Tensor& s);

    Tensor relu(const Tensor& a);
    Tensor sigmoid(const Tensor& a);
    Tensor tanh(const Tensor& a);

    /// Vector concatenation (rank 1 only).
    Tensor concat(const Tensor& a, const Tensor& b);

    /// Stable softmax over a vector; NumericError on non-finite input.
    Tensor softmax(const Tensor& logits);

    /// -log(softmax(logits)[target]) as a one-element tensor.
    Tensor cross_entropy(const Tensor& logits, std::size_t target);

    Tensor sum(const Tensor& a);

    /// Row r of a matrix as a vector.
    Tensor row(const Tensor& m, std::size_t r);
    /// Contiguous slice of a vector.
    Tensor slice(const Tensor& v, std::size_t offset, std::size_t len);
    /// Same values, new shape (sizes must match).
    Tensor reshape(const Tensor& a, Shape shape);

    /// Seed d(loss)/d(loss) = 1 and run all recorded ops backwards.
    /// ShapeError if loss is not one element, TapeError if it was not
    /// produced by this tape.
    void backward(const Tensor& loss);

    std::size_t op_count() const { return steps_.size(); }
    long id() const { return id_; }

  private:
    using Data = std::shared_ptr<detail::TensorData>;

    Tensor make_result(Shape shape, std::vector<double> values,
                       std::initializer_list<const Tensor*> inputs,
                       std::function<void()> backward_step);

    long id_;
    std::vector<std::function<void()>> steps_;
};

}  // namespace dualmind
