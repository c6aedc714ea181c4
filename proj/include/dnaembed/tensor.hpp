#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dnaembed {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

/// Dense row-major float64 array. Copies share storage; use clone() for a
/// deep copy. The gradient buffer exists iff requires_grad() is true.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);

  bool defined() const noexcept { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t numel() const { return impl_->value.size(); }

  std::span<double> data() const { return impl_->value; }
  std::span<double> grad() const { return impl_->grad; }
  double item() const { return impl_->value.at(0); }

  bool requires_grad() const noexcept { return impl_ && impl_->requires_grad; }
  void set_requires_grad(bool on);
  void zero_grad();

  Tensor clone() const;
  /// True when both handles refer to the same storage.
  bool same_storage(const Tensor& other) const noexcept { return impl_ == other.impl_; }

 private:
  struct Impl {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
  };
  std::shared_ptr<Impl> impl_;
};

/// Records backward rules in creation order. A tape serves one forward and
/// backward pass; a non-recording tape evaluates values only.
class Tape {
 public:
  explicit Tape(bool recording = true) : recording_(recording) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const noexcept { return recording_; }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Result tensor for an op: requires grad iff recording and any input does.
  Tensor make_output(Shape shape, std::initializer_list<const Tensor*> inputs);
  Tensor make_output(Shape shape, std::span<const Tensor> inputs);

  void record(std::string op, std::function<void()> backward);

  /// Seeds d(loss)/d(loss) = 1 and runs recorded rules newest first, each once.
  void backward(Tensor& loss);

 private:
  struct Entry {
    std::string op;
    std::function<void()> backward;
  };
  bool recording_;
  bool consumed_ = false;
  std::vector<Entry> entries_;
};

enum class Mode { Train, Eval };

/// Running statistics of a batchnorm layer without affine parameters.
struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  explicit BatchNormState(std::size_t features = 0)
      : running_mean(features, 0.0), running_var(features, 1.0) {}
};

// Elementwise ops require identical shapes.
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& a, double factor);
/// x (..., N) plus bias (N) broadcast over the leading axes.
Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias);

/// (M, K) x (K, N).
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);

/// Channels-last cross-correlation: x (B, L, Cin), weight (Cout, K, Cin),
/// optional bias (Cout) -> (B, (L + 2 pad - K) / stride + 1, Cout).
Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias,
              std::size_t stride, std::size_t pad);
/// x (B, L, C) -> (B, L / k, C), non-overlapping windows.
Tensor avgpool1d(Tape& tape, const Tensor& x, std::size_t k);

Tensor relu(Tape& tape, const Tensor& x);
Tensor tanh(Tape& tape, const Tensor& x);
Tensor sigmoid(Tape& tape, const Tensor& x);
/// Subgradient 0 at x = 0.
Tensor abs(Tape& tape, const Tensor& x);
Tensor square(Tape& tape, const Tensor& x);
/// Subgradient 0 at x = 0.
Tensor sqrt(Tape& tape, const Tensor& x);

/// Sum of all entries, shape (1).
Tensor sum(Tape& tape, const Tensor& x);
Tensor mean(Tape& tape, const Tensor& x);
/// Sum over the last axis; (B, N) -> (B).
Tensor row_sum(Tape& tape, const Tensor& x);

Tensor concat(Tape& tape, std::span<const Tensor> parts, std::size_t axis);
/// Entries [begin, end) along axis.
Tensor slice(Tape& tape, const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end);
Tensor reshape(Tape& tape, const Tensor& x, Shape shape);

/// x (B, N). Train mode normalizes by batch statistics (biased variance) and
/// folds the unbiased variance into the running averages; eval mode uses the
/// running averages.
Tensor batchnorm1d(Tape& tape, const Tensor& x, BatchNormState& state, Mode mode);

}  // namespace dnaembed
