#include "dnaembed/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dnaembed/errors.hpp"

namespace dnaembed {
namespace {

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

void require_rank(const char* op, const Tensor& x, std::size_t rank) {
  if (x.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     shape_str(x.shape()));
  }
}

/// Elementwise unary op; local_grad(x, y) is dy/dx.
template <typename Fwd, typename LocalGrad>
Tensor unary(Tape& tape, const char* op, const Tensor& x, Fwd fwd, LocalGrad local_grad) {
  Tensor out = tape.make_output(x.shape(), {&x});
  auto xv = x.data();
  auto yv = out.data();
  for (std::size_t i = 0; i < xv.size(); ++i) yv[i] = fwd(xv[i]);
  if (out.requires_grad()) {
    tape.record(op, [x, out, local_grad]() mutable {
      auto g = x.grad();
      auto xv = x.data();
      auto yv = out.data();
      auto gy = out.grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * local_grad(xv[i], yv[i]);
    });
  }
  return out;
}

}  // namespace

std::string shape_str(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return filled(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  for (std::size_t e : shape) {
    if (e == 0) throw ShapeError("tensor extents must be positive, got " + shape_str(shape));
  }
  if (shape_numel(shape) != values.size()) {
    throw ShapeError("tensor of shape " + shape_str(shape) + " cannot hold " +
                     std::to_string(values.size()) + " values");
  }
  Tensor t;
  t.impl_ = std::make_shared<Impl>();
  t.impl_->shape = std::move(shape);
  t.impl_->value = std::move(values);
  t.set_requires_grad(requires_grad);
  return t;
}

void Tensor::set_requires_grad(bool on) {
  impl_->requires_grad = on;
  if (on) {
    impl_->grad.assign(impl_->value.size(), 0.0);
  } else {
    impl_->grad.clear();
  }
}

void Tensor::zero_grad() { std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0); }

Tensor Tensor::clone() const { return from(impl_->shape, impl_->value, impl_->requires_grad); }

Tensor Tape::make_output(Shape shape, std::initializer_list<const Tensor*> inputs) {
  bool rg = false;
  if (recording_) {
    for (const Tensor* t : inputs) rg = rg || (t->defined() && t->requires_grad());
  }
  return Tensor::zeros(std::move(shape), rg);
}

Tensor Tape::make_output(Shape shape, std::span<const Tensor> inputs) {
  bool rg = false;
  if (recording_) {
    for (const Tensor& t : inputs) rg = rg || t.requires_grad();
  }
  return Tensor::zeros(std::move(shape), rg);
}

void Tape::record(std::string op, std::function<void()> backward) {
  entries_.push_back({std::move(op), std::move(backward)});
}

void Tape::backward(Tensor& loss) {
  if (loss.numel() != 1) {
    throw ShapeError("backward: loss must be a single value, got " + shape_str(loss.shape()));
  }
  if (!loss.requires_grad()) throw std::logic_error("backward: loss does not require grad");
  if (consumed_) throw std::logic_error("backward: tape already replayed");
  consumed_ = true;
  loss.grad()[0] += 1.0;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) it->backward();
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  Tensor out = tape.make_output(a.shape(), {&a, &b});
  auto av = a.data(), bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
  if (out.requires_grad()) {
    tape.record("add", [a, b, out]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  Tensor out = tape.make_output(a.shape(), {&a, &b});
  auto av = a.data(), bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] - bv[i];
  if (out.requires_grad()) {
    tape.record("sub", [a, b, out]() mutable {
      auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    });
  }
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  Tensor out = tape.make_output(a.shape(), {&a, &b});
  auto av = a.data(), bv = b.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  if (out.requires_grad()) {
    tape.record("mul", [a, b, out]() mutable {
      auto g = out.grad();
      auto av = a.data(), bv = b.data();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
      }
    });
  }
  return out;
}

Tensor scale(Tape& tape, const Tensor& a, double factor) {
  return unary(
      tape, "scale", a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias) {
  require_rank("add_bias", bias, 1);
  const std::size_t n = bias.dim(0);
  if (x.rank() == 0 || x.shape().back() != n) {
    throw ShapeError("add_bias: shape mismatch " + shape_str(x.shape()) + " vs " +
                     shape_str(bias.shape()));
  }
  Tensor out = tape.make_output(x.shape(), {&x, &bias});
  auto xv = x.data(), bv = bias.data();
  auto ov = out.data();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = xv[i] + bv[i % n];
  if (out.requires_grad()) {
    tape.record("add_bias", [x, bias, out, n]() mutable {
      auto g = out.grad();
      if (x.requires_grad()) {
        auto gx = x.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
      }
      if (bias.requires_grad()) {
        auto gb = bias.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i % n] += g[i];
      }
    });
  }
  return out;
}

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw ShapeError("matmul: shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  Tensor out = tape.make_output({m, n}, {&a, &b});
  {
    auto av = a.data(), bv = b.data();
    auto ov = out.data();
    for (std::size_t i = 0; i < m; ++i) {
      double* row = &ov[i * n];
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = av[i * k + p];
        if (aip == 0.0) continue;
        const double* brow = &bv[p * n];
        for (std::size_t j = 0; j < n; ++j) row[j] += aip * brow[j];
      }
    }
  }
  if (out.requires_grad()) {
    tape.record("matmul", [a, b, out, m, k, n]() mutable {
      auto g = out.grad();
      auto av = a.data(), bv = b.data();
      if (a.requires_grad()) {
        auto ga = a.grad();
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = &g[i * n];
          for (std::size_t p = 0; p < k; ++p) {
            const double* brow = &bv[p * n];
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
            ga[i * k + p] += acc;
          }
        }
      }
      if (b.requires_grad()) {
        auto gb = b.grad();
        for (std::size_t i = 0; i < m; ++i) {
          const double* grow = &g[i * n];
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = av[i * k + p];
            if (aip == 0.0) continue;
            double* gbrow = &gb[p * n];
            for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
          }
        }
      }
    });
  }
  return out;
}

Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias,
              std::size_t stride, std::size_t pad) {
  require_rank("conv1d", x, 3);
  require_rank("conv1d", weight, 3);
  const std::size_t batch = x.dim(0), len = x.dim(1), cin = x.dim(2);
  const std::size_t cout = weight.dim(0), ksize = weight.dim(1);
  if (weight.dim(2) != cin) {
    throw ShapeError("conv1d: shape mismatch " + shape_str(x.shape()) + " vs " +
                     shape_str(weight.shape()));
  }
  if (bias.defined() && bias.shape() != Shape{cout}) {
    throw ShapeError("conv1d: bias shape mismatch " + shape_str(bias.shape()) + " vs " +
                     shape_str(weight.shape()));
  }
  if (stride == 0 || len + 2 * pad < ksize) {
    throw ShapeError("conv1d: kernel " + shape_str(weight.shape()) + " does not fit input " +
                     shape_str(x.shape()));
  }
  const std::size_t out_len = (len + 2 * pad - ksize) / stride + 1;
  Tensor out = tape.make_output({batch, out_len, cout}, {&x, &weight, &bias});

  // Input position feeding output t through tap k, or -1 when in the padding.
  auto source = [=](std::size_t t, std::size_t k) -> std::ptrdiff_t {
    const auto pos = static_cast<std::ptrdiff_t>(t * stride + k) - static_cast<std::ptrdiff_t>(pad);
    return (pos < 0 || pos >= static_cast<std::ptrdiff_t>(len)) ? -1 : pos;
  };

  {
    auto xv = x.data(), wv = weight.data();
    auto ov = out.data();
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t t = 0; t < out_len; ++t) {
        double* orow = &ov[(b * out_len + t) * cout];
        if (bias.defined()) {
          auto bv = bias.data();
          std::copy(bv.begin(), bv.end(), orow);
        }
        for (std::size_t k = 0; k < ksize; ++k) {
          const std::ptrdiff_t pos = source(t, k);
          if (pos < 0) continue;
          const double* xrow = &xv[(b * len + static_cast<std::size_t>(pos)) * cin];
          for (std::size_t o = 0; o < cout; ++o) {
            const double* wrow = &wv[(o * ksize + k) * cin];
            double acc = 0.0;
            for (std::size_t c = 0; c < cin; ++c) acc += wrow[c] * xrow[c];
            orow[o] += acc;
          }
        }
      }
    }
  }

  if (out.requires_grad()) {
    tape.record("conv1d", [=]() mutable {
      auto g = out.grad();
      auto xv = x.data(), wv = weight.data();
      const bool gx_on = x.requires_grad(), gw_on = weight.requires_grad();
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t t = 0; t < out_len; ++t) {
          const double* grow = &g[(b * out_len + t) * cout];
          for (std::size_t k = 0; k < ksize; ++k) {
            const std::ptrdiff_t pos = source(t, k);
            if (pos < 0) continue;
            const std::size_t off = (b * len + static_cast<std::size_t>(pos)) * cin;
            const double* xrow = &xv[off];
            for (std::size_t o = 0; o < cout; ++o) {
              const double go = grow[o];
              if (go == 0.0) continue;
              const std::size_t woff = (o * ksize + k) * cin;
              if (gw_on) {
                double* gwrow = &weight.grad()[woff];
                for (std::size_t c = 0; c < cin; ++c) gwrow[c] += go * xrow[c];
              }
              if (gx_on) {
                double* gxrow = &x.grad()[off];
                const double* wrow = &wv[woff];
                for (std::size_t c = 0; c < cin; ++c) gxrow[c] += go * wrow[c];
              }
            }
          }
        }
      }
      if (bias.defined() && bias.requires_grad()) {
        auto gb = bias.grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i % cout] += g[i];
      }
    });
  }
  return out;
}

Tensor avgpool1d(Tape& tape, const Tensor& x, std::size_t k) {
  require_rank("avgpool1d", x, 3);
  const std::size_t batch = x.dim(0), len = x.dim(1), ch = x.dim(2);
  if (k == 0 || len < k) {
    throw ShapeError("avgpool1d: window " + std::to_string(k) + " does not fit input " +
                     shape_str(x.shape()));
  }
  const std::size_t out_len = len / k;
  const double inv = 1.0 / static_cast<double>(k);
  Tensor out = tape.make_output({batch, out_len, ch}, {&x});
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t t = 0; t < out_len; ++t) {
      double* orow = &ov[(b * out_len + t) * ch];
      for (std::size_t i = 0; i < k; ++i) {
        const double* xrow = &xv[(b * len + t * k + i) * ch];
        for (std::size_t c = 0; c < ch; ++c) orow[c] += xrow[c];
      }
      for (std::size_t c = 0; c < ch; ++c) orow[c] *= inv;
    }
  }
  if (out.requires_grad()) {
    tape.record("avgpool1d", [=]() mutable {
      auto g = out.grad();
      auto gx = x.grad();
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t t = 0; t < out_len; ++t) {
          const double* grow = &g[(b * out_len + t) * ch];
          for (std::size_t i = 0; i < k; ++i) {
            double* gxrow = &gx[(b * len + t * k + i) * ch];
            for (std::size_t c = 0; c < ch; ++c) gxrow[c] += grow[c] * inv;
          }
        }
      }
    });
  }
  return out;
}

Tensor relu(Tape& tape, const Tensor& x) {
  return unary(
      tape, "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh(Tape& tape, const Tensor& x) {
  return unary(
      tape, "tanh", x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
  return unary(
      tape, "sigmoid", x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor abs(Tape& tape, const Tensor& x) {
  return unary(
      tape, "abs", x, [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor square(Tape& tape, const Tensor& x) {
  return unary(
      tape, "square", x, [](double v) { return v * v; },
      [](double v, double) { return 2.0 * v; });
}

Tensor sqrt(Tape& tape, const Tensor& x) {
  for (double v : x.data()) {
    if (v < 0.0) throw DomainError("sqrt: negative input " + std::to_string(v));
  }
  return unary(
      tape, "sqrt", x, [](double v) { return std::sqrt(v); },
      [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Tensor sum(Tape& tape, const Tensor& x) {
  Tensor out = tape.make_output({1}, {&x});
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  out.data()[0] = acc;
  if (out.requires_grad()) {
    tape.record("sum", [x, out]() mutable {
      const double g = out.grad()[0];
      for (double& gx : x.grad()) gx += g;
    });
  }
  return out;
}

Tensor mean(Tape& tape, const Tensor& x) {
  return scale(tape, sum(tape, x), 1.0 / static_cast<double>(x.numel()));
}

Tensor row_sum(Tape& tape, const Tensor& x) {
  const std::size_t n = x.shape().back();
  const std::size_t rows = x.numel() / n;
  Shape out_shape(x.shape().begin(), x.shape().end() - 1);
  if (out_shape.empty()) out_shape = {1};
  Tensor out = tape.make_output(out_shape, {&x});
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += xv[r * n + j];
    ov[r] = acc;
  }
  if (out.requires_grad()) {
    tape.record("row_sum", [x, out, n, rows]() mutable {
      auto g = out.grad();
      auto gx = x.grad();
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < n; ++j) gx[r * n + j] += g[r];
      }
    });
  }
  return out;
}

Tensor concat(Tape& tape, std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) {
    throw ShapeError("concat: axis " + std::to_string(axis) + " out of range for " +
                     shape_str(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const Tensor& p : parts) {
    Shape probe = p.shape();
    if (probe.size() != first.size()) {
      throw ShapeError("concat: shape mismatch " + shape_str(first) + " vs " + shape_str(probe));
    }
    out_shape[axis] += probe[axis];
    probe[axis] = first[axis];
    if (probe != first) {
      throw ShapeError("concat: shape mismatch " + shape_str(first) + " vs " +
                       shape_str(p.shape()));
    }
  }
  const std::size_t outer = shape_numel(Shape(first.begin(), first.begin() + axis));
  const std::size_t inner = shape_numel(Shape(first.begin() + axis + 1, first.end()));
  const std::size_t out_row = out_shape[axis] * inner;

  Tensor out = tape.make_output(out_shape, parts);
  auto ov = out.data();
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    const std::size_t chunk = p.dim(axis) * inner;
    auto pv = p.data();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(&pv[o * chunk], chunk, &ov[o * out_row + offset]);
    }
    offset += chunk;
  }
  if (out.requires_grad()) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    tape.record("concat", [inputs, out, axis, outer, inner, out_row]() mutable {
      auto g = out.grad();
      std::size_t offset = 0;
      for (Tensor& p : inputs) {
        const std::size_t chunk = p.dim(axis) * inner;
        if (p.requires_grad()) {
          auto gp = p.grad();
          for (std::size_t o = 0; o < outer; ++o) {
            for (std::size_t i = 0; i < chunk; ++i) gp[o * chunk + i] += g[o * out_row + offset + i];
          }
        }
        offset += chunk;
      }
    });
  }
  return out;
}

Tensor slice(Tape& tape, const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  if (axis >= x.rank() || begin >= end || end > x.dim(axis)) {
    throw ShapeError("slice: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") on axis " + std::to_string(axis) + " invalid for " +
                     shape_str(x.shape()));
  }
  const Shape& in_shape = x.shape();
  Shape out_shape = in_shape;
  out_shape[axis] = end - begin;
  const std::size_t outer = shape_numel(Shape(in_shape.begin(), in_shape.begin() + axis));
  const std::size_t inner = shape_numel(Shape(in_shape.begin() + axis + 1, in_shape.end()));
  const std::size_t in_row = in_shape[axis] * inner;
  const std::size_t chunk = (end - begin) * inner;
  const std::size_t start = begin * inner;

  Tensor out = tape.make_output(out_shape, {&x});
  auto xv = x.data();
  auto ov = out.data();
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(&xv[o * in_row + start], chunk, &ov[o * chunk]);
  }
  if (out.requires_grad()) {
    tape.record("slice", [x, out, outer, in_row, chunk, start]() mutable {
      auto g = out.grad();
      auto gx = x.grad();
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < chunk; ++i) gx[o * in_row + start + i] += g[o * chunk + i];
      }
    });
  }
  return out;
}

Tensor reshape(Tape& tape, const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  Tensor out = tape.make_output(std::move(shape), {&x});
  std::copy(x.data().begin(), x.data().end(), out.data().begin());
  if (out.requires_grad()) {
    tape.record("reshape", [x, out]() mutable {
      auto g = out.grad();
      auto gx = x.grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return out;
}

Tensor batchnorm1d(Tape& tape, const Tensor& x, BatchNormState& state, Mode mode) {
  require_rank("batchnorm1d", x, 2);
  const std::size_t batch = x.dim(0), n = x.dim(1);
  if (state.running_mean.size() != n || state.running_var.size() != n) {
    throw ShapeError("batchnorm1d: state has " + std::to_string(state.running_mean.size()) +
                     " features, input " + shape_str(x.shape()));
  }
  Tensor out = tape.make_output(x.shape(), {&x});
  auto xv = x.data();
  auto yv = out.data();
  std::vector<double> inv_std(n);

  if (mode == Mode::Eval) {
    for (std::size_t j = 0; j < n; ++j) inv_std[j] = 1.0 / std::sqrt(state.running_var[j] + state.eps);
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < n; ++j) {
        yv[b * n + j] = (xv[b * n + j] - state.running_mean[j]) * inv_std[j];
      }
    }
    if (out.requires_grad()) {
      tape.record("batchnorm1d", [x, out, inv_std, batch, n]() mutable {
        auto g = out.grad();
        auto gx = x.grad();
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t j = 0; j < n; ++j) gx[b * n + j] += g[b * n + j] * inv_std[j];
        }
      });
    }
    return out;
  }

  if (batch < 2) {
    throw ShapeError("batchnorm1d: training needs a batch of at least 2, got " +
                     shape_str(x.shape()));
  }
  const double bsz = static_cast<double>(batch);
  for (std::size_t j = 0; j < n; ++j) {
    double mu = 0.0;
    for (std::size_t b = 0; b < batch; ++b) mu += xv[b * n + j];
    mu /= bsz;
    double var = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      const double c = xv[b * n + j] - mu;
      var += c * c;
    }
    var /= bsz;
    inv_std[j] = 1.0 / std::sqrt(var + state.eps);
    for (std::size_t b = 0; b < batch; ++b) yv[b * n + j] = (xv[b * n + j] - mu) * inv_std[j];
    state.running_mean[j] = (1.0 - state.momentum) * state.running_mean[j] + state.momentum * mu;
    state.running_var[j] = (1.0 - state.momentum) * state.running_var[j] +
                           state.momentum * var * bsz / (bsz - 1.0);
  }
  if (out.requires_grad()) {
    tape.record("batchnorm1d", [x, out, inv_std, batch, n]() mutable {
      auto g = out.grad();
      auto gx = x.grad();
      auto yv = out.data();
      const double bsz = static_cast<double>(batch);
      for (std::size_t j = 0; j < n; ++j) {
        double sum_g = 0.0, sum_gy = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
          sum_g += g[b * n + j];
          sum_gy += g[b * n + j] * yv[b * n + j];
        }
        for (std::size_t b = 0; b < batch; ++b) {
          gx[b * n + j] +=
              inv_std[j] / bsz * (bsz * g[b * n + j] - sum_g - yv[b * n + j] * sum_gy);
        }
      }
    });
  }
  return out;
}

}  // namespace dnaembed
