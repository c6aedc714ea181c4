#include <doctest.h>

#include <cmath>
#include <vector>

#include "dnaembed/errors.hpp"
#include "dnaembed/grad_check.hpp"
#include "dnaembed/rng.hpp"
#include "dnaembed/tensor.hpp"

using namespace dnaembed;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape), true);
  Rng rng(seed, 99);
  for (double& v : t.data()) v = lo + (hi - lo) * rng.uniform();
  return t;
}

// Fixed random weights make every scalarization sensitive to all outputs.
Tensor weighted_sum(Tape& tape, const Tensor& y) {
  Tensor w = random_tensor(y.shape(), 12345);
  w.set_requires_grad(false);
  return sum(tape, mul(tape, y, w));
}

void check_unary_grad(Tensor (*op)(Tape&, const Tensor&), double lo, double hi) {
  const Tensor x = random_tensor({3, 4}, 7, lo, hi);
  const auto r = grad_check([op](Tape& t, const Tensor& in) { return weighted_sum(t, op(t, in)); },
                            x, 1e-5);
  CHECK(r.max_rel_error < 1e-6);
}

}  // namespace

TEST_CASE("worked op examples") {
  Tape tape(false);
  const Tensor x = Tensor::from({1, 4, 1}, {1, 2, 3, 4});
  const Tensor pooled = avgpool1d(tape, x, 2);
  CHECK(pooled.shape() == Shape{1, 2, 1});
  CHECK(pooled.data()[0] == 1.5);
  CHECK(pooled.data()[1] == 3.5);

  const Tensor in = Tensor::from({1, 3, 1}, {1, 2, 3});
  const Tensor w = Tensor::from({1, 3, 1}, {1, 0, -1});
  const Tensor y = conv1d(tape, in, w, Tensor(), 1, 1);
  REQUIRE(y.shape() == Shape{1, 3, 1});
  CHECK(y.data()[0] == -2.0);
  CHECK(y.data()[1] == -2.0);
  CHECK(y.data()[2] == 2.0);

  BatchNormState bn(2);
  const Tensor rows = Tensor::from({2, 2}, {1, 3, -1, 1});
  const Tensor z = batchnorm1d(tape, rows, bn, Mode::Train);
  const double shrink = 1.0 / std::sqrt(1.0 + 1e-5);
  CHECK(z.data()[0] == doctest::Approx(shrink));
  CHECK(z.data()[1] == doctest::Approx(shrink));
  CHECK(z.data()[2] == doctest::Approx(-shrink));
  CHECK(z.data()[3] == doctest::Approx(-shrink));
  // Running statistics: mean (0, 2), unbiased variance (2, 2).
  CHECK(bn.running_mean[0] == doctest::Approx(0.0));
  CHECK(bn.running_mean[1] == doctest::Approx(0.2));
  CHECK(bn.running_var[0] == doctest::Approx(0.9 + 0.1 * 2.0));
}

TEST_CASE("conv1d matches a direct sum") {
  Tape tape(false);
  const Tensor x = random_tensor({2, 7, 3}, 1);
  const Tensor w = random_tensor({4, 3, 3}, 2);
  const Tensor b = random_tensor({4}, 3);
  for (std::size_t stride : {1u, 2u}) {
    for (std::size_t pad : {0u, 1u, 2u}) {
      const Tensor y = conv1d(tape, x, w, b, stride, pad);
      const std::size_t lout = (7 + 2 * pad - 3) / stride + 1;
      REQUIRE(y.shape() == Shape{2, lout, 4});
      for (std::size_t n = 0; n < 2; ++n) {
        for (std::size_t o = 0; o < lout; ++o) {
          for (std::size_t c = 0; c < 4; ++c) {
            double acc = b.data()[c];
            for (std::size_t k = 0; k < 3; ++k) {
              const long pos = static_cast<long>(o * stride + k) - static_cast<long>(pad);
              if (pos < 0 || pos >= 7) continue;
              for (std::size_t ci = 0; ci < 3; ++ci) {
                acc += w.data()[(c * 3 + k) * 3 + ci] * x.data()[(n * 7 + pos) * 3 + ci];
              }
            }
            CHECK(y.data()[(n * lout + o) * 4 + c] == doctest::Approx(acc).epsilon(1e-12));
          }
        }
      }
    }
  }
}

TEST_CASE("quadratic gradient is exact under central differences") {
  const Tensor x = random_tensor({5}, 4);
  const auto r = grad_check([](Tape& t, const Tensor& in) { return sum(t, square(t, in)); }, x, 1e-4);
  CHECK(r.max_rel_error < 1e-7);
  CHECK(r.entries_checked == 5);
}

TEST_CASE("elementwise op gradients") {
  check_unary_grad(&tanh, -2, 2);
  check_unary_grad(&sigmoid, -3, 3);
  check_unary_grad(&square, -2, 2);
  check_unary_grad(&sqrt, 0.5, 2);
  // Away from the kink.
  check_unary_grad(&relu, 0.1, 2);
  check_unary_grad(&relu, -2, -0.1);
  check_unary_grad(&abs, 0.1, 2);
  check_unary_grad(&abs, -2, -0.1);
}

TEST_CASE("kink subgradients are zero") {
  Tape tape;
  Tensor x = Tensor::from({2}, {0.0, 0.0}, true);
  Tensor y = add(tape, add(tape, abs(tape, x), sqrt(tape, x)), relu(tape, x));
  Tensor s = sum(tape, y);
  tape.backward(s);
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == 0.0);
}

TEST_CASE("binary, reduction and shape op gradients") {
  const Tensor a = random_tensor({3, 4}, 10);
  const Tensor b = random_tensor({3, 4}, 11);
  const Tensor bias = random_tensor({4}, 12);
  const Tensor m = random_tensor({4, 2}, 13);
  std::vector<Tensor> all = {a, b, bias, m};
  auto check = [&](const std::function<Tensor(Tape&)>& f) {
    const auto r = grad_check_params(f, all, 1e-5);
    CHECK_MESSAGE(r.max_rel_error < 1e-6, r.worst);
  };
  check([&](Tape& t) { return weighted_sum(t, add(t, a, b)); });
  check([&](Tape& t) { return weighted_sum(t, sub(t, a, b)); });
  check([&](Tape& t) { return weighted_sum(t, mul(t, a, b)); });
  check([&](Tape& t) { return weighted_sum(t, scale(t, a, -2.5)); });
  check([&](Tape& t) { return weighted_sum(t, add_bias(t, a, bias)); });
  check([&](Tape& t) { return weighted_sum(t, matmul(t, a, m)); });
  check([&](Tape& t) { return mean(t, mul(t, a, a)); });
  check([&](Tape& t) { return weighted_sum(t, row_sum(t, mul(t, a, b))); });
  check([&](Tape& t) {
    const Tensor parts[] = {a, b};
    return weighted_sum(t, concat(t, parts, 1));
  });
  check([&](Tape& t) {
    const Tensor parts[] = {a, b};
    return weighted_sum(t, concat(t, parts, 0));
  });
  check([&](Tape& t) { return weighted_sum(t, slice(t, a, 1, 1, 3)); });
  check([&](Tape& t) { return weighted_sum(t, slice(t, b, 0, 2, 3)); });
  check([&](Tape& t) { return weighted_sum(t, reshape(t, a, {2, 6})); });
}

TEST_CASE("conv, pool and batchnorm gradients") {
  const Tensor x = random_tensor({2, 8, 3}, 20);
  const Tensor w = random_tensor({4, 3, 3}, 21);
  const Tensor b = random_tensor({4}, 22);
  std::vector<Tensor> params = {x, w, b};
  for (std::size_t stride : {1u, 2u}) {
    const auto r = grad_check_params(
        [&](Tape& t) { return weighted_sum(t, conv1d(t, x, w, b, stride, 1)); }, params, 1e-5);
    CHECK_MESSAGE(r.max_rel_error < 1e-6, r.worst);
  }
  std::vector<Tensor> only_x = {x};
  auto r = grad_check_params([&](Tape& t) { return weighted_sum(t, avgpool1d(t, x, 2)); }, only_x,
                             1e-5);
  CHECK(r.max_rel_error < 1e-6);

  const Tensor rows = random_tensor({6, 3}, 23);
  std::vector<Tensor> only_rows = {rows};
  r = grad_check_params(
      [&](Tape& t) {
        BatchNormState bn(3);
        return weighted_sum(t, batchnorm1d(t, rows, bn, Mode::Train));
      },
      only_rows, 1e-5);
  CHECK_MESSAGE(r.max_rel_error < 1e-6, r.worst);
}

TEST_CASE("batchnorm eval mode uses running statistics") {
  BatchNormState bn(2);
  bn.running_mean = {1.0, -1.0};
  bn.running_var = {4.0, 0.25};
  Tape tape(false);
  const Tensor y = batchnorm1d(tape, Tensor::from({1, 2}, {3.0, 0.0}), bn, Mode::Eval);
  CHECK(y.data()[0] == doctest::Approx(2.0 / std::sqrt(4.0 + 1e-5)));
  CHECK(y.data()[1] == doctest::Approx(1.0 / std::sqrt(0.25 + 1e-5)));
  CHECK_THROWS(batchnorm1d(tape, Tensor::from({1, 2}, {3.0, 0.0}), bn, Mode::Train));
}

TEST_CASE("shape errors and tape discipline") {
  Tape tape;
  const Tensor a = Tensor::zeros({2, 3});
  CHECK_THROWS_AS(add(tape, a, Tensor::zeros({3, 2})), ShapeError);
  CHECK_THROWS_AS(matmul(tape, a, Tensor::zeros({2, 3})), ShapeError);
  CHECK_THROWS_AS(reshape(tape, a, {4}), ShapeError);
  Tensor x = Tensor::from({1}, {2.0}, true);
  Tensor y = square(tape, x);
  tape.backward(y);
  CHECK(x.grad()[0] == 4.0);
  CHECK_THROWS(tape.backward(y));
}

TEST_CASE("gradients accumulate across uses") {
  Tape tape;
  Tensor x = Tensor::from({1}, {3.0}, true);
  Tensor y = add(tape, mul(tape, x, x), x);
  tape.backward(y);
  CHECK(x.grad()[0] == 7.0);
}
