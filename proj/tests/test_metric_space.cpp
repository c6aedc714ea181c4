#include <doctest.h>

#include <cmath>
#include <vector>

#include "dnaembed/errors.hpp"
#include "dnaembed/grad_check.hpp"
#include "dnaembed/metric_space.hpp"
#include "dnaembed/rng.hpp"
#include "oracles.hpp"

using namespace dnaembed;

namespace {
const double kLog2e = 1.4426950408889634;
}

TEST_CASE("rescaling factors") {
  CHECK(rescale_factor({SpaceKind::SqEuclid, 80}) == doctest::Approx(0.7071067811865476).epsilon(1e-14));
  CHECK(rescale_factor({SpaceKind::L1, 80}) == doctest::Approx(0.886226925452758).epsilon(1e-14));
  const double l2 = 80.0 * std::exp(oracle::ln_gamma_half(40.0) - oracle::ln_gamma_half(40.5)) / 2.0;
  CHECK(rescale_factor({SpaceKind::L2, 80}) == doctest::Approx(l2).epsilon(1e-12));
  CHECK(l2 == doctest::Approx(6.3447).epsilon(1e-4));
}

TEST_CASE("distances") {
  const std::vector<double> u = {0, 0}, v = {3, 4};
  CHECK(distance(SpaceKind::SqEuclid, u, v) == 25.0);
  CHECK(distance(SpaceKind::L2, u, v) == 5.0);
  CHECK(distance(SpaceKind::L1, u, v) == 7.0);
  CHECK(distance(SpaceKind::L1, v, v) == 0.0);

  Tape tape(false);
  const Tensor ones = Tensor::filled({1, 5}, 1.0);
  const Tensor r = rescaled_embed(tape, {SpaceKind::SqEuclid, 5}, ones);
  for (double x : r.data()) CHECK(x == doctest::Approx(std::sqrt(2.0) / 2.0));
}

TEST_CASE("rescaling is homogeneous in the distance") {
  Rng rng(1);
  Tensor a = Tensor::zeros({3, 7}), b = Tensor::zeros({3, 7});
  for (double& x : a.data()) x = rng.normal();
  for (double& x : b.data()) x = rng.normal();
  Tape tape(false);
  for (SpaceKind kind : {SpaceKind::SqEuclid, SpaceKind::L1, SpaceKind::L2}) {
    const EmbeddingSpace space{kind, 7};
    const double r = rescale_factor(space);
    const Tensor raw = distance(tape, kind, a, b);
    const Tensor resc =
        distance(tape, kind, rescaled_embed(tape, space, a), rescaled_embed(tape, space, b));
    const double power = kind == SpaceKind::SqEuclid ? r * r : r;
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(resc.data()[i] == doctest::Approx(power * raw.data()[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("losses") {
  CHECK(loss_value({LossKind::MSE}, 3.0, 5.0) == 4.0);
  CHECK(loss_value({LossKind::MAE}, 3.0, 5.0) == 2.0);
  CHECK(rechi2(2.0, 2.0) == doctest::Approx(1.0 + kLog2e).epsilon(1e-12));
  CHECK(rechi2(1.0, 4.0) == doctest::Approx(2.0 + 0.5 * kLog2e).epsilon(1e-12));
  CHECK(rechi2(1.0, 4.0) == doctest::Approx(2.721348).epsilon(1e-6));
  CHECK(rechi2_nat(3.7, 9.0) == doctest::Approx(std::log(2.0) * rechi2(3.7, 9.0)).epsilon(1e-13));
  CHECK_THROWS_AS(rechi2(0.0, 3.0), DomainError);
  CHECK_THROWS_AS(rechi2(1.0, 0.0), DomainError);

  // Grid search for the minimizer at d = 10.
  double best = 0.0, best_val = 1e300;
  for (int i = 1; i <= 200000; ++i) {
    const double x = i * 1e-3;
    const double v = rechi2(x, 10.0);
    if (v < best_val) {
      best_val = v;
      best = x;
    }
  }
  CHECK(best == doctest::Approx(8.0).epsilon(1e-9));

  // The clamp keeps the loss finite and flat below epsilon.
  const LossSpec spec{LossKind::REchi2, 1e-6};
  CHECK(std::isfinite(loss_value(spec, 0.0, 5.0)));
  CHECK(loss_value(spec, -1.0, 5.0) == loss_value(spec, 1e-6, 5.0));
  CHECK(loss_derivative(spec, 1e-9, 5.0) == 0.0);
}

TEST_CASE("loss derivatives match finite differences") {
  for (LossKind kind : {LossKind::MSE, LossKind::MAE, LossKind::REchi2}) {
    const LossSpec spec{kind, 1e-6};
    for (double d : {1.0, 3.0, 17.0}) {
      for (double dhat : {0.4, 2.5, 9.3, 30.0}) {
        const double h = 1e-6;
        const double num = (loss_value(spec, dhat + h, d) - loss_value(spec, dhat - h, d)) / (2 * h);
        const double ana = loss_derivative(spec, dhat, d);
        CHECK(std::fabs(num - ana) / std::max(1e-8, std::fabs(num) + std::fabs(ana)) < 1e-5);
      }
    }
  }
}

TEST_CASE("distance and pair loss gradients") {
  Rng rng(2);
  Tensor u = Tensor::zeros({4, 6}, true), v = Tensor::zeros({4, 6}, true);
  for (double& x : u.data()) x = rng.normal();
  for (double& x : v.data()) x = rng.normal();
  std::vector<Tensor> params = {u, v};
  const std::vector<double> d = {1.0, 2.0, 5.0, 11.0};
  for (SpaceKind kind : {SpaceKind::SqEuclid, SpaceKind::L1, SpaceKind::L2}) {
    for (LossKind loss : {LossKind::MSE, LossKind::MAE, LossKind::REchi2}) {
      const auto r = grad_check_params(
          [&](Tape& t) { return pair_loss(t, {loss, 1e-6}, distance(t, kind, u, v), d); }, params,
          1e-6);
      CHECK_MESSAGE(r.max_rel_error < 1e-5, space_name(kind), "/", loss_name(loss), " ", r.worst);
    }
  }
}

TEST_CASE("names round trip") {
  for (SpaceKind k : {SpaceKind::SqEuclid, SpaceKind::L1, SpaceKind::L2}) {
    CHECK(parse_space(space_name(k)) == k);
  }
  for (LossKind k : {LossKind::MSE, LossKind::MAE, LossKind::REchi2}) {
    CHECK(parse_loss(loss_name(k)) == k);
  }
  CHECK_THROWS_AS(parse_space("l3"), std::invalid_argument);
}
