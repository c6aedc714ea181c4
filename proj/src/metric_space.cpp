#include "dnaembed/metric_space.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dnaembed/errors.hpp"
#include "dnaembed/special.hpp"

namespace dnaembed {

std::string_view space_name(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::L1: return "l1";
    case SpaceKind::L2: return "l2";
    case SpaceKind::SqEuclid: return "sqeuclid";
  }
  return "?";
}

SpaceKind parse_space(std::string_view name) {
  for (SpaceKind k : {SpaceKind::L1, SpaceKind::L2, SpaceKind::SqEuclid}) {
    if (space_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown embedding space '" + std::string(name) +
                              "' (expected l1, l2 or sqeuclid)");
}

std::string_view loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::MSE: return "mse";
    case LossKind::MAE: return "mae";
    case LossKind::REchi2: return "rechi2";
  }
  return "?";
}

LossKind parse_loss(std::string_view name) {
  for (LossKind k : {LossKind::MSE, LossKind::MAE, LossKind::REchi2}) {
    if (loss_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown loss '" + std::string(name) +
                              "' (expected mse, mae or rechi2)");
}

double rescale_factor(const EmbeddingSpace& space) {
  switch (space.kind) {
    case SpaceKind::SqEuclid: return std::numbers::sqrt2 / 2.0;
    case SpaceKind::L1: return std::sqrt(std::numbers::pi) / 2.0;
    case SpaceKind::L2: {
      if (space.n == 0) throw DomainError("rescale_factor: embedding dimension must be positive");
      const double n = static_cast<double>(space.n);
      return n / 2.0 * std::exp(ln_gamma(n / 2.0) - ln_gamma((n + 1.0) / 2.0));
    }
  }
  return 1.0;
}

double distance(SpaceKind kind, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw ShapeError("distance: dimension mismatch " + std::to_string(u.size()) + " vs " +
                     std::to_string(v.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double diff = u[i] - v[i];
    acc += kind == SpaceKind::L1 ? std::fabs(diff) : diff * diff;
  }
  return kind == SpaceKind::L2 ? std::sqrt(acc) : acc;
}

Tensor distance(Tape& tape, SpaceKind kind, const Tensor& u, const Tensor& v) {
  if (u.rank() != 2 || u.shape() != v.shape()) {
    throw ShapeError("distance: dimension mismatch " + shape_str(u.shape()) + " vs " +
                     shape_str(v.shape()));
  }
  Tensor diff = sub(tape, u, v);
  switch (kind) {
    case SpaceKind::L1: return row_sum(tape, abs(tape, diff));
    case SpaceKind::SqEuclid: return row_sum(tape, square(tape, diff));
    case SpaceKind::L2: return sqrt(tape, row_sum(tape, square(tape, diff)));
  }
  return {};
}

Tensor rescaled_embed(Tape& tape, const EmbeddingSpace& space, const Tensor& raw) {
  return scale(tape, raw, rescale_factor(space));
}

double rechi2(double dhat, double d) {
  if (!(d > 0.0)) throw DomainError("REchi2: ground-truth distance must be positive");
  if (!(dhat > 0.0)) throw DomainError("REchi2: predicted distance must be positive");
  const double half = d / 2.0;
  return half + ln_gamma(half) * std::numbers::log2e - (half - 1.0) * std::log2(dhat) +
         dhat / 2.0 * std::numbers::log2e;
}

double rechi2_nat(double dhat, double d) {
  if (!(d > 0.0)) throw DomainError("REchi2: ground-truth distance must be positive");
  if (!(dhat > 0.0)) throw DomainError("REchi2: predicted distance must be positive");
  const double half = d / 2.0;
  return half * std::numbers::ln2 + ln_gamma(half) - (half - 1.0) * std::log(dhat) + dhat / 2.0;
}

double loss_value(const LossSpec& loss, double dhat, double d) {
  switch (loss.kind) {
    case LossKind::MSE: return (dhat - d) * (dhat - d);
    case LossKind::MAE: return std::fabs(dhat - d);
    case LossKind::REchi2: return rechi2(std::max(dhat, loss.epsilon_dhat), d);
  }
  return 0.0;
}

double loss_derivative(const LossSpec& loss, double dhat, double d) {
  switch (loss.kind) {
    case LossKind::MSE: return 2.0 * (dhat - d);
    case LossKind::MAE: return dhat > d ? 1.0 : (dhat < d ? -1.0 : 0.0);
    case LossKind::REchi2:
      if (!(d > 0.0)) throw DomainError("REchi2: ground-truth distance must be positive");
      if (dhat < loss.epsilon_dhat) return 0.0;
      return std::numbers::log2e * (0.5 - (d / 2.0 - 1.0) / dhat);
  }
  return 0.0;
}

Tensor pair_loss(Tape& tape, const LossSpec& loss, const Tensor& dhat, std::span<const double> d) {
  if (dhat.rank() != 1 || dhat.numel() != d.size()) {
    throw ShapeError("pair_loss: " + shape_str(dhat.shape()) + " predictions for " +
                     std::to_string(d.size()) + " targets");
  }
  if (!(loss.epsilon_dhat > 0.0)) throw DomainError("pair_loss: epsilon_dhat must be positive");
  Tensor out = tape.make_output({1}, {&dhat});
  const double inv_b = 1.0 / static_cast<double>(d.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) acc += loss_value(loss, dhat.data()[i], d[i]);
  out.data()[0] = acc * inv_b;
  if (out.requires_grad()) {
    std::vector<double> targets(d.begin(), d.end());
    tape.record("pair_loss", [loss, dhat, out, targets, inv_b]() mutable {
      const double g = out.grad()[0] * inv_b;
      auto gd = dhat.grad();
      for (std::size_t i = 0; i < targets.size(); ++i) {
        gd[i] += g * loss_derivative(loss, dhat.data()[i], targets[i]);
      }
    });
  }
  return out;
}

}  // namespace dnaembed
