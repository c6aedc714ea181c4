#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "dnaembed/tensor.hpp"

namespace dnaembed {

enum class SpaceKind { L1, L2, SqEuclid };

/// CLI spelling: l1, l2, sqeuclid.
std::string_view space_name(SpaceKind kind);
SpaceKind parse_space(std::string_view name);

struct EmbeddingSpace {
  SpaceKind kind = SpaceKind::SqEuclid;
  std::size_t n = 80;
};

enum class LossKind { MSE, MAE, REchi2 };

/// CLI spelling: mse, mae, rechi2.
std::string_view loss_name(LossKind kind);
LossKind parse_loss(std::string_view name);

struct LossSpec {
  LossKind kind = LossKind::REchi2;
  /// Lower clamp on the predicted distance inside REchi2.
  double epsilon_dhat = 1e-6;
};

/// Factor that makes the expected distance between two independent N(0,1)^n
/// embeddings equal n: sqrt(2)/2 (squared Euclidean), sqrt(pi)/2 (l1),
/// n Gamma(n/2) / (2 Gamma((n+1)/2)) (l2).
double rescale_factor(const EmbeddingSpace& space);

double distance(SpaceKind kind, std::span<const double> u, std::span<const double> v);
/// Row-wise distance of (B, n) tensors -> (B).
Tensor distance(Tape& tape, SpaceKind kind, const Tensor& u, const Tensor& v);

/// raw * rescale_factor(space).
Tensor rescaled_embed(Tape& tape, const EmbeddingSpace& space, const Tensor& raw);

/// Negative base-2 log density of chi^2(d) at dhat, written term by term:
/// d/2 + log2 Gamma(d/2) - (d/2 - 1) log2 dhat + (dhat/2) log2 e.
/// Throws DomainError for d <= 0 or dhat <= 0.
double rechi2(double dhat, double d);
/// Natural-log counterpart; equals ln(2) * rechi2(dhat, d).
double rechi2_nat(double dhat, double d);

/// Per-pair loss and its derivative in dhat. REchi2 clamps dhat at epsilon_dhat.
double loss_value(const LossSpec& loss, double dhat, double d);
double loss_derivative(const LossSpec& loss, double dhat, double d);

/// Mean per-pair loss over a batch of predicted distances (B) -> (1).
Tensor pair_loss(Tape& tape, const LossSpec& loss, const Tensor& dhat, std::span<const double> d);

}  // namespace dnaembed
