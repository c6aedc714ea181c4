#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "dnaembed/metric_space.hpp"
#include "dnaembed/rng.hpp"

namespace dnaembed {

enum class OrthoKind { Haar, SignedPermutation, Identity };

/// CLI spelling: haar, signedperm, identity.
std::string_view ortho_name(OrthoKind kind);
OrthoKind parse_ortho(std::string_view name);

/// Haar-distributed orthogonal matrix: Householder QR of an i.i.d. Gaussian
/// matrix with the columns of Q signed so that R has a positive diagonal.
Eigen::MatrixXd random_orthogonal(std::size_t n, Rng& rng);

/// Uniform random permutation matrix with i.i.d. random signs.
Eigen::MatrixXd signed_permutation(std::size_t n, Rng& rng);

/// x = y P with y = (y_1..y_d, 0..0), y_i i.i.d. N(0,1). y is written to y_out when given.
Eigen::VectorXd dof_sample(std::size_t n, std::size_t d, const Eigen::MatrixXd& p, Rng& rng,
                           Eigen::VectorXd* y_out = nullptr);

/// Distance kinds in sweep output order.
inline constexpr std::array<SpaceKind, 3> kSweepKinds = {SpaceKind::SqEuclid, SpaceKind::L1,
                                                          SpaceKind::L2};

struct SimConfig {
  std::size_t n = 80;
  std::vector<std::size_t> d_values;
  std::size_t trials = 20000;
  OrthoKind ortho = OrthoKind::Haar;
  /// Scale each distance kind so its mean at d = n equals n.
  bool rescale_at_n = false;
  std::uint64_t seed = 0;
  /// Materialize a full Haar matrix per trial instead of drawing yP through
  /// rotation invariance (same distribution, O(n^3) per trial).
  bool explicit_haar = false;
  unsigned threads = 1;

  /// Throws std::invalid_argument when a d lies outside [1, n] or trials is 0.
  void validate() const;
};

struct SweepCell {
  std::size_t d = 0;
  SpaceKind kind = SpaceKind::SqEuclid;
  double mean = 0.0;
  double stderr_ = 0.0;
  double variance = 0.0;
};

struct SweepResult {
  SimConfig config;
  /// One cell per (d, kind), d-major in config order, kinds in kSweepKinds order.
  std::vector<SweepCell> cells;
  /// Factor applied per kind (1 without rescaling), kSweepKinds order.
  std::array<double, 3> factors = {1.0, 1.0, 1.0};

  const SweepCell& cell(std::size_t d, SpaceKind kind) const;
};

/// Each d uses its own stream (seed, d), so results do not depend on threads.
SweepResult sweep_expected_distance(const SimConfig& cfg);

/// Mean of the chi distribution with d degrees of freedom.
double chi_mean_analytic(double d);

struct PairCheck {
  double mean = 0.0;
  double variance = 0.0;
};

/// Distance between independent rescaled N(0,1)^n vectors, averaged over trials.
PairCheck independent_pair_check(SpaceKind space, std::size_t n, std::size_t trials, Rng& rng);

/// `d,dist_kind,mean,stderr,trials,ortho,rescaled`.
void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);

}  // namespace dnaembed
