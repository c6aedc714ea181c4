#include "dnaembed/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "dnaembed/errors.hpp"
#include "dnaembed/special.hpp"

namespace dnaembed {
namespace {

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  void add(double x) {
    sum += x;
    sum_sq += x * x;
  }
};

/// Distances (sq-euclid, l1, l2) of one degree-of-freedom-d sample from the origin.
std::array<double, 3> sample_distances(const SimConfig& cfg, std::size_t d, Rng& rng) {
  const std::size_t n = cfg.n;
  if (cfg.ortho == OrthoKind::Haar && !cfg.explicit_haar) {
    // yP for Haar P is |y| times a uniform direction g/|g|.
    double y_sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double y = rng.normal();
      y_sq += y * y;
    }
    double g_sq = 0.0, g_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = rng.normal();
      g_sq += g * g;
      g_abs += std::fabs(g);
    }
    const double radius = std::sqrt(y_sq);
    return {y_sq, radius / std::sqrt(g_sq) * g_abs, radius};
  }

  Eigen::VectorXd x;
  switch (cfg.ortho) {
    case OrthoKind::Haar: {
      const Eigen::MatrixXd p = random_orthogonal(n, rng);
      x = dof_sample(n, d, p, rng);
      break;
    }
    case OrthoKind::SignedPermutation: {
      const Eigen::MatrixXd p = signed_permutation(n, rng);
      x = dof_sample(n, d, p, rng);
      break;
    }
    case OrthoKind::Identity:
      x = dof_sample(n, d, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n),
                                                     static_cast<Eigen::Index>(n)),
                     rng);
      break;
  }
  const double sq = x.squaredNorm();
  return {sq, x.lpNorm<1>(), std::sqrt(sq)};
}

}  // namespace

std::string_view ortho_name(OrthoKind kind) {
  switch (kind) {
    case OrthoKind::Haar: return "haar";
    case OrthoKind::SignedPermutation: return "signedperm";
    case OrthoKind::Identity: return "identity";
  }
  return "?";
}

OrthoKind parse_ortho(std::string_view name) {
  for (OrthoKind k : {OrthoKind::Haar, OrthoKind::SignedPermutation, OrthoKind::Identity}) {
    if (ortho_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown orthogonal family '" + std::string(name) +
                              "' (expected haar, signedperm or identity)");
}

Eigen::MatrixXd random_orthogonal(std::size_t n, Rng& rng) {
  const auto en = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd g(en, en);
  for (Eigen::Index i = 0; i < en; ++i) {
    for (Eigen::Index j = 0; j < en; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < en; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Eigen::MatrixXd signed_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(std::span(perm));
  const auto en = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(en, en);
  for (std::size_t i = 0; i < n; ++i) {
    p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(perm[i])) =
        rng.uniform_int(2) == 0 ? 1.0 : -1.0;
  }
  return p;
}

Eigen::VectorXd dof_sample(std::size_t n, std::size_t d, const Eigen::MatrixXd& p, Rng& rng,
                           Eigen::VectorXd* y_out) {
  if (d < 1 || d > n) {
    throw std::invalid_argument("degree of freedom " + std::to_string(d) + " outside [1, " +
                                std::to_string(n) + "]");
  }
  const auto en = static_cast<Eigen::Index>(n);
  if (p.rows() != en || p.cols() != en) {
    throw ShapeError("dof_sample: matrix is not " + std::to_string(n) + " x " + std::to_string(n));
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(en);
  for (std::size_t i = 0; i < d; ++i) y(static_cast<Eigen::Index>(i)) = rng.normal();
  // Only the first d rows of P contribute.
  const auto ed = static_cast<Eigen::Index>(d);
  Eigen::VectorXd x = p.topRows(ed).transpose() * y.head(ed);
  if (y_out != nullptr) *y_out = std::move(y);
  return x;
}

void SimConfig::validate() const {
  if (n == 0) throw std::invalid_argument("ambient dimension must be positive");
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  if (d_values.empty()) throw std::invalid_argument("no degrees of freedom to sweep");
  for (std::size_t d : d_values) {
    if (d < 1 || d > n) {
      throw std::invalid_argument("degree of freedom " + std::to_string(d) + " outside [1, " +
                                  std::to_string(n) + "]");
    }
  }
  if (rescale_at_n && std::find(d_values.begin(), d_values.end(), n) == d_values.end()) {
    throw std::invalid_argument("rescaling at d = n requires d = " + std::to_string(n) +
                                " in the sweep");
  }
}

const SweepCell& SweepResult::cell(std::size_t d, SpaceKind kind) const {
  for (const auto& c : cells) {
    if (c.d == d && c.kind == kind) return c;
  }
  throw std::out_of_range("no sweep cell for d = " + std::to_string(d));
}

SweepResult sweep_expected_distance(const SimConfig& cfg) {
  cfg.validate();
  const std::size_t cells = cfg.d_values.size();
  std::vector<std::array<SweepCell, 3>> per_d(cells);

  auto run_cell = [&](std::size_t idx) {
    const std::size_t d = cfg.d_values[idx];
    Rng rng(cfg.seed, d);
    std::array<Accumulator, 3> acc;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto dist = sample_distances(cfg, d, rng);
      for (std::size_t k = 0; k < 3; ++k) acc[k].add(dist[k]);
    }
    const double m = static_cast<double>(cfg.trials);
    for (std::size_t k = 0; k < 3; ++k) {
      const double mean = acc[k].sum / m;
      const double var =
          cfg.trials > 1 ? std::max(0.0, (acc[k].sum_sq - m * mean * mean) / (m - 1.0)) : 0.0;
      per_d[idx][k] = {d, kSweepKinds[k], mean, std::sqrt(var / m), var};
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cells)));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells; ++i) run_cell(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (std::size_t i = w; i < cells; i += workers) run_cell(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  SweepResult result;
  result.config = cfg;
  if (cfg.rescale_at_n) {
    const auto at_n = std::find(cfg.d_values.begin(), cfg.d_values.end(), cfg.n) - cfg.d_values.begin();
    for (std::size_t k = 0; k < 3; ++k) {
      result.factors[k] = static_cast<double>(cfg.n) / per_d[static_cast<std::size_t>(at_n)][k].mean;
    }
  }
  for (const auto& row : per_d) {
    for (std::size_t k = 0; k < 3; ++k) {
      SweepCell c = row[k];
      c.mean *= result.factors[k];
      c.stderr_ *= result.factors[k];
      c.variance *= result.factors[k] * result.factors[k];
      result.cells.push_back(c);
    }
  }
  return result;
}

double chi_mean_analytic(double d) {
  if (!(d > 0.0)) throw DomainError("chi_mean_analytic: degrees of freedom must be positive");
  return std::sqrt(2.0) * std::exp(ln_gamma((d + 1.0) / 2.0) - ln_gamma(d / 2.0));
}

PairCheck independent_pair_check(SpaceKind space, std::size_t n, std::size_t trials, Rng& rng) {
  if (n == 0 || trials == 0) throw std::invalid_argument("n and trials must be positive");
  const double r = rescale_factor({space, n});
  std::vector<double> u(n), v(n);
  Accumulator acc;
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = r * rng.normal();
      v[i] = r * rng.normal();
    }
    acc.add(distance(space, u, v));
  }
  const double m = static_cast<double>(trials);
  const double mean = acc.sum / m;
  const double var = trials > 1 ? (acc.sum_sq - m * mean * mean) / (m - 1.0) : 0.0;
  return {mean, var};
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write sweep " + path.string());
  out.precision(17);
  out << "d,dist_kind,mean,stderr,trials,ortho,rescaled\n";
  for (const auto& c : result.cells) {
    out << c.d << ',' << space_name(c.kind) << ',' << c.mean << ',' << c.stderr_ << ','
        << result.config.trials << ',' << ortho_name(result.config.ortho) << ','
        << (result.config.rescale_at_n ? 1 : 0) << '\n';
  }
}

}  // namespace dnaembed
