#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "dnaembed/tensor.hpp"

namespace dnaembed {

struct GradCheckResult {
  /// max over checked entries of |analytic - numeric| / max(floor, |analytic| + |numeric|),
  /// floor = max(1e-8, 1e4 * 32 eps max(1, |f|) / h).
  double max_rel_error = 0.0;
  std::size_t entries_checked = 0;
  std::string worst;  // "<tensor index>[<entry>] analytic=... numeric=..."
};

/// Central differences of a scalar function of x against the tape gradient.
GradCheckResult grad_check(const std::function<Tensor(Tape&, const Tensor&)>& f, const Tensor& x,
                           double h);

/// Same for a closure over several parameter tensors, perturbed in place and
/// restored. max_entries_per_tensor = 0 checks every entry; otherwise a
/// seeded random subset of each tensor.
GradCheckResult grad_check_params(const std::function<Tensor(Tape&)>& f,
                                  std::span<Tensor> params, double h,
                                  std::size_t max_entries_per_tensor = 0,
                                  std::uint64_t seed = 0);

}  // namespace dnaembed
