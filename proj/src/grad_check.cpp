#include "dnaembed/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "dnaembed/rng.hpp"

namespace dnaembed {

GradCheckResult grad_check(const std::function<Tensor(Tape&, const Tensor&)>& f, const Tensor& x,
                           double h) {
  Tensor leaf = x.clone();
  leaf.set_requires_grad(true);
  Tensor params[] = {leaf};
  return grad_check_params([&](Tape& tape) { return f(tape, leaf); }, params, h);
}

GradCheckResult grad_check_params(const std::function<Tensor(Tape&)>& f,
                                  std::span<Tensor> params, double h,
                                  std::size_t max_entries_per_tensor, std::uint64_t seed) {
  for (Tensor& p : params) {
    if (!p.requires_grad()) p.set_requires_grad(true);
    p.zero_grad();
  }
  {
    Tape tape;
    Tensor loss = f(tape);
    tape.backward(loss);
  }
  auto eval = [&]() {
    Tape tape(false);
    return f(tape).item();
  };
  // Roundoff floor of the difference quotient. Gradients smaller than 1e4
  // times that (true zeros included) are compared at this resolution.
  const double resolution =
      32.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(eval())) / h;
  const double floor = std::max(1e-8, 1e4 * resolution);

  GradCheckResult result;
  Rng rng(seed);
  for (std::size_t t = 0; t < params.size(); ++t) {
    Tensor& p = params[t];
    std::vector<std::size_t> entries(p.numel());
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (max_entries_per_tensor != 0 && entries.size() > max_entries_per_tensor) {
      rng.shuffle(std::span(entries));
      entries.resize(max_entries_per_tensor);
    }
    const std::vector<double> analytic(p.grad().begin(), p.grad().end());
    for (std::size_t i : entries) {
      const double orig = p.data()[i];
      p.data()[i] = orig + h;
      const double up = eval();
      p.data()[i] = orig - h;
      const double down = eval();
      p.data()[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double rel =
          std::fabs(analytic[i] - numeric) / std::max(floor, std::fabs(analytic[i]) + std::fabs(numeric));
      ++result.entries_checked;
      if (rel > result.max_rel_error || !std::isfinite(rel)) {
        result.max_rel_error = std::isfinite(rel) ? rel : INFINITY;
        std::ostringstream os;
        os << t << '[' << i << "] analytic=" << analytic[i] << " numeric=" << numeric;
        result.worst = os.str();
      }
    }
  }
  return result;
}

}  // namespace dnaembed
