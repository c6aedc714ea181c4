#include "dnaembed/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "dnaembed/errors.hpp"

namespace dnaembed {

double ae(std::span<const ScoredPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("ae: no test pairs");
  double acc = 0.0;
  for (const auto& p : pairs) acc += std::fabs(p.d - p.dhat);
  return acc / static_cast<double>(pairs.size());
}

double ae_h(std::span<const ScoredPair> pairs) {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& p : pairs) {
    if (!p.homologous) continue;
    acc += std::fabs(p.d - p.dhat);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("ae_h: no homologous test pairs");
  return acc / static_cast<double>(n);
}

double oa(std::span<const ScoredPair> pairs, double k) {
  if (pairs.empty()) throw std::invalid_argument("oa: no test pairs");
  std::size_t correct = 0;
  for (const auto& p : pairs) {
    const bool predicted_non_homologous = p.dhat >= k;
    if (predicted_non_homologous != p.homologous) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(pairs.size());
}

Threshold best_threshold(std::span<const ScoredPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("best_threshold: no test pairs");
  std::vector<ScoredPair> sorted(pairs.begin(), pairs.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.dhat < b.dhat; });
  const std::size_t m = sorted.size();
  std::size_t non_homologous_total = 0;
  for (const auto& p : sorted) non_homologous_total += p.homologous ? 0 : 1;

  // With the threshold between sorted[i-1] and sorted[i], the first i pairs are
  // predicted homologous.
  Threshold best{sorted.front().dhat, -1.0};
  std::size_t homologous_below = 0, non_homologous_below = 0;
  for (std::size_t i = 0; i <= m; ++i) {
    if (i > 0) {
      (sorted[i - 1].homologous ? homologous_below : non_homologous_below) += 1;
    }
    const bool boundary = i == 0 || i == m || sorted[i - 1].dhat < sorted[i].dhat;
    if (!boundary) continue;
    double k;
    if (i == 0) k = sorted.front().dhat;
    else if (i == m) k = sorted.back().dhat + 1.0;
    else k = 0.5 * (sorted[i - 1].dhat + sorted[i].dhat);
    const std::size_t correct = homologous_below + (non_homologous_total - non_homologous_below);
    const double acc = 100.0 * static_cast<double>(correct) / static_cast<double>(m);
    if (acc > best.oa) best = {k, acc};
  }
  return best;
}

MetricsReport compute_metrics(std::span<const ScoredPair> pairs, double k) {
  MetricsReport r;
  r.ae = ae(pairs);
  r.ae_h = ae_h(pairs);
  r.k = k;
  r.oa_at_k = oa(pairs, k);
  const Threshold best = best_threshold(pairs);
  r.k_best = best.k;
  r.oa_best = best.oa;
  for (const auto& p : pairs) (p.homologous ? r.homologous : r.non_homologous) += 1;
  return r;
}

void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write metrics " + path.string());
  out.precision(17);
  out << "metric,value\n"
      << "ae," << report.ae << '\n'
      << "ae_h," << report.ae_h << '\n'
      << "k," << report.k << '\n'
      << "oa_at_k," << report.oa_at_k << '\n'
      << "k_best," << report.k_best << '\n'
      << "oa_best," << report.oa_best << '\n'
      << "homologous," << report.homologous << '\n'
      << "non_homologous," << report.non_homologous << '\n';
}

nlohmann::json metrics_to_json(const MetricsReport& report) {
  return {{"ae", report.ae},
          {"ae_h", report.ae_h},
          {"k", report.k},
          {"oa_at_k", report.oa_at_k},
          {"k_best", report.k_best},
          {"oa_best", report.oa_best},
          {"homologous", report.homologous},
          {"non_homologous", report.non_homologous}};
}

}  // namespace dnaembed
