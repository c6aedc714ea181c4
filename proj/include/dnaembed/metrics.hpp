#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>

#include <json.hpp>

namespace dnaembed {

/// Ground truth and prediction for one test pair.
struct ScoredPair {
  double d = 0.0;
  double dhat = 0.0;
  bool homologous = false;
};

/// Mean |d - dhat| over all pairs. Throws std::invalid_argument when empty.
double ae(std::span<const ScoredPair> pairs);
/// Mean |d - dhat| over homologous pairs. Throws std::invalid_argument when there are none.
double ae_h(std::span<const ScoredPair> pairs);
/// Percent of pairs classified correctly when dhat >= k means non-homologous.
double oa(std::span<const ScoredPair> pairs, double k);

struct Threshold {
  double k = 0.0;
  double oa = 0.0;
};

/// Exhaustive sweep: below every prediction, midpoints between consecutive
/// distinct predictions, and one above all. Ties go to the smallest threshold.
Threshold best_threshold(std::span<const ScoredPair> pairs);

struct MetricsReport {
  double ae = 0.0;
  double ae_h = 0.0;
  double k = 0.0;
  double oa_at_k = 0.0;
  double k_best = 0.0;
  double oa_best = 0.0;
  std::size_t homologous = 0;
  std::size_t non_homologous = 0;
};

MetricsReport compute_metrics(std::span<const ScoredPair> pairs, double k);

/// `metric,value` rows.
void write_metrics_csv(const std::filesystem::path& path, const MetricsReport& report);
nlohmann::json metrics_to_json(const MetricsReport& report);

}  // namespace dnaembed
