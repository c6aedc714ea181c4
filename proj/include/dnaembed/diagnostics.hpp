#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace dnaembed {

/// Rows are embedding vectors (m rows of n elements).
using EmbeddingMatrix = std::vector<std::vector<double>>;

struct ElementStats {
  std::vector<double> mean;
  /// Sample standard deviation (m - 1 denominator).
  std::vector<double> std;
};

struct QqData {
  /// probit((i - 0.5) / m), i = 1..m.
  std::vector<double> theoretical;
  /// empirical[j] holds element j's values sorted ascending.
  std::vector<std::vector<double>> empirical;
};

struct PccMatrix {
  std::size_t n = 0;
  /// Row-major n x n. Entries involving an undefined element are 0.
  std::vector<double> values;
  /// defined[j] is false when element j has zero variance.
  std::vector<bool> defined;

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

struct PccHistogram {
  double lo = -1.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;
};

struct DiagnosticsReport {
  ElementStats stats;
  QqData qq;
  PccMatrix pcc;
  PccHistogram histogram;
};

// All throw std::invalid_argument for fewer than 2 rows or ragged rows.
ElementStats elementwise_stats(const EmbeddingMatrix& rows);
QqData qq_data(const EmbeddingMatrix& rows);
PccMatrix pcc_matrix(const EmbeddingMatrix& rows);
/// Off-diagonal (i < j) coefficients between defined elements.
PccHistogram pcc_histogram(const PccMatrix& pcc, std::size_t bins = 40);

DiagnosticsReport diagnose(const EmbeddingMatrix& rows, std::size_t bins = 40);

/// Writes stats.csv, qq.csv, pcc.csv and pcc_hist.csv into dir.
void write_diagnostics(const std::filesystem::path& dir, const DiagnosticsReport& report);

}  // namespace dnaembed
