#include "dnaembed/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "dnaembed/errors.hpp"
#include "dnaembed/special.hpp"

namespace dnaembed {
namespace {

std::size_t check_rows(const EmbeddingMatrix& rows) {
  if (rows.size() < 2) throw std::invalid_argument("diagnostics need at least 2 embeddings");
  const std::size_t n = rows.front().size();
  if (n == 0) throw std::invalid_argument("diagnostics need non-empty embeddings");
  for (const auto& r : rows) {
    if (r.size() != n) throw std::invalid_argument("embeddings have unequal dimensions");
  }
  return n;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out.precision(17);
  return out;
}

}  // namespace

ElementStats elementwise_stats(const EmbeddingMatrix& rows) {
  const std::size_t n = check_rows(rows);
  const double m = static_cast<double>(rows.size());
  ElementStats s;
  s.mean.assign(n, 0.0);
  s.std.assign(n, 0.0);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < n; ++j) s.mean[j] += r[j];
  }
  for (double& v : s.mean) v /= m;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < n; ++j) s.std[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
  }
  for (double& v : s.std) v = std::sqrt(v / (m - 1.0));
  return s;
}

QqData qq_data(const EmbeddingMatrix& rows) {
  const std::size_t n = check_rows(rows);
  const std::size_t m = rows.size();
  QqData q;
  q.theoretical.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    q.theoretical[i] = probit((static_cast<double>(i) + 0.5) / static_cast<double>(m));
  }
  q.empirical.assign(n, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) q.empirical[j][i] = rows[i][j];
  }
  for (auto& col : q.empirical) std::sort(col.begin(), col.end());
  return q;
}

PccMatrix pcc_matrix(const EmbeddingMatrix& rows) {
  const std::size_t n = check_rows(rows);
  const ElementStats s = elementwise_stats(rows);
  PccMatrix p;
  p.n = n;
  p.values.assign(n * n, 0.0);
  p.defined.assign(n, true);
  std::vector<double> norm(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (const auto& r : rows) norm[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
    norm[j] = std::sqrt(norm[j]);
    p.defined[j] = norm[j] > 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!p.defined[i]) continue;
    p.values[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!p.defined[j]) continue;
      double cov = 0.0;
      for (const auto& r : rows) cov += (r[i] - s.mean[i]) * (r[j] - s.mean[j]);
      const double c = std::clamp(cov / (norm[i] * norm[j]), -1.0, 1.0);
      p.values[i * n + j] = c;
      p.values[j * n + i] = c;
    }
  }
  return p;
}

PccHistogram pcc_histogram(const PccMatrix& pcc, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
  PccHistogram h;
  h.counts.assign(bins, 0);
  const double width = (h.hi - h.lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i < pcc.n; ++i) {
    for (std::size_t j = i + 1; j < pcc.n; ++j) {
      if (!pcc.defined[i] || !pcc.defined[j]) continue;
      auto bin = static_cast<std::size_t>((pcc.at(i, j) - h.lo) / width);
      h.counts[std::min(bin, bins - 1)] += 1;
    }
  }
  return h;
}

DiagnosticsReport diagnose(const EmbeddingMatrix& rows, std::size_t bins) {
  DiagnosticsReport r;
  r.stats = elementwise_stats(rows);
  r.qq = qq_data(rows);
  r.pcc = pcc_matrix(rows);
  r.histogram = pcc_histogram(r.pcc, bins);
  return r;
}

void write_diagnostics(const std::filesystem::path& dir, const DiagnosticsReport& report) {
  std::filesystem::create_directories(dir);
  const std::size_t n = report.stats.mean.size();
  {
    auto out = open_csv(dir / "stats.csv");
    out << "element,mean,std,pcc_defined\n";
    for (std::size_t j = 0; j < n; ++j) {
      out << j << ',' << report.stats.mean[j] << ',' << report.stats.std[j] << ','
          << (report.pcc.defined[j] ? 1 : 0) << '\n';
    }
  }
  {
    auto out = open_csv(dir / "qq.csv");
    out << "theoretical";
    for (std::size_t j = 0; j < n; ++j) out << ",e" << j;
    out << '\n';
    for (std::size_t i = 0; i < report.qq.theoretical.size(); ++i) {
      out << report.qq.theoretical[i];
      for (std::size_t j = 0; j < n; ++j) out << ',' << report.qq.empirical[j][i];
      out << '\n';
    }
  }
  {
    auto out = open_csv(dir / "pcc.csv");
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) out << (j ? "," : "") << report.pcc.at(i, j);
      out << '\n';
    }
  }
  {
    auto out = open_csv(dir / "pcc_hist.csv");
    out << "bin_lo,bin_hi,count\n";
    const auto& h = report.histogram;
    const double width = (h.hi - h.lo) / static_cast<double>(h.counts.size());
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      out << h.lo + width * static_cast<double>(b) << ',' << h.lo + width * static_cast<double>(b + 1)
          << ',' << h.counts[b] << '\n';
    }
  }
}

}  // namespace dnaembed
