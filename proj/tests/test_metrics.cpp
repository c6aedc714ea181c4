#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "dnaembed/diagnostics.hpp"
#include "dnaembed/metrics.hpp"
#include "dnaembed/rng.hpp"

using namespace dnaembed;

TEST_CASE("ae and ae_h") {
  const std::vector<ScoredPair> a = {{1, 2, true}, {80, 79, false}};
  CHECK(ae(a) == 1.0);
  const std::vector<ScoredPair> exact = {{3, 3, true}, {50, 50, false}};
  CHECK(ae(exact) == 0.0);
  const std::vector<ScoredPair> h = {{1, 3, true}, {70, 20, false}};
  CHECK(ae_h(h) == 2.0);
  const std::vector<ScoredPair> all_h = {{1, 3, true}, {4, 2.5, true}};
  CHECK(ae_h(all_h) == ae(all_h));
  CHECK_THROWS_AS(ae(std::vector<ScoredPair>{}), std::invalid_argument);
  CHECK_THROWS_AS(ae_h(std::vector<ScoredPair>{{1, 1, false}}), std::invalid_argument);

  Rng rng(1);
  std::vector<ScoredPair> r;
  long double sum = 0;
  for (int i = 0; i < 100; ++i) {
    const double d = static_cast<double>(rng.uniform_int(90));
    const double dhat = 100.0 * rng.uniform();
    r.push_back({d, dhat, d < 10});
    sum += std::fabs(static_cast<long double>(d) - dhat);
  }
  CHECK(std::fabs(ae(r) - static_cast<double>(sum / 100)) < 1e-12);
}

TEST_CASE("overall accuracy") {
  const std::vector<ScoredPair> p = {{1, 10, true}, {80, 70, false}, {2, 50, true}};
  CHECK(oa(p, 40) == doctest::Approx(200.0 / 3.0));
  const std::vector<ScoredPair> sep = {{1, 2, true}, {2, 3, true}, {80, 70, false}, {80, 75, false}};
  CHECK(oa(sep, 30) == 100.0);
  CHECK(oa(p, 0) == doctest::Approx(100.0 / 3.0));
  const auto best = best_threshold(sep);
  CHECK(best.oa == 100.0);
  CHECK(best.k > 3.0);
  CHECK(best.k <= 70.0);
  // Threshold exactly at a prediction counts that pair as non-homologous.
  CHECK(oa(std::vector<ScoredPair>{{80, 5, false}}, 5.0) == 100.0);
}

TEST_CASE("best threshold is optimal against a brute-force scan") {
  Rng rng(2);
  std::vector<ScoredPair> p;
  for (int i = 0; i < 60; ++i) {
    const bool h = rng.uniform() < 0.5;
    p.push_back({h ? 2.0 : 40.0, h ? 20.0 * rng.uniform() : 10.0 + 30.0 * rng.uniform(), h});
  }
  const auto best = best_threshold(p);
  double brute = 0.0;
  for (double k = -1.0; k <= 41.0; k += 0.01) brute = std::max(brute, oa(p, k));
  CHECK(best.oa >= brute);
  CHECK(oa(p, best.k) == best.oa);
}

TEST_CASE("metrics report and files") {
  const std::vector<ScoredPair> p = {{1, 1, true}, {3, 3, true}, {40, 40, false}};
  const auto r = compute_metrics(p, 20);
  CHECK(r.ae == 0.0);
  CHECK(r.ae_h == 0.0);
  CHECK(r.oa_best == 100.0);
  CHECK(r.oa_at_k == 100.0);
  CHECK(r.homologous == 2);
  CHECK(r.non_homologous == 1);
  const auto j = metrics_to_json(r);
  CHECK(j.at("oa_best").get<double>() == 100.0);
  const auto path = std::filesystem::temp_directory_path() / "dnaembed_metrics_test.csv";
  write_metrics_csv(path, r);
  std::ifstream f(path);
  std::string header;
  std::getline(f, header);
  CHECK(header == "metric,value");
  std::filesystem::remove(path);
}

TEST_CASE("diagnostics on degenerate and correlated input") {
  const EmbeddingMatrix same = {{1, 2}, {1, 2}, {1, 2}};
  const auto st = elementwise_stats(same);
  CHECK(st.std[0] == 0.0);
  const auto pcc = pcc_matrix(same);
  CHECK_FALSE(pcc.defined[0]);
  CHECK_FALSE(pcc.defined[1]);

  const EmbeddingMatrix corr = {{1, 3, 0}, {2, 5, 1}, {4, 9, 0}, {7, 15, 2}};
  const auto c = pcc_matrix(corr);
  CHECK(std::fabs(c.at(0, 1) - 1.0) < 1e-12);
  CHECK(c.at(0, 0) == 1.0);
  CHECK_THROWS_AS(pcc_matrix(EmbeddingMatrix{{1, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(elementwise_stats(EmbeddingMatrix{{1, 2}, {1}}), std::invalid_argument);
}

TEST_CASE("diagnostics on independent normals") {
  Rng rng(3);
  EmbeddingMatrix rows(10000, std::vector<double>(6));
  for (auto& r : rows) {
    for (double& v : r) v = rng.normal();
  }
  const auto rep = diagnose(rows, 20);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      CHECK(rep.pcc.at(i, j) == rep.pcc.at(j, i));
      if (i == j) CHECK(rep.pcc.at(i, i) == 1.0);
      else CHECK(std::fabs(rep.pcc.at(i, j)) < 0.05);
    }
    // Extreme order statistics wander; compare the central 98%.
    double central = 0.0;
    for (std::size_t k = 100; k + 100 < rows.size(); ++k) {
      central = std::max(central, std::fabs(rep.qq.empirical[i][k] - rep.qq.theoretical[k]));
    }
    CHECK(central < 0.1);
    CHECK(std::fabs(rep.stats.mean[i]) < 0.04);
    CHECK(std::fabs(rep.stats.std[i] - 1.0) < 0.03);
  }
  std::size_t total = 0;
  for (auto n : rep.histogram.counts) total += n;
  CHECK(total == 15);
  CHECK(rep.histogram.counts.size() == 20);

  const auto dir = std::filesystem::temp_directory_path() / "dnaembed_diag_test";
  std::filesystem::create_directories(dir);
  write_diagnostics(dir, rep);
  for (const char* f : {"stats.csv", "qq.csv", "pcc.csv", "pcc_hist.csv"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  std::filesystem::remove_all(dir);
}
