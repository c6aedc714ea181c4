#pragma once

// Reference implementations used only by tests. They share no code with the
// library and favour obviousness over speed.

#include <cmath>
#include <cstddef>
#include <map>
#include <queue>
#include <string>
#include <vector>

namespace oracle {

/// Every string over alphabet of length <= max_len, shortest first.
inline std::vector<std::string> all_strings(const std::string& alphabet, std::size_t max_len) {
  std::vector<std::string> out{""};
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].size() == max_len) continue;
    for (char c : alphabet) out.push_back(out[i] + c);
  }
  return out;
}

/// Breadth-first search over single-symbol edits. Intermediate strings are
/// limited to max_len symbols, which loses no optimal script as long as
/// max_len is at least the longer endpoint (substitute, then delete, then
/// insert never exceeds it).
inline std::map<std::string, std::size_t> edit_bfs(const std::string& from,
                                                   const std::string& alphabet,
                                                   std::size_t max_len) {
  std::map<std::string, std::size_t> dist{{from, 0}};
  std::queue<std::string> q;
  q.push(from);
  while (!q.empty()) {
    const std::string s = q.front();
    q.pop();
    const std::size_t next = dist[s] + 1;
    auto visit = [&](const std::string& t) {
      if (t.size() <= max_len && dist.emplace(t, next).second) q.push(t);
    };
    for (std::size_t i = 0; i <= s.size(); ++i) {
      for (char c : alphabet) visit(s.substr(0, i) + c + s.substr(i));
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      visit(s.substr(0, i) + s.substr(i + 1));
      for (char c : alphabet) {
        if (c == s[i]) continue;
        std::string t = s;
        t[i] = c;
        visit(t);
      }
    }
  }
  return dist;
}

/// ln Gamma at a positive multiple of 0.5, from Gamma(1/2) = sqrt(pi),
/// Gamma(1) = 1 and Gamma(x + 1) = x Gamma(x).
inline double ln_gamma_half(double x) {
  const long double pi = 3.14159265358979323846264338327950288L;
  long double base = std::fmod(x, 1.0) != 0.0 ? 0.5L : 1.0L;
  long double acc = base == 0.5L ? 0.5L * std::log(pi) : 0.0L;
  for (long double z = base; z + 0.25L < x; z += 1.0L) acc += std::log(z);
  return static_cast<double>(acc);
}

/// Standard normal CDF from the all-positive series
/// Phi(x) = 1/2 + phi(x) * sum x^(2k+1) / (1*3*...*(2k+1)).
inline double normal_cdf_series(double x) {
  const long double xx = x;
  long double term = xx, sum = xx;
  for (int k = 1; k < 400; ++k) {
    term *= xx * xx / (2.0L * k + 1.0L);
    sum += term;
    if (std::fabs(term) < 1e-30L * std::fabs(sum)) break;
  }
  const long double phi = std::exp(-xx * xx / 2.0L) / std::sqrt(2.0L * 3.14159265358979323846L);
  return static_cast<double>(0.5L + phi * sum);
}

inline double probit_bisection(double p) {
  double lo = -12.0, hi = 12.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf_series(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
