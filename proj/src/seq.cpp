#include "dnaembed/seq.hpp"

#include <algorithm>
#include <fstream>

#include "dnaembed/errors.hpp"

namespace dnaembed {

std::string DnaSeq::str() const {
  std::string out;
  out.reserve(symbols_.size());
  for (Base b : symbols_) out.push_back(to_char(b));
  return out;
}

DnaSeq parse_seq(std::string_view text) {
  std::vector<Base> symbols;
  symbols.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    switch (text[i]) {
      case 'A': case 'a': symbols.push_back(Base::A); break;
      case 'C': case 'c': symbols.push_back(Base::C); break;
      case 'G': case 'g': symbols.push_back(Base::G); break;
      case 'T': case 't': symbols.push_back(Base::T); break;
      case 'N': case 'n': symbols.push_back(Base::N); break;
      default:
        throw ParseError("invalid nucleotide '" + std::string(1, text[i]) + "' at position " +
                             std::to_string(i),
                         i);
    }
  }
  return DnaSeq(std::move(symbols));
}

void one_hot_into(const DnaSeq& s, std::size_t padded_len, std::span<double> out) {
  if (s.size() > padded_len) {
    throw LengthOverflowError("sequence " + s.str() + " of length " + std::to_string(s.size()) +
                              " exceeds padded length " + std::to_string(padded_len));
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i * kNumChannels + static_cast<std::size_t>(s[i])] = 1.0;
  }
}

OneHotMatrix one_hot(const DnaSeq& s, std::size_t padded_len) {
  OneHotMatrix m;
  m.rows = padded_len;
  m.values.assign(padded_len * kNumChannels, 0.0);
  one_hot_into(s, padded_len, m.values);
  return m;
}

DnaSeq decode_one_hot(const OneHotMatrix& m) {
  DnaSeq s;
  for (std::size_t r = 0; r < m.rows; ++r) {
    std::size_t hot = kNumChannels;
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      if (m.at(r, c) == 1.0) hot = c;
    }
    if (hot == kNumChannels) break;
    s.push_back(static_cast<Base>(hot));
  }
  return s;
}

std::size_t levenshtein(const DnaSeq& s, const DnaSeq& t) {
  // Rolling rows over the shorter sequence.
  const DnaSeq& longer = s.size() >= t.size() ? s : t;
  const DnaSeq& shorter = s.size() >= t.size() ? t : s;
  const std::size_t m = shorter.size();
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= longer.size(); ++i) {
    cur[0] = i;
    const Base a = longer[i - 1];
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = prev[j - 1] + (a == shorter[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

std::vector<DnaSeq> load_reads(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open reads file " + path.string());
  std::vector<DnaSeq> reads;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '>') continue;
    try {
      reads.push_back(parse_seq(line));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return reads;
}

void save_reads(const std::filesystem::path& path, std::span<const DnaSeq> reads) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write reads file " + path.string());
  for (const auto& r : reads) out << r.str() << '\n';
}

}  // namespace dnaembed
