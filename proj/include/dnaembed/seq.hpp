#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dnaembed {

/// Nucleotide symbol. The numeric value is the one-hot channel index.
enum class Base : std::uint8_t { A = 0, C = 1, G = 2, T = 3, N = 4 };

inline constexpr std::size_t kNumChannels = 5;
inline constexpr std::array<char, kNumChannels> kBaseLetters = {'A', 'C', 'G', 'T', 'N'};

inline char to_char(Base b) { return kBaseLetters[static_cast<std::size_t>(b)]; }

/// A read or reference over {A,C,G,T,N}. N marks a failed base call.
class DnaSeq {
 public:
  DnaSeq() = default;
  explicit DnaSeq(std::vector<Base> symbols) : symbols_(std::move(symbols)) {}

  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  Base operator[](std::size_t i) const { return symbols_[i]; }
  std::span<const Base> symbols() const noexcept { return symbols_; }

  void push_back(Base b) { symbols_.push_back(b); }

  /// Uppercase string form.
  std::string str() const;

  friend bool operator==(const DnaSeq&, const DnaSeq&) = default;
  friend auto operator<=>(const DnaSeq&, const DnaSeq&) = default;

 private:
  std::vector<Base> symbols_;
};

/// Case-insensitive parse. Throws ParseError carrying the 0-based offending position.
DnaSeq parse_seq(std::string_view text);

/// Row-major padded_len x 5 matrix; padding rows are all zero.
struct OneHotMatrix {
  std::size_t rows = 0;
  std::vector<double> values;

  double at(std::size_t row, std::size_t channel) const {
    return values[row * kNumChannels + channel];
  }
};

/// Throws LengthOverflowError if the sequence is longer than padded_len.
OneHotMatrix one_hot(const DnaSeq& s, std::size_t padded_len);

/// Writes the encoding of s into out (padded_len * 5 entries, pre-zeroed by the caller).
void one_hot_into(const DnaSeq& s, std::size_t padded_len, std::span<double> out);

/// Inverse of one_hot: stops at the first all-zero row.
DnaSeq decode_one_hot(const OneHotMatrix& m);

/// Unit-cost edit distance (insertions, deletions, substitutions).
std::size_t levenshtein(const DnaSeq& s, const DnaSeq& t);

/// Plain-text reads: one sequence per line, '>' lines and blank lines skipped.
std::vector<DnaSeq> load_reads(const std::filesystem::path& path);
void save_reads(const std::filesystem::path& path, std::span<const DnaSeq> reads);

}  // namespace dnaembed
