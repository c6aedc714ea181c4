#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "dnaembed/rng.hpp"
#include "dnaembed/seq.hpp"

namespace dnaembed {

/// Per-base error probabilities of the synthetic sequencing channel.
struct ChannelParams {
  double p_sub = 0.0;
  double p_ins = 0.0;
  double p_del = 0.0;
  /// Probability that an emitted base is reported as N.
  double p_fail = 0.0;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when a rate is outside [0,1] or sub+ins+del > 1.
  void validate() const;
};

struct PairSample {
  DnaSeq s;
  DnaSeq t;
  std::size_t d = 0;
  bool homologous = false;

  friend bool operator==(const PairSample&, const PairSample&) = default;
};

enum class DatasetRole { Train, Test };

struct Dataset {
  std::vector<PairSample> samples;
  std::size_t padded_len = 0;
  DatasetRole role = DatasetRole::Train;

  std::size_t homologous_count() const;
  std::size_t non_homologous_count() const;
  /// Mean d over non-homologous samples; 0 when there are none.
  double mean_non_homologous_distance() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Multiplicity limit for homologous distance classes.
struct BalanceOptions {
  bool enabled = true;
  std::size_t max_duplication = 50;
};

/// count i.i.d. uniform sequences over {A,C,G,T}. Reference i uses stream i.
std::vector<DnaSeq> gen_references(std::size_t count, std::size_t ref_len, std::uint64_t seed);

/// One pass of the insertion/deletion/substitution channel over ref.
DnaSeq simulate_read(const DnaSeq& ref, const ChannelParams& ch, Rng& rng);
/// Same, seeded from ch.seed.
DnaSeq simulate_read(const DnaSeq& ref, const ChannelParams& ch);

/// reads[i][j] is the j-th read of refs[i], drawn from stream (ch.seed, i, j).
/// A read longer than max_len is redrawn from the same stream.
std::vector<std::vector<DnaSeq>> simulate_reads(std::span<const DnaSeq> refs,
                                                std::size_t reads_per_ref,
                                                const ChannelParams& ch, std::size_t max_len);

/// Pairs reference-read samples with an equal number of cross-reference read
/// pairs. Identical pairs are screened out; for the training role homologous
/// samples are then duplicated per distance class.
Dataset pair_reads(std::span<const DnaSeq> refs, std::span<const std::vector<DnaSeq>> reads,
                   std::size_t padded_len, std::uint64_t seed, DatasetRole role,
                   const BalanceOptions& balance = {});

/// simulate_reads followed by pair_reads.
Dataset build_pairs(std::span<const DnaSeq> refs, std::size_t reads_per_ref,
                    const ChannelParams& ch, std::size_t padded_len, std::uint64_t seed,
                    DatasetRole role = DatasetRole::Train, const BalanceOptions& balance = {});

/// Duplicates each homologous distance class up to the size of the largest class,
/// at most max_duplication copies per sample. Non-homologous samples are untouched.
std::vector<PairSample> balance_by_distance(std::span<const PairSample> samples,
                                            std::size_t max_duplication);

/// ref_len rounded up to the next multiple of 32.
std::size_t default_padded_len(std::size_t ref_len);

/// Leading round(fraction * size) references train, the rest test.
std::pair<std::vector<DnaSeq>, std::vector<DnaSeq>> split_by_reference(
    std::span<const DnaSeq> refs, double fraction);

/// Throws std::invalid_argument if any reference appears in both sets.
void check_disjoint_references(std::span<const DnaSeq> train_refs,
                               std::span<const DnaSeq> test_refs);

/// CSV with header `s,t,d,homologous`.
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
/// Throws ParseError naming the line of the first malformed row. With
/// verify_distances the stored d is checked against levenshtein().
Dataset load_dataset(const std::filesystem::path& path, std::size_t padded_len, DatasetRole role,
                     bool verify_distances = true);

}  // namespace dnaembed
