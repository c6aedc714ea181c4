#include "dnaembed/channel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

#include "dnaembed/errors.hpp"

namespace dnaembed {
namespace {

constexpr std::size_t kMaxRedraws = 10000;

Base random_base(Rng& rng) { return static_cast<Base>(rng.uniform_int(4)); }

Base different_base(Base b, Rng& rng) {
  if (b == Base::N) return random_base(rng);
  auto k = static_cast<std::uint8_t>(rng.uniform_int(3));
  if (k >= static_cast<std::uint8_t>(b)) ++k;
  return static_cast<Base>(k);
}

}  // namespace

void ChannelParams::validate() const {
  for (double p : {p_sub, p_ins, p_del, p_fail}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("channel rates must lie in [0,1], got " + std::to_string(p));
    }
  }
  if (p_sub + p_ins + p_del > 1.0 + 1e-12) {
    throw std::invalid_argument("p_sub + p_ins + p_del must not exceed 1, got " +
                                std::to_string(p_sub + p_ins + p_del));
  }
}

std::size_t Dataset::homologous_count() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const auto& p) { return p.homologous; }));
}

std::size_t Dataset::non_homologous_count() const { return samples.size() - homologous_count(); }

double Dataset::mean_non_homologous_distance() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& p : samples) {
    if (!p.homologous) {
      sum += static_cast<double>(p.d);
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::vector<DnaSeq> gen_references(std::size_t count, std::size_t ref_len, std::uint64_t seed) {
  std::vector<DnaSeq> refs;
  refs.reserve(count);
  const Rng root(seed);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = root.split(i);
    std::vector<Base> symbols(ref_len);
    for (auto& b : symbols) b = random_base(rng);
    refs.emplace_back(std::move(symbols));
  }
  return refs;
}

DnaSeq simulate_read(const DnaSeq& ref, const ChannelParams& ch, Rng& rng) {
  const double del_edge = ch.p_del;
  const double sub_edge = del_edge + ch.p_sub;
  const double ins_edge = sub_edge + ch.p_ins;
  std::vector<Base> out;
  out.reserve(ref.size() + 8);
  for (Base b : ref.symbols()) {
    const double u = rng.uniform();
    if (u < del_edge) continue;
    if (u < sub_edge) {
      out.push_back(different_base(b, rng));
    } else if (u < ins_edge) {
      out.push_back(random_base(rng));
      out.push_back(b);
    } else {
      out.push_back(b);
    }
  }
  if (ch.p_fail > 0.0) {
    for (auto& b : out) {
      if (rng.uniform() < ch.p_fail) b = Base::N;
    }
  }
  return DnaSeq(std::move(out));
}

DnaSeq simulate_read(const DnaSeq& ref, const ChannelParams& ch) {
  Rng rng(ch.seed);
  return simulate_read(ref, ch, rng);
}

std::vector<std::vector<DnaSeq>> simulate_reads(std::span<const DnaSeq> refs,
                                                std::size_t reads_per_ref,
                                                const ChannelParams& ch, std::size_t max_len) {
  ch.validate();
  const Rng root(ch.seed, 1);
  std::vector<std::vector<DnaSeq>> reads(refs.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const Rng per_ref = root.split(i);
    reads[i].reserve(reads_per_ref);
    for (std::size_t j = 0; j < reads_per_ref; ++j) {
      Rng rng = per_ref.split(j);
      std::size_t attempts = 0;
      DnaSeq read = simulate_read(refs[i], ch, rng);
      while (read.size() > max_len) {
        if (++attempts > kMaxRedraws) {
          throw LengthOverflowError("could not draw a read of reference " + std::to_string(i) +
                                    " within padded length " + std::to_string(max_len));
        }
        read = simulate_read(refs[i], ch, rng);
      }
      reads[i].push_back(std::move(read));
    }
  }
  return reads;
}

std::vector<PairSample> balance_by_distance(std::span<const PairSample> samples,
                                            std::size_t max_duplication) {
  std::map<std::size_t, std::size_t> class_size;
  for (const auto& p : samples) {
    if (p.homologous) ++class_size[p.d];
  }
  std::size_t largest = 0;
  for (const auto& [d, n] : class_size) largest = std::max(largest, n);

  std::map<std::size_t, std::size_t> seen;
  std::vector<PairSample> out;
  for (const auto& p : samples) {
    if (!p.homologous) {
      out.push_back(p);
      continue;
    }
    const std::size_t n = class_size[p.d];
    const std::size_t target = std::min(largest, max_duplication * n);
    const std::size_t k = seen[p.d]++;
    const std::size_t copies = target / n + (k < target % n ? 1 : 0);
    for (std::size_t c = 0; c < copies; ++c) out.push_back(p);
  }
  return out;
}

Dataset pair_reads(std::span<const DnaSeq> refs, std::span<const std::vector<DnaSeq>> reads,
                   std::size_t padded_len, std::uint64_t seed, DatasetRole role,
                   const BalanceOptions& balance) {
  if (refs.size() < 2) {
    throw std::invalid_argument("pairing needs at least 2 references, got " +
                                std::to_string(refs.size()));
  }
  if (reads.size() != refs.size()) {
    throw std::invalid_argument("reads must be grouped per reference");
  }
  auto check_len = [padded_len](const DnaSeq& s) {
    if (s.size() > padded_len) {
      throw LengthOverflowError("sequence " + s.str() + " of length " + std::to_string(s.size()) +
                                " exceeds padded length " + std::to_string(padded_len));
    }
  };

  Dataset ds;
  ds.padded_len = padded_len;
  ds.role = role;

  std::vector<std::pair<std::size_t, std::size_t>> pool;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    check_len(refs[i]);
    for (std::size_t j = 0; j < reads[i].size(); ++j) {
      check_len(reads[i][j]);
      const std::size_t d = levenshtein(refs[i], reads[i][j]);
      if (d == 0) continue;
      ds.samples.push_back({refs[i], reads[i][j], d, true});
      pool.emplace_back(i, j);
    }
  }
  const std::size_t homologous = ds.samples.size();
  if (homologous == 0) {
    throw std::invalid_argument("empty homologous set: every reference-read pair has distance 0");
  }

  // Non-homologous partners are drawn from all reads, screened or not.
  pool.clear();
  for (std::size_t i = 0; i < refs.size(); ++i) {
    for (std::size_t j = 0; j < reads[i].size(); ++j) pool.emplace_back(i, j);
  }
  Rng rng(seed, 2);
  std::size_t cursor = pool.size();
  std::size_t produced = 0;
  std::size_t stalls = 0;
  while (produced < homologous) {
    if (cursor + 1 >= pool.size()) {
      rng.shuffle(std::span(pool));
      cursor = 0;
    }
    const auto a = pool[cursor];
    std::size_t k = cursor + 1;
    while (k < pool.size() && pool[k].first == a.first) ++k;
    if (k == pool.size()) {
      if (++stalls > 1000) {
        throw std::invalid_argument("non-homologous pairing needs reads from 2 references");
      }
      cursor = pool.size();
      continue;
    }
    std::swap(pool[cursor + 1], pool[k]);
    const auto b = pool[cursor + 1];
    cursor += 2;
    const DnaSeq& s = reads[a.first][a.second];
    const DnaSeq& t = reads[b.first][b.second];
    ds.samples.push_back({s, t, levenshtein(s, t), false});
    ++produced;
  }

  if (role == DatasetRole::Train && balance.enabled) {
    ds.samples = balance_by_distance(ds.samples, balance.max_duplication);
  }
  return ds;
}

Dataset build_pairs(std::span<const DnaSeq> refs, std::size_t reads_per_ref,
                    const ChannelParams& ch, std::size_t padded_len, std::uint64_t seed,
                    DatasetRole role, const BalanceOptions& balance) {
  if (refs.size() < 2) {
    throw std::invalid_argument("pairing needs at least 2 references, got " +
                                std::to_string(refs.size()));
  }
  const auto reads = simulate_reads(refs, reads_per_ref, ch, padded_len);
  return pair_reads(refs, reads, padded_len, seed, role, balance);
}

std::size_t default_padded_len(std::size_t ref_len) { return (ref_len + 31) / 32 * 32; }

std::pair<std::vector<DnaSeq>, std::vector<DnaSeq>> split_by_reference(
    std::span<const DnaSeq> refs, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("split fraction must lie in [0,1]");
  }
  const auto n_train = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(refs.size())));
  std::vector<DnaSeq> train(refs.begin(), refs.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<DnaSeq> test(refs.begin() + static_cast<std::ptrdiff_t>(n_train), refs.end());
  check_disjoint_references(train, test);
  return {std::move(train), std::move(test)};
}

void check_disjoint_references(std::span<const DnaSeq> train_refs,
                               std::span<const DnaSeq> test_refs) {
  const std::set<DnaSeq> train(train_refs.begin(), train_refs.end());
  for (const auto& r : test_refs) {
    if (train.contains(r)) {
      throw std::invalid_argument("reference " + r.str() + " appears in both train and test");
    }
  }
}

}  // namespace dnaembed
