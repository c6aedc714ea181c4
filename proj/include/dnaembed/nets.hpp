#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dnaembed/seq.hpp"
#include "dnaembed/tensor.hpp"

namespace dnaembed {

enum class Arch { CnnEd5, CnnEd10, Rnn, Gru };

/// CLI spelling: cnn-ed-5, cnn-ed-10, rnn, gru.
std::string_view arch_name(Arch arch);
Arch parse_arch(std::string_view name);

/// Output channels of every convolution in the CNN variants.
inline constexpr std::size_t kConvChannels = 64;
/// Average-pooling stages of both CNN variants.
inline constexpr std::size_t kCnnPools = 5;

struct ModelSpec {
  Arch arch = Arch::CnnEd5;
  std::size_t input_len = 160;
  std::size_t in_channels = kNumChannels;
  std::size_t embed_dim = 80;
  std::size_t fc_hidden = 256;
  std::size_t hidden_size = 64;

  bool is_cnn() const { return arch == Arch::CnnEd5 || arch == Arch::CnnEd10; }
  /// Throws std::invalid_argument with a fix hint when the spec cannot be built.
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct NamedParam {
  std::string name;
  Tensor value;
};

/// Embedding network: feature extractor, two fully connected layers with a
/// ReLU between them, and a non-affine batchnorm on the output.
///
/// CNN-ED-5 stacks five [conv(64, k3, s1, p1) -> avgpool(2) -> relu] blocks;
/// CNN-ED-10 uses two convolutions per block ([conv -> relu -> conv -> avgpool
/// -> relu]). RNN and GRU are two-layer bidirectional recurrences whose readout
/// is the top layer's final forward state concatenated with its final backward
/// state.
class Model {
 public:
  static Model build(const ModelSpec& spec, std::uint64_t seed);

  const ModelSpec& spec() const noexcept { return spec_; }

  /// One-hot batch (B, L, 5) -> un-rescaled embeddings (B, n).
  Tensor forward(Tape& tape, const Tensor& batch, Mode mode);
  /// Input of the fully connected top: (B, L/32 * 64) for CNNs, (B, 2 * hidden) for RNNs.
  Tensor features(Tape& tape, const Tensor& batch);

  std::vector<NamedParam>& params() noexcept { return params_; }
  const std::vector<NamedParam>& params() const noexcept { return params_; }
  Tensor& param(const std::string& name);
  const Tensor& param(const std::string& name) const;

  BatchNormState& batchnorm() noexcept { return bn_; }
  const BatchNormState& batchnorm() const noexcept { return bn_; }

  std::size_t parameter_count() const;
  void zero_grad();

 private:
  explicit Model(ModelSpec spec) : spec_(std::move(spec)), bn_(spec_.embed_dim) {}
  Tensor& add_param(std::string name, Shape shape);
  Tensor cnn_features(Tape& tape, const Tensor& batch);
  Tensor rnn_features(Tape& tape, const Tensor& batch);
  /// Runs one direction of one recurrent layer; returns the per-step hidden states in time order.
  std::vector<Tensor> run_direction(Tape& tape, const Tensor& inputs, const std::string& prefix,
                                    bool reverse);

  ModelSpec spec_;
  std::vector<NamedParam> params_;
  std::map<std::string, std::size_t> index_;
  BatchNormState bn_;
};

/// Packs sequences into a (B, L, 5) one-hot tensor. Throws LengthOverflowError
/// when a sequence is longer than padded_len.
Tensor one_hot_batch(std::span<const DnaSeq> seqs, std::size_t padded_len);
Tensor one_hot_batch(std::span<const DnaSeq* const> seqs, std::size_t padded_len);

/// Binary container, see docs/formats.md. metadata (a JSON document, may be
/// empty) is stored verbatim in the header.
void save_checkpoint(const Model& model, const std::filesystem::path& path,
                     const std::string& metadata = {});
/// Throws FormatError on truncation, bad magic, version or shape mismatch.
Model load_checkpoint(const std::filesystem::path& path);
/// Additionally requires the stored spec to equal expected.
Model load_checkpoint(const std::filesystem::path& path, const ModelSpec& expected);
/// Metadata document stored by save_checkpoint ("" when none).
std::string load_checkpoint_metadata(const std::filesystem::path& path);

}  // namespace dnaembed
