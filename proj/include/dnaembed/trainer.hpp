#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dnaembed/channel.hpp"
#include "dnaembed/metric_space.hpp"
#include "dnaembed/metrics.hpp"
#include "dnaembed/nets.hpp"

namespace dnaembed {

enum class OptimizerKind { Adam, Sgd };

std::string_view optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment estimates for one parameter group.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;
};

/// Bias-corrected Adam update of one parameter group, in place.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const OptimizerConfig& hyper);
void sgd_step(std::span<double> params, std::span<const double> grads, const OptimizerConfig& hyper);

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 128;
  OptimizerConfig optimizer;
  LossSpec loss;
  SpaceKind space = SpaceKind::SqEuclid;
  std::uint64_t seed = 0;
  bool shuffle = true;
  /// Replaces the space's rescaling factor; for tests only.
  std::optional<double> scale_override;

  /// Throws std::invalid_argument on non-positive lr, zero batch size or epochs.
  void validate() const;
};

struct EpochReport {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double seconds = 0.0;
  std::optional<MetricsReport> validation;
};

/// Rescaling factor used by training and embedding for this model.
double effective_scale(const Model& model, const TrainConfig& cfg);

/// Predicted distances of a batch of pairs. Both sides pass through the one
/// model as a single stacked batch, so batchnorm statistics and gradients are
/// shared between the branches.
Tensor pair_distances(Tape& tape, Model& model, std::span<const PairSample* const> pairs,
                      SpaceKind space, double scale, Mode mode);

using EpochCallback = std::function<void(const EpochReport&)>;

/// Siamese training. Throws std::invalid_argument on an empty dataset or a
/// padded-length mismatch and std::runtime_error naming the batch when the
/// loss becomes non-finite. validation, when given, is evaluated after every
/// epoch at threshold validation_k.
std::vector<EpochReport> train(Model& model, const Dataset& data, const TrainConfig& cfg,
                               const Dataset* validation = nullptr, double validation_k = 0.0,
                               const EpochCallback& on_epoch = {});

/// Eval-mode embeddings multiplied by the space's rescaling factor.
std::vector<std::vector<double>> embed_batch(Model& model, std::span<const DnaSeq> seqs,
                                             SpaceKind space, std::size_t chunk = 256);

/// Un-rescaled eval-mode embeddings.
std::vector<std::vector<double>> embed_raw(Model& model, std::span<const DnaSeq> seqs,
                                           std::size_t chunk = 256);

/// Predicted distance for every sample of a dataset; each distinct sequence is embedded once.
std::vector<ScoredPair> score_dataset(Model& model, const Dataset& data, SpaceKind space);

/// Distinct sequences of a dataset in order of first appearance.
std::vector<DnaSeq> distinct_sequences(const Dataset& data);

}  // namespace dnaembed
