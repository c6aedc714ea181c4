#include "dnaembed/trainer.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dnaembed/errors.hpp"

namespace dnaembed {

std::string_view optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::Adam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "sgd") return OptimizerKind::Sgd;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "' (expected adam or sgd)");
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const OptimizerConfig& hyper) {
  if (params.size() != grads.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                     std::to_string(grads.size()) + " gradients");
  }
  if (state.m.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(hyper.beta1, t);
  const double c2 = 1.0 - std::pow(hyper.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = hyper.beta1 * state.m[i] + (1.0 - hyper.beta1) * grads[i];
    state.v[i] = hyper.beta2 * state.v[i] + (1.0 - hyper.beta2) * grads[i] * grads[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
  }
}

void sgd_step(std::span<double> params, std::span<const double> grads, const OptimizerConfig& hyper) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= hyper.lr * grads[i];
}

void TrainConfig::validate() const {
  if (!(optimizer.lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be at least 1");
  if (epochs == 0) throw std::invalid_argument("epochs must be at least 1");
  if (!(loss.epsilon_dhat > 0.0)) throw std::invalid_argument("epsilon_dhat must be positive");
}

double effective_scale(const Model& model, const TrainConfig& cfg) {
  if (cfg.scale_override) return *cfg.scale_override;
  return rescale_factor({cfg.space, model.spec().embed_dim});
}

Tensor pair_distances(Tape& tape, Model& model, std::span<const PairSample* const> pairs,
                      SpaceKind space, double scale_factor, Mode mode) {
  const std::size_t b = pairs.size();
  std::vector<const DnaSeq*> seqs(2 * b);
  for (std::size_t i = 0; i < b; ++i) {
    seqs[i] = &pairs[i]->s;
    seqs[b + i] = &pairs[i]->t;
  }
  Tensor input = one_hot_batch(std::span<const DnaSeq* const>(seqs), model.spec().input_len);
  Tensor raw = model.forward(tape, input, mode);
  Tensor rescaled = scale(tape, raw, scale_factor);
  Tensor u = slice(tape, rescaled, 0, 0, b);
  Tensor v = slice(tape, rescaled, 0, b, 2 * b);
  return distance(tape, space, u, v);
}

std::vector<EpochReport> train(Model& model, const Dataset& data, const TrainConfig& cfg,
                               const Dataset* validation, double validation_k,
                               const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.samples.empty()) throw std::invalid_argument("train: dataset is empty");
  if (data.padded_len != model.spec().input_len) {
    throw std::invalid_argument("train: dataset padded length " + std::to_string(data.padded_len) +
                                " differs from model input_len " +
                                std::to_string(model.spec().input_len));
  }
  const double factor = effective_scale(model, cfg);
  std::vector<AdamState> adam(model.params().size());
  std::vector<std::size_t> order(data.samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const Rng shuffle_root(cfg.seed, 7);

  std::vector<EpochReport> reports;
  std::size_t batch_index = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    if (cfg.shuffle) {
      Rng rng = shuffle_root.split(epoch);
      rng.shuffle(std::span(order));
    }
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      std::vector<const PairSample*> batch;
      std::vector<double> targets;
      for (std::size_t i = begin; i < end; ++i) {
        batch.push_back(&data.samples[order[i]]);
        targets.push_back(static_cast<double>(data.samples[order[i]].d));
      }
      model.zero_grad();
      Tape tape;
      Tensor dhat = pair_distances(tape, model, batch, cfg.space, factor, Mode::Train);
      Tensor loss = pair_loss(tape, cfg.loss, dhat, targets);
      if (!std::isfinite(loss.item())) {
        throw std::runtime_error("train: non-finite loss " + std::to_string(loss.item()) +
                                 " at epoch " + std::to_string(epoch) + ", batch " +
                                 std::to_string(batch_index));
      }
      tape.backward(loss);
      for (std::size_t p = 0; p < model.params().size(); ++p) {
        Tensor& w = model.params()[p].value;
        if (cfg.optimizer.kind == OptimizerKind::Adam) {
          adam_step(w.data(), w.grad(), adam[p], cfg.optimizer);
        } else {
          sgd_step(w.data(), w.grad(), cfg.optimizer);
        }
      }
      loss_sum += loss.item();
      ++batches;
    }
    EpochReport report;
    report.epoch = epoch;
    report.mean_loss = loss_sum / static_cast<double>(batches);
    if (validation != nullptr) {
      const auto scored = score_dataset(model, *validation, cfg.space);
      report.validation = compute_metrics(scored, validation_k);
    }
    report.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (on_epoch) on_epoch(report);
    reports.push_back(report);
  }
  return reports;
}

std::vector<std::vector<double>> embed_raw(Model& model, std::span<const DnaSeq> seqs,
                                           std::size_t chunk) {
  std::vector<std::vector<double>> out;
  out.reserve(seqs.size());
  const std::size_t n = model.spec().embed_dim;
  for (std::size_t begin = 0; begin < seqs.size(); begin += chunk) {
    const std::size_t end = std::min(seqs.size(), begin + chunk);
    Tape tape(false);
    Tensor input = one_hot_batch(seqs.subspan(begin, end - begin), model.spec().input_len);
    Tensor emb = model.forward(tape, input, Mode::Eval);
    for (std::size_t i = 0; i < end - begin; ++i) {
      auto row = emb.data().subspan(i * n, n);
      out.emplace_back(row.begin(), row.end());
    }
  }
  return out;
}

std::vector<std::vector<double>> embed_batch(Model& model, std::span<const DnaSeq> seqs,
                                             SpaceKind space, std::size_t chunk) {
  auto out = embed_raw(model, seqs, chunk);
  const double factor = rescale_factor({space, model.spec().embed_dim});
  for (auto& row : out) {
    for (double& v : row) v *= factor;
  }
  return out;
}

std::vector<DnaSeq> distinct_sequences(const Dataset& data) {
  std::map<DnaSeq, std::size_t> seen;
  std::vector<DnaSeq> out;
  for (const auto& p : data.samples) {
    for (const DnaSeq* s : {&p.s, &p.t}) {
      if (seen.emplace(*s, out.size()).second) out.push_back(*s);
    }
  }
  return out;
}

std::vector<ScoredPair> score_dataset(Model& model, const Dataset& data, SpaceKind space) {
  const auto seqs = distinct_sequences(data);
  std::map<DnaSeq, std::size_t> index;
  for (std::size_t i = 0; i < seqs.size(); ++i) index.emplace(seqs[i], i);
  const auto emb = embed_batch(model, seqs, space);
  std::vector<ScoredPair> scored;
  scored.reserve(data.samples.size());
  for (const auto& p : data.samples) {
    const double dhat = distance(space, emb[index.at(p.s)], emb[index.at(p.t)]);
    scored.push_back({static_cast<double>(p.d), dhat, p.homologous});
  }
  return scored;
}

}  // namespace dnaembed
