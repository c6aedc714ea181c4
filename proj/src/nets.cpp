#include "dnaembed/nets.hpp"

#include <cmath>
#include <stdexcept>

#include "dnaembed/errors.hpp"
#include "dnaembed/rng.hpp"

namespace dnaembed {
namespace {

std::string conv_name(std::size_t i) { return "conv" + std::to_string(i); }

std::string rnn_prefix(std::size_t layer, bool reverse) {
  return "rnn.l" + std::to_string(layer) + (reverse ? ".bwd" : ".fwd");
}

/// Convolutions per pooling block.
std::size_t convs_per_block(Arch arch) { return arch == Arch::CnnEd10 ? 2 : 1; }

std::size_t gate_count(Arch arch) { return arch == Arch::Gru ? 3 : 1; }

constexpr std::size_t kRecurrentLayers = 2;

}  // namespace

std::string_view arch_name(Arch arch) {
  switch (arch) {
    case Arch::CnnEd5: return "cnn-ed-5";
    case Arch::CnnEd10: return "cnn-ed-10";
    case Arch::Rnn: return "rnn";
    case Arch::Gru: return "gru";
  }
  return "?";
}

Arch parse_arch(std::string_view name) {
  for (Arch a : {Arch::CnnEd5, Arch::CnnEd10, Arch::Rnn, Arch::Gru}) {
    if (arch_name(a) == name) return a;
  }
  throw std::invalid_argument("unknown architecture '" + std::string(name) +
                              "' (expected cnn-ed-5, cnn-ed-10, rnn or gru)");
}

void ModelSpec::validate() const {
  if (input_len == 0) throw std::invalid_argument("input_len must be positive");
  if (in_channels != kNumChannels) {
    throw std::invalid_argument("in_channels must be " + std::to_string(kNumChannels));
  }
  if (embed_dim == 0) throw std::invalid_argument("embed_dim must be at least 1");
  if (fc_hidden == 0) throw std::invalid_argument("fc_hidden must be at least 1");
  if (hidden_size == 0) throw std::invalid_argument("hidden_size must be at least 1");
  if (is_cnn()) {
    const std::size_t divisor = std::size_t{1} << kCnnPools;
    if (input_len % divisor != 0) {
      const std::size_t up = (input_len + divisor - 1) / divisor * divisor;
      throw std::invalid_argument(std::string(arch_name(arch)) + " needs input_len divisible by " +
                                  std::to_string(divisor) + ", got " + std::to_string(input_len) +
                                  "; pad sequences to " + std::to_string(up));
    }
  }
}

Tensor& Model::add_param(std::string name, Shape shape) {
  index_[name] = params_.size();
  params_.push_back({std::move(name), Tensor::zeros(std::move(shape), true)});
  return params_.back().value;
}

Tensor& Model::param(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
  return params_[it->second].value;
}

const Tensor& Model::param(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
  return params_[it->second].value;
}

Model Model::build(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  Model m(spec);
  // Fan-in of each parameter, for the U(-1/sqrt(fan_in), 1/sqrt(fan_in)) init.
  std::vector<std::size_t> fan_in;
  std::size_t feature_width = 0;

  if (spec.is_cnn()) {
    const std::size_t n_conv = kCnnPools * convs_per_block(spec.arch);
    std::size_t cin = spec.in_channels;
    for (std::size_t i = 0; i < n_conv; ++i) {
      m.add_param(conv_name(i) + ".weight", {kConvChannels, 3, cin});
      m.add_param(conv_name(i) + ".bias", {kConvChannels});
      fan_in.insert(fan_in.end(), 2, cin * 3);
      cin = kConvChannels;
    }
    feature_width = (spec.input_len >> kCnnPools) * kConvChannels;
  } else {
    const std::size_t h = spec.hidden_size;
    const std::size_t gates = gate_count(spec.arch) * h;
    for (std::size_t layer = 0; layer < kRecurrentLayers; ++layer) {
      const std::size_t in = layer == 0 ? spec.in_channels : 2 * h;
      for (bool reverse : {false, true}) {
        const std::string p = rnn_prefix(layer, reverse);
        m.add_param(p + ".w_ih", {in, gates});
        m.add_param(p + ".w_hh", {h, gates});
        m.add_param(p + ".b_ih", {gates});
        m.add_param(p + ".b_hh", {gates});
        fan_in.insert(fan_in.end(), 4, h);
      }
    }
    feature_width = 2 * h;
  }
  m.add_param("fc0.weight", {feature_width, spec.fc_hidden});
  m.add_param("fc0.bias", {spec.fc_hidden});
  m.add_param("fc1.weight", {spec.fc_hidden, spec.embed_dim});
  m.add_param("fc1.bias", {spec.embed_dim});
  fan_in.insert(fan_in.end(), 2, feature_width);
  fan_in.insert(fan_in.end(), 2, spec.fc_hidden);

  const Rng root(seed);
  for (std::size_t i = 0; i < m.params_.size(); ++i) {
    Rng rng = root.split(i);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in[i]));
    for (double& v : m.params_[i].value.data()) v = bound * (2.0 * rng.uniform() - 1.0);
  }
  return m;
}

std::size_t Model::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.numel();
  return n;
}

void Model::zero_grad() {
  for (auto& p : params_) p.value.zero_grad();
}

Tensor Model::cnn_features(Tape& tape, const Tensor& batch) {
  const std::size_t per_block = convs_per_block(spec_.arch);
  Tensor h = batch;
  std::size_t conv = 0;
  for (std::size_t block = 0; block < kCnnPools; ++block) {
    for (std::size_t j = 0; j < per_block; ++j, ++conv) {
      h = conv1d(tape, h, param(conv_name(conv) + ".weight"), param(conv_name(conv) + ".bias"), 1, 1);
      if (j + 1 < per_block) h = relu(tape, h);
    }
    h = avgpool1d(tape, h, 2);
    h = relu(tape, h);
  }
  return reshape(tape, h, {h.dim(0), h.dim(1) * h.dim(2)});
}

std::vector<Tensor> Model::run_direction(Tape& tape, const Tensor& inputs,
                                         const std::string& prefix, bool reverse) {
  const std::size_t batch = inputs.dim(0), len = inputs.dim(1), in = inputs.dim(2);
  const std::size_t h = spec_.hidden_size;
  const bool gru = spec_.arch == Arch::Gru;
  const std::size_t gates = gate_count(spec_.arch) * h;

  // Input projections for all steps at once.
  Tensor flat = reshape(tape, inputs, {batch * len, in});
  Tensor proj = add_bias(tape, matmul(tape, flat, param(prefix + ".w_ih")), param(prefix + ".b_ih"));
  proj = reshape(tape, proj, {batch, len, gates});

  const Tensor& w_hh = param(prefix + ".w_hh");
  const Tensor& b_hh = param(prefix + ".b_hh");
  std::vector<Tensor> states(len);
  Tensor state = Tensor::zeros({batch, h});
  for (std::size_t step = 0; step < len; ++step) {
    const std::size_t t = reverse ? len - 1 - step : step;
    Tensor xw = reshape(tape, slice(tape, proj, 1, t, t + 1), {batch, gates});
    Tensor hw = add_bias(tape, matmul(tape, state, w_hh), b_hh);
    if (!gru) {
      state = tanh(tape, add(tape, xw, hw));
    } else {
      Tensor r = sigmoid(tape, add(tape, slice(tape, xw, 1, 0, h), slice(tape, hw, 1, 0, h)));
      Tensor z = sigmoid(tape, add(tape, slice(tape, xw, 1, h, 2 * h), slice(tape, hw, 1, h, 2 * h)));
      Tensor cand = tanh(tape, add(tape, slice(tape, xw, 1, 2 * h, 3 * h),
                                   mul(tape, r, slice(tape, hw, 1, 2 * h, 3 * h))));
      // (1 - z) * cand + z * state
      state = add(tape, cand, mul(tape, z, sub(tape, state, cand)));
    }
    states[t] = state;
  }
  return states;
}

Tensor Model::rnn_features(Tape& tape, const Tensor& batch) {
  const std::size_t b = batch.dim(0), len = batch.dim(1), h = spec_.hidden_size;
  Tensor layer_input = batch;
  Tensor readout;
  for (std::size_t layer = 0; layer < kRecurrentLayers; ++layer) {
    auto fwd = run_direction(tape, layer_input, rnn_prefix(layer, false), false);
    auto bwd = run_direction(tape, layer_input, rnn_prefix(layer, true), true);
    if (layer + 1 == kRecurrentLayers) {
      const Tensor last[] = {fwd[len - 1], bwd[0]};
      readout = concat(tape, last, 1);
      break;
    }
    std::vector<Tensor> steps;
    steps.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
      const Tensor both[] = {fwd[t], bwd[t]};
      steps.push_back(reshape(tape, concat(tape, both, 1), {b, 1, 2 * h}));
    }
    layer_input = concat(tape, steps, 1);
  }
  return readout;
}

Tensor Model::features(Tape& tape, const Tensor& batch) {
  if (batch.rank() != 3 || batch.dim(1) != spec_.input_len || batch.dim(2) != spec_.in_channels) {
    throw ShapeError("model expects a batch of shape (B, " + std::to_string(spec_.input_len) +
                     ", " + std::to_string(spec_.in_channels) + "), got " +
                     shape_str(batch.shape()));
  }
  return spec_.is_cnn() ? cnn_features(tape, batch) : rnn_features(tape, batch);
}

Tensor Model::forward(Tape& tape, const Tensor& batch, Mode mode) {
  Tensor h = features(tape, batch);
  h = relu(tape, add_bias(tape, matmul(tape, h, param("fc0.weight")), param("fc0.bias")));
  h = add_bias(tape, matmul(tape, h, param("fc1.weight")), param("fc1.bias"));
  return batchnorm1d(tape, h, bn_, mode);
}

Tensor one_hot_batch(std::span<const DnaSeq* const> seqs, std::size_t padded_len) {
  if (seqs.empty()) throw ShapeError("one_hot_batch: empty batch");
  Tensor out = Tensor::zeros({seqs.size(), padded_len, kNumChannels});
  const std::size_t stride = padded_len * kNumChannels;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    one_hot_into(*seqs[i], padded_len, out.data().subspan(i * stride, stride));
  }
  return out;
}

Tensor one_hot_batch(std::span<const DnaSeq> seqs, std::size_t padded_len) {
  std::vector<const DnaSeq*> ptrs;
  ptrs.reserve(seqs.size());
  for (const auto& s : seqs) ptrs.push_back(&s);
  return one_hot_batch(std::span<const DnaSeq* const>(ptrs), padded_len);
}

}  // namespace dnaembed
