#include <doctest.h>

#include <cmath>
#include <vector>

#include "dnaembed/channel.hpp"
#include "dnaembed/trainer.hpp"

using namespace dnaembed;

namespace {

Dataset tiny_dataset(std::size_t refs, std::size_t len, std::uint64_t seed) {
  const auto r = gen_references(refs, len, seed);
  ChannelParams ch{0.03, 0.03, 0.03, 0.0, seed};
  return build_pairs(r, 4, ch, len, seed, DatasetRole::Train);
}

ModelSpec tiny_spec(Arch arch, std::size_t len) {
  ModelSpec spec;
  spec.arch = arch;
  spec.input_len = len;
  spec.embed_dim = 8;
  spec.fc_hidden = 16;
  spec.hidden_size = 6;
  return spec;
}

std::vector<double> flat(const Model& m) {
  std::vector<double> out;
  for (const auto& p : m.params()) out.insert(out.end(), p.value.data().begin(), p.value.data().end());
  return out;
}

}  // namespace

TEST_CASE("optimizer steps") {
  OptimizerConfig hyper;
  hyper.lr = 0.1;
  std::vector<double> x = {1.0, -2.0};
  const std::vector<double> zero = {0.0, 0.0};
  AdamState st;
  adam_step(x, zero, st, hyper);
  CHECK(x == std::vector<double>{1.0, -2.0});
  sgd_step(x, zero, hyper);
  CHECK(x == std::vector<double>{1.0, -2.0});

  std::vector<double> y = {1.0};
  AdamState s1;
  adam_step(y, std::vector<double>{2.0 * y[0]}, s1, hyper);
  CHECK(y[0] < 1.0);
  std::vector<double> z = {1.0};
  sgd_step(z, std::vector<double>{2.0}, hyper);
  CHECK(z[0] == doctest::Approx(0.8));

  std::vector<double> a = {0.3, 0.7}, b = {0.3, 0.7};
  const std::vector<double> g = {0.5, -0.2};
  AdamState sa, sb;
  for (int i = 0; i < 3; ++i) {
    adam_step(a, g, sa, hyper);
    adam_step(b, g, sb, hyper);
  }
  CHECK(a == b);
  // First bias-corrected Adam step moves by lr * sign(g).
  std::vector<double> c = {0.0};
  AdamState sc;
  adam_step(c, std::vector<double>{3.0}, sc, hyper);
  CHECK(c[0] == doctest::Approx(-0.1).epsilon(1e-6));
}

TEST_CASE("training preconditions") {
  Model m = Model::build(tiny_spec(Arch::CnnEd5, 32), 0);
  Dataset empty;
  empty.padded_len = 32;
  CHECK_THROWS_AS(train(m, empty, TrainConfig{}), std::invalid_argument);
  Dataset wrong = tiny_dataset(6, 20, 1);
  wrong.padded_len = 64;
  CHECK_THROWS_AS(train(m, wrong, TrainConfig{}), std::invalid_argument);
  TrainConfig bad;
  bad.optimizer.lr = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("training reduces the loss and is deterministic") {
  const Dataset data = tiny_dataset(20, 32, 2);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 16;
  cfg.seed = 3;
  Model a = Model::build(tiny_spec(Arch::CnnEd5, 32), 3);
  Model b = Model::build(tiny_spec(Arch::CnnEd5, 32), 3);
  const auto ra = train(a, data, cfg);
  const auto rb = train(b, data, cfg);
  REQUIRE(ra.size() == 4);
  CHECK(ra.back().mean_loss < ra.front().mean_loss);
  CHECK(flat(a) == flat(b));
  CHECK(a.batchnorm().running_var == b.batchnorm().running_var);
  for (std::size_t i = 0; i < 4; ++i) CHECK(ra[i].mean_loss == rb[i].mean_loss);
}

TEST_CASE("every architecture, space and loss combination runs") {
  const Dataset data = tiny_dataset(6, 32, 4);
  for (Arch arch : {Arch::CnnEd5, Arch::CnnEd10, Arch::Rnn, Arch::Gru}) {
    for (SpaceKind space : {SpaceKind::SqEuclid, SpaceKind::L1, SpaceKind::L2}) {
      for (LossKind loss : {LossKind::MSE, LossKind::MAE, LossKind::REchi2}) {
        Model m = Model::build(tiny_spec(arch, 32), 5);
        TrainConfig cfg;
        cfg.epochs = 1;
        cfg.batch_size = 32;
        cfg.space = space;
        cfg.loss.kind = loss;
        const auto r = train(m, data, cfg);
        CHECK(std::isfinite(r[0].mean_loss));
      }
    }
  }
}

TEST_CASE("both siamese branches use one parameter set") {
  const Dataset data = tiny_dataset(6, 32, 6);
  Model m = Model::build(tiny_spec(Arch::Gru, 32), 6);
  std::vector<const void*> before;
  for (const auto& p : m.params()) before.push_back(p.value.data().data());
  TrainConfig cfg;
  cfg.epochs = 1;
  train(m, data, cfg);
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(m.params()[i].value.data().data() == before[i]);

  // The s and t rows of the stacked batch produce the same embedding for the same sequence.
  std::vector<PairSample> same = {{data.samples[0].s, data.samples[0].s, 0, true},
                                  {data.samples[1].t, data.samples[1].s, 0, true}};
  std::vector<const PairSample*> ptrs = {&same[0], &same[1]};
  Tape tape(false);
  const Tensor d = pair_distances(tape, m, ptrs, SpaceKind::SqEuclid, 1.0, Mode::Eval);
  CHECK(d.data()[0] == 0.0);
}

TEST_CASE("embedding helpers") {
  const Dataset data = tiny_dataset(6, 32, 7);
  Model m = Model::build(tiny_spec(Arch::CnnEd5, 32), 7);
  const auto seqs = distinct_sequences(data);
  const auto emb = embed_batch(m, seqs, SpaceKind::SqEuclid, 5);
  const auto raw = embed_raw(m, seqs);
  REQUIRE(emb.size() == seqs.size());
  CHECK(emb[0].size() == 8);
  CHECK(emb[1][3] == doctest::Approx(raw[1][3] * std::sqrt(0.5)));
  const std::vector<DnaSeq> twice = {seqs[0], seqs[0]};
  const auto e2 = embed_batch(m, twice, SpaceKind::SqEuclid);
  CHECK(distance(SpaceKind::SqEuclid, e2[0], e2[1]) == 0.0);
  CHECK(distance(SpaceKind::SqEuclid, emb[0], emb[1]) == distance(SpaceKind::SqEuclid, emb[1], emb[0]));

  const auto scored = score_dataset(m, data, SpaceKind::SqEuclid);
  REQUIRE(scored.size() == data.samples.size());
  CHECK(scored[0].d == static_cast<double>(data.samples[0].d));
}

TEST_CASE("a sentinel scale reaches the predicted distance") {
  const Dataset data = tiny_dataset(6, 32, 8);
  Model m = Model::build(tiny_spec(Arch::CnnEd5, 32), 8);
  std::vector<const PairSample*> ptrs = {&data.samples[0], &data.samples[1]};
  Tape t1(false), t2(false);
  const Tensor base = pair_distances(t1, m, ptrs, SpaceKind::SqEuclid, 1.0, Mode::Eval);
  const Tensor scaled = pair_distances(t2, m, ptrs, SpaceKind::SqEuclid, 3.0, Mode::Eval);
  CHECK(scaled.data()[0] == doctest::Approx(9.0 * base.data()[0]));
  TrainConfig cfg;
  cfg.scale_override = 3.0;
  CHECK(effective_scale(m, cfg) == 3.0);
}
