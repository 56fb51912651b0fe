#include <doctest.h>

#include <cmath>
#include <limits>

#include <omp.h>

#include "helpers.hpp"
#include "spikegrad/optim.hpp"
#include "spikegrad/rng.hpp"
#include "spikegrad/train.hpp"

using namespace spikegrad;

namespace {

struct Toy {
  Network net;
  LabeledRasters data;
};

Toy toy_problem(std::uint64_t seed, std::size_t samples = 12) {
  Toy t{Network(parse_architecture("20-16-3"), 1.0), {}};
  SyntheticParams p;
  p.steps = 40;
  p.train_samples = samples;
  p.test_samples = 3;
  p.seed = seed;
  t.data = present_all(gen_synthetic(p).train, 1.0);
  return t;
}

bool same_weights(const NetworkWeights& a, const NetworkWeights& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (a[l].size() != b[l].size()) return false;
    for (std::size_t i = 0; i < a[l].size(); ++i)
      if (a[l].data()[i] != b[l].data()[i]) return false;
  }
  return true;
}

LossConfig smax() {
  LossConfig c;
  c.window = 10;
  c.eps = 1.0;
  return c;
}

}  // namespace

TEST_SUITE("rng") {

TEST_CASE("streams are reproducible and independent") {
  Rng a(7), b(7), c(8), d(7, 1);
  bool differ_seed = false, differ_stream = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differ_seed = differ_seed || x != c.next_u64();
    differ_stream = differ_stream || x != d.next_u64();
  }
  CHECK(differ_seed);
  CHECK(differ_stream);
  // split does not depend on how far the parent has advanced.
  Rng p(9);
  const auto s1 = p.split(3).next_u64();
  p.next_u64();
  CHECK(p.split(3).next_u64() == s1);
}

TEST_CASE("uniform and below ranges") {
  Rng rng(10);
  double sum = 0.0;
  std::vector<int> hist(7, 0);
  bool in_range = true;
  for (int i = 0; i < 70000; ++i) {
    const double u = rng.uniform();
    in_range = in_range && u >= 0.0 && u < 1.0;
    sum += u;
    ++hist[rng.below(7)];
  }
  CHECK(in_range);
  CHECK(sum / 70000 == doctest::Approx(0.5).epsilon(0.01));
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
  CHECK_THROWS(rng.below(0));
}

}

TEST_SUITE("optim") {

TEST_CASE("zero gradients leave SGD weights alone") {
  NetworkWeights w{Tensor(), Tensor({2, 3})};
  w[1].data()[4] = 0.5;
  const auto before = w;
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::sgd_momentum;
  cfg.momentum = 0.9;
  OptimizerState st(cfg, w);
  NetworkWeights g{Tensor(), Tensor({2, 3})};
  for (int i = 0; i < 5; ++i) optimizer_step(st, w, g);
  CHECK(same_weights(w, before));
  cfg.kind = OptimizerKind::adam;
  OptimizerState adam(cfg, w);
  for (int i = 0; i < 5; ++i) optimizer_step(adam, w, g);
  CHECK(same_weights(w, before));
}

TEST_CASE("plain SGD and momentum") {
  NetworkWeights w{Tensor({2})};
  NetworkWeights g{Tensor({2})};
  g[0].data()[0] = 1.0;
  g[0].data()[1] = -2.0;
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::sgd_momentum;
  cfg.lr = 0.1;
  OptimizerState st(cfg, w);
  optimizer_step(st, w, g);
  CHECK(w[0].data()[0] == doctest::Approx(-0.1));
  CHECK(w[0].data()[1] == doctest::Approx(0.2));

  cfg.momentum = 0.5;
  NetworkWeights m{Tensor({2})};
  OptimizerState ms(cfg, m);
  optimizer_step(ms, m, g);
  optimizer_step(ms, m, g);
  // Velocity 1 then 1.5.
  CHECK(m[0].data()[0] == doctest::Approx(-0.25));
}

TEST_CASE("Adam first step moves by about lr") {
  NetworkWeights w{Tensor({3})};
  NetworkWeights g{Tensor({3})};
  g[0].data()[0] = 3.0;
  g[0].data()[1] = -1e-3;
  OptimizerConfig cfg;
  cfg.lr = 0.01;
  OptimizerState st(cfg, w);
  optimizer_step(st, w, g);
  CHECK(w[0].data()[0] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(w[0].data()[1] == doctest::Approx(0.01).epsilon(1e-4));
  CHECK(w[0].data()[2] == 0.0);
}

TEST_CASE("optimizer validation and shapes") {
  OptimizerConfig cfg;
  cfg.lr = -1.0;
  CHECK_THROWS(cfg.validate());
  cfg = OptimizerConfig{};
  cfg.beta1 = 1.0;
  CHECK_THROWS(cfg.validate());
  cfg = OptimizerConfig{};
  cfg.momentum = 1.0;
  CHECK_THROWS(cfg.validate());
  cfg = OptimizerConfig{};
  NetworkWeights w{Tensor({2})};
  OptimizerState st(cfg, w);
  NetworkWeights g{Tensor({3})};
  CHECK_THROWS_AS(optimizer_step(st, w, g), ShapeError);
  CHECK(optimizer_kind_from_string("sgd") == OptimizerKind::sgd_momentum);
  CHECK_THROWS(optimizer_kind_from_string("rmsprop"));
}

}

TEST_SUITE("train") {

TEST_CASE("initialization lands in the rate band") {
  auto t = toy_problem(71);
  InitConfig cfg;
  const auto w = init_weights(t.net, t.data.inputs, cfg, Rng(1));
  const auto acts = t.net.forward(w, t.data.inputs[0]);
  double spikes = 0.0, slots = 0.0;
  for (const auto& x : t.data.inputs) {
    const auto a = t.net.forward(w, x);
    for (double v : a[1].spikes.data()) spikes += v;
    slots += static_cast<double>(a[1].spikes.size());
  }
  const double rate = spikes / slots;
  // Calibration uses the first 16 samples, this is all 12 of them.
  CHECK(rate >= cfg.rate_low);
  CHECK(rate <= cfg.rate_high);
  for (const auto& layer : w)
    for (double v : layer.data()) CHECK(static_cast<double>(static_cast<float>(v)) == v);
  CHECK(same_weights(w, init_weights(t.net, t.data.inputs, cfg, Rng(1))));
  CHECK_FALSE(same_weights(w, init_weights(t.net, t.data.inputs, cfg, Rng(2))));
}

TEST_CASE("zero learning rate keeps the weights") {
  auto t = toy_problem(72);
  auto w = init_weights(t.net, t.data.inputs, InitConfig{}, Rng(3));
  const auto before = w;
  OptimizerConfig cfg;
  cfg.lr = 0.0;
  OptimizerState st(cfg, w);
  train_epoch(t.net, w, t.data, smax(), st, 4, Rng(4));
  CHECK(same_weights(w, before));
}

TEST_CASE("training is deterministic") {
  auto t = toy_problem(73);
  const auto w0 = init_weights(t.net, t.data.inputs, InitConfig{}, Rng(3));
  auto run = [&] {
    auto w = w0;
    OptimizerState st(OptimizerConfig{}, w);
    std::vector<double> losses;
    for (std::uint64_t e = 0; e < 3; ++e) losses.push_back(train_epoch(t.net, w, t.data, smax(), st, 5, Rng(5, e)).train_loss);
    return std::make_pair(w, losses);
  };
  const auto a = run();
  const auto b = run();
  CHECK(same_weights(a.first, b.first));
  CHECK(a.second == b.second);
}

TEST_CASE("batch gradient is the sum of sample gradients") {
  auto t = toy_problem(74, 1);
  const auto w0 = init_weights(t.net, t.data.inputs, InitConfig{}, Rng(3));
  OptimizerConfig cfg;
  cfg.kind = OptimizerKind::sgd_momentum;
  cfg.lr = 0.05;

  auto w = w0;
  OptimizerState st(cfg, w);
  train_epoch(t.net, w, t.data, smax(), st, 8, Rng(6));

  auto manual = w0;
  const auto g = sample_gradient(t.net, manual, t.data.inputs[0], t.data.labels[0], smax()).grads;
  OptimizerState st2(cfg, manual);
  optimizer_step(st2, manual, g);
  quantize_f32(manual);
  CHECK(same_weights(w, manual));
}

TEST_CASE("worker count does not change results") {
  auto t = toy_problem(75);
  const auto w0 = init_weights(t.net, t.data.inputs, InitConfig{}, Rng(3));
  auto run = [&](int workers) {
    const int saved = omp_get_max_threads();
    omp_set_num_threads(workers);
    auto w = w0;
    OptimizerState st(OptimizerConfig{}, w);
    const auto m = train_epoch(t.net, w, t.data, smax(), st, 6, Rng(8));
    omp_set_num_threads(saved);
    return std::make_pair(w, m.train_loss);
  };
  const auto one = run(1);
  const auto four = run(4);
  CHECK(same_weights(one.first, four.first));
  CHECK(one.second == four.second);
}

TEST_CASE("a non-finite loss names the sample") {
  auto t = toy_problem(76, 6);
  auto w = init_weights(t.net, t.data.inputs, InitConfig{}, Rng(3));
  const auto before = w;
  t.data.labels[4] = 7;  // out of range for a 3-class output
  OptimizerState st(OptimizerConfig{}, w);
  CHECK_THROWS_WITH_AS(train_epoch(t.net, w, t.data, smax(), st, 6, Rng(9)), doctest::Contains("sample 4"),
                       TrainingError);
  CHECK(same_weights(w, before));

  auto nan_w = before;
  nan_w[1].data()[0] = std::numeric_limits<double>::quiet_NaN();
  nan_w[2].data()[0] = std::numeric_limits<double>::infinity();
  LossConfig vr;
  vr.kind = LossKind::spike_rate;
  vr.rate_true = 0.2;
  vr.rate_false = 0.04;
  auto u = toy_problem(76, 6);
  OptimizerState st2(OptimizerConfig{}, nan_w);
  CHECK_THROWS_AS(train_epoch(u.net, nan_w, u.data, vr, st2, 3, Rng(9)), TrainingError);
}

TEST_CASE("training loss goes down") {
  int improved = 0;
  const int runs = 10;
  for (int r = 0; r < runs; ++r) {
    auto t = toy_problem(100 + static_cast<std::uint64_t>(r), 30);
    auto w = init_weights(t.net, t.data.inputs, InitConfig{}, Rng(static_cast<std::uint64_t>(r)));
    OptimizerConfig cfg;
    cfg.lr = 1e-2;
    OptimizerState st(cfg, w);
    const double first = train_epoch(t.net, w, t.data, smax(), st, 10, Rng(1, 0)).train_loss;
    double last = first;
    for (std::uint64_t e = 1; e < 8; ++e) last = train_epoch(t.net, w, t.data, smax(), st, 10, Rng(1, e)).train_loss;
    if (last <= first) ++improved;
  }
  CHECK(improved >= 9);
}

TEST_CASE("argument errors") {
  auto t = toy_problem(77, 3);
  auto w = t.net.zero_weights();
  OptimizerState st(OptimizerConfig{}, w);
  CHECK_THROWS(train_epoch(t.net, w, t.data, smax(), st, 0, Rng(1)));
  CHECK_THROWS(train_epoch(t.net, w, LabeledRasters{}, smax(), st, 2, Rng(1)));
  CHECK_THROWS(accuracy({}, {}));
  CHECK(accuracy({0, 1, 2, 2}, {0, 1, 1, 2}) == 0.75);
  InitConfig bad;
  bad.rate_low = 0.5;
  bad.rate_high = 0.1;
  CHECK_THROWS(init_weights(t.net, t.data.inputs, bad, Rng(1)));
}

}
