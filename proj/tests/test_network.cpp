#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "spikegrad/network.hpp"

using namespace spikegrad;

namespace {

NeuronParams smooth_params() {
  NeuronParams p;
  p.spike_function = SpikeFunction::sigmoid;
  // Wide enough that no unit saturates at the weight ranges used below, so
  // every weight gradient sits well above finite-difference noise.
  p.sigmoid_temperature = 4.0;
  p.tau_s = 2.0;
  return p;
}

NetworkWeights random_weights(const Network& net, Rng& rng, double lo, double hi) {
  auto w = net.zero_weights();
  for (auto& t : w)
    for (double& v : t.data()) v = rng.uniform(lo, hi);
  return w;
}

double probe_loss(const Network& net, const NetworkWeights& w, const SpikeTensor& x, const SpikeTensor& g) {
  return inner_product(net.forward(w, x).back().spikes.data(), g.data());
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("parse the audio architecture") {
  const auto spec = parse_architecture("64-256-256-11");
  REQUIRE(spec.layers.size() == 4);
  CHECK(spec.layers[0].kind == LayerKind::input);
  CHECK(spec.layers[0].out_shape.count() == 64);
  CHECK(spec.layers[1].kind == LayerKind::dense);
  CHECK(spec.layers[1].units == 256);
  CHECK(spec.layers[3].units == 11);
  CHECK(count_parameters(spec) == 84736);
}

TEST_CASE("parse the CNN architectures") {
  const auto nm = parse_architecture("34x34x2-16c5-2a-32c3-2a-64c3-512-10");
  REQUIRE(nm.layers.size() == 8);
  CHECK(nm.layers[0].out_shape == Shape3{2, 34, 34});
  CHECK(nm.layers[1].kind == LayerKind::conv);
  CHECK(nm.layers[1].out_shape == Shape3{16, 34, 34});
  CHECK(nm.layers[2].out_shape == Shape3{16, 17, 17});
  CHECK(nm.layers[4].out_shape == Shape3{32, 8, 8});
  CHECK(nm.layers[5].out_shape == Shape3{64, 8, 8});
  CHECK(nm.layers[6].in_shape.count() == 4096);
  // Weights only: 16*2*25 + 32*16*9 + 64*32*9 + 4096*512 + 512*10.
  CHECK(count_parameters(nm) == 800 + 4608 + 18432 + 2097152 + 5120);

  const auto dvs = parse_architecture("128x128x2-4a-16c5-2a-32c3-2a-512-11");
  CHECK(dvs.layers[1].out_shape == Shape3{2, 32, 32});
  CHECK(dvs.layers[5].out_shape == Shape3{32, 8, 8});
  CHECK(count_parameters(dvs) == 800 + 4608 + 2048 * 512 + 512 * 11);
}

TEST_CASE("small counts") {
  CHECK(count_parameters(parse_architecture("10-10")) == 100);
  CHECK(count_parameters(parse_architecture("4x4x1-2a")) == 0);
}

TEST_CASE("render round-trips") {
  for (const char* s : {"64-256-256-11", "34x34x2-16c5-2a-32c3-2a-64c3-512-10", "128x128x2-4a-16c5-2a-32c3-2a-512-11",
                        "20-64-3", "5x5x1-3c1-2"}) {
    const auto spec = parse_architecture(s);
    CHECK(render(spec) == s);
    CHECK(render(parse_architecture(render(spec))) == s);
  }
}

TEST_CASE("malformed architectures") {
  for (const char* s : {"", "-", "64--10", "34x34-10", "34x34x2-16c4-10", "34x34x2-16c-10", "0-10", "10-0", "abc",
                        "10-2a", "2x2x1-4a", "34x34x2-xc3", "10", "3x3x1x1-2", "1x1x0-2"}) {
    CHECK_THROWS_AS(parse_architecture(s), ArchitectureError);
  }
}

TEST_CASE("zero input and zero weights give no output spikes") {
  const Network net(parse_architecture("6x6x2-4c3-2a-10-3"), 1.0);
  const auto acts = net.forward(net.zero_weights(), SpikeTensor({72}, 20));
  for (double v : acts.back().spikes.data()) CHECK(v == 0.0);
}

TEST_CASE("single dense layer equals the layer forward") {
  Rng rng(41);
  NeuronParams p;
  const Network net(parse_architecture("7-5", p), 1.0);
  auto w = random_weights(net, rng, -2, 12);
  const auto x = testutil::random_spikes(rng, {7}, 40, 0.3);
  const auto direct = forward(w[1], x, p, NeuronKernels::build(p, TimeGrid(1.0, 40)));
  const auto acts = net.forward(w, x);
  CHECK(acts[1].membrane == direct.membrane);
  CHECK(acts[1].spikes == direct.spikes);
}

TEST_CASE("1x1 conv on a 1x1 input equals a dense layer") {
  Rng rng(42);
  const Network conv(parse_architecture("1x1x6-4c1"), 1.0);
  const Network dense(parse_architecture("6-4"), 1.0);
  auto wd = random_weights(dense, rng, -2, 12);
  auto wc = conv.zero_weights();
  wc[1] = Tensor({4, 6, 1, 1}, std::vector<double>(wd[1].data().begin(), wd[1].data().end()));
  const auto x = testutil::random_spikes(rng, {6}, 30, 0.3);
  const auto a = conv.forward(wc, x), b = dense.forward(wd, x);
  CHECK(a[1].spikes.data().size() == b[1].spikes.data().size());
  for (std::size_t i = 0; i < a[1].spikes.size(); ++i) {
    CHECK(a[1].membrane.data()[i] == doctest::Approx(b[1].membrane.data()[i]).epsilon(1e-13));
    CHECK(a[1].spikes.data()[i] == b[1].spikes.data()[i]);
  }
}

TEST_CASE("zero output gradient gives zero weight gradients") {
  Rng rng(43);
  const Network net(parse_architecture("6x6x2-4c3-2a-10-3"), 1.0);
  auto w = random_weights(net, rng, -1, 6);
  const auto x = testutil::random_spikes(rng, {72}, 20, 0.3);
  const auto grads = net.backward(w, net.forward(w, x), SpikeTensor({3}, 20));
  for (const auto& g : grads)
    for (double v : g.data()) CHECK(v == 0.0);
}

TEST_CASE("pool membrane under all-ones input is n^2 w times the integrated kernel") {
  auto p = smooth_params();
  NetworkSpec spec = parse_architecture("4x4x1-2a", p);
  spec.pool_scale = 1.1;
  const Network net(spec, 1.0);
  SpikeTensor x({16}, 15);
  for (double& v : x.data()) v = 1.0;
  const auto acts = net.forward(net.zero_weights(), x);
  const auto eps = oracle::kernel(p.tau_s, 1.0, 1.0);
  const double w = 1.1 * p.theta;
  for (std::size_t u = 0; u < 4; ++u) {
    double integrated = 0.0;
    for (std::size_t t = 0; t < 15; ++t) {
      if (t < eps.size()) integrated += eps[t];
      CHECK(acts[1].membrane.at(u, t) == doctest::Approx(4.0 * w * integrated).epsilon(1e-13));
    }
  }
}

TEST_CASE("two-layer smooth net gradient matches finite differences") {
  Rng rng(44);
  const Network net(parse_architecture("6-5-3", smooth_params()), 1.0);
  auto w = random_weights(net, rng, 0.0, 3.0);
  const auto x = testutil::random_spikes(rng, {6}, 25, 0.3);
  const auto g = testutil::random_real(rng, {3}, 25);
  const auto grads = net.backward(w, net.forward(w, x), g);
  for (std::size_t l = 1; l < 3; ++l) {
    for (std::size_t i = 0; i < w[l].size(); ++i) {
      auto wp = w, wm = w;
      const double h = 1e-5;
      wp[l][i] += h;
      wm[l][i] -= h;
      const double fd = (probe_loss(net, wp, x, g) - probe_loss(net, wm, x, g)) / (2 * h);
      CHECK(oracle::rel_err(grads[l][i], fd, 1e-8) < 1e-4);
    }
  }
}

TEST_CASE("smooth conv-pool-dense gradient matches finite differences") {
  Rng rng(45);
  const Network net(parse_architecture("6x6x2-3c3-2a-4", smooth_params()), 1.0);
  auto w = random_weights(net, rng, 0.0, 3.0);
  const auto x = testutil::random_spikes(rng, {72}, 15, 0.3);
  const auto g = testutil::random_real(rng, {4}, 15);
  const auto grads = net.backward(w, net.forward(w, x), g);
  for (std::size_t l : {1u, 3u}) {
    for (std::size_t trial = 0; trial < 25; ++trial) {
      const std::size_t i = rng.below(w[l].size());
      auto wp = w, wm = w;
      const double h = 1e-5;
      wp[l][i] += h;
      wm[l][i] -= h;
      const double fd = (probe_loss(net, wp, x, g) - probe_loss(net, wm, x, g)) / (2 * h);
      CHECK(oracle::rel_err(grads[l][i], fd, 1e-8) < 1e-4);
    }
  }
}

TEST_CASE("input shape mismatch") {
  const Network net(parse_architecture("6-3"), 1.0);
  CHECK_THROWS_AS(net.forward(net.zero_weights(), SpikeTensor({5}, 10)), ShapeError);
  auto bad = net.zero_weights();
  bad[1] = Tensor({2, 6});
  CHECK_THROWS_AS(net.forward(bad, SpikeTensor({6}, 10)), ShapeError);
}

}
