#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracles.hpp"
#include "spikegrad/srm.hpp"

using namespace spikegrad;

namespace {

NeuronKernels kernels_for(const NeuronParams& p, std::size_t T) { return NeuronKernels::build(p, TimeGrid(1.0, T)); }

SpikeTensor from_raster(const oracle::Raster& r) {
  SpikeTensor s({r.size()}, r[0].size());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t t = 0; t < r[i].size(); ++t) s.at(i, t) = r[i][t];
  return s;
}

}  // namespace

TEST_SUITE("srm") {

TEST_CASE("zero weights give zero membrane and no spikes") {
  NeuronParams p;
  Rng rng(31);
  const auto x = testutil::random_spikes(rng, {6}, 30, 0.3);
  const auto act = forward(Tensor({4, 6}), x, p, kernels_for(p, 30));
  for (double v : act.membrane.data()) CHECK(v == 0.0);
  for (double v : act.spikes.data()) CHECK(v == 0.0);
}

TEST_CASE("single input spike with weight 12 fires once at bin 1") {
  NeuronParams p;  // theta 10, tau 1
  SpikeTensor x({1}, 10);
  x.at(0, 0) = 1.0;
  const auto act = forward(Tensor({1, 1}, {12.0}), x, p, kernels_for(p, 10));
  CHECK(act.spikes.at(0, 0) == 0.0);
  CHECK(act.spikes.at(0, 1) == 1.0);
  CHECK(act.membrane.at(0, 1) == doctest::Approx(12.0));
  for (std::size_t t = 2; t < 10; ++t) CHECK(act.spikes.at(0, t) == 0.0);
  const auto ref = oracle::simulate_srm({{12.0}}, {{1, 0, 0, 0, 0, 0, 0, 0, 0, 0}}, 10.0, 1.0, 1.0, 1.0);
  CHECK(act.membrane == from_raster(ref.membrane));
  CHECK(act.spikes == from_raster(ref.spikes));
}

TEST_CASE("weight 5 never reaches threshold") {
  NeuronParams p;
  SpikeTensor x({1}, 10);
  x.at(0, 0) = 1.0;
  const auto act = forward(Tensor({1, 1}, {5.0}), x, p, kernels_for(p, 10));
  for (double v : act.spikes.data()) CHECK(v == 0.0);
  for (double v : act.membrane.data()) CHECK(v < 10.0);
}

TEST_CASE("forward matches the scalar simulator bit for bit") {
  Rng rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    NeuronParams p;
    p.tau_s = rng.uniform(0.5, 5.0);
    p.tau_r = rng.uniform(0.5, 5.0);
    const std::size_t in = 1 + rng.below(8), out = 1 + rng.below(6), T = 20 + rng.below(40);
    const auto W = testutil::random_tensor(rng, {out, in}, -5.0, 15.0);
    const auto x = testutil::random_spikes(rng, {in}, T, 0.2);
    const auto act = forward(W, x, p, kernels_for(p, T));

    std::vector<std::vector<double>> w(out, std::vector<double>(in));
    oracle::Raster xr(in, oracle::Train(T));
    for (std::size_t o = 0; o < out; ++o)
      for (std::size_t i = 0; i < in; ++i) w[o][i] = W[o * in + i];
    for (std::size_t i = 0; i < in; ++i)
      for (std::size_t t = 0; t < T; ++t) xr[i][t] = x.at(i, t);
    const auto ref = oracle::simulate_srm(w, xr, p.theta, p.tau_s, p.tau_r, 1.0);
    CHECK(act.membrane == from_raster(ref.membrane));
    CHECK(act.spikes == from_raster(ref.spikes));
  }
}

TEST_CASE("spikes are binary and respect the decision rule") {
  Rng rng(33);
  NeuronParams p;
  const auto W = testutil::random_tensor(rng, {10, 20}, -3.0, 12.0);
  const auto x = testutil::random_spikes(rng, {20}, 80, 0.2);
  const auto act = forward(W, x, p, kernels_for(p, 80));
  for (std::size_t i = 0; i < act.spikes.size(); ++i) {
    const double s = act.spikes.data()[i];
    CHECK((s == 0.0 || s == 1.0));
    CHECK((s == 1.0) == (act.membrane.data()[i] >= p.theta));
  }
}

TEST_CASE("refractory suppression") {
  // Constant drive just above threshold: after a spike the next bin carries
  // nu(dt) = -20, so it stays silent unless drive exceeds theta + 20.
  NeuronParams p;
  const auto k = kernels_for(p, 20);
  for (double level : {10.5, 25.0, 29.9}) {
    SpikeTensor drive({1}, 20), u, s;
    for (double& v : drive.data()) v = level;
    fire(drive, p, k, u, s);
    for (std::size_t t = 0; t + 1 < 20; ++t) {
      if (s.at(0, t) == 1.0) CHECK(s.at(0, t + 1) == 0.0);
    }
  }
  SpikeTensor drive({1}, 5), u, s;
  for (double& v : drive.data()) v = 31.0;
  fire(drive, p, k, u, s);
  CHECK(s.at(0, 0) == 1.0);
  CHECK(s.at(0, 1) == 1.0);
}

TEST_CASE("surrogate derivative values") {
  NeuronParams p;  // gamma 1, alpha 5
  SpikeTensor u({3}, 1);
  u.at(0, 0) = 10.0;
  u.at(1, 0) = 15.0;
  u.at(2, 0) = 10.0 + 50.0 * 5.0;
  const auto r = surrogate_derivative(u, p);
  CHECK(r.at(0, 0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(r.at(1, 0) == doctest::Approx(0.2 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(r.at(1, 0) == doctest::Approx(0.07358).epsilon(1e-4));
  CHECK(r.at(2, 0) > 0.0);
  CHECK(r.at(2, 0) <= 0.2 * std::exp(-50.0) * (1 + 1e-12));
}

TEST_CASE("surrogate is symmetric about theta and positive") {
  NeuronParams p;
  Rng rng(34);
  for (int i = 0; i < 100; ++i) {
    // Dyadic offsets keep theta +/- d exact.
    const double d = static_cast<double>(rng.below(40 * 1024)) / 1024.0;
    SpikeTensor u({2}, 1);
    u.at(0, 0) = p.theta + d;
    u.at(1, 0) = p.theta - d;
    const auto r = surrogate_derivative(u, p);
    CHECK(r.at(0, 0) == r.at(1, 0));
    CHECK(r.at(0, 0) > 0.0);
  }
}

TEST_CASE("backward with zero upstream gradient") {
  NeuronParams p;
  Rng rng(35);
  const auto W = testutil::random_tensor(rng, {3, 5}, 0, 12);
  const auto x = testutil::random_spikes(rng, {5}, 20, 0.3);
  const auto k = kernels_for(p, 20);
  const auto act = forward(W, x, p, k);
  const auto g = backward(SpikeTensor({3}, 20), act, W, p, k);
  for (double v : g.grad_weights.data()) CHECK(v == 0.0);
  for (double v : g.grad_input_spikes.data()) CHECK(v == 0.0);
}

TEST_CASE("backward with identity weights is eps-correlation of rho * g") {
  NeuronParams p;
  p.tau_s = 2.0;
  Rng rng(36);
  const std::size_t n = 4, T = 25;
  Tensor I({n, n});
  for (std::size_t i = 0; i < n; ++i) I[i * n + i] = 1.0;
  const auto x = testutil::random_spikes(rng, {n}, T, 0.3);
  const auto k = kernels_for(p, T);
  const auto act = forward(I, x, p, k);
  const auto g = testutil::random_real(rng, {n}, T);
  const auto out = backward(g, act, I, p, k);
  const auto rho = surrogate_derivative(act.membrane, p);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < T; ++t) {
      double expect = 0.0;
      for (std::size_t j = 0; j < k.response.size() && t + j < T; ++j) {
        expect += k.response[j] * rho.at(i, t + j) * g.at(i, t + j);
      }
      CHECK(out.grad_input_spikes.at(i, t) == doctest::Approx(expect).epsilon(1e-13));
    }
  }
}

TEST_CASE("single-weight chain with a sigmoid spike function matches finite differences") {
  NeuronParams p;
  p.spike_function = SpikeFunction::sigmoid;
  p.sigmoid_temperature = 2.0;
  const std::size_t T = 30;
  const auto k = kernels_for(p, T);
  Rng rng(37);
  const auto x = testutil::random_spikes(rng, {1}, T, 0.3);
  const auto g = testutil::random_real(rng, {1}, T);
  auto loss = [&](double w) {
    const auto a = forward(Tensor({1, 1}, {w}), x, p, k);
    return inner_product(a.spikes.data(), g.data());
  };
  for (double w : {4.0, 9.0, 13.0}) {
    const auto act = forward(Tensor({1, 1}, {w}), x, p, k);
    const double analytic = backward(g, act, Tensor({1, 1}, {w}), p, k).grad_weights[0];
    const double h = 1e-5;
    const double fd = (loss(w + h) - loss(w - h)) / (2 * h);
    CHECK(oracle::rel_err(analytic, fd) < 1e-5);
  }
}

TEST_CASE("weight gradient is linear in the upstream gradient") {
  NeuronParams p;
  Rng rng(38);
  const auto W = testutil::random_tensor(rng, {3, 6}, 0, 12);
  const auto x = testutil::random_spikes(rng, {6}, 30, 0.3);
  const auto k = kernels_for(p, 30);
  const auto act = forward(W, x, p, k);
  const auto g1 = testutil::random_real(rng, {3}, 30), g2 = testutil::random_real(rng, {3}, 30);
  const auto a = backward(g1, act, W, p, k).grad_weights;
  const auto b = backward(g2, act, W, p, k).grad_weights;
  const auto c = backward(elementwise_axpy(2.0, g1, g2), act, W, p, k).grad_weights;
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(2 * a[i] + b[i]).epsilon(1e-12));
}

TEST_CASE("forward is deterministic") {
  NeuronParams p;
  Rng rng(39);
  const auto W = testutil::random_tensor(rng, {8, 8}, 0, 12);
  const auto x = testutil::random_spikes(rng, {8}, 50, 0.2);
  const auto k = kernels_for(p, 50);
  const auto a = forward(W, x, p, k), b = forward(W, x, p, k);
  CHECK(a.membrane == b.membrane);
  CHECK(a.spikes == b.spikes);
}

TEST_CASE("parameter validation names the field") {
  NeuronParams p;
  p.tau_r = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("neuron.tau_r"), std::invalid_argument);
  p = NeuronParams{};
  p.surrogate_width = -1;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("neuron.surrogate_width"), std::invalid_argument);
}

}
