#include "spikegrad/train.hpp"

#include <cmath>
#include <exception>
#include <numeric>

#include "spikegrad/metrics.hpp"

namespace spikegrad {
namespace {

double layer_rate(const Network& net, const NetworkWeights& weights, const std::vector<SpikeTensor>& inputs,
                  std::size_t layer) {
  double spikes = 0.0, slots = 0.0;
  for (const auto& x : inputs) {
    const auto acts = net.forward(weights, x);
    for (double v : acts[layer].spikes.data()) spikes += v;
    slots += static_cast<double>(acts[layer].spikes.size());
  }
  return slots > 0.0 ? spikes / slots : 0.0;
}

void scale_into(Tensor& dst, const Tensor& base, double a) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<double>(static_cast<float>(a * base[i]));
}

void add_into(NetworkWeights& acc, const NetworkWeights& g) {
  for (std::size_t l = 0; l < acc.size(); ++l) {
    auto a = acc[l].data();
    auto b = g[l].data();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  }
}

std::vector<std::size_t> shuffled_order(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

}  // namespace

LabeledRasters present_all(const EventDataset& dataset, double dt) {
  LabeledRasters out;
  out.inputs.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) {
    out.inputs.push_back(present(dataset, s, dt));
    out.labels.push_back(s.label);
  }
  return out;
}

void quantize_f32(NetworkWeights& weights) {
  for (auto& w : weights) {
    for (double& v : w.data()) v = static_cast<double>(static_cast<float>(v));
  }
}

NetworkWeights init_weights(const Network& net, const std::vector<SpikeTensor>& calibration,
                            const InitConfig& cfg, Rng rng) {
  if (!(cfg.rate_low > 0.0 && cfg.rate_low < cfg.rate_high)) {
    throw std::invalid_argument("init: need 0 < rate_low < rate_high");
  }
  NetworkWeights weights = net.zero_weights();
  const std::vector<SpikeTensor> calib(
      calibration.begin(), calibration.begin() + static_cast<std::ptrdiff_t>(std::min(calibration.size(), cfg.calibration_samples)));

  for (std::size_t l = 1; l < net.layer_count(); ++l) {
    const auto& layer = net.spec().layers[l];
    if (!layer.trainable()) continue;
    Tensor base(layer.weight_shape());
    Rng layer_rng = rng.split(l);
    for (double& v : base.data()) v = layer_rng.uniform(-1.0, 1.0);

    const std::size_t fan_in = layer.kind == LayerKind::dense
                                   ? layer.in_shape.count()
                                   : layer.in_shape.channels * layer.kernel * layer.kernel;
    double a = 2.0 * layer.params.theta / std::sqrt(static_cast<double>(fan_in));
    scale_into(weights[l], base, a);
    if (calib.empty()) continue;

    // Bracket then bisect on log(a); the rate grows with the weight scale.
    double lo = 0.0, hi = 0.0;
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
      const double rate = layer_rate(net, weights, calib, l);
      if (rate >= cfg.rate_low && rate <= cfg.rate_high) break;
      if (rate < cfg.rate_low) lo = a;
      else hi = a;
      a = (lo > 0.0 && hi > 0.0) ? std::sqrt(lo * hi) : (rate < cfg.rate_low ? a * 2.0 : a * 0.5);
      scale_into(weights[l], base, a);
    }
  }
  return weights;
}

SampleOutcome sample_gradient(const Network& net, const NetworkWeights& weights, const SpikeTensor& input,
                              std::size_t label, const LossConfig& loss) {
  const auto acts = net.forward(weights, input);
  const auto& out = acts.back().spikes;
  const LossResult res = classification_loss(out, label, loss);
  if (!std::isfinite(res.value)) throw TrainingError("non-finite loss");
  SampleOutcome o;
  o.loss = res.value;
  o.prediction = classify(out);
  o.grads = net.backward(weights, acts, res.grad_spikes);
  for (const auto& g : o.grads) {
    for (double v : g.data()) {
      if (!std::isfinite(v)) throw TrainingError("non-finite gradient");
    }
  }
  return o;
}

EpochMetrics train_epoch(const Network& net, NetworkWeights& weights, const LabeledRasters& data,
                         const LossConfig& loss, OptimizerState& opt, std::size_t batch_size, Rng rng) {
  if (batch_size == 0) throw std::invalid_argument("training.batch_size must be positive");
  if (data.size() == 0) throw std::invalid_argument("train_epoch: empty dataset");
  if (data.labels.size() != data.size()) throw std::invalid_argument("train_epoch: label count mismatch");

  const auto order = shuffled_order(data.size(), rng);
  double loss_sum = 0.0;
  std::size_t hits = 0;

  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    const auto count = static_cast<std::ptrdiff_t>(end - start);
    NetworkWeights batch_grad = net.zero_weights();
    std::vector<double> losses(static_cast<std::size_t>(count), 0.0);
    std::vector<std::size_t> predictions(static_cast<std::size_t>(count), 0);
    std::exception_ptr failure;
    std::size_t failed_sample = 0;

    // Samples run concurrently; the ordered block adds gradients in sample
    // order so the sum is identical for any worker count.
#pragma omp parallel for ordered schedule(static, 1)
    for (std::ptrdiff_t b = 0; b < count; ++b) {
      const std::size_t idx = order[start + static_cast<std::size_t>(b)];
      SampleOutcome outcome;
      std::exception_ptr err;
      try {
        outcome = sample_gradient(net, weights, data.inputs[idx], data.labels[idx], loss);
      } catch (...) {
        err = std::current_exception();
      }
#pragma omp ordered
      {
        if (err) {
          if (!failure) {
            failure = err;
            failed_sample = idx;
          }
        } else if (!failure) {
          add_into(batch_grad, outcome.grads);
          losses[static_cast<std::size_t>(b)] = outcome.loss;
          predictions[static_cast<std::size_t>(b)] = outcome.prediction;
        }
      }
    }
    if (failure) {
      try {
        std::rethrow_exception(failure);
      } catch (const std::exception& ex) {
        throw TrainingError("training aborted at sample " + std::to_string(failed_sample) + ": " + ex.what());
      }
    }

    for (std::size_t b = 0; b < losses.size(); ++b) {
      loss_sum += losses[b];
      if (predictions[b] == data.labels[order[start + b]]) ++hits;
    }
    optimizer_step(opt, weights, batch_grad);
    quantize_f32(weights);
  }

  EpochMetrics m;
  m.train_loss = loss_sum / static_cast<double>(data.size());
  m.train_accuracy = static_cast<double>(hits) / static_cast<double>(data.size());
  return m;
}

EpochMetrics train_epoch(const Network& net, NetworkWeights& weights, const EventDataset& dataset,
                         const LossConfig& loss, OptimizerState& opt, std::size_t batch_size, Rng rng) {
  LabeledRasters data;
  Rng crops = rng.split(1);
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    Rng crop = crops.split(i);
    data.inputs.push_back(present(dataset, dataset.samples[i], net.dt(), &crop));
    data.labels.push_back(dataset.samples[i].label);
  }
  return train_epoch(net, weights, data, loss, opt, batch_size, rng.split(2));
}

std::vector<std::size_t> predict(const Network& net, const NetworkWeights& weights,
                                 const std::vector<SpikeTensor>& inputs) {
  std::vector<std::size_t> out(inputs.size(), 0);
  const auto n = static_cast<std::ptrdiff_t>(inputs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto acts = net.forward(weights, inputs[static_cast<std::size_t>(i)]);
    out[static_cast<std::size_t>(i)] = classify(acts.back().spikes);
  }
  return out;
}

double accuracy(const std::vector<std::size_t>& predictions, const std::vector<std::size_t>& labels) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (predictions.empty()) throw std::invalid_argument("accuracy: no samples");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace spikegrad
