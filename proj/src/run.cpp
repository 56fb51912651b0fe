#include "spikegrad/run.hpp"

#include "spikegrad/rng.hpp"

namespace spikegrad {
namespace {

// Stream ids under the master seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kEpochStreamBase = 1000;

}  // namespace

PreparedData load_data(const RunConfig& cfg) {
  PreparedData d;
  if (cfg.data.synthetic) {
    SyntheticParams p = *cfg.data.synthetic;
    p.dt = cfg.dt;
    p.seed = cfg.seed;
    auto gen = gen_synthetic(p);
    d.train = std::move(gen.train);
    d.test = std::move(gen.test);
    return d;
  }
  d.train = load_manifest(cfg.data.train_manifest);
  if (!cfg.data.test_manifest.empty()) d.test = load_manifest(cfg.data.test_manifest);
  return d;
}

RunResult run_training(const RunConfig& cfg, const PreparedData& data, const EpochCallback& on_epoch) {
  cfg.validate();
  const Network net(build_spec(cfg), cfg.dt);
  const LossConfig loss = cfg.effective_loss();
  const Rng master(cfg.seed, 0);

  const LabeledRasters train = present_all(data.train, cfg.dt);
  std::optional<LabeledRasters> test;
  if (data.test) test = present_all(*data.test, cfg.dt);
  const bool cropped = data.train.crop_ms.has_value();

  RunResult out;
  if (cropped) {
    // Calibrate on the crop length the network will see in training.
    std::vector<SpikeTensor> calib;
    Rng crop_rng = master.split(kInitStream).split(7);
    for (std::size_t i = 0; i < std::min(cfg.init.calibration_samples, data.train.samples.size()); ++i) {
      calib.push_back(present(data.train, data.train.samples[i], cfg.dt, &crop_rng));
    }
    out.weights = init_weights(net, calib, cfg.init, master.split(kInitStream));
  } else {
    out.weights = init_weights(net, train.inputs, cfg.init, master.split(kInitStream));
  }
  if (on_epoch) on_epoch(0, out.weights, out.history);

  OptimizerState opt(cfg.optimizer, out.weights);
  for (std::size_t e = 1; e <= cfg.epochs; ++e) {
    const Rng epoch_rng = master.split(kEpochStreamBase + e);
    EpochMetrics m = cropped ? train_epoch(net, out.weights, data.train, loss, opt, cfg.batch_size, epoch_rng)
                             : train_epoch(net, out.weights, train, loss, opt, cfg.batch_size, epoch_rng);
    m.epoch = e;
    if (test) m.test_accuracy = accuracy(predict(net, out.weights, test->inputs), test->labels);
    out.history.push_back(m);
    if (on_epoch) on_epoch(e, out.weights, out.history);
  }
  return out;
}

}  // namespace spikegrad
