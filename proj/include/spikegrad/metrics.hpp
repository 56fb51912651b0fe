#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "spikegrad/network.hpp"
#include "spikegrad/tensor.hpp"

namespace spikegrad {

/// Argmax of cumulative output counts over bins [0, t_ms / dt). Ties go to the
/// lowest index, so an all-silent output is class 0.
std::size_t classify_at(const SpikeTensor& output, double t_ms, double dt = 1.0);

/// Same as classify_at over the whole record.
std::size_t classify(const SpikeTensor& output);

struct LatencyCurve {
  std::vector<double> eval_times;  // ms, strictly increasing
  std::vector<double> accuracy;    // fraction at each time
};

/// One forward pass per sample; accuracies for every prefix length are read
/// off the cumulative counts of that single run.
LatencyCurve latency_curve(const Network& net, const NetworkWeights& weights,
                           const std::vector<SpikeTensor>& inputs, const std::vector<std::size_t>& labels,
                           const std::vector<double>& eval_times);

struct SpikeCountReport {
  std::vector<std::string> layers;    // layer tokens, input first
  std::vector<double> mean_spikes;    // mean total spikes per sample
};

SpikeCountReport spike_report(const Network& net, const NetworkWeights& weights,
                              const std::vector<SpikeTensor>& inputs);

std::string latency_csv(const LatencyCurve& curve);
std::string spike_report_csv(const SpikeCountReport& report);

/// gnuplot script that plots `csv_name` (a latency or spike-count CSV).
std::string gnuplot_script(const std::string& csv_name, bool latency);

}  // namespace spikegrad
