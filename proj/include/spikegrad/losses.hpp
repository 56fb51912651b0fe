#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikegrad/tensor.hpp"

namespace spikegrad {

enum class LossKind { van_rossum, spike_rate, spikemax, spikemax_g, spikemax_s };

/// Which gradient the count-ratio losses (spikemax, spikemax_g) return.
///  - exact: the derivative of the loss value. For spikemax a spike at bin tau
///    is credited for every trailing window containing it.
///  - closed_form: (p - y) / (c / W) per bin for spikemax and (p - y) / (c / T)
///    for spikemax_g, i.e. the derivative with respect to the normalized count.
/// spikemax_s, spike_rate and van_rossum have a single form.
enum class GradientForm { exact, closed_form };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);
std::string to_string(GradientForm form);
GradientForm gradient_form_from_string(const std::string& name);

struct LossConfig {
  LossKind kind = LossKind::spikemax;
  std::size_t window = 30;           // spikemax window W in bins
  std::optional<double> rate_true;   // spike_rate (and van_rossum targets), spikes/bin
  std::optional<double> rate_false;
  double eps = 1e-9;                 // count stabilizer
  double tau_s = 1.0;                // van_rossum filter time constant, ms
  double dt = 1.0;                   // bin width, ms
  GradientForm gradient = GradientForm::exact;

  /// Throws std::invalid_argument with a "loss.<key>" path in the message.
  void validate() const;
};

struct LossResult {
  double value = 0.0;
  SpikeTensor grad_spikes;
};

/// c_i(t) = sum_{tau = max(0, t-W+1)}^{t} s_i(tau).
SpikeTensor windowed_counts(const SpikeTensor& spikes, std::size_t window);

/// p_i(t) = (c_i(t) + eps) / sum_k (c_k(t) + eps), per time bin.
SpikeTensor probability_estimate(const SpikeTensor& counts, double eps);
std::vector<double> probability_estimate(std::span<const double> counts, double eps);

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> values);

LossResult spikemax_loss(const SpikeTensor& output, std::size_t target_class, const LossConfig& cfg);
LossResult spikemax_g_loss(const SpikeTensor& output, std::size_t target_class, const LossConfig& cfg);
LossResult spikemax_s_loss(const SpikeTensor& output, std::size_t target_class, const LossConfig& cfg);
LossResult spike_rate_loss(const SpikeTensor& output, std::size_t target_class, const LossConfig& cfg);
LossResult van_rossum_loss(const SpikeTensor& output, const SpikeTensor& target, const LossConfig& cfg);

/// Regular spike trains at rate_true for the target neuron and rate_false for
/// the others; used as the van Rossum target in classification.
SpikeTensor rate_target_train(std::size_t units, std::size_t steps, std::size_t target_class,
                              double rate_true, double rate_false);

/// Dispatches on cfg.kind for a classification label.
LossResult classification_loss(const SpikeTensor& output, std::size_t target_class, const LossConfig& cfg);

}  // namespace spikegrad
