#include "spikegrad/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spikegrad/kernels.hpp"

namespace spikegrad {
namespace {

void check_class(const SpikeTensor& output, std::size_t target_class) {
  if (target_class >= output.units()) {
    throw std::out_of_range("loss: class index " + std::to_string(target_class) + " out of range for " +
                            std::to_string(output.units()) + " output units");
  }
}

std::vector<double> total_counts(const SpikeTensor& s) {
  std::vector<double> c(s.units(), 0.0);
  for (std::size_t i = 0; i < s.units(); ++i) {
    for (double v : s.row(i)) c[i] += v;
  }
  return c;
}

bool is_spikemax_family(LossKind k) {
  return k == LossKind::spikemax || k == LossKind::spikemax_g || k == LossKind::spikemax_s;
}

}  // namespace

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::van_rossum: return "van_rossum";
    case LossKind::spike_rate: return "spike_rate";
    case LossKind::spikemax: return "spikemax";
    case LossKind::spikemax_g: return "spikemax_g";
    case LossKind::spikemax_s: return "spikemax_s";
  }
  return "?";
}

LossKind loss_kind_from_string(const std::string& name) {
  for (auto k : {LossKind::van_rossum, LossKind::spike_rate, LossKind::spikemax, LossKind::spikemax_g,
                 LossKind::spikemax_s}) {
    if (to_string(k) == name) return k;
  }
  throw std::invalid_argument("loss.kind: unknown loss '" + name + "'");
}

std::string to_string(GradientForm form) {
  return form == GradientForm::exact ? "exact" : "closed_form";
}

GradientForm gradient_form_from_string(const std::string& name) {
  if (name == "exact") return GradientForm::exact;
  if (name == "closed_form") return GradientForm::closed_form;
  throw std::invalid_argument("loss.gradient: expected 'exact' or 'closed_form', got '" + name + "'");
}

void LossConfig::validate() const {
  if (window < 1) throw std::invalid_argument("loss.window must be at least 1");
  if (!(eps > 0.0)) throw std::invalid_argument("loss.eps must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("loss.dt must be positive");
  if (is_spikemax_family(kind) && (rate_true || rate_false)) {
    throw std::invalid_argument("loss.rate_true/loss.rate_false: " + to_string(kind) +
                                " takes no target rates");
  }
  for (const auto& [name, rate] : {std::pair{"loss.rate_true", rate_true}, std::pair{"loss.rate_false", rate_false}}) {
    if (rate && !(*rate >= 0.0 && *rate <= 1.0)) {
      throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
    }
  }
  if (kind == LossKind::spike_rate && !(rate_true && rate_false)) {
    throw std::invalid_argument("loss.rate_true/loss.rate_false: spike_rate requires both target rates");
  }
  if (kind == LossKind::van_rossum && !(tau_s > 0.0)) {
    throw std::invalid_argument("loss.tau_s must be positive");
  }
}

SpikeTensor windowed_counts(const SpikeTensor& spikes, std::size_t window) {
  if (window < 1) throw std::invalid_argument("windowed_counts: window must be at least 1");
  SpikeTensor c(spikes.unit_shape(), spikes.steps());
  for (std::size_t i = 0; i < spikes.units(); ++i) {
    const auto s = spikes.row(i);
    auto out = c.row(i);
    // Recomputed per bin rather than as a running difference so that the
    // counts of binary trains stay exact integers.
    for (std::size_t t = 0; t < s.size(); ++t) {
      const std::size_t lo = t + 1 >= window ? t + 1 - window : 0;
      double acc = 0.0;
      for (std::size_t tau = lo; tau <= t; ++tau) acc += s[tau];
      out[t] = acc;
    }
  }
  return c;
}

std::vector<double> probability_estimate(std::span<const double> counts, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("probability_estimate: eps must be positive");
  double total = 0.0;
  for (double c : counts) total += c + eps;
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) p[i] = (counts[i] + eps) / total;
  return p;
}

SpikeTensor probability_estimate(const SpikeTensor& counts, double eps) {
  SpikeTensor p(counts.unit_shape(), counts.steps());
  std::vector<double> column(counts.units());
  for (std::size_t t = 0; t < counts.steps(); ++t) {
    for (std::size_t i = 0; i < counts.units(); ++i) column[i] = counts.at(i, t);
    const auto pc = probability_estimate(column, eps);
    for (std::size_t i = 0; i < counts.units(); ++i) p.at(i, t) = pc[i];
  }
  return p;
}

std::vector<double> softmax(std::span<const double> values) {
  const double m = *std::max_element(values.begin(), values.end());
  std::vector<double> out(values.size());
  double z = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) z += (out[i] = std::exp(values[i] - m));
  for (double& v : out) v /= z;
  return out;
}

LossResult spikemax_loss(const SpikeTensor& output, std::size_t target_class, const LossConfig& cfg) {
  check_class(output, target_class);
  const std::size_t N = output.units(), T = output.steps(), W = cfg.window;
  const double inv_T = 1.0 / static_cast<double>(T);
  const SpikeTensor c = windowed_counts(output, W);
  const SpikeTensor p = probability_estimate(c, cfg.eps);

  LossResult r;
  r.grad_spikes = SpikeTensor(output.unit_shape(), T);
  // dl(t)/dc_i(t) = (p_i(t) - y_i) / (c_i(t) + eps)
  SpikeTensor dl_dc(output.unit_shape(), T);
  double loss = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    loss -= std::log(p.at(target_class, t));
    for (std::size_t i = 0; i < N; ++i) {
      const double y = i == target_class ? 1.0 : 0.0;
      dl_dc.at(i, t) = (p.at(i, t) - y) / (c.at(i, t) + cfg.eps);
    }
  }
  r.value = loss * inv_T;

  if (cfg.gradient == GradientForm::closed_form) {
    const double scale = inv_T * static_cast<double>(W);
    for (std::size_t k = 0; k < dl_dc.size(); ++k) r.grad_spikes.data()[k] = scale * dl_dc.data()[k];
    return r;
  }
  // s_i(tau) enters c_i(t) for t in [tau, tau + W - 1].
  for (std::size_t i = 0; i < N; ++i) {
    const auto q = dl_dc.row(i);
    auto g = r.grad_spikes.row(i);
    for (std::size_t tau = 0; tau < T; ++tau) {
      const std::size_t hi = std::min(T - 1, tau + W - 1);
      double acc = 0.0;
      for (std::size_t t = tau; t <= hi; ++t) acc += q[t];
      g[tau] = inv_T * acc;
    }
  }
  return r;
}

LossResult spikemax_g_loss(const SpikeTensor& output, std::size_t target_class, const LossConfig& cfg) {
  check_class(output, target_class);
  const std::size_t N = output.units(), T = output.steps();
  const auto c = total_counts(output);
  const auto p = probability_estimate(c, cfg.eps);
  const double scale = cfg.gradient == GradientForm::closed_form ? static_cast<double>(T) : 1.0;

  LossResult r;
  r.value = -std::log(p[target_class]);
  r.grad_spikes = SpikeTensor(output.unit_shape(), T);
  for (std::size_t i = 0; i < N; ++i) {
    const double y = i == target_class ? 1.0 : 0.0;
    const double g = scale * (p[i] - y) / (c[i] + cfg.eps);
    for (double& v : r.grad_spikes.row(i)) v = g;
  }
  return r;
}

LossResult spikemax_s_loss(const SpikeTensor& output, std::size_t target_class, const LossConfig&) {
  check_class(output, target_class);
  const std::size_t N = output.units(), T = output.steps();
  const auto c = total_counts(output);
  const auto ps = softmax(c);

  // log p_y computed from the shifted logits so that it stays finite when p_y underflows.
  const double m = *std::max_element(c.begin(), c.end());
  double z = 0.0;
  for (double v : c) z += std::exp(v - m);

  LossResult r;
  r.value = -(c[target_class] - m - std::log(z));
  r.grad_spikes = SpikeTensor(output.unit_shape(), T);
  for (std::size_t i = 0; i < N; ++i) {
    const double g = ps[i] - (i == target_class ? 1.0 : 0.0);
    for (double& v : r.grad_spikes.row(i)) v = g;
  }
  return r;
}

LossResult spike_rate_loss(const SpikeTensor& output, std::size_t target_class, const LossConfig& cfg) {
  check_class(output, target_class);
  if (!cfg.rate_true || !cfg.rate_false) {
    throw std::invalid_argument("loss.rate_true/loss.rate_false: spike_rate requires both target rates");
  }
  const std::size_t N = output.units(), T = output.steps();
  const double inv_T = 1.0 / static_cast<double>(T);
  const auto c = total_counts(output);

  LossResult r;
  r.grad_spikes = SpikeTensor(output.unit_shape(), T);
  for (std::size_t i = 0; i < N; ++i) {
    const double target = i == target_class ? *cfg.rate_true : *cfg.rate_false;
    const double diff = c[i] * inv_T - target;
    r.value += diff * diff;
    const double g = 2.0 * diff * inv_T;
    for (double& v : r.grad_spikes.row(i)) v = g;
  }
  return r;
}

LossResult van_rossum_loss(const SpikeTensor& output, const SpikeTensor& target, const LossConfig& cfg) {
  if (output.units() != target.units() || output.steps() != target.steps()) {
    throw ShapeError("van_rossum: output and target shapes differ");
  }
  const KernelVector eps = build_response_kernel(cfg.tau_s, TimeGrid(cfg.dt, output.steps()));
  const SpikeTensor e = temporal_convolve(eps, elementwise_axpy(-1.0, target, output));

  LossResult r;
  for (double v : e.data()) r.value += v * v;
  r.value *= cfg.dt;
  r.grad_spikes = temporal_correlate(eps, e);
  for (double& v : r.grad_spikes.data()) v *= 2.0 * cfg.dt;
  return r;
}

SpikeTensor rate_target_train(std::size_t units, std::size_t steps, std::size_t target_class,
                              double rate_true, double rate_false) {
  SpikeTensor s({units}, steps);
  for (std::size_t i = 0; i < units; ++i) {
    const double rate = i == target_class ? rate_true : rate_false;
    for (std::size_t t = 0; t < steps; ++t) {
      const auto before = std::floor(static_cast<double>(t) * rate);
      const auto after = std::floor(static_cast<double>(t + 1) * rate);
      if (after > before) s.at(i, t) = 1.0;
    }
  }
  return s;
}

LossResult classification_loss(const SpikeTensor& output, std::size_t target_class, const LossConfig& cfg) {
  switch (cfg.kind) {
    case LossKind::spikemax: return spikemax_loss(output, target_class, cfg);
    case LossKind::spikemax_g: return spikemax_g_loss(output, target_class, cfg);
    case LossKind::spikemax_s: return spikemax_s_loss(output, target_class, cfg);
    case LossKind::spike_rate: return spike_rate_loss(output, target_class, cfg);
    case LossKind::van_rossum: {
      check_class(output, target_class);
      if (!cfg.rate_true || !cfg.rate_false) {
        throw std::invalid_argument("loss.rate_true/loss.rate_false: van_rossum classification needs target rates");
      }
      const auto target = rate_target_train(output.units(), output.steps(), target_class, *cfg.rate_true,
                                            *cfg.rate_false);
      return van_rossum_loss(output, target.reshaped(output.unit_shape()), cfg);
    }
  }
  throw std::invalid_argument("loss: unknown kind");
}

}  // namespace spikegrad
