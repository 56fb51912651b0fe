#include "spikegrad/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace spikegrad {
namespace {

std::size_t prefix_bins(double t_ms, double dt, std::size_t steps) {
  if (!(t_ms > 0.0)) throw std::invalid_argument("classify_at: time must be positive");
  const auto n = static_cast<std::size_t>(std::floor(t_ms / dt + 1e-9));
  return std::min(n, steps);
}

std::size_t argmax_lowest(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::size_t classify_at(const SpikeTensor& output, double t_ms, double dt) {
  const std::size_t n = prefix_bins(t_ms, dt, output.steps());
  std::vector<double> counts(output.units(), 0.0);
  for (std::size_t i = 0; i < output.units(); ++i) {
    const auto r = output.row(i);
    for (std::size_t t = 0; t < n; ++t) counts[i] += r[t];
  }
  return argmax_lowest(counts);
}

std::size_t classify(const SpikeTensor& output) {
  return classify_at(output, static_cast<double>(output.steps()), 1.0);
}

LatencyCurve latency_curve(const Network& net, const NetworkWeights& weights,
                           const std::vector<SpikeTensor>& inputs, const std::vector<std::size_t>& labels,
                           const std::vector<double>& eval_times) {
  if (inputs.size() != labels.size()) throw std::invalid_argument("latency_curve: inputs and labels differ in length");
  if (inputs.empty()) throw std::invalid_argument("latency_curve: empty dataset");
  for (std::size_t i = 0; i < eval_times.size(); ++i) {
    if (!(eval_times[i] > 0.0) || (i > 0 && !(eval_times[i] > eval_times[i - 1]))) {
      throw std::invalid_argument("latency_curve: eval times must be positive and strictly increasing");
    }
  }

  const auto samples = static_cast<std::ptrdiff_t>(inputs.size());
  std::vector<std::vector<char>> correct(inputs.size(), std::vector<char>(eval_times.size(), 0));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t s = 0; s < samples; ++s) {
    const auto acts = net.forward(weights, inputs[static_cast<std::size_t>(s)]);
    const auto& out = acts.back().spikes;
    for (std::size_t k = 0; k < eval_times.size(); ++k) {
      correct[static_cast<std::size_t>(s)][k] =
          classify_at(out, eval_times[k], net.dt()) == labels[static_cast<std::size_t>(s)];
    }
  }

  LatencyCurve curve;
  curve.eval_times = eval_times;
  curve.accuracy.assign(eval_times.size(), 0.0);
  for (std::size_t k = 0; k < eval_times.size(); ++k) {
    std::size_t hits = 0;
    for (const auto& row : correct) hits += row[k] ? 1 : 0;
    curve.accuracy[k] = static_cast<double>(hits) / static_cast<double>(inputs.size());
  }
  return curve;
}

SpikeCountReport spike_report(const Network& net, const NetworkWeights& weights,
                              const std::vector<SpikeTensor>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("spike_report: empty dataset");
  const std::size_t L = net.layer_count();
  std::vector<std::vector<double>> totals(inputs.size(), std::vector<double>(L, 0.0));
  const auto samples = static_cast<std::ptrdiff_t>(inputs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t s = 0; s < samples; ++s) {
    const auto acts = net.forward(weights, inputs[static_cast<std::size_t>(s)]);
    for (std::size_t l = 0; l < L; ++l) {
      double sum = 0.0;
      for (double v : acts[l].spikes.data()) sum += v;
      totals[static_cast<std::size_t>(s)][l] = sum;
    }
  }

  SpikeCountReport report;
  report.mean_spikes.assign(L, 0.0);
  for (const auto& row : totals) {
    for (std::size_t l = 0; l < L; ++l) report.mean_spikes[l] += row[l];
  }
  for (std::size_t l = 0; l < L; ++l) {
    report.mean_spikes[l] /= static_cast<double>(inputs.size());
    report.layers.push_back(net.spec().layers[l].token());
  }
  return report;
}

std::string latency_csv(const LatencyCurve& curve) {
  std::string out = "t_ms,accuracy\n";
  for (std::size_t k = 0; k < curve.eval_times.size(); ++k) {
    out += format_number(curve.eval_times[k]) + "," + format_number(curve.accuracy[k]) + "\n";
  }
  return out;
}

std::string spike_report_csv(const SpikeCountReport& report) {
  std::string out = "layer,mean_spikes\n";
  for (std::size_t l = 0; l < report.layers.size(); ++l) {
    out += report.layers[l] + "," + format_number(report.mean_spikes[l]) + "\n";
  }
  return out;
}

std::string gnuplot_script(const std::string& csv_name, bool latency) {
  std::ostringstream os;
  os << "set datafile separator ','\n"
     << "set key autotitle columnhead\n";
  if (latency) {
    os << "set xlabel 'inference time (ms)'\n"
       << "set ylabel 'accuracy'\n"
       << "set yrange [0:1]\n"
       << "plot '" << csv_name << "' using 1:2 with lines lw 2\n";
  } else {
    os << "set style data histograms\n"
       << "set style fill solid 0.6\n"
       << "set ylabel 'mean spikes per sample'\n"
       << "set logscale y\n"
       << "plot '" << csv_name << "' using 2:xtic(1)\n";
  }
  return os.str();
}

}  // namespace spikegrad
