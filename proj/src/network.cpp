#include "spikegrad/network.hpp"

#include <charconv>
#include <sstream>

namespace spikegrad {
namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

bool parse_positive(std::string_view s, std::size_t& out) {
  if (s.empty()) return false;
  for (char ch : s) {
    if (ch < '0' || ch > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && out > 0;
}

[[noreturn]] void bad_token(std::string_view token, std::size_t index, const std::string& why) {
  throw ArchitectureError("architecture token " + std::to_string(index) + " '" +
                          std::string(token) + "': " + why);
}

}  // namespace

Shape LayerSpec::weight_shape() const {
  switch (kind) {
    case LayerKind::dense:
      return {units, in_shape.count()};
    case LayerKind::conv:
      return {units, in_shape.channels, kernel, kernel};
    default:
      return {};
  }
}

std::size_t LayerSpec::parameter_count() const {
  return trainable() ? element_count(weight_shape()) : 0;
}

std::string LayerSpec::token() const {
  switch (kind) {
    case LayerKind::input:
      if (out_shape.height == 1 && out_shape.width == 1) return std::to_string(out_shape.channels);
      return std::to_string(out_shape.height) + "x" + std::to_string(out_shape.width) + "x" +
             std::to_string(out_shape.channels);
    case LayerKind::dense:
      return std::to_string(units);
    case LayerKind::conv:
      return std::to_string(units) + "c" + std::to_string(kernel);
    case LayerKind::pool:
      return std::to_string(kernel) + "a";
  }
  return {};
}

NetworkSpec parse_architecture(std::string_view text, const NeuronParams& params) {
  if (text.empty()) throw ArchitectureError("architecture string is empty");
  const auto tokens = split(text, '-');
  if (tokens.size() < 2) throw ArchitectureError("architecture needs an input and at least one layer");

  NetworkSpec spec;
  {
    LayerSpec in;
    in.kind = LayerKind::input;
    in.params = params;
    const auto dims = split(tokens[0], 'x');
    std::size_t v[3] = {1, 1, 1};
    if (dims.size() == 1) {
      if (!parse_positive(dims[0], v[0])) bad_token(tokens[0], 0, "expected input size");
      in.out_shape = {v[0], 1, 1};
    } else if (dims.size() == 3) {
      for (std::size_t i = 0; i < 3; ++i) {
        if (!parse_positive(dims[i], v[i])) bad_token(tokens[0], 0, "expected HxWxC");
      }
      in.out_shape = {v[2], v[0], v[1]};
    } else {
      bad_token(tokens[0], 0, "expected HxWxC");
    }
    in.in_shape = in.out_shape;
    spec.layers.push_back(in);
  }

  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string_view tok = tokens[i];
    LayerSpec layer;
    layer.params = params;
    layer.in_shape = spec.layers.back().out_shape;
    const Shape3& in = layer.in_shape;

    if (const auto c = tok.find('c'); c != std::string_view::npos) {
      if (!parse_positive(tok.substr(0, c), layer.units) || !parse_positive(tok.substr(c + 1), layer.kernel)) {
        bad_token(tok, i, "expected KcN");
      }
      if (layer.kernel % 2 == 0) bad_token(tok, i, "convolution size must be odd");
      layer.kind = LayerKind::conv;
      layer.out_shape = {layer.units, in.height, in.width};
    } else if (!tok.empty() && tok.back() == 'a') {
      if (!parse_positive(tok.substr(0, tok.size() - 1), layer.kernel)) bad_token(tok, i, "expected Na");
      if (layer.kernel > in.height || layer.kernel > in.width) {
        bad_token(tok, i, "pool window larger than " + std::to_string(in.height) + "x" +
                              std::to_string(in.width) + " input");
      }
      layer.kind = LayerKind::pool;
      layer.out_shape = {in.channels, in.height / layer.kernel, in.width / layer.kernel};
    } else {
      if (!parse_positive(tok, layer.units)) bad_token(tok, i, "expected a layer size");
      layer.kind = LayerKind::dense;
      layer.out_shape = {layer.units, 1, 1};
    }
    spec.layers.push_back(layer);
  }
  return spec;
}

std::string render(const NetworkSpec& spec) {
  std::ostringstream os;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (i) os << '-';
    os << spec.layers[i].token();
  }
  return os.str();
}

std::size_t count_parameters(const NetworkSpec& spec) {
  std::size_t n = 0;
  for (const auto& layer : spec.layers) n += layer.parameter_count();
  return n;
}

Network::Network(NetworkSpec spec, double dt_ms) : spec_(std::move(spec)), dt_(dt_ms) {
  if (spec_.layers.size() < 2 || spec_.layers.front().kind != LayerKind::input) {
    throw ArchitectureError("network needs an input layer followed by at least one layer");
  }
  if (!(spec_.pool_scale > 0.0)) throw ArchitectureError("pool scale must be positive");
  const TimeGrid grid(dt_ms, 1);
  for (const auto& layer : spec_.layers) kernels_.push_back(NeuronKernels::build(layer.params, grid));
}

NetworkWeights Network::zero_weights() const {
  NetworkWeights w;
  for (const auto& layer : spec_.layers) w.emplace_back(layer.trainable() ? Tensor(layer.weight_shape()) : Tensor());
  return w;
}

void Network::check_weights(const NetworkWeights& weights) const {
  if (weights.size() != spec_.layers.size()) {
    throw ShapeError("network: expected " + std::to_string(spec_.layers.size()) +
                     " weight tensors, got " + std::to_string(weights.size()));
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto& layer = spec_.layers[l];
    const Shape expected = layer.trainable() ? layer.weight_shape() : Shape{};
    if (layer.trainable() ? weights[l].shape() != expected : weights[l].size() != 0) {
      throw ShapeError("network: layer " + std::to_string(l) + " (" + layer.token() + ") weights " +
                       to_string(weights[l].shape()) + ", expected " + to_string(expected));
    }
  }
}

std::vector<LayerActivation> Network::forward(const NetworkWeights& weights, const SpikeTensor& input) const {
  check_weights(weights);
  const Shape3& in_shape = spec_.input_shape();
  if (input.units() != in_shape.count()) {
    throw ShapeError("network: input has " + std::to_string(input.units()) + " units, architecture expects " +
                     std::to_string(in_shape.count()));
  }
  std::vector<LayerActivation> acts(spec_.layers.size());
  acts[0].spikes = input.reshaped(in_shape.as_shape());

  for (std::size_t l = 1; l < spec_.layers.size(); ++l) {
    const auto& layer = spec_.layers[l];
    const auto& kern = kernels_[l];
    auto& act = acts[l];
    act.synaptic_drive = temporal_convolve(kern.response, acts[l - 1].spikes);
    SpikeTensor drive;
    switch (layer.kind) {
      case LayerKind::dense:
        drive = dense_forward(weights[l], act.synaptic_drive);
        break;
      case LayerKind::conv:
        drive = conv_forward(weights[l], act.synaptic_drive, layer.in_shape);
        break;
      case LayerKind::pool:
        drive = pool_forward(layer.kernel, spec_.pool_weight(layer), act.synaptic_drive, layer.in_shape);
        break;
      case LayerKind::input:
        throw ArchitectureError("input layer in the middle of a network");
    }
    fire(drive, layer.params, kern, act.membrane, act.spikes);
  }
  return acts;
}

NetworkWeights Network::backward(const NetworkWeights& weights, const std::vector<LayerActivation>& acts,
                                 const SpikeTensor& grad_output) const {
  check_weights(weights);
  if (acts.size() != spec_.layers.size()) throw ShapeError("network: activation count mismatch");
  const auto& out = acts.back().spikes;
  if (grad_output.units() != out.units() || grad_output.steps() != out.steps()) {
    throw ShapeError("network: output gradient shape does not match output spikes");
  }

  NetworkWeights grads = zero_weights();
  SpikeTensor grad_s = grad_output;
  for (std::size_t l = spec_.layers.size() - 1; l >= 1; --l) {
    const auto& layer = spec_.layers[l];
    const auto& act = acts[l];
    const SpikeTensor e = membrane_error(grad_s, act.membrane, layer.params);
    const bool need_input_grad = l > 1;
    SpikeTensor back;
    switch (layer.kind) {
      case LayerKind::dense:
        grads[l] = dense_weight_grad(e, act.synaptic_drive);
        if (need_input_grad) back = dense_transpose(weights[l], e, act.synaptic_drive.unit_shape());
        break;
      case LayerKind::conv:
        grads[l] = conv_weight_grad(e, act.synaptic_drive, layer.in_shape, layer.kernel);
        if (need_input_grad) back = conv_transpose(weights[l], e, layer.in_shape);
        break;
      case LayerKind::pool:
        if (need_input_grad) back = pool_transpose(layer.kernel, spec_.pool_weight(layer), e, layer.in_shape);
        break;
      case LayerKind::input:
        break;
    }
    if (!need_input_grad) break;
    grad_s = temporal_correlate(kernels_[l].response, back).reshaped(acts[l - 1].spikes.unit_shape());
  }
  return grads;
}

}  // namespace spikegrad
