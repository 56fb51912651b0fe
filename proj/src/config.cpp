#include "spikegrad/config.hpp"

#include <set>

namespace spikegrad {
namespace {

using nlohmann::json;

// Reads the members of one JSON object, remembering which keys were consumed
// so leftovers can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + ": expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) {
    known_.insert(key);
    return j_.contains(key);
  }

  const json& at(const std::string& key) { return j_.at(key); }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    out = convert<T>(j_.at(key), key_path(key));
  }

  template <typename T>
  void read_optional(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    if (j_.at(key).is_null()) {
      out.reset();
    } else {
      out = convert<T>(j_.at(key), key_path(key));
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!known_.count(key)) throw ConfigError(key_path(key) + ": unknown key");
    }
  }

  template <typename T>
  static T convert(const json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where + ": expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0 && !v.is_number_unsigned())) {
        throw ConfigError(where + ": expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where + ": expected a number");
    } else {
      if (!v.is_string()) throw ConfigError(where + ": expected a string");
    }
    return v.get<T>();
  }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

template <typename Fn>
void rethrow_as_config(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
}

void read_neuron(ObjectReader& r, NeuronParams& n) {
  r.read("theta", n.theta);
  r.read("tau_s", n.tau_s);
  r.read("tau_r", n.tau_r);
  r.read("surrogate_scale", n.surrogate_scale);
  r.read("surrogate_width", n.surrogate_width);
  r.read("kernel_cutoff", n.kernel_cutoff);
  r.read("sigmoid_temperature", n.sigmoid_temperature);
  if (r.has("spike_function")) {
    const auto name = ObjectReader::convert<std::string>(r.at("spike_function"), r.key_path("spike_function"));
    if (name == "threshold") n.spike_function = SpikeFunction::threshold;
    else if (name == "sigmoid") n.spike_function = SpikeFunction::sigmoid;
    else throw ConfigError(r.key_path("spike_function") + ": unknown spike function '" + name + "'");
  }
}

void read_loss(ObjectReader& r, LossConfig& l) {
  if (r.has("kind")) {
    const auto name = ObjectReader::convert<std::string>(r.at("kind"), r.key_path("kind"));
    try {
      l.kind = loss_kind_from_string(name);
    } catch (const std::invalid_argument&) {
      throw ConfigError(r.key_path("kind") + ": unknown loss kind '" + name + "'");
    }
  }
  r.read("window", l.window);
  r.read_optional("rate_true", l.rate_true);
  r.read_optional("rate_false", l.rate_false);
  r.read("eps", l.eps);
  r.read("tau_s", l.tau_s);
  if (r.has("gradient")) {
    const auto name = ObjectReader::convert<std::string>(r.at("gradient"), r.key_path("gradient"));
    try {
      l.gradient = gradient_form_from_string(name);
    } catch (const std::invalid_argument&) {
      throw ConfigError(r.key_path("gradient") + ": unknown gradient form '" + name + "'");
    }
  }
}

void read_optimizer(ObjectReader& r, OptimizerConfig& o) {
  if (r.has("kind")) {
    const auto name = ObjectReader::convert<std::string>(r.at("kind"), r.key_path("kind"));
    try {
      o.kind = optimizer_kind_from_string(name);
    } catch (const std::invalid_argument&) {
      throw ConfigError(r.key_path("kind") + ": unknown optimizer '" + name + "'");
    }
  }
  r.read("lr", o.lr);
  r.read("momentum", o.momentum);
  r.read("beta1", o.beta1);
  r.read("beta2", o.beta2);
  r.read("eps", o.adam_eps);
}

void read_synthetic(ObjectReader& r, SyntheticParams& s) {
  r.read("classes", s.classes);
  r.read("units", s.units);
  r.read("steps", s.steps);
  r.read("jitter", s.jitter);
  r.read("deletion", s.deletion);
  r.read("template_rate", s.template_rate);
  r.read("train_samples", s.train_samples);
  r.read("test_samples", s.test_samples);
}

template <typename Fn>
void section(ObjectReader& parent, const std::string& key, Fn&& fn) {
  if (!parent.has(key)) return;
  ObjectReader child(parent.at(key), parent.key_path(key));
  fn(child);
  child.finish();
}

}  // namespace

LossConfig RunConfig::effective_loss() const {
  LossConfig l = loss;
  l.dt = dt;
  const bool needs_rates = l.kind == LossKind::spike_rate || l.kind == LossKind::van_rossum;
  if (needs_rates && rate_defaults) {
    if (!l.rate_true) l.rate_true = rate_defaults->rate_true;
    if (!l.rate_false) l.rate_false = rate_defaults->rate_false;
  }
  return l;
}

void RunConfig::validate() const {
  if (architecture.empty()) throw ConfigError("architecture: required");
  if (!(dt > 0.0)) throw ConfigError("dt: must be positive");
  if (!(pool_scale > 0.0)) throw ConfigError("pool_scale: must be positive");
  if (batch_size == 0) throw ConfigError("batch_size: must be positive");
  if (workers && *workers < 1) throw ConfigError("workers: must be at least 1");
  if (rate_defaults) {
    for (double r : {rate_defaults->rate_true, rate_defaults->rate_false}) {
      if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("rate_defaults: rates must be in [0, 1]");
    }
  }
  if (!(init.rate_low > 0.0 && init.rate_low < init.rate_high)) {
    throw ConfigError("init: need 0 < rate_low < rate_high");
  }
  rethrow_as_config([&] { neuron.validate(); });
  rethrow_as_config([&] { effective_loss().validate(); });
  rethrow_as_config([&] { optimizer.validate(); });
  if (data.synthetic) {
    rethrow_as_config([&] { data.synthetic->validate(); });
  } else if (data.train_manifest.empty()) {
    throw ConfigError("data.train_manifest: required unless data.synthetic is set");
  }

  NetworkSpec spec;
  try {
    spec = build_spec(*this);
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("architecture: ") + ex.what());
  }
  if (data.synthetic) {
    if (spec.input_shape().count() != data.synthetic->units) {
      throw ConfigError("architecture: input size " + std::to_string(spec.input_shape().count()) +
                        " does not match data.synthetic.units " + std::to_string(data.synthetic->units));
    }
    if (spec.output_units() != data.synthetic->classes) {
      throw ConfigError("architecture: output size does not match data.synthetic.classes");
    }
  }
}

RunConfig parse_run_config(const json& j, RunConfig base) {
  RunConfig c = std::move(base);
  ObjectReader r(j, "");
  r.read("preset", c.preset);
  r.read("architecture", c.architecture);
  r.read("dt", c.dt);
  r.read("pool_scale", c.pool_scale);
  r.read("seed", c.seed);
  r.read("epochs", c.epochs);
  r.read("batch_size", c.batch_size);
  r.read("output_dir", c.output_dir);
  r.read_optional("workers", c.workers);
  section(r, "neuron", [&](ObjectReader& s) { read_neuron(s, c.neuron); });
  section(r, "loss", [&](ObjectReader& s) { read_loss(s, c.loss); });
  section(r, "optimizer", [&](ObjectReader& s) { read_optimizer(s, c.optimizer); });
  section(r, "init", [&](ObjectReader& s) {
    s.read("rate_low", c.init.rate_low);
    s.read("rate_high", c.init.rate_high);
    s.read("calibration_samples", c.init.calibration_samples);
    s.read("max_iterations", c.init.max_iterations);
  });
  if (r.has("rate_defaults") && r.at("rate_defaults").is_null()) {
    c.rate_defaults.reset();
  } else {
    section(r, "rate_defaults", [&](ObjectReader& s) {
      RateTargets t = c.rate_defaults.value_or(RateTargets{});
      s.read("rate_true", t.rate_true);
      s.read("rate_false", t.rate_false);
      c.rate_defaults = t;
    });
  }
  section(r, "data", [&](ObjectReader& s) {
    s.read("train_manifest", c.data.train_manifest);
    s.read("test_manifest", c.data.test_manifest);
    if (s.has("synthetic") && s.at("synthetic").is_null()) {
      c.data.synthetic.reset();
    } else {
      section(s, "synthetic", [&](ObjectReader& g) {
        SyntheticParams p = c.data.synthetic.value_or(SyntheticParams{});
        read_synthetic(g, p);
        c.data.synthetic = p;
      });
    }
  });
  r.finish();
  return c;
}

json to_json(const RunConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json j;
  j["preset"] = c.preset;
  j["architecture"] = c.architecture;
  j["dt"] = c.dt;
  j["pool_scale"] = c.pool_scale;
  j["seed"] = c.seed;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers ? json(*c.workers) : json(nullptr);
  j["neuron"] = {{"theta", c.neuron.theta},
                 {"tau_s", c.neuron.tau_s},
                 {"tau_r", c.neuron.tau_r},
                 {"surrogate_scale", c.neuron.surrogate_scale},
                 {"surrogate_width", c.neuron.surrogate_width},
                 {"kernel_cutoff", c.neuron.kernel_cutoff},
                 {"spike_function", c.neuron.spike_function == SpikeFunction::sigmoid ? "sigmoid" : "threshold"},
                 {"sigmoid_temperature", c.neuron.sigmoid_temperature}};
  j["loss"] = {{"kind", to_string(c.loss.kind)},
               {"window", c.loss.window},
               {"rate_true", opt(c.loss.rate_true)},
               {"rate_false", opt(c.loss.rate_false)},
               {"eps", c.loss.eps},
               {"tau_s", c.loss.tau_s},
               {"gradient", to_string(c.loss.gradient)}};
  j["rate_defaults"] = c.rate_defaults
                           ? json{{"rate_true", c.rate_defaults->rate_true}, {"rate_false", c.rate_defaults->rate_false}}
                           : json(nullptr);
  j["optimizer"] = {{"kind", to_string(c.optimizer.kind)},
                    {"lr", c.optimizer.lr},
                    {"momentum", c.optimizer.momentum},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"eps", c.optimizer.adam_eps}};
  j["init"] = {{"rate_low", c.init.rate_low},
               {"rate_high", c.init.rate_high},
               {"calibration_samples", c.init.calibration_samples},
               {"max_iterations", c.init.max_iterations}};
  json data = {{"train_manifest", c.data.train_manifest}, {"test_manifest", c.data.test_manifest}};
  if (c.data.synthetic) {
    const auto& s = *c.data.synthetic;
    data["synthetic"] = {{"classes", s.classes},
                         {"units", s.units},
                         {"steps", s.steps},
                         {"jitter", s.jitter},
                         {"deletion", s.deletion},
                         {"template_rate", s.template_rate},
                         {"train_samples", s.train_samples},
                         {"test_samples", s.test_samples}};
  } else {
    data["synthetic"] = nullptr;
  }
  j["data"] = data;
  return j;
}

std::vector<std::string> preset_names() { return {"nmnist", "dvs-gesture", "ntidigits", "synthetic-smoke"}; }

// Epoch, batch and learning-rate values for the three benchmark presets are
// guesses; the neuron, window and rate constants are the published ones.
RunConfig preset(const std::string& name) {
  RunConfig c;
  c.preset = name;
  c.dt = 1.0;
  c.neuron.theta = 10.0;
  c.loss.kind = LossKind::spikemax;
  c.optimizer.kind = OptimizerKind::adam;
  c.optimizer.lr = 1e-3;
  if (name == "nmnist") {
    c.architecture = "34x34x2-16c5-2a-32c3-2a-64c3-512-10";
    c.neuron.tau_s = c.neuron.tau_r = 1.0;
    c.loss.window = 30;
    c.loss.tau_s = 1.0;
    c.rate_defaults = RateTargets{0.2, 0.04};
    c.epochs = 100;
    c.batch_size = 12;
    c.data.train_manifest = "nmnist/train.json";
    c.data.test_manifest = "nmnist/test.json";
  } else if (name == "dvs-gesture") {
    c.architecture = "128x128x2-4a-16c5-2a-32c3-2a-512-11";
    c.neuron.tau_s = c.neuron.tau_r = 5.0;
    c.loss.window = 35;
    c.loss.tau_s = 5.0;
    c.rate_defaults = RateTargets{0.35, 0.07};
    c.epochs = 200;
    c.batch_size = 4;
    c.data.train_manifest = "dvs-gesture/train.json";  // crop_ms 300
    c.data.test_manifest = "dvs-gesture/test.json";    // duration_ms 1500
  } else if (name == "ntidigits") {
    c.architecture = "64-256-256-11";
    c.neuron.tau_s = c.neuron.tau_r = 5.0;
    c.loss.window = 40;
    c.loss.tau_s = 5.0;
    c.rate_defaults = RateTargets{0.2, 0.02};
    c.epochs = 100;
    c.batch_size = 16;
    c.data.train_manifest = "ntidigits/train.json";
    c.data.test_manifest = "ntidigits/test.json";
  } else if (name == "synthetic-smoke") {
    c.architecture = "20-64-3";
    c.neuron.tau_s = c.neuron.tau_r = 1.0;
    c.loss.window = 30;
    c.loss.tau_s = 1.0;
    c.rate_defaults = RateTargets{0.2, 0.04};
    c.loss.eps = 1.0;  // one pseudo-count; 1e-9 lets silent early windows swamp the gradient
    c.optimizer.lr = 1e-2;
    c.epochs = 50;
    c.batch_size = 10;
    c.data.synthetic = SyntheticParams{};
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("preset: unknown preset '" + name + "' (known: " + known + ")");
  }
  return c;
}

NetworkSpec build_spec(const RunConfig& cfg) {
  NetworkSpec spec = parse_architecture(cfg.architecture, cfg.neuron);
  spec.pool_scale = cfg.pool_scale;
  return spec;
}

}  // namespace spikegrad
