#include "spikegrad/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include "spikegrad/checkpoint.hpp"
#include "spikegrad/config.hpp"
#include "spikegrad/metrics.hpp"
#include "spikegrad/parallel.hpp"
#include "spikegrad/run.hpp"

namespace spikegrad {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Maps to exit code 1.
struct RuntimeFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void apply_workers(std::optional<int> flag, std::optional<int> from_config) {
  int n = 0;
  if (flag) {
    n = *flag;
  } else if (const int env = parallel::workers_from_environment(); env > 0) {
    n = env;
  } else if (from_config) {
    n = *from_config;
  }
  if (flag && *flag < 1) throw ConfigError("--workers: must be at least 1");
  if (n > 0) parallel::set_worker_count(n);
}

json read_json_file(const fs::path& path) {
  if (!fs::exists(path)) throw RuntimeFailure("cannot open " + path.string());
  try {
    return json::parse(read_text_file(path));
  } catch (const json::exception& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  }
}

std::string metrics_csv(const std::vector<EpochMetrics>& history) {
  std::string out = "epoch,train_loss,train_accuracy,test_accuracy\n";
  for (const auto& m : history) {
    out += std::to_string(m.epoch) + "," + num(m.train_loss) + "," + num(m.train_accuracy) + "," +
           (m.test_accuracy ? num(*m.test_accuracy) : "") + "\n";
  }
  return out;
}

json history_json(const std::vector<EpochMetrics>& history) {
  json h = json::array();
  for (const auto& m : history) {
    h.push_back({{"epoch", m.epoch},
                 {"train_loss", m.train_loss},
                 {"train_accuracy", m.train_accuracy},
                 {"test_accuracy", m.test_accuracy ? json(*m.test_accuracy) : json(nullptr)}});
  }
  return h;
}

// Everything a checkpoint needs to rebuild the model. Output location and
// worker count are left out so identical runs give identical files.
json checkpoint_meta(const RunConfig& cfg, std::size_t epoch, const std::vector<EpochMetrics>& history) {
  RunConfig c = cfg;
  c.output_dir.clear();
  c.workers.reset();
  return {{"config", to_json(c)}, {"epoch", epoch}, {"seed", cfg.seed}, {"history", history_json(history)}};
}

struct LoadedModel {
  RunConfig config;
  NetworkSpec spec;
  NetworkWeights weights;
};

LoadedModel load_model(const fs::path& checkpoint_path, const std::string& config_path) {
  if (!fs::exists(checkpoint_path)) throw RuntimeFailure("cannot open " + checkpoint_path.string());
  Checkpoint ck = load_checkpoint(checkpoint_path);
  if (!ck.header.contains("config")) throw CheckpointError("checkpoint: header has no config");
  LoadedModel m;
  try {
    m.config = parse_run_config(ck.header["config"]);
    m.spec = build_spec(m.config);
  } catch (const std::exception& ex) {
    throw CheckpointError(std::string("checkpoint: corrupt header: ") + ex.what());
  }
  if (!config_path.empty()) {
    const RunConfig expected = parse_run_config(read_json_file(config_path));
    if (render(build_spec(expected)) != render(m.spec)) {
      throw CheckpointError("checkpoint: architecture mismatch: file has '" + render(m.spec) + "', config has '" +
                            render(build_spec(expected)) + "'");
    }
  }
  if (render(m.spec) != ck.architecture()) throw CheckpointError("checkpoint: architecture mismatch with its own config");
  m.weights = std::move(ck.weights);
  return m;
}

EventDataset load_eval_set(const fs::path& manifest, const NetworkSpec& spec) {
  if (!fs::exists(manifest)) throw RuntimeFailure("cannot open " + manifest.string());
  EventDataset ds = load_manifest(manifest);
  const std::size_t sensor_units = ds.sensor.width * ds.sensor.height * ds.sensor.channels;
  if (sensor_units != spec.input_shape().count()) {
    throw CheckpointError("architecture mismatch: manifest sensor has " + std::to_string(sensor_units) +
                          " inputs, network expects " + std::to_string(spec.input_shape().count()));
  }
  if (ds.num_classes > spec.output_units()) {
    throw CheckpointError("architecture mismatch: manifest has " + std::to_string(ds.num_classes) +
                          " classes, network has " + std::to_string(spec.output_units()) + " outputs");
  }
  return ds;
}

struct TrainArgs {
  std::string config, preset, manifest, test_manifest, out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  if (a.config.empty() && a.preset.empty()) throw ConfigError("train: give --config or --preset");
  RunConfig cfg = a.preset.empty() ? RunConfig{} : preset(a.preset);
  if (!a.config.empty()) cfg = parse_run_config(read_json_file(a.config), cfg);
  if (!a.manifest.empty()) {
    cfg.data.train_manifest = a.manifest;
    cfg.data.synthetic.reset();
  }
  if (!a.test_manifest.empty()) cfg.data.test_manifest = a.test_manifest;
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.seed) cfg.seed = *a.seed;
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.workers) cfg.workers = *a.workers;
  if (cfg.output_dir.empty()) throw ConfigError("output_dir: required (or pass --out)");
  cfg.validate();
  apply_workers(a.workers, cfg.workers);

  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  write_text_file(dir / "config.json", to_json(cfg).dump(2) + "\n");

  const PreparedData data = load_data(cfg);
  const NetworkSpec spec = build_spec(cfg);
  out << "training " << render(spec) << " (" << count_parameters(spec) << " weights) on "
      << data.train.samples.size() << " samples for " << cfg.epochs << " epochs\n";

  const auto on_epoch = [&](std::size_t epoch, const NetworkWeights& w, const std::vector<EpochMetrics>& history) {
    save_checkpoint(dir / "checkpoint.spkm", spec, w, checkpoint_meta(cfg, epoch, history));
    write_text_file(dir / "metrics.csv", metrics_csv(history));
    if (epoch > 0) {
      const auto& m = history.back();
      out << "epoch " << epoch << " loss " << num(m.train_loss) << " train_acc " << num(m.train_accuracy);
      if (m.test_accuracy) out << " test_acc " << num(*m.test_accuracy);
      out << "\n";
    }
  };
  try {
    run_training(cfg, data, on_epoch);
  } catch (const TrainingError& ex) {
    throw RuntimeFailure(ex.what());
  }
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const std::string& manifest, const std::string& config,
             const std::string& out_dir, std::optional<int> workers, std::ostream& out) {
  apply_workers(workers, std::nullopt);
  const LoadedModel m = load_model(checkpoint, config);
  const EventDataset ds = load_eval_set(manifest, m.spec);
  const Network net(m.spec, m.config.dt);
  const LabeledRasters data = present_all(ds, m.config.dt);
  const auto pred = predict(net, m.weights, data.inputs);
  const double acc = accuracy(pred, data.labels);

  std::string csv = "index,path,label,prediction\n";
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    csv += std::to_string(i) + "," + ds.samples[i].path + "," + std::to_string(data.labels[i]) + "," +
           std::to_string(pred[i]) + "\n";
    hits += pred[i] == data.labels[i] ? 1 : 0;
  }
  fs::create_directories(out_dir);
  write_text_file(fs::path(out_dir) / "predictions.csv", csv);
  out << "accuracy " << num(acc) << " (" << hits << "/" << pred.size() << ")\n";
  return kExitOk;
}

int cmd_analyze(const std::string& checkpoint, const std::string& manifest, const std::string& mode,
                const std::vector<double>& times, bool plot, const std::string& out_dir, std::optional<int> workers,
                std::ostream& out) {
  apply_workers(workers, std::nullopt);
  const LoadedModel m = load_model(checkpoint, "");
  const EventDataset ds = load_eval_set(manifest, m.spec);
  const Network net(m.spec, m.config.dt);
  const LabeledRasters data = present_all(ds, m.config.dt);
  fs::create_directories(out_dir);

  const bool latency = mode == "latency";
  const std::string csv_name = latency ? "latency.csv" : "spikes.csv";
  if (latency) {
    std::vector<double> eval_times = times;
    if (eval_times.empty()) {
      const std::size_t steps = ds.steps(m.config.dt, false);
      for (std::size_t k = 1; k <= steps; ++k) eval_times.push_back(static_cast<double>(k) * m.config.dt);
    }
    const auto curve = latency_curve(net, m.weights, data.inputs, data.labels, eval_times);
    write_text_file(fs::path(out_dir) / csv_name, latency_csv(curve));
    out << "accuracy at " << num(eval_times.back()) << " ms: " << num(curve.accuracy.back()) << "\n";
  } else {
    const auto report = spike_report(net, m.weights, data.inputs);
    write_text_file(fs::path(out_dir) / csv_name, spike_report_csv(report));
    for (std::size_t l = 0; l < report.layers.size(); ++l) {
      out << report.layers[l] << " " << num(report.mean_spikes[l]) << "\n";
    }
  }
  if (plot) {
    write_text_file(fs::path(out_dir) / (latency ? "latency.gp" : "spikes.gp"), gnuplot_script(csv_name, latency));
  }
  return kExitOk;
}

int cmd_gen_synthetic(SyntheticParams p, const std::string& out_dir, std::ostream& out) {
  try {
    p.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  SyntheticDataset gen = gen_synthetic(p);
  const fs::path dir = out_dir;
  for (auto* split : {&gen.train, &gen.test}) {
    const std::string name = split == &gen.train ? "train" : "test";
    fs::create_directories(dir / name);
    for (std::size_t i = 0; i < split->samples.size(); ++i) {
      std::ostringstream file;
      file << name << "/sample_" << std::setw(5) << std::setfill('0') << i << ".csv";
      auto& s = split->samples[i];
      s.path = file.str();
      write_text_file(dir / s.path, write_event_csv(s.events));
    }
    write_manifest(dir / (name + ".json"), *split);
  }
  out << "wrote " << gen.train.samples.size() << " train and " << gen.test.samples.size() << " test samples to "
      << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spiking network training with spike-count losses", "spikegrad"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a network from a config or preset");
  train_cmd->add_option("--config", train.config, "JSON run config");
  train_cmd->add_option("--preset", train.preset, "Base preset: nmnist, dvs-gesture, ntidigits, synthetic-smoke");
  train_cmd->add_option("--manifest", train.manifest, "Training manifest (overrides data.train_manifest)");
  train_cmd->add_option("--test-manifest", train.test_manifest, "Test manifest (overrides data.test_manifest)");
  train_cmd->add_option("--out", train.out, "Output directory");
  train_cmd->add_option("--workers", train.workers, "Worker threads (default: SPIKEGRAD_WORKERS or all cores)");
  train_cmd->add_option("--seed", train.seed, "Master seed");
  train_cmd->add_option("--epochs", train.epochs, "Epoch count");

  std::string checkpoint, manifest, config, out_dir = ".", mode = "latency";
  std::optional<int> workers;
  bool plot = false;
  std::vector<double> times;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy of a checkpoint on a manifest");
  eval_cmd->add_option("--checkpoint", checkpoint)->required();
  eval_cmd->add_option("--manifest", manifest)->required();
  eval_cmd->add_option("--config", config, "Config whose architecture the checkpoint must match");
  eval_cmd->add_option("--out", out_dir, "Directory for predictions.csv");
  eval_cmd->add_option("--workers", workers);

  auto* analyze_cmd = app.add_subcommand("analyze", "Latency curve or per-layer spike counts");
  analyze_cmd->add_option("--checkpoint", checkpoint)->required();
  analyze_cmd->add_option("--manifest", manifest)->required();
  analyze_cmd->add_option("--mode", mode)->check(CLI::IsMember({"latency", "spikes"}));
  analyze_cmd->add_option("--times", times, "Evaluation times in ms (default: every bin)");
  analyze_cmd->add_flag("--plot", plot, "Also write a gnuplot script");
  analyze_cmd->add_option("--out", out_dir, "Output directory");
  analyze_cmd->add_option("--workers", workers);

  SyntheticParams syn;
  std::string syn_out;
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Write the synthetic template task as event CSVs");
  gen_cmd->add_option("--out", syn_out)->required();
  gen_cmd->add_option("--seed", syn.seed);
  gen_cmd->add_option("--classes", syn.classes);
  gen_cmd->add_option("--units", syn.units);
  gen_cmd->add_option("--steps", syn.steps);
  gen_cmd->add_option("--jitter", syn.jitter);
  gen_cmd->add_option("--deletion", syn.deletion);
  gen_cmd->add_option("--template-rate", syn.template_rate);
  gen_cmd->add_option("--train-samples", syn.train_samples);
  gen_cmd->add_option("--test-samples", syn.test_samples);
  gen_cmd->add_option("--dt", syn.dt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    if (ex.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << ex.what() << "\n";
    return kExitConfig;
  }

  try {
    if (*train_cmd) return cmd_train(train, out);
    if (*eval_cmd) return cmd_eval(checkpoint, manifest, config, out_dir, workers, out);
    if (*analyze_cmd) return cmd_analyze(checkpoint, manifest, mode, times, plot, out_dir, workers, out);
    return cmd_gen_synthetic(syn, syn_out, out);
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace spikegrad
