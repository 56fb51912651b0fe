#include "spikegrad/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace spikegrad {
namespace fs = std::filesystem;
using json = nlohmann::json;

std::vector<EventRecord> read_nmnist_bin(std::span<const std::uint8_t> bytes, const SensorDims& sensor) {
  if (bytes.size() % 5 != 0) {
    throw DataError("nmnist: " + std::to_string(bytes.size()) + " bytes is not a whole number of 5-byte records (record " +
                    std::to_string(bytes.size() / 5) + " truncated)");
  }
  std::vector<EventRecord> events;
  events.reserve(bytes.size() / 5);
  for (std::size_t i = 0; i < bytes.size(); i += 5) {
    EventRecord e;
    e.x = bytes[i];
    e.y = bytes[i + 1];
    e.p = bytes[i + 2] >> 7;
    e.t_us = (static_cast<std::int64_t>(bytes[i + 2] & 0x7f) << 16) |
             (static_cast<std::int64_t>(bytes[i + 3]) << 8) | static_cast<std::int64_t>(bytes[i + 4]);
    if (e.x >= sensor.width || e.y >= sensor.height) {
      throw DataError("nmnist: record " + std::to_string(i / 5) + " at (" + std::to_string(e.x) + ", " +
                      std::to_string(e.y) + ") outside the " + std::to_string(sensor.width) + "x" +
                      std::to_string(sensor.height) + " sensor");
    }
    events.push_back(e);
  }
  return events;
}

std::vector<std::uint8_t> write_nmnist_bin(std::span<const EventRecord> events) {
  std::vector<std::uint8_t> out;
  out.reserve(events.size() * 5);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.x > 0xff || e.y > 0xff || e.p > 1 || e.t_us < 0 || e.t_us >= (std::int64_t{1} << 23)) {
      throw DataError("nmnist: event " + std::to_string(i) + " cannot be encoded");
    }
    out.push_back(static_cast<std::uint8_t>(e.x));
    out.push_back(static_cast<std::uint8_t>(e.y));
    out.push_back(static_cast<std::uint8_t>((e.p << 7) | ((e.t_us >> 16) & 0x7f)));
    out.push_back(static_cast<std::uint8_t>((e.t_us >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>(e.t_us & 0xff));
  }
  return out;
}

namespace {

template <typename T>
bool parse_field(std::string_view field, T& out) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
  if (field.empty()) return false;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

std::string_view trim_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<EventRecord> read_event_csv(std::string_view text) {
  std::vector<EventRecord> events;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = trim_cr(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    if (!header_seen) {
      if (line != "t_us,x,y,p") throw DataError("event csv line 1: expected header 't_us,x,y,p'");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    for (std::size_t start = 0;;) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    std::int64_t t = 0, x = 0, y = 0, p = 0;
    if (fields.size() != 4 || !parse_field(fields[0], t) || !parse_field(fields[1], x) || !parse_field(fields[2], y) ||
        !parse_field(fields[3], p)) {
      throw DataError("event csv line " + std::to_string(line_no) + ": expected four integers, got '" +
                      std::string(line) + "'");
    }
    if (t < 0 || x < 0 || y < 0 || p < 0) {
      throw DataError("event csv line " + std::to_string(line_no) + ": negative field");
    }
    events.push_back({t, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y), static_cast<std::uint32_t>(p)});
  }
  if (!header_seen) throw DataError("event csv line 1: expected header 't_us,x,y,p'");
  return events;
}

std::string write_event_csv(std::span<const EventRecord> events) {
  std::string out = "t_us,x,y,p\n";
  for (const auto& e : events) {
    out += std::to_string(e.t_us) + ',' + std::to_string(e.x) + ',' + std::to_string(e.y) + ',' +
           std::to_string(e.p) + '\n';
  }
  return out;
}

SpikeTensor rasterize(std::span<const EventRecord> events, const TimeGrid& grid, const SensorDims& dims,
                      double duration_cap_ms, std::int64_t offset_us) {
  SpikeTensor s({dims.channels, dims.height, dims.width}, grid.num_steps);
  const double cap_us = duration_cap_ms * 1000.0;
  const double bin_us = grid.dt * 1000.0;
  for (const auto& e : events) {
    if (e.x >= dims.width || e.y >= dims.height || e.p >= dims.channels) {
      throw DataError("rasterize: event (" + std::to_string(e.x) + ", " + std::to_string(e.y) + ", " +
                      std::to_string(e.p) + ") outside sensor " + std::to_string(dims.width) + "x" +
                      std::to_string(dims.height) + "x" + std::to_string(dims.channels));
    }
    const std::int64_t rel = e.t_us - offset_us;
    if (rel < 0 || static_cast<double>(rel) >= cap_us) continue;
    const auto bin = static_cast<std::size_t>(std::floor(static_cast<double>(rel) / bin_us));
    if (bin >= grid.num_steps) continue;
    s.at((e.p * dims.height + e.y) * dims.width + e.x, bin) = 1.0;
  }
  return s;
}

std::size_t EventDataset::steps(double dt, bool cropped) const {
  const double ms = cropped && crop_ms ? *crop_ms : duration_ms;
  const auto n = static_cast<std::size_t>(std::llround(ms / dt));
  if (n == 0) throw DataError("dataset: presentation window shorter than one bin");
  return n;
}

SpikeTensor present(const EventDataset& dataset, const EventSample& sample, double dt, Rng* crop) {
  const bool cropped = crop != nullptr && dataset.crop_ms.has_value();
  const TimeGrid grid(dt, dataset.steps(dt, cropped));
  if (!cropped) return rasterize(sample.events, grid, dataset.sensor, dataset.duration_ms);

  std::int64_t end_us = 0;
  for (const auto& e : sample.events) end_us = std::max(end_us, e.t_us + 1);
  const double window_us = *dataset.crop_ms * 1000.0;
  const double bin_us = dt * 1000.0;
  const auto slack_bins = static_cast<std::uint64_t>(std::max(0.0, std::floor((static_cast<double>(end_us) - window_us) / bin_us)));
  const auto offset = static_cast<std::int64_t>(static_cast<double>(crop->below(slack_bins + 1)) * bin_us);
  return rasterize(sample.events, grid, dataset.sensor, *dataset.crop_ms, offset);
}

namespace {

std::string format_name(EventFormat f) { return f == EventFormat::nmnist ? "nmnist" : "csv"; }

template <typename T>
T require_key(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw DataError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& ex) {
    throw DataError(where + ": bad value for '" + key + "': " + ex.what());
  }
}

}  // namespace

EventDataset load_manifest(const fs::path& manifest_path) {
  json j;
  try {
    j = json::parse(read_text_file(manifest_path));
  } catch (const json::parse_error& ex) {
    throw DataError("manifest " + manifest_path.string() + ": " + ex.what());
  }
  const std::string where = "manifest " + manifest_path.string();
  EventDataset ds;
  const auto fmt = j.value("format", std::string("csv"));
  if (fmt == "csv") {
    ds.format = EventFormat::csv;
  } else if (fmt == "nmnist") {
    ds.format = EventFormat::nmnist;
  } else {
    throw DataError(where + ": unknown format '" + fmt + "'");
  }
  const json sensor = j.value("sensor", json::object());
  ds.sensor = {require_key<std::size_t>(sensor, "width", where + " sensor"),
               require_key<std::size_t>(sensor, "height", where + " sensor"),
               require_key<std::size_t>(sensor, "channels", where + " sensor")};
  ds.num_classes = require_key<std::size_t>(j, "num_classes", where);
  ds.duration_ms = require_key<double>(j, "duration_ms", where);
  if (j.contains("crop_ms") && !j.at("crop_ms").is_null()) ds.crop_ms = j.at("crop_ms").get<double>();
  if (ds.num_classes < 1) throw DataError(where + ": num_classes must be positive");
  if (!(ds.duration_ms > 0.0)) throw DataError(where + ": duration_ms must be positive");

  const auto base = manifest_path.parent_path();
  const auto samples = j.value("samples", json::array());
  if (samples.empty()) throw DataError(where + ": no samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string item = where + " sample " + std::to_string(i);
    EventSample s;
    s.path = require_key<std::string>(samples[i], "path", item);
    s.label = require_key<std::size_t>(samples[i], "label", item);
    if (s.label >= ds.num_classes) throw DataError(item + ": label " + std::to_string(s.label) + " out of range");
    const fs::path p = fs::path(s.path).is_absolute() ? fs::path(s.path) : base / s.path;
    try {
      s.events = ds.format == EventFormat::nmnist ? read_nmnist_bin(read_file_bytes(p), ds.sensor)
                                                  : read_event_csv(read_text_file(p));
    } catch (const DataError& ex) {
      throw DataError(p.string() + ": " + ex.what());
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void write_manifest(const fs::path& manifest_path, const EventDataset& dataset) {
  json j;
  j["format"] = format_name(dataset.format);
  j["sensor"] = {{"width", dataset.sensor.width}, {"height", dataset.sensor.height}, {"channels", dataset.sensor.channels}};
  j["num_classes"] = dataset.num_classes;
  j["duration_ms"] = dataset.duration_ms;
  if (dataset.crop_ms) j["crop_ms"] = *dataset.crop_ms;
  j["samples"] = json::array();
  for (const auto& s : dataset.samples) j["samples"].push_back({{"path", s.path}, {"label", s.label}});
  write_text_file(manifest_path, j.dump(2) + "\n");
}

void SyntheticParams::validate() const {
  if (classes < 2) throw std::invalid_argument("synthetic: classes must be at least 2");
  if (units < classes) throw std::invalid_argument("synthetic: units must be at least the class count");
  if (steps < 1) throw std::invalid_argument("synthetic: steps must be positive");
  if (!(deletion >= 0.0 && deletion < 1.0)) throw std::invalid_argument("synthetic: deletion must be in [0, 1)");
  if (!(template_rate > 0.0 && template_rate <= 1.0)) throw std::invalid_argument("synthetic: template_rate must be in (0, 1]");
  if (!(dt > 0.0)) throw std::invalid_argument("synthetic: dt must be positive");
}

std::vector<EventRecord> raster_to_events(const SpikeTensor& raster, double dt) {
  std::vector<EventRecord> events;
  for (std::size_t t = 0; t < raster.steps(); ++t) {
    for (std::size_t u = 0; u < raster.units(); ++u) {
      if (raster.at(u, t) != 0.0) {
        events.push_back({static_cast<std::int64_t>(std::llround(static_cast<double>(t) * dt * 1000.0)),
                          static_cast<std::uint32_t>(u), 0, 0});
      }
    }
  }
  return events;
}

SyntheticDataset gen_synthetic(const SyntheticParams& params) {
  params.validate();
  const Rng master(params.seed, 0x5e7);
  SyntheticDataset out;

  Rng tpl_rng = master.split(1);
  while (out.templates.size() < params.classes) {
    SpikeTensor tpl({params.units}, params.steps);
    for (double& v : tpl.data()) v = tpl_rng.uniform() < params.template_rate ? 1.0 : 0.0;
    const bool duplicate = std::any_of(out.templates.begin(), out.templates.end(),
                                       [&](const SpikeTensor& other) { return other == tpl; });
    if (!duplicate) out.templates.push_back(std::move(tpl));
  }

  auto make_split = [&](std::size_t count, std::uint64_t stream) {
    EventDataset ds;
    ds.sensor = {params.units, 1, 1};
    ds.num_classes = params.classes;
    ds.duration_ms = static_cast<double>(params.steps) * params.dt;
    const Rng split_rng = master.split(stream);
    for (std::size_t n = 0; n < count; ++n) {
      Rng rng = split_rng.split(n);
      const std::size_t label = n % params.classes;
      const SpikeTensor& tpl = out.templates[label];
      SpikeTensor sample({params.units}, params.steps);
      for (std::size_t u = 0; u < params.units; ++u) {
        for (std::size_t t = 0; t < params.steps; ++t) {
          if (tpl.at(u, t) == 0.0) continue;
          const bool drop = rng.uniform() < params.deletion;
          const auto shift = static_cast<std::int64_t>(rng.below(2 * params.jitter + 1)) -
                             static_cast<std::int64_t>(params.jitter);
          if (drop) continue;
          const auto moved = std::clamp<std::int64_t>(static_cast<std::int64_t>(t) + shift, 0,
                                                      static_cast<std::int64_t>(params.steps) - 1);
          sample.at(u, static_cast<std::size_t>(moved)) = 1.0;
        }
      }
      ds.samples.push_back({raster_to_events(sample, params.dt), label, {}});
    }
    return ds;
  };
  out.train = make_split(params.train_samples, 2);
  out.test = make_split(params.test_samples, 3);
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

}  // namespace spikegrad
