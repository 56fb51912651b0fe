#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spikegrad/rng.hpp"
#include "spikegrad/tensor.hpp"

namespace spikegrad {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EventRecord {
  std::int64_t t_us = 0;
  std::uint32_t x = 0;
  std::uint32_t y = 0;
  std::uint32_t p = 0;  // polarity or channel

  bool operator==(const EventRecord&) const = default;
};

/// Sensor extent. Rasters have unit shape (channels, height, width) and the
/// unit of event (x, y, p) is (p * height + y) * width + x.
struct SensorDims {
  std::size_t width = 1;
  std::size_t height = 1;
  std::size_t channels = 1;

  std::size_t units() const { return width * height * channels; }
  bool operator==(const SensorDims&) const = default;
};

inline constexpr SensorDims kNmnistSensor{34, 34, 2};

/// N-MNIST 5-byte records: x, y, then polarity in bit 7 of byte 2 and a
/// 23-bit big-endian microsecond timestamp in the remaining bits. Throws
/// DataError on a trailing partial record or a coordinate outside `sensor`.
std::vector<EventRecord> read_nmnist_bin(std::span<const std::uint8_t> bytes,
                                         const SensorDims& sensor = kNmnistSensor);
std::vector<std::uint8_t> write_nmnist_bin(std::span<const EventRecord> events);

/// "t_us,x,y,p" CSV. Errors name the 1-based line.
std::vector<EventRecord> read_event_csv(std::string_view text);
std::string write_event_csv(std::span<const EventRecord> events);

/// Bins events at floor((t - offset) / 1000 / dt). Several events of one unit
/// in one bin count once. Events before the offset or at/after the duration
/// cap (relative to the offset) are dropped.
SpikeTensor rasterize(std::span<const EventRecord> events, const TimeGrid& grid, const SensorDims& dims,
                      double duration_cap_ms, std::int64_t offset_us = 0);

enum class EventFormat { csv, nmnist };

struct EventSample {
  std::vector<EventRecord> events;
  std::size_t label = 0;
  std::string path;  // source file, empty for in-memory samples
};

/// A labelled event dataset plus the presentation options of its manifest.
struct EventDataset {
  SensorDims sensor;
  std::size_t num_classes = 0;
  double duration_ms = 0.0;         // presented length (and cap) in ms
  std::optional<double> crop_ms;    // random training crop length, if any
  EventFormat format = EventFormat::csv;
  std::vector<EventSample> samples;

  /// Steps of the presentation window: crop length when cropping, else duration.
  std::size_t steps(double dt, bool cropped) const;
};

/// Manifest JSON:
/// {"format": "csv"|"nmnist", "sensor": {"width","height","channels"},
///  "num_classes": N, "duration_ms": D, "crop_ms": C (optional),
///  "samples": [{"path": "...", "label": k}, ...]}
/// Relative paths resolve against the manifest's directory.
EventDataset load_manifest(const std::filesystem::path& manifest_path);
void write_manifest(const std::filesystem::path& manifest_path, const EventDataset& dataset);

/// Rasterizes one sample. With `crop` set and a crop length configured, the
/// window offset is drawn uniformly from the valid range.
SpikeTensor present(const EventDataset& dataset, const EventSample& sample, double dt, Rng* crop = nullptr);

struct SyntheticParams {
  std::size_t classes = 3;
  std::size_t units = 20;
  std::size_t steps = 100;
  std::size_t jitter = 2;          // +/- bins
  double deletion = 0.05;          // per-spike drop probability
  double template_rate = 0.05;     // spikes per bin per unit in a template
  std::size_t train_samples = 200;
  std::size_t test_samples = 100;
  double dt = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticDataset {
  std::vector<SpikeTensor> templates;  // one per class, unit shape {units}
  EventDataset train;
  EventDataset test;
};

/// Class templates plus jittered, thinned samples; labels cycle 0..N-1.
/// Deterministic in (params, seed).
SyntheticDataset gen_synthetic(const SyntheticParams& params);

std::vector<EventRecord> raster_to_events(const SpikeTensor& raster, double dt);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace spikegrad
