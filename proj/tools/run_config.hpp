#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tempest/ingest.hpp"
#include "tempest/models/model.hpp"
#include "tempest/synth.hpp"
#include "tempest/time.hpp"

namespace tempest::cli {

// Everything a run needs, merged from defaults, the --config file, and flag
// overrides (flags win). Fully validated before any work; unknown keys are
// rejected. The effective config is echoed into every output directory.
struct RunConfig {
  std::uint64_t seed = 42;
  std::filesystem::path out = "out";

  std::vector<CityId> cities;  // target city first
  std::string target_city;

  CivilDate train_start{2018, 6, 23};
  CivilDate train_end{2018, 9, 1};
  CivilDate test_start{2018, 9, 1};
  CivilDate test_end{2018, 9, 8};
  int horizon_hours = 24;
  bool scaler_union = false;

  std::filesystem::path fixture_dir = "fixtures";
  LiveClientOptions live;
  int fetch_parallelism = 4;
  int fetch_min_interval_ms = 0;

  ModelConfig model;
  bool svr_nonconvergence_fatal = false;

  // synth: days of training history; the generated span adds the test days
  // plus one horizon day on top.
  int synth_days = 70;
  double base_temp_f = 74.0;
  double diurnal_amplitude_f = 9.0;
  double seasonal_drift_f_per_day = -0.12;
  double advection_speed_mph = 15.0;
  double front_rate_per_day = 0.6;
  double front_magnitude_f = 8.0;
  double front_width_hours = 5.0;
  double noise_sigma_f = 2.0;
  double dropout_rate = 0.0;

  int weeks_max = 9;
  std::vector<std::size_t> test_sizes = {20, 40, 60, 80, 100, 120, 140, 160};

  static RunConfig load(const std::optional<std::filesystem::path>& config_path);
  void validate() const;
  std::string to_json() const;
  void echo(const std::filesystem::path& out_dir) const;

  DateRange train_range() const { return {train_start, train_end}; }
  DateRange test_range() const { return {test_start, test_end}; }
  SynthConfig synth_config() const;
  std::filesystem::path resolved_fixture_dir() const;  // TEMPEST_FIXTURE_DIR wins
};

}  // namespace tempest::cli
