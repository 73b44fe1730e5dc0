#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tempest/observation.hpp"
#include "tempest/time.hpp"

namespace tempest {

// One weather front: spawns at the westmost configured longitude and rides
// east at the advection speed, reaching each city with lag distance/speed.
struct Front {
  double spawn_hour = 0.0;   // hours since corpus start, at the westmost longitude
  double magnitude_f = 0.0;  // signed peak temperature perturbation
  double width_hours = 5.0;  // gaussian half-width of the pulse
};

// Deterministic multi-city generator with westerly advection: temperature is
// base + diurnal sine + seasonal drift + front pulses + noise, and the other
// fields are derived from front proximity. Upstream cities therefore carry
// real predictive signal about the target city's next day, by construction.
struct SynthConfig {
  std::vector<CityId> cities;  // target city first; defaults below when empty
  CivilDate start{2018, 6, 23};
  int days = 78;  // total calendar days generated (see cli for the train/test carve)
  std::uint64_t seed = 42;

  double base_temp_f = 74.0;
  double diurnal_amplitude_f = 9.0;
  double seasonal_drift_f_per_day = -0.12;
  double advection_speed_mph = 15.0;
  double front_rate_per_day = 0.6;
  double front_magnitude_f = 8.0;
  double front_width_hours = 5.0;
  double noise_sigma_f = 2.0;
  double dropout_rate = 0.0;  // fraction of city-hours deleted, for filter tests

  // Explicit schedule override; when set, no fronts are sampled.
  std::optional<std::vector<Front>> fronts;

  void validate() const;
};

// The ten default cities, west to east, with the easternmost (the target)
// first per the city_order convention.
std::vector<CityId> default_synth_cities(std::size_t count = 10);

inline constexpr double kMilesPerDegreeLongitudeAtEquator = 69.172;

// Miles east of the westmost configured longitude.
double east_miles(const SynthConfig& config, const CityId& city);

// The sampled (or overridden) front schedule for a config.
std::vector<Front> front_schedule(const SynthConfig& config);

std::vector<RawObservation> generate(const SynthConfig& config);

// Expected relative RMSE advantage of the all-cities predictor over the
// target-only predictor, 1 - rmse_all / rmse_one, computed from the
// generator's own front schedule over the default test week (the last seven
// full days before the horizon day). A front counts as visible to a
// predictor at feature time t once it has reached any of the predictor's
// cities; invisible fronts are irreducible error on top of the noise floor.
double oracle_advantage(const SynthConfig& config);

}  // namespace tempest
