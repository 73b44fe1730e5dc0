#include "tempest/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tempest/errors.hpp"
#include "tempest/rng.hpp"

namespace tempest {

namespace {

constexpr double kPi = 3.14159265358979323846;

double pulse(double offset_hours, double width_hours) {
  double u = offset_hours / width_hours;
  return std::exp(-u * u);
}

double west_longitude(const std::vector<CityId>& cities) {
  double lon = std::numeric_limits<double>::infinity();
  for (const CityId& c : cities) lon = std::min(lon, c.longitude);
  return lon;
}

}  // namespace

void SynthConfig::validate() const {
  if (days < 2) throw BadConfig("synth needs days >= 2");
  if (advection_speed_mph <= 0.0) throw BadConfig("advection speed must be > 0");
  if (noise_sigma_f < 0.0) throw BadConfig("noise sigma must be >= 0");
  if (front_rate_per_day < 0.0) throw BadConfig("front rate must be >= 0");
  if (front_width_hours <= 0.0) throw BadConfig("front width must be > 0");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) throw BadConfig("dropout must be in [0, 1)");
  if (cities.empty()) throw BadConfig("synth needs at least one city");
  for (const CityId& c : cities) c.validate();
}

std::vector<CityId> default_synth_cities(std::size_t count) {
  // West to east: avon .. isle, june easternmost. The target (june) leads
  // the list per the city_order convention.
  static const std::vector<CityId> all = {
      {"june", 36.0, -86.0},  {"avon", 36.0, -98.0},  {"bram", 36.0, -96.67},
      {"cole", 36.0, -95.33}, {"dale", 36.0, -94.0},  {"esker", 36.0, -92.67},
      {"flint", 36.0, -91.33}, {"grove", 36.0, -90.0}, {"haven", 36.0, -88.67},
      {"isle", 36.0, -87.33},
  };
  if (count == 0 || count > all.size())
    throw BadConfig("default city count must be in [1, " + std::to_string(all.size()) + "]");
  return std::vector<CityId>(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
}

double east_miles(const SynthConfig& config, const CityId& city) {
  double west = west_longitude(config.cities);
  return (city.longitude - west) * kMilesPerDegreeLongitudeAtEquator *
         std::cos(city.latitude * kPi / 180.0);
}

std::vector<Front> front_schedule(const SynthConfig& config) {
  if (config.fronts) return *config.fronts;
  std::vector<Front> fronts;
  if (config.front_rate_per_day <= 0.0) return fronts;

  double max_lag = 0.0;
  for (const CityId& c : config.cities)
    max_lag = std::max(max_lag, east_miles(config, c) / config.advection_speed_mph);

  // Spawn early enough that fronts already in transit at hour zero exist.
  const double t0 = -(max_lag + 4.0 * config.front_width_hours);
  const double t1 = config.days * 24.0;
  const double rate_per_hour = config.front_rate_per_day / 24.0;

  Rng rng = Rng::stream(config.seed, "fronts", 0);
  double t = t0;
  while (true) {
    t += rng.exponential(rate_per_hour);
    if (t >= t1) break;
    Front f;
    f.spawn_hour = t;
    double scale = rng.uniform(0.6, 1.4);
    double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    f.magnitude_f = sign * scale * config.front_magnitude_f;
    f.width_hours = config.front_width_hours;
    fronts.push_back(f);
  }
  return fronts;
}

std::vector<RawObservation> generate(const SynthConfig& config) {
  config.validate();
  const std::vector<Front> fronts = front_schedule(config);
  const std::int64_t start_hour = UtcHour(config.start, 0).hours_since_epoch();
  const std::int64_t total_hours = static_cast<std::int64_t>(config.days) * 24;

  std::vector<RawObservation> out;
  out.reserve(config.cities.size() * static_cast<std::size_t>(total_hours));

  static const char* kCalmDirs[] = {"N", "NE", "E", "SE", "S", "Calm", "Variable"};

  for (std::size_t ci = 0; ci < config.cities.size(); ++ci) {
    const CityId& city = config.cities[ci];
    const double lag = east_miles(config, city) / config.advection_speed_mph;
    Rng noise = Rng::stream(config.seed, "noise", ci);
    Rng drop = Rng::stream(config.seed, "dropout", ci);

    for (std::int64_t h = 0; h < total_hours; ++h) {
      double t = static_cast<double>(h);

      double front_temp = 0.0;
      double proximity = 0.0;  // 0..1, peak closeness of any front
      double nearest_signed_offset = 0.0;
      double nearest_weight = 0.0;
      for (const Front& f : fronts) {
        double offset = t - (f.spawn_hour + lag);
        double g = pulse(offset, f.width_hours);
        front_temp += f.magnitude_f * g;
        double w = g * std::abs(f.magnitude_f) / std::max(config.front_magnitude_f, 1e-9);
        proximity = std::min(1.0, proximity + w);
        if (w > nearest_weight) {
          nearest_weight = w;
          nearest_signed_offset = offset;
        }
      }

      double local_solar = t + static_cast<double>(start_hour % 24) + city.longitude / 15.0;
      double diurnal = config.diurnal_amplitude_f * std::sin(2.0 * kPi * (local_solar - 9.0) / 24.0);
      double drift = config.seasonal_drift_f_per_day * (t / 24.0);

      double n_temp = noise.normal();
      double n_hum = noise.normal();
      double n_pres = noise.normal();
      double n_wind = noise.normal();
      double dir_draw = noise.uniform();

      RawObservation o;
      o.city = city.name;
      o.timestamp = UtcHour::from_hours(start_hour + h);
      o.temp_f = config.base_temp_f + diurnal + drift + front_temp +
                 config.noise_sigma_f * n_temp;
      o.dewpoint_f = *o.temp_f - (14.0 - 9.0 * proximity) + 0.5 * n_hum;
      o.humidity_pct = std::clamp(50.0 + 38.0 * proximity + 2.0 * n_hum, 0.0, 100.0);
      o.pressure_inhg = std::clamp(29.95 - 0.55 * proximity + 0.02 * n_pres, 25.0, 35.0);
      o.wind_mph = std::max(0.0, 6.0 + 9.0 * proximity + 1.5 * n_wind);
      if (proximity > 0.25) {
        o.wind_dir = nearest_signed_offset < 0.0 ? "SW" : "W";
      } else {
        o.wind_dir = kCalmDirs[dir_draw * 7.0 < 7.0 ? static_cast<int>(dir_draw * 7.0) : 6];
      }
      o.condition = proximity > 0.55 ? "Rain" : (proximity > 0.2 ? "Cloudy" : "Clear");

      if (config.dropout_rate > 0.0 && drop.uniform() < config.dropout_rate) continue;
      out.push_back(std::move(o));
    }
  }
  return out;
}

double oracle_advantage(const SynthConfig& config) {
  config.validate();
  const std::vector<Front> fronts = front_schedule(config);

  double target_lag = east_miles(config, config.cities.front()) / config.advection_speed_mph;
  double min_lag = std::numeric_limits<double>::infinity();
  for (const CityId& c : config.cities)
    min_lag = std::min(min_lag, east_miles(config, c) / config.advection_speed_mph);

  // Default test carve: the last seven full days before the horizon day.
  const std::int64_t test_begin = (static_cast<std::int64_t>(config.days) - 8) * 24;
  const std::int64_t test_end = (static_cast<std::int64_t>(config.days) - 1) * 24;
  if (test_begin < 0) throw BadConfig("corpus too short for the default test week");

  double e_one = 0.0;
  double e_all = 0.0;
  std::int64_t count = 0;
  for (std::int64_t h = test_begin; h < test_end; ++h, ++count) {
    double t = static_cast<double>(h);
    double target_time = t + 24.0;
    double unseen_one = 0.0;
    double unseen_all = 0.0;
    for (const Front& f : fronts) {
      double contribution = f.magnitude_f * pulse(target_time - (f.spawn_hour + target_lag),
                                                  f.width_hours);
      if (f.spawn_hour + target_lag > t) unseen_one += contribution;
      if (f.spawn_hour + min_lag > t) unseen_all += contribution;
    }
    e_one += unseen_one * unseen_one;
    e_all += unseen_all * unseen_all;
  }
  e_one /= static_cast<double>(count);
  e_all /= static_cast<double>(count);

  double s2 = config.noise_sigma_f * config.noise_sigma_f;
  double rmse_one = std::sqrt(s2 + e_one);
  double rmse_all = std::sqrt(s2 + e_all);
  if (rmse_one == 0.0) return 0.0;
  return 1.0 - rmse_all / rmse_one;
}

}  // namespace tempest
