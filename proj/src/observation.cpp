#include "tempest/observation.hpp"

#include <cctype>

#include "tempest/errors.hpp"

namespace tempest {

void CityId::validate() const {
  if (name.empty()) throw ConfigError("city name must be nonempty");
  for (char c : name) {
    if (std::isupper(static_cast<unsigned char>(c)))
      throw ConfigError("city name must be lowercase: '" + name + "'");
  }
  if (latitude < -90.0 || latitude > 90.0)
    throw ConfigError("latitude out of range for city '" + name + "'");
  if (longitude < -180.0 || longitude > 180.0)
    throw ConfigError("longitude out of range for city '" + name + "'");
}

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::TempF:
      return "temp_f";
    case Feature::DewpointF:
      return "dewpoint_f";
    case Feature::HumidityPct:
      return "humidity_pct";
    case Feature::PressureInhg:
      return "pressure_inhg";
    case Feature::WindMph:
      return "wind_mph";
    case Feature::WindDir:
      return "wind_dir";
    case Feature::Condition:
      return "condition";
  }
  return "";
}

bool is_numeric(Feature f) { return f != Feature::WindDir && f != Feature::Condition; }

std::optional<double> RawObservation::numeric(Feature f) const {
  switch (f) {
    case Feature::TempF:
      return temp_f;
    case Feature::DewpointF:
      return dewpoint_f;
    case Feature::HumidityPct:
      return humidity_pct;
    case Feature::PressureInhg:
      return pressure_inhg;
    case Feature::WindMph:
      return wind_mph;
    default:
      return std::nullopt;
  }
}

void RawObservation::set_numeric(Feature f, std::optional<double> v) {
  switch (f) {
    case Feature::TempF:
      temp_f = v;
      break;
    case Feature::DewpointF:
      dewpoint_f = v;
      break;
    case Feature::HumidityPct:
      humidity_pct = v;
      break;
    case Feature::PressureInhg:
      pressure_inhg = v;
      break;
    case Feature::WindMph:
      wind_mph = v;
      break;
    default:
      break;
  }
}

std::string_view RawObservation::categorical(Feature f) const {
  return f == Feature::WindDir ? std::string_view(wind_dir) : std::string_view(condition);
}

std::optional<double> apply_sanity_band(Feature f, double value) {
  switch (f) {
    case Feature::TempF:
    case Feature::DewpointF:
      if (value < -60.0 || value > 130.0) return std::nullopt;
      break;
    case Feature::HumidityPct:
      if (value < 0.0 || value > 100.0) return std::nullopt;
      break;
    case Feature::PressureInhg:
      if (value < 25.0 || value > 35.0) return std::nullopt;
      break;
    case Feature::WindMph:
      if (value < 0.0) return std::nullopt;
      break;
    default:
      break;
  }
  return value;
}

}  // namespace tempest
