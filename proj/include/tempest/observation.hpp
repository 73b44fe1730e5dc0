#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "tempest/time.hpp"

namespace tempest {

// A station identity. Positions are used by the synthetic generator and by
// nothing else; joins and schemas key on the name.
struct CityId {
  std::string name;  // nonempty, lowercase, unique within a run
  double latitude = 0.0;
  double longitude = 0.0;

  void validate() const;
};

enum class Feature {
  TempF,
  DewpointF,
  HumidityPct,
  PressureInhg,
  WindMph,
  WindDir,
  Condition,
};

inline constexpr std::array<Feature, 5> kNumericFeatures = {
    Feature::TempF, Feature::DewpointF, Feature::HumidityPct, Feature::PressureInhg,
    Feature::WindMph};
inline constexpr std::array<Feature, 2> kCategoricalFeatures = {Feature::WindDir,
                                                                Feature::Condition};
inline constexpr std::array<Feature, 7> kAllFeatures = {
    Feature::TempF,     Feature::DewpointF, Feature::HumidityPct, Feature::PressureInhg,
    Feature::WindMph,   Feature::WindDir,   Feature::Condition};

std::string_view feature_name(Feature f);
bool is_numeric(Feature f);

// One city-hour of readings. Numeric fields are optional: a reading that was
// missing, unparsable, or outside its sanity band is stored as absent, never
// coerced. Categorical fields keep the raw string ("" when missing).
struct RawObservation {
  std::string city;
  UtcHour timestamp;
  std::optional<double> temp_f;
  std::optional<double> dewpoint_f;
  std::optional<double> humidity_pct;
  std::optional<double> pressure_inhg;
  std::optional<double> wind_mph;
  std::string wind_dir;
  std::string condition;

  std::optional<double> numeric(Feature f) const;
  void set_numeric(Feature f, std::optional<double> v);
  std::string_view categorical(Feature f) const;

  bool operator==(const RawObservation&) const = default;
};

// Sanity bands from the observation invariants: values outside come back
// absent. Returns the input unchanged for in-band values.
std::optional<double> apply_sanity_band(Feature f, double value);

}  // namespace tempest
