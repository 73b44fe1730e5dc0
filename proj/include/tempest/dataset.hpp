#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tempest/observation.hpp"
#include "tempest/time.hpp"

namespace tempest {

struct CityFeatures {
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
  void set_categorical(Feature f, std::string v);
};

// All cities' features at one timestamp plus, once attached, the temperature
// of the target city exactly horizon hours later.
struct JoinedRow {
  UtcHour timestamp;
  std::vector<CityFeatures> cities;  // parallel to JoinedTable::city_order
  std::optional<double> target;
};

struct ColumnRef {
  std::size_t city_index;
  Feature feature;
  bool operator==(const ColumnRef&) const = default;
};

// Join output: rows plus the feature columns that survived elimination.
// Invariant: every row has a value for every active numeric column.
struct JoinedTable {
  std::vector<std::string> city_order;    // configuration order, target city first
  std::vector<ColumnRef> active_columns;  // city-major, feature-enum order
  std::vector<JoinedRow> rows;            // sorted by timestamp

  bool column_active(std::size_t city_index, Feature f) const;
  std::string column_name(const ColumnRef& c) const;
};

struct DatasetSplit {
  JoinedTable train;
  JoinedTable test;
  std::string target_city;
  DateRange train_range;
  DateRange test_range;
};

// Fraction of candidate rows a feature column may be invalid/absent in
// before the whole column is eliminated.
inline constexpr double kColumnInvalidLimit = 0.05;

// One row per timestamp at which every listed city has an observation.
// Column elimination runs first (columns invalid in more than
// max_invalid_fraction of candidate rows are dropped), then rows still
// holding an invalid value in an active numeric column are dropped.
// Throws NoOverlap when there are no common timestamps at all.
JoinedTable join_cities(const std::vector<RawObservation>& observations,
                        const std::vector<CityId>& cities,
                        double max_invalid_fraction = kColumnInvalidLimit);

// Sets row.target to the target city's temp_f in the row exactly
// horizon_hours later; rows with no such row are dropped.
JoinedTable attach_target(JoinedTable table, const std::string& target_city,
                          int horizon_hours = 24);

// Membership by the row's own timestamp date. Ranges must be disjoint.
DatasetSplit split_by_date(const JoinedTable& table, DateRange train_range, DateRange test_range);

// Train restricted to the k*7 days immediately preceding the test range.
DatasetSplit trailing_weeks_subset(const DatasetSplit& split, int weeks);

// Interchange CSV between CLI stages:
// timestamp_utc,target_temp_f,<city>_<feature>,...
void write_joined_csv(const JoinedTable& table, std::ostream& out);
void write_joined_csv(const JoinedTable& table, const std::filesystem::path& path);
JoinedTable read_joined_csv(std::istream& in);
JoinedTable read_joined_csv(const std::filesystem::path& path);

}  // namespace tempest
