#include "tempest/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tempest/errors.hpp"
#include "tempest/text.hpp"

namespace tempest {

std::optional<double> CityFeatures::numeric(Feature f) const {
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

void CityFeatures::set_numeric(Feature f, std::optional<double> v) {
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

std::string_view CityFeatures::categorical(Feature f) const {
  return f == Feature::WindDir ? std::string_view(wind_dir) : std::string_view(condition);
}

void CityFeatures::set_categorical(Feature f, std::string v) {
  if (f == Feature::WindDir)
    wind_dir = std::move(v);
  else
    condition = std::move(v);
}

bool JoinedTable::column_active(std::size_t city_index, Feature f) const {
  return std::find(active_columns.begin(), active_columns.end(), ColumnRef{city_index, f}) !=
         active_columns.end();
}

std::string JoinedTable::column_name(const ColumnRef& c) const {
  return city_order[c.city_index] + "_" + std::string(feature_name(c.feature));
}

JoinedTable join_cities(const std::vector<RawObservation>& observations,
                        const std::vector<CityId>& cities, double max_invalid_fraction) {
  if (cities.empty()) throw ConfigError("join_cities requires a nonempty city list");
  std::map<std::string, std::size_t> city_index;
  for (std::size_t i = 0; i < cities.size(); ++i) {
    if (!city_index.emplace(cities[i].name, i).second)
      throw ConfigError("duplicate city '" + cities[i].name + "' in city list");
  }

  // timestamp -> per-city observation (first one wins on duplicates).
  std::map<UtcHour, std::vector<const RawObservation*>> by_time;
  for (const RawObservation& o : observations) {
    auto it = city_index.find(o.city);
    if (it == city_index.end()) continue;
    auto& slot = by_time[o.timestamp];
    if (slot.empty()) slot.resize(cities.size(), nullptr);
    if (!slot[it->second]) slot[it->second] = &o;
  }

  std::vector<const std::vector<const RawObservation*>*> candidates;
  std::vector<UtcHour> candidate_times;
  for (const auto& [ts, slot] : by_time) {
    if (std::all_of(slot.begin(), slot.end(), [](const RawObservation* p) { return p != nullptr; })) {
      candidates.push_back(&slot);
      candidate_times.push_back(ts);
    }
  }
  if (candidates.empty())
    throw NoOverlap("no timestamp is covered by all " + std::to_string(cities.size()) +
                    " cities");

  // Pass 1: per-column invalid fraction over candidate rows.
  JoinedTable table;
  table.city_order.reserve(cities.size());
  for (const CityId& c : cities) table.city_order.push_back(c.name);

  for (std::size_t ci = 0; ci < cities.size(); ++ci) {
    for (Feature f : kAllFeatures) {
      std::size_t invalid = 0;
      for (const auto* slot : candidates) {
        const RawObservation& o = *(*slot)[ci];
        if (is_numeric(f) ? !o.numeric(f).has_value() : o.categorical(f).empty()) ++invalid;
      }
      double fraction = static_cast<double>(invalid) / static_cast<double>(candidates.size());
      if (fraction <= max_invalid_fraction) table.active_columns.push_back(ColumnRef{ci, f});
    }
  }

  // Pass 2: drop rows still invalid in an active numeric column.
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const auto& slot = *candidates[k];
    bool ok = true;
    for (const ColumnRef& c : table.active_columns) {
      if (is_numeric(c.feature) && !slot[c.city_index]->numeric(c.feature).has_value()) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    JoinedRow row;
    row.timestamp = candidate_times[k];
    row.cities.resize(cities.size());
    for (std::size_t ci = 0; ci < cities.size(); ++ci) {
      const RawObservation& o = *slot[ci];
      row.cities[ci].temp_f = o.temp_f;
      row.cities[ci].dewpoint_f = o.dewpoint_f;
      row.cities[ci].humidity_pct = o.humidity_pct;
      row.cities[ci].pressure_inhg = o.pressure_inhg;
      row.cities[ci].wind_mph = o.wind_mph;
      row.cities[ci].wind_dir = o.wind_dir;
      row.cities[ci].condition = o.condition;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

JoinedTable attach_target(JoinedTable table, const std::string& target_city, int horizon_hours) {
  auto it = std::find(table.city_order.begin(), table.city_order.end(), target_city);
  if (it == table.city_order.end())
    throw UnknownCity("target city '" + target_city + "' is not part of the join");
  std::size_t target_index = static_cast<std::size_t>(it - table.city_order.begin());
  if (!table.column_active(target_index, Feature::TempF))
    throw DataError("temp_f column for target city '" + target_city +
                    "' was eliminated; cannot attach targets");

  std::map<UtcHour, std::size_t> index_of;
  for (std::size_t i = 0; i < table.rows.size(); ++i) index_of[table.rows[i].timestamp] = i;

  std::vector<JoinedRow> kept;
  kept.reserve(table.rows.size());
  for (JoinedRow& row : table.rows) {
    auto hit = index_of.find(row.timestamp.plus_hours(horizon_hours));
    if (hit == index_of.end()) continue;
    row.target = table.rows[hit->second].cities[target_index].temp_f;
    kept.push_back(std::move(row));
  }
  table.rows = std::move(kept);
  return table;
}

DatasetSplit split_by_date(const JoinedTable& table, DateRange train_range, DateRange test_range) {
  if (train_range.overlaps(test_range))
    throw ConfigError("train range " + train_range.start.to_string() + ".." +
                      train_range.end.to_string() + " overlaps test range " +
                      test_range.start.to_string() + ".." + test_range.end.to_string());

  DatasetSplit split;
  split.train.city_order = split.test.city_order = table.city_order;
  split.train.active_columns = split.test.active_columns = table.active_columns;
  split.train_range = train_range;
  split.test_range = test_range;
  if (!table.city_order.empty()) split.target_city = table.city_order.front();

  for (const JoinedRow& row : table.rows) {
    if (!row.target.has_value())
      throw DataError("split_by_date requires target-attached rows");
    CivilDate d = row.timestamp.date();
    if (train_range.contains(d))
      split.train.rows.push_back(row);
    else if (test_range.contains(d))
      split.test.rows.push_back(row);
  }
  if (split.train.rows.empty())
    throw EmptySplit("train range " + train_range.start.to_string() + ".." +
                     train_range.end.to_string() + " selected zero rows");
  if (split.test.rows.empty())
    throw EmptySplit("test range " + test_range.start.to_string() + ".." +
                     test_range.end.to_string() + " selected zero rows");
  return split;
}

DatasetSplit trailing_weeks_subset(const DatasetSplit& split, int weeks) {
  if (weeks < 1) throw ConfigError("trailing_weeks_subset requires weeks >= 1");
  DateRange window{split.test_range.start.plus_days(-7L * weeks), split.test_range.start};
  if (split.train_range.start > window.start || split.train_range.end < window.end)
    throw InsufficientHistory("train range covers " +
                              std::to_string(split.train_range.days()) + " days ending " +
                              split.train_range.end.to_string() + "; need the " +
                              std::to_string(7 * weeks) + " days before " +
                              split.test_range.start.to_string());

  DatasetSplit out = split;
  out.train_range = window;
  out.train.rows.clear();
  for (const JoinedRow& row : split.train.rows) {
    if (window.contains(row.timestamp.date())) out.train.rows.push_back(row);
  }
  if (out.train.rows.empty())
    throw EmptySplit("trailing window " + window.start.to_string() + ".." +
                     window.end.to_string() + " selected zero rows");
  return out;
}

// --- interchange CSV -----------------------------------------------------------

void write_joined_csv(const JoinedTable& table, std::ostream& out) {
  out << "timestamp_utc,target_temp_f";
  for (const ColumnRef& c : table.active_columns) out << ',' << table.column_name(c);
  out << '\n';
  for (const JoinedRow& row : table.rows) {
    out << row.timestamp.to_string() << ',';
    if (row.target) out << format_double(*row.target);
    for (const ColumnRef& c : table.active_columns) {
      out << ',';
      const CityFeatures& cf = row.cities[c.city_index];
      if (is_numeric(c.feature)) {
        auto v = cf.numeric(c.feature);
        if (v) out << format_double(*v);
      } else {
        out << cf.categorical(c.feature);
      }
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing joined table");
}

void write_joined_csv(const JoinedTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_joined_csv(table, out);
}

JoinedTable read_joined_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty joined table (missing header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv(line);
  if (header.size() < 3 || header[0] != "timestamp_utc" || header[1] != "target_temp_f")
    throw SchemaError("joined table header must start with timestamp_utc,target_temp_f");

  JoinedTable table;
  std::map<std::string, std::size_t> city_index;
  for (std::size_t i = 2; i < header.size(); ++i) {
    const std::string& cell = header[i];
    bool matched = false;
    for (Feature f : kAllFeatures) {
      std::string suffix = "_" + std::string(feature_name(f));
      if (cell.size() > suffix.size() &&
          cell.compare(cell.size() - suffix.size(), suffix.size(), suffix) == 0) {
        std::string city = cell.substr(0, cell.size() - suffix.size());
        auto [it, inserted] = city_index.emplace(city, table.city_order.size());
        if (inserted) table.city_order.push_back(city);
        table.active_columns.push_back(ColumnRef{it->second, f});
        matched = true;
        break;
      }
    }
    if (!matched) throw SchemaError("unrecognized joined column '" + cell + "'");
  }

  std::size_t row_index = 0;
  while (std::getline(in, line)) {
    ++row_index;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv(line);
    if (fields.size() != header.size())
      throw SchemaError("row " + std::to_string(row_index) + ": expected " +
                        std::to_string(header.size()) + " columns, got " +
                        std::to_string(fields.size()));
    JoinedRow row;
    try {
      row.timestamp = UtcHour::parse(fields[0]);
    } catch (const ValueError& e) {
      throw ValueError("row " + std::to_string(row_index) + ": " + e.what());
    }
    auto target = parse_double(fields[1]);
    if (!target)
      throw ValueError("row " + std::to_string(row_index) + ": bad target '" + fields[1] + "'");
    row.target = target;
    row.cities.resize(table.city_order.size());
    for (std::size_t i = 0; i < table.active_columns.size(); ++i) {
      const ColumnRef& c = table.active_columns[i];
      const std::string& cell = fields[2 + i];
      CityFeatures& cf = row.cities[c.city_index];
      if (is_numeric(c.feature)) {
        auto v = parse_double(cell);
        if (!v)
          throw ValueError("row " + std::to_string(row_index) + ": bad numeric '" + cell +
                           "' in column " + table.column_name(c));
        cf.set_numeric(c.feature, v);
      } else {
        cf.set_categorical(c.feature, cell);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

JoinedTable read_joined_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_joined_csv(in);
}

}  // namespace tempest
