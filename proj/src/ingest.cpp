#include "tempest/ingest.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tempest/errors.hpp"

// httplib spawns a thread per connection; we only use the blocking client
// and, in tests, a loopback server.
#include <httplib.h>

namespace tempest {

namespace {

using nlohmann::json;

std::optional<double> parse_strict_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

// A field may be a number, a numeric string, null, or junk like "N/A".
// Only the first two produce a value; everything else is absent.
std::optional<double> numeric_field(const json& entry, const char* key, Feature f) {
  auto it = entry.find(key);
  if (it == entry.end() || it->is_null()) return std::nullopt;
  if (it->is_number()) return apply_sanity_band(f, it->get<double>());
  if (it->is_string()) {
    auto parsed = parse_strict_double(it->get<std::string>());
    if (!parsed) return std::nullopt;
    return apply_sanity_band(f, *parsed);
  }
  return std::nullopt;
}

std::string string_field(const json& entry, const char* key) {
  auto it = entry.find(key);
  if (it == entry.end() || !it->is_string()) return "";
  return it->get<std::string>();
}

std::string format_fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

}  // namespace

std::vector<RawObservation> parse_history_document(const std::string& text, const CityId& city) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw MalformedDocument(std::string("document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("observations") || !doc["observations"].is_array())
    throw MalformedDocument("document has no observations array");
  if (doc.contains("city") && doc["city"].is_string() &&
      doc["city"].get<std::string>() != city.name)
    throw MalformedDocument("document city '" + doc["city"].get<std::string>() +
                            "' does not match requested city '" + city.name + "'");
  if (!doc.contains("date") || !doc["date"].is_string() ||
      !doc.contains("utc_offset_minutes") || !doc["utc_offset_minutes"].is_number_integer())
    throw MalformedDocument("document is missing date or utc_offset_minutes");

  const json& entries = doc["observations"];
  if (entries.empty()) throw EmptyDocument("document for " + city.name + " has zero observations");

  CivilDate date = CivilDate::parse(doc["date"].get<std::string>());
  std::int64_t offset_minutes = doc["utc_offset_minutes"].get<std::int64_t>();

  // Group sub-hourly readings by UTC hour; keep the one nearest the top of
  // the hour, ties toward the earlier reading (document order).
  struct Pick {
    std::int64_t minute_in_hour;
    RawObservation obs;
  };
  std::map<std::int64_t, Pick> by_hour;

  for (const json& entry : entries) {
    if (!entry.is_object() || !entry.contains("time_local") || !entry["time_local"].is_string())
      throw MalformedDocument("observation entry is missing time_local");
    const std::string time_local = entry["time_local"].get<std::string>();
    if (time_local.size() != 5 || time_local[2] != ':')
      throw MalformedDocument("bad time_local '" + time_local + "'");
    int hh = 0, mm = 0;
    auto r1 = std::from_chars(time_local.data(), time_local.data() + 2, hh);
    auto r2 = std::from_chars(time_local.data() + 3, time_local.data() + 5, mm);
    if (r1.ec != std::errc() || r2.ec != std::errc() || hh < 0 || hh > 23 || mm < 0 || mm > 59)
      throw MalformedDocument("bad time_local '" + time_local + "'");

    std::int64_t utc_minutes = date.days_since_epoch() * 24 * 60 + hh * 60 + mm - offset_minutes;
    std::int64_t hour = utc_minutes >= 0 ? utc_minutes / 60 : (utc_minutes - 59) / 60;
    std::int64_t minute_in_hour = utc_minutes - hour * 60;

    RawObservation obs;
    obs.city = city.name;
    obs.timestamp = UtcHour::from_hours(hour);
    obs.temp_f = numeric_field(entry, "temp_f", Feature::TempF);
    obs.dewpoint_f = numeric_field(entry, "dewpoint_f", Feature::DewpointF);
    obs.humidity_pct = numeric_field(entry, "humidity_pct", Feature::HumidityPct);
    obs.pressure_inhg = numeric_field(entry, "pressure_inhg", Feature::PressureInhg);
    obs.wind_mph = numeric_field(entry, "wind_mph", Feature::WindMph);
    obs.wind_dir = string_field(entry, "wind_dir");
    obs.condition = string_field(entry, "condition");

    auto it = by_hour.find(hour);
    if (it == by_hour.end() || minute_in_hour < it->second.minute_in_hour)
      by_hour.insert_or_assign(hour, Pick{minute_in_hour, std::move(obs)});
  }

  std::vector<RawObservation> out;
  out.reserve(by_hour.size());
  for (auto& [hour, pick] : by_hour) out.push_back(std::move(pick.obs));
  return out;
}

// --- clients -----------------------------------------------------------------

FixtureHistoryClient::FixtureHistoryClient(std::filesystem::path root) : root_(std::move(root)) {}

std::string FixtureHistoryClient::fetch(const CityId& city, CivilDate date) {
  std::filesystem::path path = root_ / city.name / (date.to_string() + ".json");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("no fixture file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return buf.str();
}

struct LiveHistoryClient::Impl {
  LiveClientOptions options;
  httplib::Client client;

  explicit Impl(LiveClientOptions opts) : options(std::move(opts)), client(options.base_url) {}
};

LiveHistoryClient::LiveHistoryClient(LiveClientOptions options)
    : impl_(std::make_unique<Impl>(std::move(options))) {
  if (impl_->options.base_url.empty()) throw ConfigError("live client requires a base URL");
}

LiveHistoryClient::~LiveHistoryClient() = default;

std::string LiveHistoryClient::fetch(const CityId& city, CivilDate date) {
  std::string path = impl_->options.path_template;
  auto replace = [&path](std::string_view tag, const std::string& value) {
    auto pos = path.find(tag);
    if (pos != std::string::npos) path.replace(pos, tag.size(), value);
  };
  replace("{city}", city.name);
  replace("{date}", date.to_string());

  int attempts = impl_->options.max_retries + 1;
  bool rate_limited = false;
  std::string last_error;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(impl_->options.retry_delay_ms));
    auto res = impl_->client.Get(path);
    if (!res) {
      rate_limited = false;
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return res->body;
    if (res->status == 404) throw NotFound("HTTP 404 for " + path);
    if (res->status == 429) {
      rate_limited = true;
      last_error = "HTTP 429";
      continue;
    }
    rate_limited = false;
    last_error = "HTTP " + std::to_string(res->status);
  }
  if (rate_limited) throw RateLimited("rate limited fetching " + path);
  throw TransportError("failed fetching " + path + ": " + last_error);
}

HistoryDocument fetch_city_day(HistoryClient& client, const CityId& city, CivilDate date) {
  return HistoryDocument{city, date, client.fetch(city, date)};
}

FetchReport fetch_grid(HistoryClient& client, const std::vector<CityId>& cities,
                       const std::vector<CivilDate>& dates, const FetchOptions& options) {
  struct PairResult {
    std::vector<RawObservation> observations;
    std::string failure;  // empty on success
  };
  const std::size_t total = cities.size() * dates.size();
  std::vector<PairResult> results(total);

  std::atomic<std::size_t> cursor{0};
  std::mutex rate_mutex;
  auto next_allowed = std::chrono::steady_clock::now();

  auto worker = [&]() {
    while (true) {
      std::size_t k = cursor.fetch_add(1);
      if (k >= total) return;
      const CityId& city = cities[k / dates.size()];
      CivilDate date = dates[k % dates.size()];
      if (options.min_interval_ms > 0) {
        std::unique_lock lock(rate_mutex);
        auto now = std::chrono::steady_clock::now();
        if (now < next_allowed) {
          auto wait_until = next_allowed;
          next_allowed += std::chrono::milliseconds(options.min_interval_ms);
          lock.unlock();
          std::this_thread::sleep_until(wait_until);
        } else {
          next_allowed = now + std::chrono::milliseconds(options.min_interval_ms);
        }
      }
      try {
        HistoryDocument doc = fetch_city_day(client, city, date);
        results[k].observations = parse_history_document(doc.body, city);
      } catch (const Error& e) {
        results[k].failure = e.what();
      }
    }
  };

  int threads = std::max(1, options.parallelism);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  FetchReport report;
  for (std::size_t k = 0; k < total; ++k) {
    const CityId& city = cities[k / dates.size()];
    CivilDate date = dates[k % dates.size()];
    if (!results[k].failure.empty()) {
      report.failures.push_back(FetchFailure{city.name, date, results[k].failure});
    } else {
      for (auto& obs : results[k].observations) report.observations.push_back(std::move(obs));
    }
  }
  return report;
}

// --- canonical table ----------------------------------------------------------

std::vector<RawObservation> normalize_observations(std::vector<RawObservation> observations) {
  std::stable_sort(observations.begin(), observations.end(),
                   [](const RawObservation& a, const RawObservation& b) {
                     if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                     return a.city < b.city;
                   });
  auto last = std::unique(observations.begin(), observations.end(),
                          [](const RawObservation& a, const RawObservation& b) {
                            return a.timestamp == b.timestamp && a.city == b.city;
                          });
  observations.erase(last, observations.end());
  return observations;
}

std::size_t write_canonical(const std::vector<RawObservation>& observations, std::ostream& out) {
  std::vector<RawObservation> rows = normalize_observations(observations);
  out << kCanonicalHeader << '\n';
  auto cell = [](const std::optional<double>& v) { return v ? format_fixed1(*v) : std::string(); };
  for (const RawObservation& o : rows) {
    out << o.timestamp.to_string() << ',' << o.city << ',' << cell(o.temp_f) << ','
        << cell(o.dewpoint_f) << ',' << cell(o.humidity_pct) << ',' << cell(o.pressure_inhg)
        << ',' << cell(o.wind_mph) << ',' << o.wind_dir << ',' << o.condition << '\n';
  }
  if (!out) throw IoError("failed writing canonical table");
  return rows.size();
}

std::size_t write_canonical(const std::vector<RawObservation>& observations,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return write_canonical(observations, out);
}

std::vector<RawObservation> read_canonical(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("empty canonical file (missing header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCanonicalHeader)
    throw SchemaError("canonical header mismatch: got '" + line + "'");

  std::vector<RawObservation> out;
  std::size_t row_index = 0;
  while (std::getline(in, line)) {
    ++row_index;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_line(line);
    if (fields.size() != 9)
      throw SchemaError("row " + std::to_string(row_index) + ": expected 9 columns, got " +
                        std::to_string(fields.size()));
    RawObservation o;
    try {
      o.timestamp = UtcHour::parse(fields[0]);
    } catch (const ValueError& e) {
      throw ValueError("row " + std::to_string(row_index) + ": " + e.what());
    }
    o.city = fields[1];
    if (o.city.empty()) throw ValueError("row " + std::to_string(row_index) + ": empty city");
    const Feature numeric_order[] = {Feature::TempF, Feature::DewpointF, Feature::HumidityPct,
                                     Feature::PressureInhg, Feature::WindMph};
    for (int j = 0; j < 5; ++j) {
      const std::string& cell = fields[2 + j];
      if (cell.empty()) continue;
      auto parsed = parse_strict_double(cell);
      if (!parsed)
        throw ValueError("row " + std::to_string(row_index) + ": bad numeric '" + cell + "'");
      o.set_numeric(numeric_order[j], apply_sanity_band(numeric_order[j], *parsed));
    }
    o.wind_dir = fields[7];
    o.condition = fields[8];
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<RawObservation> read_canonical(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_canonical(in);
}

void write_fixture_tree(const std::vector<RawObservation>& observations,
                        const std::vector<CityId>& cities, int utc_offset_minutes,
                        const std::filesystem::path& root) {
  std::map<std::string, const CityId*> by_name;
  for (const CityId& c : cities) by_name[c.name] = &c;

  // Group by (city, local calendar day).
  std::map<std::pair<std::string, std::int64_t>, std::vector<const RawObservation*>> groups;
  for (const RawObservation& o : observations) {
    std::int64_t local_minutes = o.timestamp.hours_since_epoch() * 60 + utc_offset_minutes;
    std::int64_t local_day =
        local_minutes >= 0 ? local_minutes / (24 * 60) : (local_minutes - (24 * 60 - 1)) / (24 * 60);
    groups[{o.city, local_day}].push_back(&o);
  }

  for (auto& [key, members] : groups) {
    const auto& [city_name, local_day] = key;
    if (!by_name.count(city_name)) throw ConfigError("observation for unknown city " + city_name);
    CivilDate date = CivilDate::from_days(local_day);

    std::sort(members.begin(), members.end(),
              [](const RawObservation* a, const RawObservation* b) {
                return a->timestamp < b->timestamp;
              });

    json entries = json::array();
    for (const RawObservation* o : members) {
      std::int64_t local_minutes = o->timestamp.hours_since_epoch() * 60 + utc_offset_minutes;
      std::int64_t minute_of_day = local_minutes - local_day * 24 * 60;
      char hhmm[8];
      std::snprintf(hhmm, sizeof(hhmm), "%02d:%02d", static_cast<int>(minute_of_day / 60),
                    static_cast<int>(minute_of_day % 60));
      json entry;
      entry["time_local"] = hhmm;
      auto put = [&entry](const char* k, const std::optional<double>& v) {
        if (v)
          entry[k] = *v;
        else
          entry[k] = nullptr;
      };
      put("temp_f", o->temp_f);
      put("dewpoint_f", o->dewpoint_f);
      put("humidity_pct", o->humidity_pct);
      put("pressure_inhg", o->pressure_inhg);
      put("wind_mph", o->wind_mph);
      entry["wind_dir"] = o->wind_dir;
      entry["condition"] = o->condition;
      entries.push_back(std::move(entry));
    }

    json doc;
    doc["city"] = city_name;
    doc["date"] = date.to_string();
    doc["utc_offset_minutes"] = utc_offset_minutes;
    doc["observations"] = std::move(entries);

    std::filesystem::path dir = root / city_name;
    std::filesystem::create_directories(dir);
    std::filesystem::path path = dir / (date.to_string() + ".json");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
  }
}

}  // namespace tempest
