#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "tempest/observation.hpp"
#include "tempest/time.hpp"

namespace tempest {

// A fetched history document, body verbatim as served.
struct HistoryDocument {
  CityId city;
  CivilDate date;
  std::string body;
};

// Source of per-(city, day) history documents. Implementations: local
// fixture tree and live HTTP.
class HistoryClient {
 public:
  virtual ~HistoryClient() = default;
  // Throws NotFound / TransportError / RateLimited.
  virtual std::string fetch(const CityId& city, CivilDate date) = 0;
};

// Reads <root>/<city>/<YYYY-MM-DD>.json.
class FixtureHistoryClient : public HistoryClient {
 public:
  explicit FixtureHistoryClient(std::filesystem::path root);
  std::string fetch(const CityId& city, CivilDate date) override;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

struct LiveClientOptions {
  std::string base_url;                          // e.g. http://host:port
  std::string path_template = "/history/{city}/{date}.json";
  int max_retries = 3;                           // retries after the first attempt
  int retry_delay_ms = 100;
};

// One GET per (city, day). 404 -> NotFound immediately; 429 -> RateLimited
// after max_retries; connection failures -> TransportError after retries.
class LiveHistoryClient : public HistoryClient {
 public:
  explicit LiveHistoryClient(LiveClientOptions options);
  ~LiveHistoryClient() override;
  std::string fetch(const CityId& city, CivilDate date) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

HistoryDocument fetch_city_day(HistoryClient& client, const CityId& city, CivilDate date);

struct FetchOptions {
  int parallelism = 4;        // concurrent (city, day) fetches
  int min_interval_ms = 0;    // per-host spacing between request starts
};

struct FetchFailure {
  std::string city;
  CivilDate date;
  std::string reason;
};

struct FetchReport {
  std::vector<RawObservation> observations;  // parsed, all successful pairs
  std::vector<FetchFailure> failures;        // ordered by (city, date)
};

// Fetch + parse the full (city x day) grid. Failures are collected, not
// thrown; observations come back in deterministic (city, date) order
// regardless of scheduling.
FetchReport fetch_grid(HistoryClient& client, const std::vector<CityId>& cities,
                       const std::vector<CivilDate>& dates, const FetchOptions& options = {});

// Parses one fixture-schema JSON document into hourly observations.
// Sub-hourly readings collapse to the one nearest the top of the hour (ties
// toward the earlier reading); unparsable or out-of-band numerics come back
// absent. Throws MalformedDocument / EmptyDocument.
std::vector<RawObservation> parse_history_document(const std::string& text, const CityId& city);

inline constexpr std::string_view kCanonicalHeader =
    "timestamp_utc,city,temp_f,dewpoint_f,humidity_pct,pressure_inhg,wind_mph,wind_dir,"
    "condition";

// Canonical flat table. Rows sorted by (timestamp, city); duplicate
// city-hours collapse keeping the first occurrence in input order; numerics
// fixed to one decimal place; absent values empty. Returns rows written.
std::size_t write_canonical(const std::vector<RawObservation>& observations, std::ostream& out);
std::size_t write_canonical(const std::vector<RawObservation>& observations,
                            const std::filesystem::path& path);

std::vector<RawObservation> read_canonical(std::istream& in);
std::vector<RawObservation> read_canonical(const std::filesystem::path& path);

// Sort by (timestamp, city) and collapse duplicate city-hours (first
// occurrence wins) — the fixed point write_canonical serializes.
std::vector<RawObservation> normalize_observations(std::vector<RawObservation> observations);

// Fixture emission (used by the synthetic generator so the full ingest path
// is testable offline). Writes <root>/<city>/<YYYY-MM-DD>.json documents.
void write_fixture_tree(const std::vector<RawObservation>& observations,
                        const std::vector<CityId>& cities, int utc_offset_minutes,
                        const std::filesystem::path& root);

}  // namespace tempest
