#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <httplib.h>

#include <atomic>
#include <chrono>
#include <set>
#include <sstream>
#include <thread>

#include "support/util.hpp"
#include "tempest/errors.hpp"
#include "tempest/ingest.hpp"
#include "tempest/rng.hpp"

using namespace tempest;
using tempest::testing::TempDir;
using nlohmann::json;

namespace {

const CityId kNashville{"nashville", 36.17, -86.78};

json entry(const std::string& hhmm, double temp) {
  json e;
  e["time_local"] = hhmm;
  e["temp_f"] = temp;
  e["dewpoint_f"] = temp - 12.0;
  e["humidity_pct"] = 55.0;
  e["pressure_inhg"] = 29.9;
  e["wind_mph"] = 6.0;
  e["wind_dir"] = "NW";
  e["condition"] = "Clear";
  return e;
}

std::string day_document(const std::string& city, const std::string& date, int offset_minutes,
                         json entries) {
  json doc;
  doc["city"] = city;
  doc["date"] = date;
  doc["utc_offset_minutes"] = offset_minutes;
  doc["observations"] = std::move(entries);
  return doc.dump();
}

}  // namespace

TEST_CASE("full fixture day parses to 24 hourly observations") {
  json entries = json::array();
  for (int h = 0; h < 24; ++h) {
    char hhmm[6];
    std::snprintf(hhmm, sizeof(hhmm), "%02d:00", h);
    entries.push_back(entry(hhmm, 70.0 + h));
  }
  auto obs = parse_history_document(day_document("nashville", "2018-07-01", 0, entries),
                                    kNashville);
  REQUIRE(obs.size() == 24);
  CHECK(obs.front().timestamp.to_string() == "2018-07-01T00:00Z");
  CHECK(obs.back().timestamp.to_string() == "2018-07-01T23:00Z");
  for (const auto& o : obs) {
    CHECK(o.city == "nashville");
    CHECK(o.temp_f.has_value());
  }
  CHECK(*obs[5].temp_f == 75.0);
}

TEST_CASE("sub-hourly readings collapse to the one nearest the top of the hour") {
  json entries = json::array();
  entries.push_back(entry("13:05", 81.0));
  entries.push_back(entry("13:52", 99.0));
  auto obs = parse_history_document(day_document("nashville", "2018-07-01", 0, entries),
                                    kNashville);
  REQUIRE(obs.size() == 1);
  CHECK(obs[0].timestamp.to_string() == "2018-07-01T13:00Z");
  CHECK(*obs[0].temp_f == 81.0);
}

TEST_CASE("unparsable numerics are marked absent, not coerced") {
  json e = entry("07:00", 72.0);
  e["humidity_pct"] = "N/A";
  auto obs = parse_history_document(
      day_document("nashville", "2018-07-01", 0, json::array({e})), kNashville);
  REQUIRE(obs.size() == 1);
  CHECK(obs[0].timestamp.to_string() == "2018-07-01T07:00Z");
  CHECK(!obs[0].humidity_pct.has_value());
  CHECK(*obs[0].temp_f == 72.0);
}

TEST_CASE("out-of-band values are marked absent") {
  json e = entry("07:00", 72.0);
  e["humidity_pct"] = 150.0;
  e["pressure_inhg"] = 12.0;
  e["wind_mph"] = -3.0;
  auto obs = parse_history_document(
      day_document("nashville", "2018-07-01", 0, json::array({e})), kNashville);
  REQUIRE(obs.size() == 1);
  CHECK(!obs[0].humidity_pct.has_value());
  CHECK(!obs[0].pressure_inhg.has_value());
  CHECK(!obs[0].wind_mph.has_value());
}

TEST_CASE("utc offset shifts local readings onto utc hours") {
  // CST: local = UTC - 360 min, so 06:00 local is 12:00Z.
  auto obs = parse_history_document(
      day_document("nashville", "2018-07-01", -360, json::array({entry("06:00", 70.0)})),
      kNashville);
  REQUIRE(obs.size() == 1);
  CHECK(obs[0].timestamp.to_string() == "2018-07-01T12:00Z");
}

TEST_CASE("document error taxonomy") {
  CHECK_THROWS_AS(parse_history_document("{not json", kNashville), MalformedDocument);
  CHECK_THROWS_AS(parse_history_document("{\"city\":\"nashville\"}", kNashville),
                  MalformedDocument);
  CHECK_THROWS_AS(
      parse_history_document(day_document("memphis", "2018-07-01", 0, json::array()), kNashville),
      MalformedDocument);
  CHECK_THROWS_AS(
      parse_history_document(day_document("nashville", "2018-07-01", 0, json::array()),
                             kNashville),
      EmptyDocument);
}

TEST_CASE("write_canonical formats the documented schema") {
  std::ostringstream empty;
  CHECK(write_canonical({}, empty) == 0);
  CHECK(empty.str() == std::string(kCanonicalHeader) + "\n");

  RawObservation o;
  o.city = "nashville";
  o.timestamp = UtcHour::parse("2018-07-01T13:00Z");
  o.temp_f = 81.5;
  o.dewpoint_f = 65.0;
  o.pressure_inhg = 29.92;
  o.wind_mph = 4.0;
  o.wind_dir = "NW";
  o.condition = "Partly Cloudy";
  std::ostringstream one;
  CHECK(write_canonical({o}, one) == 1);
  CHECK(one.str() == std::string(kCanonicalHeader) +
                         "\n2018-07-01T13:00Z,nashville,81.5,65.0,,29.9,4.0,NW,Partly Cloudy\n");
}

TEST_CASE("canonical writes are deterministic and round-trip") {
  Rng rng = Rng::stream(3, "canon", 0);
  std::vector<RawObservation> obs;
  const char* cities[] = {"avon", "bram"};
  const char* dirs[] = {"N", "SW", "Calm", ""};
  for (int i = 0; i < 200; ++i) {
    RawObservation o;
    o.city = cities[rng.below(2)];
    o.timestamp = UtcHour::parse("2018-07-01T00:00Z").plus_hours(
        static_cast<std::int64_t>(rng.below(72)));
    if (rng.uniform() < 0.9)
      o.temp_f = static_cast<double>(rng.below(800)) / 10.0;
    if (rng.uniform() < 0.9)
      o.humidity_pct = static_cast<double>(rng.below(1000)) / 10.0;
    o.pressure_inhg = 25.0 + static_cast<double>(rng.below(100)) / 10.0;
    o.wind_mph = static_cast<double>(rng.below(300)) / 10.0;
    o.dewpoint_f = static_cast<double>(rng.below(600)) / 10.0;
    o.wind_dir = dirs[rng.below(4)];
    o.condition = "Clear";
    obs.push_back(o);
  }

  std::ostringstream a, b;
  write_canonical(obs, a);
  write_canonical(obs, b);
  CHECK(a.str() == b.str());

  std::istringstream in(a.str());
  auto back = read_canonical(in);
  auto expected = normalize_observations(obs);
  REQUIRE(back.size() == expected.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == expected[i]);

  // write(read(write(x))) is a fixed point
  std::ostringstream c;
  write_canonical(back, c);
  CHECK(c.str() == a.str());
}

TEST_CASE("read_canonical error taxonomy and sanity bands") {
  std::istringstream shuffled("city,timestamp_utc,temp_f\n");
  CHECK_THROWS_AS(read_canonical(shuffled), SchemaError);

  std::istringstream short_row(std::string(kCanonicalHeader) + "\n2018-07-01T00:00Z,avon\n");
  CHECK_THROWS_AS(read_canonical(short_row), SchemaError);

  std::istringstream bad_value(std::string(kCanonicalHeader) +
                               "\n2018-07-01T00:00Z,avon,abc,,,,,N,Clear\n");
  CHECK_THROWS_AS(read_canonical(bad_value), ValueError);
  try {
    std::istringstream again(std::string(kCanonicalHeader) +
                             "\n2018-07-01T00:00Z,avon,abc,,,,,N,Clear\n");
    read_canonical(again);
  } catch (const ValueError& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }

  // out-of-band field is kept as a row with that field invalid
  std::istringstream band(std::string(kCanonicalHeader) +
                          "\n2018-07-01T00:00Z,avon,70.0,60.0,150.0,29.9,4.0,N,Clear\n");
  auto obs = read_canonical(band);
  REQUIRE(obs.size() == 1);
  CHECK(!obs[0].humidity_pct.has_value());
  CHECK(*obs[0].temp_f == 70.0);
}

TEST_CASE("fixture client reads the fixture tree") {
  TempDir dir("fixtures");
  tempest::testing::spit(dir.path() / "nashville" / "2018-07-01.json",
                         day_document("nashville", "2018-07-01", 0,
                                      json::array({entry("00:00", 70.0)})));
  FixtureHistoryClient client(dir.path());
  auto doc = fetch_city_day(client, kNashville, CivilDate::parse("2018-07-01"));
  CHECK(doc.body.find("\"observations\"") != std::string::npos);
  CHECK_THROWS_AS(client.fetch(kNashville, CivilDate::parse("2018-07-02")), NotFound);
}

TEST_CASE("live client maps http statuses onto the error taxonomy") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Get(R"(/history/nashville/2018-07-01\.json)",
             [&](const httplib::Request&, httplib::Response& res) {
               res.set_content(day_document("nashville", "2018-07-01", 0,
                                            json::array({entry("00:00", 70.0)})),
                               "application/json");
             });
  server.Get(R"(/history/nashville/2018-07-03\.json)",
             [&](const httplib::Request&, httplib::Response& res) {
               hits.fetch_add(1);
               res.status = 429;
             });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread runner([&server]() { server.listen_after_bind(); });
  server.wait_until_ready();

  LiveClientOptions options;
  options.base_url = "http://127.0.0.1:" + std::to_string(port);
  options.max_retries = 2;
  options.retry_delay_ms = 1;
  LiveHistoryClient client(options);

  auto body = client.fetch(kNashville, CivilDate::parse("2018-07-01"));
  auto obs = parse_history_document(body, kNashville);
  CHECK(obs.size() == 1);

  CHECK_THROWS_AS(client.fetch(kNashville, CivilDate::parse("2018-07-02")), NotFound);
  CHECK_THROWS_AS(client.fetch(kNashville, CivilDate::parse("2018-07-03")), RateLimited);
  CHECK(hits.load() == 3);  // initial attempt + 2 retries

  server.stop();
  runner.join();
}

TEST_CASE("fetch_grid collects successes and failures deterministically") {
  TempDir dir("grid");
  std::vector<CityId> cities = {{"avon", 36.0, -98.0}, {"bram", 36.0, -96.0}};
  std::vector<CivilDate> dates = {CivilDate::parse("2018-07-01"), CivilDate::parse("2018-07-02")};
  for (const auto& c : cities) {
    tempest::testing::spit(dir.path() / c.name / "2018-07-01.json",
                           day_document(c.name, "2018-07-01", 0,
                                        json::array({entry("00:00", 70.0), entry("01:00", 71.0)})));
  }
  tempest::testing::spit(dir.path() / "avon" / "2018-07-02.json",
                         day_document("avon", "2018-07-02", 0,
                                      json::array({entry("00:00", 72.0)})));

  FixtureHistoryClient client(dir.path());
  FetchOptions options;
  options.parallelism = 3;
  auto report = fetch_grid(client, cities, dates, options);
  CHECK(report.observations.size() == 5);
  REQUIRE(report.failures.size() == 1);
  CHECK(report.failures[0].city == "bram");
  CHECK(report.failures[0].date.to_string() == "2018-07-02");
}

TEST_CASE("parsing never invents numeric values") {
  Rng rng = Rng::stream(17, "invent", 0);
  for (int rep = 0; rep < 30; ++rep) {
    std::set<double> inputs;
    json entries = json::array();
    int hours = 1 + static_cast<int>(rng.below(24));
    for (int h = 0; h < hours; ++h) {
      char hhmm[6];
      std::snprintf(hhmm, sizeof(hhmm), "%02d:%02d", h, static_cast<int>(rng.below(60)));
      json e;
      e["time_local"] = hhmm;
      const char* keys[] = {"temp_f", "dewpoint_f", "humidity_pct", "pressure_inhg", "wind_mph"};
      for (const char* key : keys) {
        double pick = rng.uniform();
        if (pick < 0.2) {
          e[key] = nullptr;
        } else if (pick < 0.3) {
          e[key] = "N/A";
        } else {
          double v = rng.uniform(-80.0, 160.0);  // some values violate the bands
          e[key] = v;
          inputs.insert(v);
        }
      }
      e["wind_dir"] = "N";
      e["condition"] = "Clear";
      entries.push_back(std::move(e));
    }
    auto obs = parse_history_document(day_document("nashville", "2018-07-01", 0, entries),
                                      kNashville);
    for (const auto& o : obs) {
      for (Feature f : kNumericFeatures) {
        auto v = o.numeric(f);
        if (v) CHECK(inputs.count(*v) == 1);
      }
    }
  }
}

TEST_CASE("fetch_grid honors the per-host minimum interval") {
  TempDir dir("ratelimit");
  std::vector<CityId> cities = {{"avon", 36.0, -98.0}};
  std::vector<CivilDate> dates;
  for (int d = 1; d <= 4; ++d)
    dates.push_back(CivilDate::parse("2018-07-0" + std::to_string(d)));
  for (const auto& date : dates) {
    tempest::testing::spit(dir.path() / "avon" / (date.to_string() + ".json"),
                           day_document("avon", date.to_string(), 0,
                                        json::array({entry("00:00", 70.0)})));
  }
  FixtureHistoryClient client(dir.path());
  FetchOptions options;
  options.parallelism = 4;
  options.min_interval_ms = 20;
  auto start = std::chrono::steady_clock::now();
  auto report = fetch_grid(client, cities, dates, options);
  auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                           start)
                     .count();
  CHECK(report.observations.size() == 4);
  CHECK(elapsed >= 60.0);  // four request starts spaced by at least 20 ms
}

TEST_CASE("fixture tree round-trips through the parser") {
  std::vector<CityId> cities = {{"avon", 36.0, -98.0}};
  std::vector<RawObservation> obs;
  for (int h = 0; h < 48; ++h) {
    RawObservation o;
    o.city = "avon";
    o.timestamp = UtcHour::parse("2018-07-01T00:00Z").plus_hours(h);
    o.temp_f = 70.0 + 0.25 * h;
    o.dewpoint_f = 58.5;
    o.humidity_pct = 61.0;
    o.pressure_inhg = 29.87;
    o.wind_mph = 5.5;
    o.wind_dir = "SW";
    o.condition = "Clear";
    obs.push_back(o);
  }
  TempDir dir("roundtrip");
  write_fixture_tree(obs, cities, -360, dir.path());

  FixtureHistoryClient client(dir.path());
  std::vector<RawObservation> back;
  // 48 UTC hours under CST span three local calendar days.
  for (const char* day : {"2018-06-30", "2018-07-01", "2018-07-02"}) {
    auto doc = fetch_city_day(client, cities[0], CivilDate::parse(day));
    auto parsed = parse_history_document(doc.body, cities[0]);
    back.insert(back.end(), parsed.begin(), parsed.end());
  }
  back = normalize_observations(back);
  REQUIRE(back.size() == obs.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == obs[i]);
}
