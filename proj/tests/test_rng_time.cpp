#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "tempest/errors.hpp"
#include "tempest/rng.hpp"
#include "tempest/time.hpp"

using namespace tempest;

TEST_CASE("civil date round trip and arithmetic") {
  CivilDate d = CivilDate::parse("2018-09-01");
  CHECK(d.year == 2018);
  CHECK(d.month == 9);
  CHECK(d.day == 1);
  CHECK(d.to_string() == "2018-09-01");
  CHECK(CivilDate::from_days(d.days_since_epoch()) == d);
  CHECK(d.plus_days(7).to_string() == "2018-09-08");
  CHECK(d.plus_days(-62).to_string() == "2018-07-01");
  CHECK(CivilDate{1970, 1, 1}.days_since_epoch() == 0);

  CHECK_THROWS_AS(CivilDate::parse("2018-13-01"), ValueError);
  CHECK_THROWS_AS(CivilDate::parse("2018-02-30"), ValueError);
  CHECK_THROWS_AS(CivilDate::parse("18-02-03"), ValueError);
  CHECK(CivilDate::parse("2020-02-29").valid());  // leap day
}

TEST_CASE("utc hour parse, format, arithmetic") {
  UtcHour t = UtcHour::parse("2018-09-01T13:00Z");
  CHECK(t.to_string() == "2018-09-01T13:00Z");
  CHECK(t.hour_of_day() == 13);
  CHECK(t.date() == CivilDate::parse("2018-09-01"));
  CHECK(t.plus_hours(24).to_string() == "2018-09-02T13:00Z");
  CHECK(t.plus_hours(11).to_string() == "2018-09-02T00:00Z");
  CHECK(t.plus_hours(24) - t == 24);

  CHECK_THROWS_AS(UtcHour::parse("2018-09-01T13:30Z"), ValueError);
  CHECK_THROWS_AS(UtcHour::parse("2018-09-01 13:00Z"), ValueError);
  CHECK_THROWS_AS(UtcHour::parse("2018-09-01T25:00Z"), ValueError);
}

TEST_CASE("date ranges") {
  DateRange a{CivilDate::parse("2018-07-01"), CivilDate::parse("2018-09-01")};
  DateRange b{CivilDate::parse("2018-09-01"), CivilDate::parse("2018-09-08")};
  CHECK(a.days() == 62);
  CHECK(b.days() == 7);
  CHECK(!a.overlaps(b));
  CHECK(a.contains(CivilDate::parse("2018-08-31")));
  CHECK(!a.contains(CivilDate::parse("2018-09-01")));
  DateRange c{CivilDate::parse("2018-08-31"), CivilDate::parse("2018-09-02")};
  CHECK(a.overlaps(c));
  CHECK(b.overlaps(c));
}

TEST_CASE("rng streams are deterministic and independent") {
  Rng a = Rng::stream(42, "tree", 3);
  Rng b = Rng::stream(42, "tree", 3);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());

  Rng c = Rng::stream(42, "tree", 4);
  Rng d = Rng::stream(43, "tree", 3);
  Rng e = Rng::stream(42, "eert", 3);
  std::set<std::uint64_t> firsts = {Rng::stream(42, "tree", 3).next(), c.next(), d.next(),
                                    e.next()};
  CHECK(firsts.size() == 4);
}

TEST_CASE("rng uniform and below stay in range") {
  Rng r = Rng::stream(1, "u", 0);
  for (int i = 0; i < 1000; ++i) {
    double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    auto k = r.below(7);
    CHECK(k < 7);
  }
  // below() hits every residue eventually
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 200; ++i) seen.insert(r.below(5));
  CHECK(seen.size() == 5);
}

TEST_CASE("rng shuffle is a permutation") {
  Rng r = Rng::stream(9, "shuffle", 0);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
  auto w = v;
  r.shuffle(w.begin(), w.end());
  CHECK(w != v);  // astronomically unlikely to be identity
  std::multiset<int> sv(v.begin(), v.end()), sw(w.begin(), w.end());
  CHECK(sv == sw);
}
