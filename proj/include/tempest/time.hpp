#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace tempest {

// Proleptic Gregorian calendar day. Conversions use the days-from-civil
// algorithm, valid far beyond any weather archive.
struct CivilDate {
  int year = 1970;
  unsigned month = 1;  // 1..12
  unsigned day = 1;    // 1..31

  static CivilDate parse(const std::string& text);  // "YYYY-MM-DD"
  static CivilDate from_days(std::int64_t days_since_epoch);
  std::int64_t days_since_epoch() const;
  CivilDate plus_days(std::int64_t n) const { return from_days(days_since_epoch() + n); }
  std::string to_string() const;
  bool valid() const;

  friend auto operator<=>(const CivilDate& a, const CivilDate& b) {
    return a.days_since_epoch() <=> b.days_since_epoch();
  }
  friend bool operator==(const CivilDate& a, const CivilDate& b) {
    return a.year == b.year && a.month == b.month && a.day == b.day;
  }
};

// A UTC instant truncated to the hour. Minute and second are zero by
// construction, which is exactly the RawObservation timestamp invariant.
class UtcHour {
 public:
  UtcHour() = default;
  UtcHour(CivilDate date, int hour_of_day);
  static UtcHour from_hours(std::int64_t hours_since_epoch) { return UtcHour(hours_since_epoch); }
  static UtcHour parse(const std::string& text);  // "YYYY-MM-DDTHH:00Z"

  std::int64_t hours_since_epoch() const { return hours_; }
  CivilDate date() const;
  int hour_of_day() const;
  std::string to_string() const;

  UtcHour plus_hours(std::int64_t n) const { return UtcHour(hours_ + n); }
  friend std::int64_t operator-(UtcHour a, UtcHour b) { return a.hours_ - b.hours_; }
  friend auto operator<=>(const UtcHour&, const UtcHour&) = default;

 private:
  explicit UtcHour(std::int64_t h) : hours_(h) {}
  std::int64_t hours_ = 0;
};

// Half-open day range [start, end).
struct DateRange {
  CivilDate start;
  CivilDate end;

  bool contains(CivilDate d) const { return start <= d && d < end; }
  std::int64_t days() const { return end.days_since_epoch() - start.days_since_epoch(); }
  bool overlaps(const DateRange& other) const {
    return start < other.end && other.start < end;
  }
};

}  // namespace tempest
