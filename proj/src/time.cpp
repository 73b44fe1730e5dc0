#include "tempest/time.hpp"

#include <charconv>
#include <cstdio>

#include "tempest/errors.hpp"

namespace tempest {

namespace {

// Howard Hinnant's civil-days algorithm.
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), m, d};
}

int parse_int_exact(const char* first, const char* last) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ValueError("invalid number in date/time field");
  return value;
}

}  // namespace

CivilDate CivilDate::parse(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    throw ValueError("expected YYYY-MM-DD, got '" + text + "'");
  CivilDate d;
  d.year = parse_int_exact(text.data(), text.data() + 4);
  d.month = static_cast<unsigned>(parse_int_exact(text.data() + 5, text.data() + 7));
  d.day = static_cast<unsigned>(parse_int_exact(text.data() + 8, text.data() + 10));
  if (!d.valid()) throw ValueError("invalid calendar day '" + text + "'");
  return d;
}

CivilDate CivilDate::from_days(std::int64_t days) { return civil_from_days(days); }

std::int64_t CivilDate::days_since_epoch() const { return days_from_civil(year, month, day); }

std::string CivilDate::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year, month, day);
  return buf;
}

bool CivilDate::valid() const {
  if (month < 1 || month > 12 || day < 1 || day > 31) return false;
  return civil_from_days(days_since_epoch()) == *this;
}

UtcHour::UtcHour(CivilDate date, int hour_of_day)
    : hours_(date.days_since_epoch() * 24 + hour_of_day) {}

UtcHour UtcHour::parse(const std::string& text) {
  // YYYY-MM-DDTHH:00Z
  if (text.size() != 17 || text[10] != 'T' || text[13] != ':' || text[14] != '0' ||
      text[15] != '0' || text[16] != 'Z')
    throw ValueError("expected YYYY-MM-DDTHH:00Z, got '" + text + "'");
  CivilDate d = CivilDate::parse(text.substr(0, 10));
  int h = parse_int_exact(text.data() + 11, text.data() + 13);
  if (h < 0 || h > 23) throw ValueError("hour out of range in '" + text + "'");
  return UtcHour(d, h);
}

CivilDate UtcHour::date() const {
  std::int64_t d = hours_ >= 0 ? hours_ / 24 : (hours_ - 23) / 24;
  return CivilDate::from_days(d);
}

int UtcHour::hour_of_day() const {
  std::int64_t h = hours_ % 24;
  if (h < 0) h += 24;
  return static_cast<int>(h);
}

std::string UtcHour::to_string() const {
  char buf[24];
  CivilDate d = date();
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:00Z", d.year, d.month, d.day,
                hour_of_day());
  return buf;
}

}  // namespace tempest
