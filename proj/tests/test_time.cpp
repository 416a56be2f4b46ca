#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "leodet/time.hpp"

using namespace leodet;

TEST_CASE("iso round trip") {
  CHECK(iso_to_unix("1970-01-01T00:00:00Z") == 0.0);
  CHECK(iso_to_unix("1970-01-02T00:00:00Z") == 86400.0);
  CHECK(iso_to_unix("2020-08-18T00:00:00Z") == 1597708800.0);
  CHECK(unix_to_iso(1597708800.0) == "2020-08-18T00:00:00.000Z");
  CHECK(unix_to_iso(1597708800.1234) == "2020-08-18T00:00:00.123Z");

  const double t = iso_to_unix("2015-07-08T16:00:00.250Z");
  CHECK(unix_to_iso(t) == "2015-07-08T16:00:00.250Z");
}

TEST_CASE("pre-epoch dates") {
  CHECK(iso_to_unix("1969-12-31T00:00:00Z") == -86400.0);
  CHECK(unix_to_iso(-86400.0) == "1969-12-31T00:00:00.000Z");
}

TEST_CASE("time scale maps relative epochs") {
  const TimeScale ts("2020-08-18T00:00:00Z");
  CHECK(ts.to_epoch("2020-08-18T00:10:00Z") == doctest::Approx(600.0));
  CHECK(ts.to_iso(600.0) == "2020-08-18T00:10:00.000Z");
  CHECK(ts.to_iso(-1.5) == "2020-08-17T23:59:58.500Z");
}

TEST_CASE("leap year handling") {
  const double feb28 = iso_to_unix("2020-02-28T12:00:00Z");
  const double mar01 = iso_to_unix("2020-03-01T12:00:00Z");
  CHECK(mar01 - feb28 == 2 * 86400.0);
}

TEST_CASE("rejects malformed input") {
  CHECK_THROWS(iso_to_unix("not a date"));
  CHECK_THROWS(iso_to_unix("2020-13-01T00:00:00Z"));
}
