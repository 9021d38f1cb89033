#include <cmath>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "scenekit/csv.hpp"
#include "scenekit/errors.hpp"
#include "scenekit/timeutil.hpp"

using namespace scenekit;

TEST_SUITE_BEGIN("csv");

TEST_CASE("parses header and rows with line numbers") {
    auto table = csv::parse_text("a,b\n1,2\n\n3,4\n");
    CHECK(table.header == std::vector<std::string>{"a", "b"});
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0] == std::vector<std::string>{"1", "2"});
    CHECK(table.lines[0] == 2);
    CHECK(table.lines[1] == 4);  // blank line skipped, file line kept
}

TEST_CASE("strips CRLF line endings") {
    auto table = csv::parse_text("a,b\r\n1,2\r\n");
    CHECK(table.rows[0][1] == "2");
}

TEST_CASE("ragged row reports its line") {
    try {
        csv::parse_text("a,b\n1\n");
        FAIL("expected UnparseableRow");
    } catch (const Error& e) {
        CHECK(e.code() == errc::unparseable_row);
        CHECK(e.line() == 2);
    }
}

TEST_CASE("column_index rejects unknown columns") {
    auto table = csv::parse_text("a,b\n1,2\n");
    CHECK(csv::column_index(table, "b") == 1);
    CHECK_THROWS_AS((void)csv::column_index(table, "c"), Error);
}

TEST_CASE("parse_double accepts full fields only") {
    CHECK(csv::parse_double("2.5", 1) == 2.5);
    CHECK(csv::parse_double("-1e-3", 1) == -1e-3);
    CHECK_THROWS_AS((void)csv::parse_double("2.5x", 3), Error);
    CHECK_THROWS_AS((void)csv::parse_double("", 3), Error);
}

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 123456789.123456789, 0.0,
                     std::numeric_limits<double>::min()}) {
        CHECK(csv::parse_double(csv::format_double(v), 1) == v);
    }
    CHECK(csv::format_double(1.0) == "1");
    CHECK(csv::format_double(-0.5) == "-0.5");
}

TEST_CASE("table write then read is identity") {
    auto dir = testutil::fresh_dir("csv_roundtrip");
    std::vector<std::string> header = {"x", "y"};
    std::vector<std::vector<std::string>> rows = {{"1", "a"}, {"2", "b"}};
    csv::write_table(dir / "t.csv", header, rows);
    auto table = csv::read_table(dir / "t.csv");
    CHECK(table.header == header);
    CHECK(table.rows == rows);
}

TEST_CASE("fnv1a64 matches published vectors") {
    CHECK(csv::fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(csv::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(csv::fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(csv::hex64(0xcbf29ce484222325ULL) == "cbf29ce484222325");
}

TEST_CASE("missing file raises IoError") {
    CHECK_THROWS_AS((void)csv::read_table("/nonexistent/q.csv"), Error);
}

TEST_CASE("civil date conversions agree with known anchors") {
    CHECK(timeutil::days_from_civil(1970, 1, 1) == 0);
    CHECK(timeutil::days_from_civil(1970, 1, 2) == 1);
    CHECK(timeutil::days_from_civil(2000, 3, 1) == 11017);
    auto [y, m, d] = timeutil::civil_from_days(11017);
    CHECK(y == 2000);
    CHECK(m == 3);
    CHECK(d == 1);
    for (std::int64_t days : {-1000, 0, 59, 11016, 20000}) {
        auto [yy, mm, dd] = timeutil::civil_from_days(days);
        CHECK(timeutil::days_from_civil(yy, mm, dd) == days);
    }
}

TEST_CASE("date parsing validates calendar and shape") {
    CHECK(timeutil::parse_date("2004-02-29") == timeutil::days_from_civil(2004, 2, 29));
    CHECK_THROWS_AS((void)timeutil::parse_date("2003-02-29"), Error);
    CHECK_THROWS_AS((void)timeutil::parse_date("2003-2-9"), Error);
    CHECK_THROWS_AS((void)timeutil::parse_date("not-a-day"), Error);
}

TEST_CASE("instant parsing and formatting round-trip") {
    std::int64_t ts = timeutil::parse_instant("2012-07-06T05:38:44Z");
    CHECK(timeutil::format_instant(ts) == "2012-07-06T05:38:44Z");
    CHECK(timeutil::year_of_instant(ts) == 2012);
    CHECK_THROWS_AS((void)timeutil::parse_instant("2012-07-06 05:38:44"), Error);
    CHECK_THROWS_AS((void)timeutil::parse_instant("2012-07-06T25:00:00Z"), Error);
}

TEST_CASE("period indexing is consistent across lengths") {
    std::int64_t day = timeutil::days_from_civil(2010, 1, 1);
    std::int64_t q = timeutil::period_of_day(day, timeutil::PeriodLength::quarter);
    CHECK(q == 160);  // quarters since 1970
    CHECK(timeutil::period_label(q, timeutil::PeriodLength::quarter) == "2010Q1");
    CHECK(timeutil::period_label(q + 3, timeutil::PeriodLength::quarter) == "2010Q4");
    std::int64_t start = timeutil::period_start_seconds(q, timeutil::PeriodLength::quarter);
    CHECK(start == day * 86400);
    std::int64_t y = timeutil::period_of_day(day, timeutil::PeriodLength::year);
    CHECK(timeutil::period_label(y, timeutil::PeriodLength::year) == "2010");
    CHECK(timeutil::period_of_instant(start, timeutil::PeriodLength::quarter) == q);
    CHECK(timeutil::period_of_instant(start - 1, timeutil::PeriodLength::quarter) == q - 1);
}

TEST_SUITE_END();
