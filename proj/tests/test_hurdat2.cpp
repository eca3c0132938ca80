#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "hurricast/hurdat2.hpp"

using namespace hurricast;

namespace {

const char* kIreneSample =
    "AL092011,              IRENE,      3,\n"
    "20110821, 0000,  , TS, 15.0N,  59.0W,  45, 1006,  105,    0,    0,  120,    0,    0,"
    "    0,    0,    0,    0,    0,    0,\n"
    "20110821, 0600,  , TS, 16.0N,  60.5W,  45, 1006,  115,    0,    0,  120,    0,    0,"
    "    0,    0,    0,    0,    0,    0,\n"
    "20110821, 1200,  , TS, 16.8N,  62.2W,  50, 1005,  115,    0,    0,  120,    0,    0,"
    "    0,    0,    0,    0,    0,    0,\n";

std::vector<Storm> parse_text(const std::string& text) {
    std::istringstream in(text);
    return parse_archive(in);
}

} // namespace

TEST_CASE("storm id round-trips the 8-character form") {
    const auto id = StormId::parse("AL092011", 1);
    CHECK(id.basin == "AL");
    CHECK(id.cyclone_number == 9);
    CHECK(id.year == 2011);
    CHECK(id.to_string() == "AL092011");
    CHECK_THROWS_AS(StormId::parse("XX0Y2011", 1), ParseError);
    CHECK_THROWS_AS(StormId::parse("AL091754", 1), ParseError);
}

TEST_CASE("data line decodes per the format definition") {
    const auto storms = parse_text(kIreneSample);
    REQUIRE(storms.size() == 1);
    const auto& storm = storms[0];
    CHECK(storm.id.to_string() == "AL092011");
    CHECK(storm.name == "IRENE");
    REQUIRE(storm.points.size() == 3);
    const auto& p = storm.points[0];
    CHECK(p.time.year == 2011);
    CHECK(p.time.month == 8);
    CHECK(p.time.day == 21);
    CHECK(p.time.hour == 0);
    CHECK(p.status == "TS");
    CHECK(p.latitude == 15.0);
    CHECK(p.longitude == -59.0);
    CHECK(p.max_wind == 45);
    CHECK(p.min_pressure == 1006);
    CHECK(p.extras.size() == 12);
}

TEST_CASE("empty input parses to an empty list") {
    CHECK(parse_text("").empty());
    CHECK(parse_text("\n  \n").empty());
}

TEST_CASE("sentinel wind and pressure map to missing") {
    const std::string text =
        "AL011851,            UNNAMED,      1,\n"
        "18510625, 0000,  , HU, 28.0N,  94.8W, -99, -999, -999, -999, -999, -999, -999, -999,"
        " -999, -999, -999, -999, -999, -999,\n";
    const auto storms = parse_text(text);
    REQUIRE(storms.size() == 1);
    CHECK_FALSE(storms[0].points[0].max_wind.has_value());
    CHECK_FALSE(storms[0].points[0].min_pressure.has_value());
}

TEST_CASE("malformed header reports the line number") {
    try {
        parse_text("AL092011, IRENE, 39, EXTRA, FIELDS,\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(std::string(e.what()).find("header") != std::string::npos);
    }
}

TEST_CASE("count mismatch is a structural error naming the storm") {
    const std::string text =
        "AL092011,              IRENE,      5,\n"
        "20110821, 0000,  , TS, 15.0N,  59.0W,  45, 1006,    0,    0,    0,    0,    0,    0,"
        "    0,    0,    0,    0,    0,    0,\n"
        "AL102011,            UNNAMED,      1,\n";
    try {
        parse_text(text);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("AL092011") != std::string::npos);
    }
}

TEST_CASE("unparseable coordinate carries line and column context") {
    const std::string text =
        "AL092011,              IRENE,      1,\n"
        "20110821, 0000,  , TS, 15.0X,  59.0W,  45, 1006,    0,    0,    0,    0,    0,    0,"
        "    0,    0,    0,    0,    0,    0,\n";
    try {
        parse_text(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.column > 0);
    }
}

TEST_CASE("wrong data field count is rejected") {
    const std::string text =
        "AL092011,              IRENE,      1,\n"
        "20110821, 0000,  , TS, 15.0N,  59.0W,  45, 1006,    0,\n";
    CHECK_THROWS_AS(parse_text(text), ParseError);
}

TEST_CASE("fixture archive parses and round-trips to identical values") {
    const auto storms = parse_archive_file(std::string(HURRICAST_TEST_DATA_DIR) + "/fixture_50.txt");
    REQUIRE(storms.size() == 50);
    for (const auto& s : storms) {
        REQUIRE_FALSE(s.points.empty());
        for (const auto& p : s.points) {
            CHECK(p.latitude >= -90.0);
            CHECK(p.latitude <= 90.0);
            CHECK(p.longitude >= -180.0);
            CHECK(p.longitude <= 180.0);
        }
    }
    const auto text = serialize_archive(storms);
    std::istringstream in(text);
    const auto reparsed = parse_archive(in);
    REQUIRE(reparsed.size() == storms.size());
    CHECK(reparsed == storms);
}

TEST_CASE("post-2021 RMW column is retained opaquely and round-trips") {
    const auto storms = parse_archive_file(std::string(HURRICAST_TEST_DATA_DIR) + "/fixture_rmw.txt");
    REQUIRE(storms.size() == 2);
    CHECK(storms[0].points[0].extras.size() == 13);
    const auto text = serialize_archive(storms);
    std::istringstream in(text);
    CHECK(parse_archive(in) == storms);
}

TEST_CASE("filter_hurricanes selects status-HU storms in the year window") {
    const auto storms = parse_archive_file(std::string(HURRICAST_TEST_DATA_DIR) + "/fixture_50.txt");
    const auto all = filter_hurricanes(storms, 1851, 2100);
    CHECK(all.size() == storms.size()); // fixture was carved from hurricanes only

    const auto eval = filter_hurricanes(storms, 2011, 2012);
    CHECK(eval.size() == 17);
    for (const auto& s : eval) {
        CHECK(s.id.year >= 2011);
        CHECK(s.id.year <= 2012);
    }

    CHECK(filter_hurricanes(storms, 3000, 3000).empty());
    CHECK_THROWS_AS(filter_hurricanes(storms, 2012, 2011), DataError);
}

TEST_CASE("filter output is an order-preserving subsequence") {
    const auto storms = parse_archive_file(std::string(HURRICAST_TEST_DATA_DIR) + "/fixture_50.txt");
    const auto picked = filter_hurricanes(storms, 2002, 2011);
    std::size_t cursor = 0;
    for (const auto& s : picked) {
        while (cursor < storms.size() && !(storms[cursor] == s)) ++cursor;
        REQUIRE(cursor < storms.size()); // found, in order
        ++cursor;
    }
}

TEST_CASE("filter options support status sets and wind thresholds") {
    const auto storms = parse_archive_file(std::string(HURRICAST_TEST_DATA_DIR) + "/fixture_50.txt");
    FilterOptions any_status;
    any_status.statuses.clear();
    CHECK(filter_hurricanes(storms, 1851, 2100, any_status).size() == storms.size());

    FilterOptions strong;
    strong.statuses.clear();
    strong.min_peak_wind = 120;
    const auto majors = filter_hurricanes(storms, 1851, 2100, strong);
    CHECK(majors.size() < storms.size());
    for (const auto& s : majors) {
        bool found = false;
        for (const auto& p : s.points) found = found || (p.max_wind && *p.max_wind >= 120);
        CHECK(found);
    }
}
