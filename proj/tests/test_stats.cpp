#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "hurricast/stats.hpp"

using namespace hurricast;

namespace {

Storm storm_starting(int year, int month, double lat, double lon) {
    static int counter = 1;
    Storm s;
    s.id = {"AL", (counter++ % 98) + 1, year};
    s.name = "TEST";
    TrackPoint p;
    p.time = {year, month, 5, 0, 0};
    p.status = "HU";
    p.latitude = lat;
    p.longitude = lon;
    s.points.push_back(p);
    TrackPoint q = p;
    q.time.hour = 6;
    q.latitude += 1.0;
    s.points.push_back(q);
    return s;
}

} // namespace

TEST_CASE("annual counts zero-fill an explicit range") {
    const auto series = annual_counts({}, 2000, 2002);
    CHECK(series.counts == std::vector<int>{0, 0, 0});
    CHECK(series.total() == 0);
}

TEST_CASE("annual counts partition the storm set") {
    std::vector<Storm> storms = {storm_starting(2000, 6, 10, -50), storm_starting(2000, 7, 11, -51),
                                 storm_starting(2002, 9, 12, -52)};
    const auto series = annual_counts(storms);
    CHECK(series.start_year == 2000);
    CHECK(series.end_year == 2002);
    CHECK(series.counts == std::vector<int>{2, 0, 1});
    CHECK(series.total() == static_cast<int>(storms.size()));
}

TEST_CASE("monthly histogram attributes by first-point month") {
    const auto bins = monthly_histogram({storm_starting(1900, 9, 20, -60)});
    CHECK(bins[8] == 1);
    int sum = 0;
    for (const int b : bins) sum += b;
    CHECK(sum == 1);
}

TEST_CASE("start-point density: single storm occupies one full-mass cell") {
    const auto grid = start_point_density({storm_starting(2000, 9, 13, -80)}, 5.0);
    REQUIRE(grid.cells.size() == 1);
    const auto& [rc, mass] = *grid.cells.begin();
    CHECK(mass == 1.0);
    // cell covers [10,15) x [-80,-75)
    CHECK(rc.first == 20);
    CHECK(rc.second == 20);
    CHECK_THROWS_AS(start_point_density({}, 5.0), DataError);
}

TEST_CASE("density mass and marginals normalize to 1") {
    std::vector<Storm> storms;
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> lat(5.0, 45.0), lon(-95.0, -15.0);
    for (int i = 0; i < 200; ++i)
        storms.push_back(storm_starting(2000, 8, lat(gen), lon(gen)));
    const auto grid = start_point_density(storms, 5.0);
    CHECK(std::abs(grid.total_mass() - 1.0) <= 1e-9);
    double row_sum = 0.0, col_sum = 0.0;
    for (const auto& [r, m] : grid.row_marginal()) row_sum += m;
    for (const auto& [c, m] : grid.col_marginal()) col_sum += m;
    CHECK(std::abs(row_sum - 1.0) <= 1e-9);
    CHECK(std::abs(col_sum - 1.0) <= 1e-9);
}

TEST_CASE("upper cell boundaries roll into the next cell") {
    const auto grid = start_point_density({storm_starting(2000, 9, 15.0, -75.0)}, 5.0);
    const auto& [rc, mass] = *grid.cells.begin();
    CHECK(rc.first == 21);  // 15.0 belongs to [15,20)
    CHECK(rc.second == 21); // -75.0 belongs to [-75,-70)
}

TEST_CASE("all three products are permutation-invariant") {
    std::vector<Storm> storms;
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> lat(5.0, 45.0), lon(-95.0, -15.0);
    std::uniform_int_distribution<int> month(1, 12), year(1990, 1999);
    for (int i = 0; i < 64; ++i)
        storms.push_back(storm_starting(year(gen), month(gen), lat(gen), lon(gen)));
    auto shuffled = storms;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);

    CHECK(annual_counts(storms, 1990, 1999).counts == annual_counts(shuffled, 1990, 1999).counts);
    CHECK(monthly_histogram(storms) == monthly_histogram(shuffled));
    CHECK(start_point_density(storms, 5.0).cells == start_point_density(shuffled, 5.0).cells);
}
