#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <vector>

#include "hurricast/common.hpp"
#include "hurricast/hurdat2.hpp"

namespace hurricast {

/// Per-year storm counts over a contiguous year range, zero-filled.
struct AnnualSeries {
    int start_year = 0;
    int end_year = 0;
    std::vector<int> counts; // one per year, inclusive

    int total() const {
        int t = 0;
        for (int c : counts) t += c;
        return t;
    }
};

inline AnnualSeries annual_counts(const std::vector<Storm>& storms, int start_year, int end_year) {
    if (start_year > end_year) throw DataError("annual_counts: start_year > end_year");
    AnnualSeries series;
    series.start_year = start_year;
    series.end_year = end_year;
    series.counts.assign(static_cast<std::size_t>(end_year - start_year + 1), 0);
    for (const auto& s : storms)
        if (s.id.year >= start_year && s.id.year <= end_year)
            ++series.counts[static_cast<std::size_t>(s.id.year - start_year)];
    return series;
}

/// Year range derived from the storm set itself.
inline AnnualSeries annual_counts(const std::vector<Storm>& storms) {
    if (storms.empty()) return {};
    int lo = storms.front().id.year, hi = lo;
    for (const auto& s : storms) {
        lo = std::min(lo, s.id.year);
        hi = std::max(hi, s.id.year);
    }
    return annual_counts(storms, lo, hi);
}

/// 12 bins, January first; month taken from each storm's first track point.
inline std::array<int, 12> monthly_histogram(const std::vector<Storm>& storms) {
    std::array<int, 12> bins{};
    for (const auto& s : storms) {
        if (s.points.empty()) throw DataError("monthly_histogram: storm with no points");
        ++bins[static_cast<std::size_t>(s.points.front().time.month - 1)];
    }
    return bins;
}

/// Joint probability mass of storm start points on a lat/lon grid. Cells are
/// half-open: cell (r, c) covers [lat0 + r*s, lat0 + (r+1)*s) by
/// [lon0 + c*s, lon0 + (c+1)*s). The origin is the global (-90, -180) corner
/// so cell edges land on multiples of the cell size.
struct StartPointGrid {
    double cell_size = 5.0;
    double origin_lat = -90.0;
    double origin_lon = -180.0;
    std::map<std::pair<int, int>, double> cells; // (row, col) -> probability mass

    double total_mass() const {
        double t = 0.0;
        for (const auto& [rc, m] : cells) t += m;
        return t;
    }
    /// Row marginal (over latitude bands): sums cells across columns.
    std::map<int, double> row_marginal() const {
        std::map<int, double> m;
        for (const auto& [rc, mass] : cells) m[rc.first] += mass;
        return m;
    }
    std::map<int, double> col_marginal() const {
        std::map<int, double> m;
        for (const auto& [rc, mass] : cells) m[rc.second] += mass;
        return m;
    }
};

inline StartPointGrid start_point_density(const std::vector<Storm>& storms, double cell_size = 5.0) {
    if (storms.empty()) throw DataError("start_point_density: empty storm set");
    if (cell_size <= 0.0) throw DataError("start_point_density: cell_size must be positive");
    StartPointGrid grid;
    grid.cell_size = cell_size;
    for (const auto& s : storms) {
        if (s.points.empty()) throw DataError("start_point_density: storm with no points");
        const auto& p = s.points.front();
        const int row = static_cast<int>(std::floor((p.latitude - grid.origin_lat) / cell_size));
        const int col = static_cast<int>(std::floor((p.longitude - grid.origin_lon) / cell_size));
        grid.cells[{row, col}] += 1.0;
    }
    const double n = static_cast<double>(storms.size());
    for (auto& [rc, mass] : grid.cells) mass /= n;
    return grid;
}

inline void write_annual_csv(const AnnualSeries& series, std::ostream& out) {
    out << "year,count\n";
    for (std::size_t i = 0; i < series.counts.size(); ++i)
        out << (series.start_year + static_cast<int>(i)) << ',' << series.counts[i] << '\n';
}

inline void write_monthly_csv(const std::array<int, 12>& bins, std::ostream& out) {
    out << "month,count\n";
    for (int m = 0; m < 12; ++m) out << (m + 1) << ',' << bins[static_cast<std::size_t>(m)] << '\n';
}

inline void write_density_csv(const StartPointGrid& grid, std::ostream& out) {
    out << "lat_bin,lon_bin,mass\n";
    char buf[96];
    for (const auto& [rc, mass] : grid.cells) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", rc.first, rc.second, mass);
        out << buf;
    }
}

} // namespace hurricast
