#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <unordered_set>
#include <vector>

#include "hurricast/common.hpp"
#include "hurricast/hurdat2.hpp"
#include "hurricast/trackprep.hpp"

namespace hurricast {

/// Atlantic-basin defaults: 0-60N, 100W-0, half-open on the upper edges.
struct GridBounds {
    double lat_min = 0.0;
    double lat_max = 60.0;
    double lon_min = -100.0;
    double lon_max = 0.0;

    bool operator==(const GridBounds&) const = default;

    bool contains(double lat, double lon) const {
        return lat >= lat_min && lat < lat_max && lon >= lon_min && lon < lon_max;
    }
};

enum class CoverageWeighting { StormCount, IntensityWeighted };

/// Per-cell storm-touch counts over a fixed lat/lon raster. Row 0 is the
/// southernmost band; column 0 the westernmost. A storm increments a cell at
/// most once (weight 1, or 1/min_pressure in intensity mode).
struct CoverageGrid {
    double cell_size = 0.5;
    GridBounds bounds;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> counts; // row-major

    double at(std::size_t row, std::size_t col) const { return counts[row * n_cols + col]; }

    bool same_shape(const CoverageGrid& other) const {
        return cell_size == other.cell_size && bounds == other.bounds &&
               n_rows == other.n_rows && n_cols == other.n_cols;
    }

    double lat_center(std::size_t row) const {
        return bounds.lat_min + (static_cast<double>(row) + 0.5) * cell_size;
    }
    double lon_center(std::size_t col) const {
        return bounds.lon_min + (static_cast<double>(col) + 0.5) * cell_size;
    }
};

namespace detail {

/// Visit every cell a segment crosses (grid coordinates, already in-bounds).
/// Exact corner crossings visit both side cells so the traversal is
/// symmetric under direction reversal.
template <typename Visit>
inline void traverse_segment(double u0, double v0, double u1, double v1, Visit&& visit) {
    long r = static_cast<long>(std::floor(u0));
    long c = static_cast<long>(std::floor(v0));
    const long r1 = static_cast<long>(std::floor(u1));
    const long c1 = static_cast<long>(std::floor(v1));
    visit(r, c);
    const double du = u1 - u0;
    const double dv = v1 - v0;
    const long step_r = du > 0 ? 1 : -1;
    const long step_c = dv > 0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    double t_max_r = inf, t_delta_r = inf;
    if (du != 0.0) {
        const double edge = static_cast<double>(r + (step_r > 0 ? 1 : 0));
        t_max_r = (edge - u0) / du;
        t_delta_r = static_cast<double>(step_r) / du;
    }
    double t_max_c = inf, t_delta_c = inf;
    if (dv != 0.0) {
        const double edge = static_cast<double>(c + (step_c > 0 ? 1 : 0));
        t_max_c = (edge - v0) / dv;
        t_delta_c = static_cast<double>(step_c) / dv;
    }
    long guard = std::labs(r1 - r) + std::labs(c1 - c) + 4;
    while ((r != r1 || c != c1) && guard-- > 0) {
        if (t_max_r < t_max_c) {
            r += step_r;
            t_max_r += t_delta_r;
        } else if (t_max_c < t_max_r) {
            c += step_c;
            t_max_c += t_delta_c;
        } else {
            // exact corner: include both side cells, then cross diagonally
            visit(r + step_r, c);
            visit(r, c + step_c);
            r += step_r;
            c += step_c;
            t_max_r += t_delta_r;
            t_max_c += t_delta_c;
        }
        visit(r, c);
    }
}

} // namespace detail

struct RasterizeResult {
    CoverageGrid grid;
    std::size_t skipped_points = 0; // outside the grid bounds
};

/// Rasterize raw-coordinate tracks. Each consecutive in-bounds point pair is
/// traversed as a line segment visiting every cell it crosses; the union of
/// visited cells per storm increments counts once each.
inline RasterizeResult rasterize(const std::vector<std::vector<TrackSample>>& tracks,
                                 double cell_size = 0.5, const GridBounds& bounds = {},
                                 CoverageWeighting weighting = CoverageWeighting::StormCount) {
    if (cell_size <= 0.0) throw DataError("rasterize: cell_size must be positive");
    if (bounds.lat_min >= bounds.lat_max || bounds.lon_min >= bounds.lon_max)
        throw DataError("rasterize: inverted bounds");

    RasterizeResult result;
    auto& grid = result.grid;
    grid.cell_size = cell_size;
    grid.bounds = bounds;
    grid.n_rows = static_cast<std::size_t>(std::ceil((bounds.lat_max - bounds.lat_min) / cell_size));
    grid.n_cols = static_cast<std::size_t>(std::ceil((bounds.lon_max - bounds.lon_min) / cell_size));
    grid.counts.assign(grid.n_rows * grid.n_cols, 0.0);

    std::unordered_set<long> visited;
    for (const auto& track : tracks) {
        visited.clear();
        const auto visit = [&](long r, long c) {
            if (r < 0 || c < 0 || r >= static_cast<long>(grid.n_rows) ||
                c >= static_cast<long>(grid.n_cols))
                return;
            visited.insert(r * static_cast<long>(grid.n_cols) + c);
        };
        const auto to_u = [&](double lat) { return (lat - bounds.lat_min) / cell_size; };
        const auto to_v = [&](double lon) { return (lon - bounds.lon_min) / cell_size; };

        for (std::size_t i = 0; i < track.size(); ++i) {
            const bool in_i = bounds.contains(track[i][0], track[i][1]);
            if (!in_i) {
                ++result.skipped_points;
                continue;
            }
            visit(static_cast<long>(std::floor(to_u(track[i][0]))),
                  static_cast<long>(std::floor(to_v(track[i][1]))));
            if (i + 1 < track.size() && bounds.contains(track[i + 1][0], track[i + 1][1]))
                detail::traverse_segment(to_u(track[i][0]), to_v(track[i][1]),
                                         to_u(track[i + 1][0]), to_v(track[i + 1][1]), visit);
        }

        double weight = 1.0;
        if (weighting == CoverageWeighting::IntensityWeighted) {
            double min_pressure = kFallbackPressure;
            for (const auto& sample : track) min_pressure = std::min(min_pressure, sample[2]);
            weight = 1.0 / min_pressure;
        }
        for (const long key : visited) grid.counts[static_cast<std::size_t>(key)] += weight;
    }
    return result;
}

inline std::vector<TrackSample> storm_samples(const Storm& storm) {
    std::vector<TrackSample> out;
    out.reserve(storm.points.size());
    for (const auto& p : storm.points)
        out.push_back({p.latitude, p.longitude,
                       static_cast<double>(p.min_pressure.value_or(
                           static_cast<int>(kFallbackPressure)))});
    return out;
}

inline std::vector<std::vector<TrackSample>> storm_tracks(const std::vector<Storm>& storms) {
    std::vector<std::vector<TrackSample>> out;
    out.reserve(storms.size());
    for (const auto& s : storms) out.push_back(storm_samples(s));
    return out;
}

/// Historical-vs-synthetic coverage metrics over the union of touched cells;
/// the all-cells Pearson (zeros included) is reported separately.
struct ComparisonReport {
    double pearson_union = 0.0;
    double pearson_all = 0.0;
    double nrmse = 0.0;             // RMSE over union cells / max historical count
    double cells_touched_ratio = 0.0; // synthetic / historical
    double top_decile_overlap = 0.0;
    std::size_t union_cells = 0;
};

namespace detail {

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    if (n == 0) return 0.0;
    const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
    const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - mean_a;
        const double db = b[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) return a == b ? 1.0 : 0.0;
    return cov / std::sqrt(var_a * var_b);
}

} // namespace detail

inline ComparisonReport compare(const CoverageGrid& historical, const CoverageGrid& synthetic) {
    if (!historical.same_shape(synthetic))
        throw DataError("compare: grid shapes (cell size, bounds) do not match");

    ComparisonReport report;
    std::vector<std::size_t> touched_h, touched_s, united;
    for (std::size_t i = 0; i < historical.counts.size(); ++i) {
        const bool h = historical.counts[i] > 0.0;
        const bool s = synthetic.counts[i] > 0.0;
        if (h) touched_h.push_back(i);
        if (s) touched_s.push_back(i);
        if (h || s) united.push_back(i);
    }
    report.union_cells = united.size();

    std::vector<double> hv, sv;
    hv.reserve(united.size());
    sv.reserve(united.size());
    for (const auto i : united) {
        hv.push_back(historical.counts[i]);
        sv.push_back(synthetic.counts[i]);
    }
    report.pearson_union = detail::pearson(hv, sv);
    report.pearson_all = detail::pearson(historical.counts, synthetic.counts);

    const double max_h = historical.counts.empty()
                             ? 0.0
                             : *std::max_element(historical.counts.begin(), historical.counts.end());
    double sq = 0.0;
    for (std::size_t i = 0; i < united.size(); ++i) {
        const double d = hv[i] - sv[i];
        sq += d * d;
    }
    const double rmse = united.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(united.size()));
    report.nrmse = max_h > 0.0 ? rmse / max_h
                               : (rmse == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());

    report.cells_touched_ratio =
        touched_h.empty()
            ? (touched_s.empty() ? 1.0 : std::numeric_limits<double>::infinity())
            : static_cast<double>(touched_s.size()) / static_cast<double>(touched_h.size());

    if (!touched_h.empty()) {
        const std::size_t k = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(touched_h.size()))));
        const auto top_cells = [&](const CoverageGrid& grid, const std::vector<std::size_t>& touched) {
            std::vector<std::size_t> order = touched;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (grid.counts[a] != grid.counts[b]) return grid.counts[a] > grid.counts[b];
                return a < b;
            });
            order.resize(std::min(k, order.size()));
            return std::unordered_set<std::size_t>(order.begin(), order.end());
        };
        const auto top_h = top_cells(historical, touched_h);
        const auto top_s = top_cells(synthetic, touched_s);
        std::size_t shared = 0;
        for (const auto i : top_h) shared += top_s.count(i);
        report.top_decile_overlap = static_cast<double>(shared) / static_cast<double>(k);
    }
    return report;
}

/// Sparse CSV of non-zero cells.
inline void write_grid_csv(const CoverageGrid& grid, std::ostream& out) {
    out << "lat_index,lon_index,lat_center,lon_center,count\n";
    char buf[128];
    for (std::size_t r = 0; r < grid.n_rows; ++r)
        for (std::size_t c = 0; c < grid.n_cols; ++c) {
            const double v = grid.at(r, c);
            if (v == 0.0) continue;
            std::snprintf(buf, sizeof(buf), "%zu,%zu,%.4f,%.4f,%.17g\n", r, c, grid.lat_center(r),
                          grid.lon_center(c), v);
            out << buf;
        }
}

/// Dense matrix dump for external plotting: one row per latitude band
/// (south to north), columns west to east.
inline void write_grid_matrix(const CoverageGrid& grid, std::ostream& out) {
    char buf[40];
    for (std::size_t r = 0; r < grid.n_rows; ++r) {
        for (std::size_t c = 0; c < grid.n_cols; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", grid.at(r, c));
            out << buf << (c + 1 == grid.n_cols ? '\n' : ' ');
        }
    }
}

inline void write_report(const ComparisonReport& report, std::ostream& out) {
    char buf[64];
    const auto kv = [&](const char* key, double value) {
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        out << key << " = " << buf << '\n';
    };
    kv("pearson_union", report.pearson_union);
    kv("pearson_all", report.pearson_all);
    kv("nrmse", report.nrmse);
    kv("cells_touched_ratio", report.cells_touched_ratio);
    kv("top_decile_overlap", report.top_decile_overlap);
    out << "union_cells = " << report.union_cells << '\n';
}

} // namespace hurricast
