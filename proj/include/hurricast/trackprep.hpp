#pragma once

#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "hurricast/common.hpp"
#include "hurricast/hurdat2.hpp"

namespace hurricast {

/// (latitude, longitude, min_pressure) triple in raw units.
using TrackSample = std::array<double, 3>;

constexpr int kResamplePoints = 20;
constexpr double kFallbackPressure = 1010.0; // ambient, used when a track has no pressure at all

/// Resample a storm track to `n_points` samples at equal arc-length steps
/// along the piecewise-linear lat/lon polyline. Arc length is measured in
/// flat lat/lon degrees. Pressure is interpolated along the same parameter;
/// missing pressures are filled from the nearest valid neighbors first.
inline std::vector<TrackSample> resample_track(const Storm& storm, int n_points = kResamplePoints) {
    if (n_points < 2) throw DataError("resample_track: n_points must be >= 2");
    const auto& pts = storm.points;
    if (pts.size() < 2)
        throw DataError("resample_track: storm " + storm.id.to_string() +
                        " has fewer than 2 points");

    const std::size_t n = pts.size();
    std::vector<double> arc(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        const double dlat = pts[i].latitude - pts[i - 1].latitude;
        const double dlon = pts[i].longitude - pts[i - 1].longitude;
        arc[i] = arc[i - 1] + std::hypot(dlat, dlon);
    }
    const double total = arc.back();

    // Fill missing pressures by linear interpolation in the arc-length
    // coordinate, extending the first/last valid value at the track ends.
    std::vector<double> pressure(n);
    {
        std::vector<std::size_t> valid;
        for (std::size_t i = 0; i < n; ++i)
            if (pts[i].min_pressure) valid.push_back(i);
        if (valid.empty()) {
            for (auto& p : pressure) p = kFallbackPressure;
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                if (pts[i].min_pressure) {
                    pressure[i] = static_cast<double>(*pts[i].min_pressure);
                    continue;
                }
                auto next = std::lower_bound(valid.begin(), valid.end(), i);
                if (next == valid.begin()) {
                    pressure[i] = static_cast<double>(*pts[valid.front()].min_pressure);
                } else if (next == valid.end()) {
                    pressure[i] = static_cast<double>(*pts[valid.back()].min_pressure);
                } else {
                    const std::size_t hi = *next;
                    const std::size_t lo = *(next - 1);
                    const double p_lo = static_cast<double>(*pts[lo].min_pressure);
                    const double p_hi = static_cast<double>(*pts[hi].min_pressure);
                    const double span = arc[hi] - arc[lo];
                    const double t = span > 0.0 ? (arc[i] - arc[lo]) / span
                                                : static_cast<double>(i - lo) / (hi - lo);
                    pressure[i] = p_lo + t * (p_hi - p_lo);
                }
            }
        }
    }

    std::vector<TrackSample> out(static_cast<std::size_t>(n_points));
    if (total == 0.0) {
        for (auto& s : out) s = {pts[0].latitude, pts[0].longitude, pressure[0]};
        return out;
    }

    std::size_t seg = 0;
    for (int k = 0; k < n_points; ++k) {
        if (k == 0) {
            out[0] = {pts[0].latitude, pts[0].longitude, pressure[0]};
            continue;
        }
        if (k == n_points - 1) {
            out[k] = {pts[n - 1].latitude, pts[n - 1].longitude, pressure[n - 1]};
            continue;
        }
        const double target = total * static_cast<double>(k) / (n_points - 1);
        while (seg + 1 < n - 1 && arc[seg + 1] < target) ++seg;
        const double span = arc[seg + 1] - arc[seg];
        const double t = span > 0.0 ? (target - arc[seg]) / span : 0.0;
        out[k] = {pts[seg].latitude + t * (pts[seg + 1].latitude - pts[seg].latitude),
                  pts[seg].longitude + t * (pts[seg + 1].longitude - pts[seg].longitude),
                  pressure[seg] + t * (pressure[seg + 1] - pressure[seg])};
    }
    return out;
}

/// Per-feature min-max ranges fitted on a training corpus. The inverse map
/// is exact for values that were not clamped on the forward pass.
struct FeatureScaler {
    std::array<double, 3> min{};
    std::array<double, 3> max{};

    double forward(double x, int feature) const {
        return (x - min[feature]) / (max[feature] - min[feature]);
    }
    double inverse(double y, int feature) const {
        return min[feature] + y * (max[feature] - min[feature]);
    }
};

inline FeatureScaler fit_scaler(const std::vector<std::vector<TrackSample>>& tracks) {
    if (tracks.empty()) throw DataError("fit_scaler: empty corpus");
    FeatureScaler s;
    s.min.fill(std::numeric_limits<double>::infinity());
    s.max.fill(-std::numeric_limits<double>::infinity());
    for (const auto& track : tracks)
        for (const auto& sample : track)
            for (int f = 0; f < 3; ++f) {
                s.min[f] = std::min(s.min[f], sample[f]);
                s.max[f] = std::max(s.max[f], sample[f]);
            }
    constexpr double kEpsilon = 1e-6;
    for (int f = 0; f < 3; ++f) {
        if (s.max[f] <= s.min[f]) {
            s.min[f] -= kEpsilon / 2;
            s.max[f] += kEpsilon / 2;
        }
    }
    return s;
}

/// Fixed-length scaled feature vector for one storm: n points by 3 features,
/// flattened row-major (lat, lon, pressure per point), every value in [0, 1].
struct NormalizedTrack {
    std::string storm_id;
    std::vector<double> values; // n_points * 3

    std::size_t n_points() const { return values.size() / 3; }
};

struct ScaleResult {
    NormalizedTrack track;
    int clamped = 0; // count of values outside the fitted range, clamped to [0,1]
};

inline ScaleResult apply_scaler(const std::string& storm_id,
                                const std::vector<TrackSample>& samples,
                                const FeatureScaler& scaler) {
    ScaleResult result;
    result.track.storm_id = storm_id;
    result.track.values.reserve(samples.size() * 3);
    for (const auto& sample : samples)
        for (int f = 0; f < 3; ++f) {
            double y = scaler.forward(sample[f], f);
            if (y < 0.0 || y > 1.0) {
                y = std::clamp(y, 0.0, 1.0);
                ++result.clamped;
            }
            result.track.values.push_back(y);
        }
    return result;
}

inline std::vector<TrackSample> invert_scaler(const NormalizedTrack& track,
                                              const FeatureScaler& scaler) {
    std::vector<TrackSample> out(track.n_points());
    for (std::size_t i = 0; i < out.size(); ++i)
        for (int f = 0; f < 3; ++f)
            out[i][f] = scaler.inverse(track.values[i * 3 + f], f);
    return out;
}

/// CSV: one row per point, columns storm_id, index, lat_scaled, lon_scaled, pres_scaled.
inline void write_normalized_csv(const std::vector<NormalizedTrack>& tracks, std::ostream& out) {
    out << "storm_id,index,lat_scaled,lon_scaled,pres_scaled\n";
    char buf[128];
    for (const auto& t : tracks)
        for (std::size_t i = 0; i < t.n_points(); ++i) {
            std::snprintf(buf, sizeof(buf), "%s,%zu,%.17g,%.17g,%.17g\n", t.storm_id.c_str(), i,
                          t.values[i * 3], t.values[i * 3 + 1], t.values[i * 3 + 2]);
            out << buf;
        }
}

inline void write_scaler(const FeatureScaler& s, std::ostream& out) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "min = %.17g,%.17g,%.17g\nmax = %.17g,%.17g,%.17g\n",
                  s.min[0], s.min[1], s.min[2], s.max[0], s.max[1], s.max[2]);
    out << buf;
}

inline FeatureScaler read_scaler(std::istream& in) {
    FeatureScaler s;
    std::string line;
    bool have_min = false, have_max = false;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const auto key = detail::trim(std::string_view(line).substr(0, eq));
        const auto pieces = detail::split(std::string_view(line).substr(eq + 1), ',');
        if (pieces.size() != 3) throw DataError("read_scaler: expected 3 values per line");
        std::array<double, 3> values{};
        for (int f = 0; f < 3; ++f)
            values[static_cast<std::size_t>(f)] =
                std::stod(std::string(detail::trim(pieces[static_cast<std::size_t>(f)])));
        if (key == "min") {
            s.min = values;
            have_min = true;
        } else if (key == "max") {
            s.max = values;
            have_max = true;
        }
    }
    if (!have_min || !have_max) throw DataError("read_scaler: missing min or max line");
    return s;
}

inline std::vector<NormalizedTrack> read_normalized_csv(std::istream& in) {
    std::vector<NormalizedTrack> tracks;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("storm_id", 0) == 0) continue;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        const auto fields = detail::split(text, ',');
        if (fields.size() != 5) throw ParseError("expected 5 columns", line_no);
        const std::string id(detail::trim(fields[0]));
        if (tracks.empty() || tracks.back().storm_id != id) {
            tracks.emplace_back();
            tracks.back().storm_id = id;
        }
        for (int f = 2; f < 5; ++f)
            tracks.back().values.push_back(
                std::stod(std::string(fields[static_cast<std::size_t>(f)])));
    }
    return tracks;
}

} // namespace hurricast
