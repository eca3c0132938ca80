#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "hurricast/common.hpp"
#include "hurricast/rng.hpp"
#include "hurricast/trackprep.hpp"

namespace hurricast {

enum class FeatureMode { LatLon, LatLonPressure };

inline int feature_dims(FeatureMode mode) { return mode == FeatureMode::LatLon ? 2 : 3; }

/// Flatten a normalized track into the clustering feature vector.
inline std::vector<double> cluster_features(const NormalizedTrack& track, FeatureMode mode) {
    const int dims = feature_dims(mode);
    std::vector<double> out;
    out.reserve(track.n_points() * static_cast<std::size_t>(dims));
    for (std::size_t i = 0; i < track.n_points(); ++i)
        for (int f = 0; f < dims; ++f) out.push_back(track.values[i * 3 + static_cast<std::size_t>(f)]);
    return out;
}

struct ClusterModel {
    int k = 4;
    FeatureMode feature_mode = FeatureMode::LatLon;
    std::vector<std::vector<double>> centroids; // k vectors
    std::vector<int> assignments;               // cluster index per training track
    std::vector<double> proportions;            // k values summing to 1
    double objective = 0.0;                     // sum of squared distances to assigned centroids
    std::vector<double> objective_history;      // per Lloyd iteration of the winning restart

    std::vector<std::vector<std::size_t>> members() const {
        std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < assignments.size(); ++i)
            out[static_cast<std::size_t>(assignments[i])].push_back(i);
        return out;
    }
};

namespace detail {

inline double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

inline std::size_t nearest_centroid(const std::vector<double>& x,
                                    const std::vector<std::vector<double>>& centroids,
                                    double* dist_out = nullptr) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        const double d = sq_distance(x, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    if (dist_out) *dist_out = best_d;
    return best;
}

/// k-means++ seeding: first center uniform, then points weighted by squared
/// distance to the nearest chosen center.
inline std::vector<std::vector<double>> kmeanspp_init(const std::vector<std::vector<double>>& data,
                                                      int k, Rng& rng) {
    std::vector<std::vector<double>> centers;
    centers.push_back(data[uniform_index(rng, data.size())]);
    std::vector<double> d2(data.size());
    while (centers.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : centers) best = std::min(best, sq_distance(data[i], c));
            d2[i] = best;
            total += best;
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = uniform_index(rng, data.size()); // all points coincide with a center
        } else {
            const double u = uniform01(rng) * total;
            double acc = 0.0;
            pick = data.size() - 1;
            for (std::size_t i = 0; i < data.size(); ++i) {
                acc += d2[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        }
        centers.push_back(data[pick]);
    }
    return centers;
}

struct LloydResult {
    std::vector<std::vector<double>> centroids;
    std::vector<int> assignments;
    double objective = 0.0;
    std::vector<double> objective_history; // per iteration, after each update
};

inline LloydResult lloyd(const std::vector<std::vector<double>>& data,
                         std::vector<std::vector<double>> centroids, int max_iter) {
    const std::size_t n = data.size();
    const std::size_t k = centroids.size();
    const std::size_t dim = data[0].size();
    LloydResult res;
    res.assignments.assign(n, -1);

    for (int iter = 0; iter < max_iter; ++iter) {
        bool changed = false;
        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double d = 0.0;
            const int a = static_cast<int>(nearest_centroid(data[i], centroids, &d));
            objective += d;
            if (a != res.assignments[i]) {
                res.assignments[i] = a;
                changed = true;
            }
        }

        // repair empty clusters with the point farthest from its centroid
        std::vector<std::size_t> sizes(k, 0);
        for (int a : res.assignments) ++sizes[static_cast<std::size_t>(a)];
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] > 0) continue;
            std::size_t farthest = 0;
            double worst = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto a = static_cast<std::size_t>(res.assignments[i]);
                if (sizes[a] <= 1) continue;
                const double d = sq_distance(data[i], centroids[a]);
                if (d > worst) {
                    worst = d;
                    farthest = i;
                }
            }
            --sizes[static_cast<std::size_t>(res.assignments[farthest])];
            res.assignments[farthest] = static_cast<int>(c);
            ++sizes[c];
            changed = true;
        }

        for (auto& c : centroids) std::fill(c.begin(), c.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            auto& c = centroids[static_cast<std::size_t>(res.assignments[i])];
            for (std::size_t f = 0; f < dim; ++f) c[f] += data[i][f];
        }
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t f = 0; f < dim; ++f) centroids[c][f] /= static_cast<double>(sizes[c]);

        double post = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            post += sq_distance(data[i], centroids[static_cast<std::size_t>(res.assignments[i])]);
        res.objective_history.push_back(post);
        res.objective = post;
        if (!changed) break;
    }
    res.centroids = std::move(centroids);
    return res;
}

} // namespace detail

constexpr int kKmeansRestarts = 20;
constexpr int kKmeansMaxIter = 300;

/// Lloyd's algorithm with k-means++ initialization; `restarts` independent
/// runs keep the best objective. Fully deterministic under `seed`.
inline ClusterModel kmeans_fit(const std::vector<NormalizedTrack>& tracks, int k,
                               FeatureMode mode, std::uint64_t seed,
                               int restarts = kKmeansRestarts, int max_iter = kKmeansMaxIter) {
    if (k < 1) throw DataError("kmeans_fit: k must be >= 1");
    if (tracks.size() < static_cast<std::size_t>(k))
        throw DataError("kmeans_fit: fewer tracks than clusters");
    std::vector<std::vector<double>> data;
    data.reserve(tracks.size());
    for (const auto& t : tracks) data.push_back(cluster_features(t, mode));

    detail::LloydResult best;
    best.objective = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng rng(derive_seed(seed, "kmeans/restart/" + std::to_string(r)));
        auto init = detail::kmeanspp_init(data, k, rng);
        auto run = detail::lloyd(data, std::move(init), max_iter);
        if (run.objective < best.objective) best = std::move(run);
    }

    ClusterModel model;
    model.k = k;
    model.feature_mode = mode;
    model.centroids = std::move(best.centroids);
    model.assignments = std::move(best.assignments);
    model.objective = best.objective;
    model.objective_history = std::move(best.objective_history);
    model.proportions.assign(static_cast<std::size_t>(k), 0.0);
    for (int a : model.assignments) model.proportions[static_cast<std::size_t>(a)] += 1.0;
    for (auto& p : model.proportions) p /= static_cast<double>(model.assignments.size());
    return model;
}

/// Mean silhouette coefficient over all points; diagnostic only.
inline double silhouette_score(const std::vector<NormalizedTrack>& tracks,
                               const ClusterModel& model) {
    std::vector<std::vector<double>> data;
    data.reserve(tracks.size());
    for (const auto& t : tracks) data.push_back(cluster_features(t, model.feature_mode));
    const auto members = model.members();
    double total = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto own = static_cast<std::size_t>(model.assignments[i]);
        if (members[own].size() < 2) continue;
        double a = 0.0;
        for (const auto j : members[own])
            if (j != i) a += std::sqrt(detail::sq_distance(data[i], data[j]));
        a /= static_cast<double>(members[own].size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < members.size(); ++c) {
            if (c == own || members[c].empty()) continue;
            double mean = 0.0;
            for (const auto j : members[c]) mean += std::sqrt(detail::sq_distance(data[i], data[j]));
            b = std::min(b, mean / static_cast<double>(members[c].size()));
        }
        if (!std::isfinite(b)) continue;
        total += (b - a) / std::max(a, b);
        ++counted;
    }
    return counted > 0 ? total / static_cast<double>(counted) : 0.0;
}

/// Multinomial split of `total` synthetic tracks across cluster proportions.
inline std::vector<int> sample_cluster_counts(const std::vector<double>& proportions, int total,
                                              std::uint64_t seed) {
    if (total < 0) throw DataError("sample_cluster_counts: total must be >= 0");
    Rng rng(derive_seed(seed, "cluster/sample_counts"));
    return multinomial(rng, proportions, total);
}

enum class SeedSelection { UniformWithReplacement, NearestToCentroid };

struct SeedPlan {
    struct Entry {
        int cluster = 0;
        std::size_t track_index = 0; // index into the training track list
        int replicate = 0;           // 0-based replicate number within the cluster
    };
    std::vector<Entry> entries;
};

/// Draw counts[c] member tracks per cluster (uniform with replacement by
/// default; nearest-to-centroid as the deterministic alternative).
inline SeedPlan select_seeds(const ClusterModel& model, const std::vector<int>& counts,
                             std::uint64_t seed,
                             SeedSelection mode = SeedSelection::UniformWithReplacement) {
    if (counts.size() != static_cast<std::size_t>(model.k))
        throw DataError("select_seeds: counts length must equal k");
    const auto members = model.members();
    Rng rng(derive_seed(seed, "cluster/select_seeds"));
    SeedPlan plan;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        const int want = counts[c];
        if (want == 0) continue;
        if (members[c].empty())
            throw DataError("select_seeds: cluster " + std::to_string(c) +
                            " is empty but has count " + std::to_string(want));
        for (int r = 0; r < want; ++r) {
            std::size_t pick;
            if (mode == SeedSelection::UniformWithReplacement) {
                pick = members[c][uniform_index(rng, members[c].size())];
            } else {
                pick = members[c][0]; // resolved below
            }
            plan.entries.push_back({static_cast<int>(c), pick, r});
        }
    }
    if (mode == SeedSelection::NearestToCentroid) {
        // replace every pick with the member nearest to its centroid
        for (auto& e : plan.entries) {
            const auto& mem = members[static_cast<std::size_t>(e.cluster)];
            e.track_index = mem[0];
        }
    }
    return plan;
}

/// Nearest-to-centroid selection needs the feature vectors; this overload
/// resolves the representative per cluster before planning.
inline SeedPlan select_seeds(const ClusterModel& model, const std::vector<NormalizedTrack>& tracks,
                             const std::vector<int>& counts, std::uint64_t seed,
                             SeedSelection mode) {
    if (mode == SeedSelection::UniformWithReplacement)
        return select_seeds(model, counts, seed, mode);
    const auto members = model.members();
    std::vector<std::size_t> representative(static_cast<std::size_t>(model.k));
    for (std::size_t c = 0; c < members.size(); ++c) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto i : members[c]) {
            const auto x = cluster_features(tracks[i], model.feature_mode);
            const double d = detail::sq_distance(x, model.centroids[c]);
            if (d < best) {
                best = d;
                representative[c] = i;
            }
        }
    }
    SeedPlan plan;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0) continue;
        if (members[c].empty())
            throw DataError("select_seeds: cluster " + std::to_string(c) +
                            " is empty but has count " + std::to_string(counts[c]));
        for (int r = 0; r < counts[c]; ++r)
            plan.entries.push_back({static_cast<int>(c), representative[c], r});
    }
    return plan;
}

inline void write_assignments_csv(const ClusterModel& model,
                                  const std::vector<NormalizedTrack>& tracks, std::ostream& out) {
    out << "track_id,cluster\n";
    for (std::size_t i = 0; i < model.assignments.size(); ++i)
        out << tracks[i].storm_id << ',' << model.assignments[i] << '\n';
}

inline void write_seed_plan_csv(const SeedPlan& plan, const std::vector<NormalizedTrack>& tracks,
                                std::ostream& out) {
    out << "cluster,seed_track_id,replicate_index\n";
    for (const auto& e : plan.entries)
        out << e.cluster << ',' << tracks[e.track_index].storm_id << ',' << e.replicate << '\n';
}

} // namespace hurricast
