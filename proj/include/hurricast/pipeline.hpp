#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hurricast/arima.hpp"
#include "hurricast/autoenc.hpp"
#include "hurricast/cluster.hpp"
#include "hurricast/common.hpp"
#include "hurricast/coverage.hpp"
#include "hurricast/hurdat2.hpp"
#include "hurricast/rng.hpp"
#include "hurricast/sha256.hpp"
#include "hurricast/stats.hpp"
#include "hurricast/trackprep.hpp"

namespace hurricast {

/// End-to-end experiment configuration. Defaults follow the study setup:
/// train on 1875-2010, evaluate against 2011-2021.
struct PipelineConfig {
    // [data]
    std::string archive;
    int train_lo = 1875, train_hi = 2010;
    int eval_lo = 2011, eval_hi = 2021;
    std::set<std::string> statuses = {"HU"};
    std::optional<int> min_peak_wind;

    // [arima]
    std::optional<ArimaOrder> order_override; // fit this order when set
    int grid_p = 6, grid_d = 2, grid_q = 6;   // otherwise grid-search bounds
    int holdout = 10;

    // [cluster]
    int k = 4;
    FeatureMode feature_mode = FeatureMode::LatLon;
    SeedSelection seed_selection = SeedSelection::UniformWithReplacement;

    // [autoencoder]
    Architecture architecture;
    TrainConfig train_config; // rng_seed is overwritten by the derived seed

    // [perturbation]
    PerturbationConfig perturbation;

    // [coverage]
    double coverage_cell = 0.5;
    double startpoint_cell = 5.0;
    GridBounds bounds;

    // [run]
    std::uint64_t master_seed = 42;
    std::string out_dir = "out";
    std::optional<int> synth_total_override; // fix the synthetic count explicitly

    void validate() const {
        if (archive.empty()) throw DataError("config: archive path is required");
        if (train_lo > train_hi || eval_lo > eval_hi)
            throw DataError("config: era bounds are inverted");
        if (train_hi >= eval_lo) throw DataError("config: eras must be disjoint and ordered");
        if (k < 1) throw DataError("config: k must be >= 1");
    }
};

namespace detail {

inline std::string canonical_config(const PipelineConfig& c) {
    std::ostringstream os;
    os << "archive = " << c.archive << '\n';
    os << "train_era = " << c.train_lo << ':' << c.train_hi << '\n';
    os << "eval_era = " << c.eval_lo << ':' << c.eval_hi << '\n';
    os << "statuses =";
    for (const auto& s : c.statuses) os << ' ' << s;
    os << '\n';
    os << "min_peak_wind = " << (c.min_peak_wind ? std::to_string(*c.min_peak_wind) : "none") << '\n';
    os << "arima_order = "
       << (c.order_override ? c.order_override->to_string() : std::string("grid")) << '\n';
    os << "arima_grid = " << c.grid_p << ',' << c.grid_d << ',' << c.grid_q << '\n';
    os << "arima_holdout = " << c.holdout << '\n';
    os << "k = " << c.k << '\n';
    os << "feature_mode = " << (c.feature_mode == FeatureMode::LatLon ? "latlon" : "latlon_pressure")
       << '\n';
    os << "seed_selection = "
       << (c.seed_selection == SeedSelection::UniformWithReplacement ? "uniform" : "nearest") << '\n';
    os << "widths =";
    for (int w : c.architecture.widths) os << ' ' << w;
    os << '\n';
    os << "batch_norm = " << (c.architecture.batch_norm ? 1 : 0) << '\n';
    os << "learning_rate = " << c.train_config.learning_rate << '\n';
    os << "batch_size = " << c.train_config.batch_size << '\n';
    os << "epochs = " << c.train_config.epochs << '\n';
    os << "input_noise_std = " << c.train_config.input_noise_std << '\n';
    os << "input_noise_period = " << c.train_config.input_noise_period << '\n';
    os << "perturbation_mean = " << c.perturbation.mean << '\n';
    os << "perturbation_std = " << c.perturbation.stddev << '\n';
    os << "perturbation_per_dimension = " << (c.perturbation.per_dimension ? 1 : 0) << '\n';
    os << "coverage_cell = " << c.coverage_cell << '\n';
    os << "startpoint_cell = " << c.startpoint_cell << '\n';
    os << "bounds = " << c.bounds.lat_min << ',' << c.bounds.lat_max << ',' << c.bounds.lon_min
       << ',' << c.bounds.lon_max << '\n';
    os << "master_seed = " << c.master_seed << '\n';
    os << "synth_total_override = "
       << (c.synth_total_override ? std::to_string(*c.synth_total_override) : "none") << '\n';
    return os.str();
}

} // namespace detail

/// Parse the plain-text `key = value` config with [section] headers.
inline PipelineConfig parse_config(std::istream& in) {
    PipelineConfig config;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw ParseError("unterminated section header", line_no);
            section = std::string(detail::trim(text.substr(1, text.size() - 2)));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
        const std::string key = std::string(detail::trim(text.substr(0, eq)));
        const std::string value = std::string(detail::trim(text.substr(eq + 1)));
        const std::string qualified = section.empty() ? key : section + "." + key;

        const auto parse_era = [&](int& lo, int& hi) {
            const auto colon = value.find(':');
            if (colon == std::string::npos) throw ParseError("era must be lo:hi", line_no);
            lo = std::stoi(value.substr(0, colon));
            hi = std::stoi(value.substr(colon + 1));
        };
        try {
            if (qualified == "data.archive") config.archive = value;
            else if (qualified == "data.train_era") parse_era(config.train_lo, config.train_hi);
            else if (qualified == "data.eval_era") parse_era(config.eval_lo, config.eval_hi);
            else if (qualified == "data.statuses") {
                config.statuses.clear();
                for (auto piece : detail::split(value, ','))
                    if (auto t = detail::trim(piece); !t.empty())
                        config.statuses.insert(std::string(t));
            } else if (qualified == "data.min_peak_wind") {
                config.min_peak_wind = value == "none" ? std::nullopt
                                                       : std::optional<int>(std::stoi(value));
            } else if (qualified == "arima.order") {
                if (value == "grid") {
                    config.order_override.reset();
                } else {
                    const auto v = detail::read_values(value);
                    if (v.size() != 3) throw ParseError("order must be p,d,q or 'grid'", line_no);
                    config.order_override = ArimaOrder{static_cast<int>(v[0]), static_cast<int>(v[1]),
                                                       static_cast<int>(v[2])};
                }
            } else if (qualified == "arima.grid") {
                const auto v = detail::read_values(value);
                if (v.size() != 3) throw ParseError("grid must be p_max,d_max,q_max", line_no);
                config.grid_p = static_cast<int>(v[0]);
                config.grid_d = static_cast<int>(v[1]);
                config.grid_q = static_cast<int>(v[2]);
            } else if (qualified == "arima.holdout") config.holdout = std::stoi(value);
            else if (qualified == "cluster.k") config.k = std::stoi(value);
            else if (qualified == "cluster.feature_mode") {
                if (value == "latlon") config.feature_mode = FeatureMode::LatLon;
                else if (value == "latlon_pressure") config.feature_mode = FeatureMode::LatLonPressure;
                else throw ParseError("feature_mode must be latlon or latlon_pressure", line_no);
            } else if (qualified == "cluster.seed_selection") {
                if (value == "uniform") config.seed_selection = SeedSelection::UniformWithReplacement;
                else if (value == "nearest") config.seed_selection = SeedSelection::NearestToCentroid;
                else throw ParseError("seed_selection must be uniform or nearest", line_no);
            } else if (qualified == "autoencoder.widths") {
                config.architecture.widths.clear();
                for (const double v : detail::read_values(value))
                    config.architecture.widths.push_back(static_cast<int>(v));
            } else if (qualified == "autoencoder.batch_norm")
                config.architecture.batch_norm = std::stoi(value) != 0;
            else if (qualified == "autoencoder.learning_rate")
                config.train_config.learning_rate = std::stod(value);
            else if (qualified == "autoencoder.batch_size")
                config.train_config.batch_size = std::stoi(value);
            else if (qualified == "autoencoder.epochs") config.train_config.epochs = std::stoi(value);
            else if (qualified == "autoencoder.input_noise_std")
                config.train_config.input_noise_std = std::stod(value);
            else if (qualified == "autoencoder.input_noise_period")
                config.train_config.input_noise_period = std::stoi(value);
            else if (qualified == "perturbation.mean") config.perturbation.mean = std::stod(value);
            else if (qualified == "perturbation.std") config.perturbation.stddev = std::stod(value);
            else if (qualified == "perturbation.per_dimension")
                config.perturbation.per_dimension = std::stoi(value) != 0;
            else if (qualified == "coverage.cell") config.coverage_cell = std::stod(value);
            else if (qualified == "coverage.startpoint_cell")
                config.startpoint_cell = std::stod(value);
            else if (qualified == "coverage.bounds") {
                const auto v = detail::read_values(value);
                if (v.size() != 4)
                    throw ParseError("bounds must be lat_min,lat_max,lon_min,lon_max", line_no);
                config.bounds = GridBounds{v[0], v[1], v[2], v[3]};
            } else if (qualified == "run.seed")
                config.master_seed = static_cast<std::uint64_t>(std::stoull(value));
            else if (qualified == "run.out_dir") config.out_dir = value;
            else if (qualified == "run.synth_total_override")
                config.synth_total_override = value == "none" ? std::nullopt
                                                              : std::optional<int>(std::stoi(value));
            else throw ParseError("unknown config key '" + qualified + "'", line_no);
        } catch (const std::invalid_argument&) {
            throw ParseError("bad value for '" + qualified + "'", line_no);
        } catch (const std::out_of_range&) {
            throw ParseError("value out of range for '" + qualified + "'", line_no);
        }
    }
    return config;
}

inline PipelineConfig parse_config_file(const std::string& path) {
    auto in = open_input(path);
    return parse_config(in);
}

struct RunManifest {
    std::string manifest_path;
    std::map<std::string, std::string> artifact_digests;
    ComparisonReport report;
    int train_storms = 0;
    int eval_storms = 0;
    int synthetic_tracks = 0;
    ArimaOrder selected_order;
};

/// Wrap a stage so failures abort with the stage name; artifacts written by
/// earlier stages stay on disk.
template <typename Fn>
inline auto run_stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw DataError("stage '" + name + "' failed: " + e.what());
    }
}

/// Execute the full experiment: parse, filter, stats, resample/scale, ARIMA
/// forecast, cluster, seed sampling, autoencoder training, synthesis,
/// rasterization of both eras, and comparison. Every intermediate artifact
/// is written to the output directory; the manifest lists the config,
/// derived seeds, artifact checksums, and the comparison report.
inline RunManifest run(const PipelineConfig& config) {
    config.validate();
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir);
    const auto path_of = [&](const std::string& name) {
        return (fs::path(config.out_dir) / name).string();
    };

    RunManifest manifest;
    std::vector<std::pair<std::string, std::string>> artifacts; // name -> path, write order
    const auto emit = [&](const std::string& name, const auto& writer) {
        const auto path = path_of(name);
        auto out = open_output(path);
        writer(out);
        out.close();
        artifacts.emplace_back(name, path);
    };
    const auto stage_seed = [&](std::string_view label) {
        return derive_seed(config.master_seed, label);
    };

    // parse + filter
    const auto storms = run_stage("parse", [&] { return parse_archive_file(config.archive); });
    FilterOptions filter_options;
    filter_options.statuses = config.statuses;
    filter_options.min_peak_wind = config.min_peak_wind;
    filter_options.min_points = 2; // tracks must be resamplable
    const auto train_set = run_stage("filter", [&] {
        return filter_hurricanes(storms, config.train_lo, config.train_hi, filter_options);
    });
    const auto eval_set = run_stage("filter", [&] {
        return filter_hurricanes(storms, config.eval_lo, config.eval_hi, filter_options);
    });
    if (train_set.empty()) throw DataError("stage 'filter': no training storms selected");
    manifest.train_storms = static_cast<int>(train_set.size());
    manifest.eval_storms = static_cast<int>(eval_set.size());
    emit("hurricanes_train.csv", [&](std::ostream& out) {
        out << "storm_id,name,year,n_points\n";
        for (const auto& s : train_set)
            out << s.id.to_string() << ',' << s.name << ',' << s.id.year << ',' << s.points.size()
                << '\n';
    });

    // descriptive statistics on the training era
    const auto annual = run_stage("stats", [&] {
        return annual_counts(train_set, config.train_lo, config.train_hi);
    });
    emit("annual_counts.csv", [&](std::ostream& out) { write_annual_csv(annual, out); });
    emit("monthly_histogram.csv", [&](std::ostream& out) {
        write_monthly_csv(monthly_histogram(train_set), out);
    });
    emit("start_density.csv", [&](std::ostream& out) {
        write_density_csv(start_point_density(train_set, config.startpoint_cell), out);
    });

    // resample + scale
    std::vector<std::vector<TrackSample>> resampled;
    std::vector<NormalizedTrack> normalized;
    FeatureScaler scaler;
    run_stage("prep", [&] {
        resampled.reserve(train_set.size());
        for (const auto& s : train_set)
            resampled.push_back(resample_track(s, config.architecture.input_dim() / 3));
        scaler = fit_scaler(resampled);
        normalized.reserve(train_set.size());
        for (std::size_t i = 0; i < train_set.size(); ++i)
            normalized.push_back(
                apply_scaler(train_set[i].id.to_string(), resampled[i], scaler).track);
        return 0;
    });
    emit("scaler.txt", [&](std::ostream& out) { write_scaler(scaler, out); });
    emit("normalized_tracks.csv", [&](std::ostream& out) { write_normalized_csv(normalized, out); });

    // ARIMA forecast of the evaluation-era annual counts
    std::vector<double> series(annual.counts.begin(), annual.counts.end());
    ArimaModel model;
    run_stage("arima", [&] {
        if (config.order_override) {
            model = fit(series, *config.order_override);
            return 0;
        }
        auto search = grid_search(series, config.grid_p, config.grid_d, config.grid_q,
                                  config.holdout);
        // the winner was selected on the holdout prefix; if it fails to refit
        // on the full series, walk the table in score order
        std::stable_sort(search.table.begin(), search.table.end(),
                         [](const GridSearchEntry& a, const GridSearchEntry& b) {
                             if (a.converged != b.converged) return a.converged;
                             if (a.rmse != b.rmse) return a.rmse < b.rmse;
                             return std::tuple(a.order.p + a.order.d + a.order.q, a.order.p,
                                               a.order.d, a.order.q) <
                                    std::tuple(b.order.p + b.order.d + b.order.q, b.order.p,
                                               b.order.d, b.order.q);
                         });
        for (const auto& entry : search.table) {
            if (!entry.converged) continue;
            try {
                model = fit(series, entry.order);
                if (!(entry.order == search.best))
                    std::cerr << "arima: order " << search.best.to_string()
                              << " did not refit on the full series; using "
                              << entry.order.to_string() << '\n';
                return 0;
            } catch (const NumericError&) {
            }
        }
        throw NumericError("no grid-search order refits the full series");
    });
    manifest.selected_order = model.order;
    if (model.root_warning)
        std::cerr << "warning: ARIMA" << model.order.to_string()
                  << " has a unit-circle root (non-stationary or non-invertible fit)\n";
    emit("arima_model.txt", [&](std::ostream& out) { write_model(model, out); });

    const int horizon = config.eval_hi - config.eval_lo + 1;
    const auto forecast_values = forecast(model, horizon);
    const auto per_year = forecast_counts(forecast_values);
    int forecast_total = 0;
    for (const int c : per_year) forecast_total += c;
    const int synth_total = config.synth_total_override.value_or(forecast_total);
    emit("forecast.csv", [&](std::ostream& out) {
        out << "year,forecast,count\n";
        char buf[64];
        for (int i = 0; i < horizon; ++i) {
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%d\n", config.eval_lo + i,
                          forecast_values[static_cast<std::size_t>(i)],
                          per_year[static_cast<std::size_t>(i)]);
            out << buf;
        }
    });

    // clustering and the seed plan
    ClusterModel clusters;
    SeedPlan plan;
    run_stage("cluster", [&] {
        clusters = kmeans_fit(normalized, config.k, config.feature_mode, stage_seed("kmeans"));
        const auto counts =
            sample_cluster_counts(clusters.proportions, synth_total, stage_seed("sample_counts"));
        plan = select_seeds(clusters, normalized, counts, stage_seed("select_seeds"),
                            config.seed_selection);
        return 0;
    });
    emit("cluster_assignments.csv",
         [&](std::ostream& out) { write_assignments_csv(clusters, normalized, out); });
    emit("seed_plan.csv", [&](std::ostream& out) { write_seed_plan_csv(plan, normalized, out); });

    // autoencoder training
    TrainResult trained;
    run_stage("autoencoder", [&] {
        TrainConfig tc = config.train_config;
        tc.rng_seed = stage_seed("train");
        trained = train(normalized, tc, config.architecture);
        return 0;
    });
    emit("autoencoder_params.txt", [&](std::ostream& out) { write_network(trained.params, out); });
    emit("loss_history.csv", [&](std::ostream& out) {
        write_loss_history(trained.loss_history, out);
    });

    // synthesis back to raw coordinates
    std::vector<NormalizedTrack> synthetic;
    std::vector<std::vector<TrackSample>> synthetic_raw;
    run_stage("synthesize", [&] {
        Rng rng(stage_seed("synthesize"));
        synthetic = synthesize(trained.params, plan, normalized, config.perturbation, rng);
        synthetic_raw.reserve(synthetic.size());
        for (const auto& t : synthetic) synthetic_raw.push_back(invert_scaler(t, scaler));
        return 0;
    });
    manifest.synthetic_tracks = static_cast<int>(synthetic.size());
    emit("synthetic_tracks.csv", [&](std::ostream& out) {
        out << "storm_id,index,lat,lon,pressure\n";
        char buf[160];
        for (std::size_t t = 0; t < synthetic.size(); ++t)
            for (std::size_t i = 0; i < synthetic_raw[t].size(); ++i) {
                const auto& s = synthetic_raw[t][i];
                std::snprintf(buf, sizeof(buf), "%s,%zu,%.17g,%.17g,%.17g\n",
                              synthetic[t].storm_id.c_str(), i, s[0], s[1], s[2]);
                out << buf;
            }
    });

    // coverage of both eras and the comparison report
    CoverageGrid grid_hist, grid_synth;
    run_stage("coverage", [&] {
        auto hist = rasterize(storm_tracks(eval_set), config.coverage_cell, config.bounds);
        auto synth = rasterize(synthetic_raw, config.coverage_cell, config.bounds);
        if (hist.skipped_points > 0)
            std::cerr << "coverage: " << hist.skipped_points
                      << " historical points outside bounds\n";
        if (synth.skipped_points > 0)
            std::cerr << "coverage: " << synth.skipped_points
                      << " synthetic points outside bounds\n";
        grid_hist = std::move(hist.grid);
        grid_synth = std::move(synth.grid);
        return 0;
    });
    emit("coverage_historical.csv", [&](std::ostream& out) { write_grid_csv(grid_hist, out); });
    emit("coverage_synthetic.csv", [&](std::ostream& out) { write_grid_csv(grid_synth, out); });
    manifest.report = run_stage("compare", [&] { return compare(grid_hist, grid_synth); });
    emit("comparison.txt", [&](std::ostream& out) { write_report(manifest.report, out); });

    // manifest: config, derived seeds, artifact digests, headline metrics
    {
        std::ostringstream os;
        os << "hurricast-run v1\n";
        std::istringstream cfg(detail::canonical_config(config));
        std::string line;
        while (std::getline(cfg, line)) os << "config." << line << '\n';
        for (const char* label : {"kmeans", "sample_counts", "select_seeds", "train", "synthesize"})
            os << "seed." << label << " = " << stage_seed(label) << '\n';
        for (const auto& [name, path] : artifacts) {
            std::ifstream in(path, std::ios::binary);
            Sha256 h;
            char buf[65536];
            while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
                h.update(buf, static_cast<std::size_t>(in.gcount()));
                if (!in) break;
            }
            const auto digest = h.hex_digest();
            os << "artifact." << name << " = " << digest << '\n';
            manifest.artifact_digests[name] = digest;
        }
        os << "counts.train_storms = " << manifest.train_storms << '\n';
        os << "counts.eval_storms = " << manifest.eval_storms << '\n';
        os << "counts.forecast_total = " << forecast_total << '\n';
        os << "counts.synthetic_tracks = " << manifest.synthetic_tracks << '\n';
        os << "arima.selected_order = " << manifest.selected_order.to_string() << '\n';
        char metric[64];
        std::snprintf(metric, sizeof(metric), "%.17g", manifest.report.pearson_union);
        os << "report.pearson_union = " << metric << '\n';
        std::snprintf(metric, sizeof(metric), "%.17g", manifest.report.nrmse);
        os << "report.nrmse = " << metric << '\n';
        std::snprintf(metric, sizeof(metric), "%.17g", manifest.report.top_decile_overlap);
        os << "report.top_decile_overlap = " << metric << '\n';

        manifest.manifest_path = path_of("manifest.txt");
        auto out = open_output(manifest.manifest_path);
        out << os.str();
    }
    return manifest;
}

/// Raw-coordinate track CSV reader (storm_id,index,lat,lon,pressure), the
/// inverse of the synthetic-track emitter.
inline std::vector<std::vector<TrackSample>> read_raw_tracks_csv(std::istream& in) {
    std::vector<std::vector<TrackSample>> tracks;
    std::string line;
    std::string current_id;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("storm_id", 0) == 0) continue;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        const auto fields = detail::split(text, ',');
        if (fields.size() != 5) throw ParseError("expected 5 columns", line_no);
        const std::string id(detail::trim(fields[0]));
        if (id != current_id) {
            tracks.emplace_back();
            current_id = id;
        }
        try {
            tracks.back().push_back({std::stod(std::string(fields[2])),
                                     std::stod(std::string(fields[3])),
                                     std::stod(std::string(fields[4]))});
        } catch (const std::exception&) {
            throw ParseError("bad numeric value", line_no);
        }
    }
    return tracks;
}

} // namespace hurricast
