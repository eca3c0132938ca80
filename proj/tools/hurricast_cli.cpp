// Command-line front end: one subcommand per pipeline stage plus the full run.
// Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 numerical
// failure. Diagnostics go to stderr; data products to files or stdout.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include "hurricast/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hurricast;

namespace {

struct YearRange {
    int lo = 1851;
    int hi = 2100;
};

YearRange parse_years(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--years", "expected lo:hi");
    try {
        return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError("--years", "expected integer years lo:hi");
    }
}

FilterOptions make_filter(const std::string& status_list, std::optional<int> min_wind) {
    FilterOptions options;
    options.min_points = 2;
    options.min_peak_wind = min_wind;
    if (status_list == "any") {
        options.statuses.clear();
    } else if (!status_list.empty()) {
        options.statuses.clear();
        for (auto piece : detail::split(status_list, ','))
            if (auto t = detail::trim(piece); !t.empty())
                options.statuses.insert(std::string(t));
    }
    return options;
}

std::ostream& output_for(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file = open_output(path);
    return file;
}

std::vector<Storm> load_filtered(const std::string& archive, const std::string& years,
                                 const std::string& statuses, std::optional<int> min_wind) {
    const auto storms = parse_archive_file(archive);
    const auto range = parse_years(years);
    return filter_hurricanes(storms, range.lo, range.hi, make_filter(statuses, min_wind));
}

std::vector<double> read_series_csv(const std::string& path) {
    auto in = open_input(path);
    std::vector<double> series;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        const auto fields = detail::split(text, ',');
        const auto& value_field = fields.size() >= 2 ? fields[1] : fields[0];
        const auto value = detail::trim(value_field);
        if (line_no == 1 && !value.empty() &&
            !std::isdigit(static_cast<unsigned char>(value[0])) && value[0] != '-')
            continue; // header row
        try {
            series.push_back(std::stod(std::string(value)));
        } catch (const std::exception&) {
            throw ParseError("bad series value '" + std::string(value) + "'", line_no);
        }
    }
    if (series.empty()) throw DataError("series file is empty: " + path);
    return series;
}

GridBounds parse_bounds(const std::string& text) {
    const auto values = detail::read_values(text);
    if (values.size() != 4)
        throw CLI::ValidationError("--bounds", "expected lat_min,lat_max,lon_min,lon_max");
    return GridBounds{values[0], values[1], values[2], values[3]};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hurricast: HURDAT2 analysis, forecasting, and synthetic track generation"};
    app.require_subcommand(1);

    // ---- ingest ----
    auto* ingest = app.add_subcommand("ingest", "Parse an archive and list filtered storms as CSV");
    std::string in_archive, in_years = "1851:2100", in_status = "HU", in_out;
    std::optional<int> in_min_wind;
    ingest->add_option("--archive", in_archive, "HURDAT2 text file")->required();
    ingest->add_option("--years", in_years, "Year range lo:hi");
    ingest->add_option("--status", in_status, "Status codes (comma list) or 'any'");
    ingest->add_option("--min-wind", in_min_wind, "Keep storms with peak wind >= knots");
    ingest->add_option("--out", in_out, "Output file (default stdout)");

    // ---- stats ----
    auto* stats = app.add_subcommand("stats", "Annual, monthly, or start-point statistics");
    std::string st_archive, st_years = "1851:2100", st_status = "HU", st_product = "annual", st_out;
    double st_cell = 5.0;
    stats->add_option("--archive", st_archive)->required();
    stats->add_option("--years", st_years);
    stats->add_option("--status", st_status);
    stats->add_option("--product", st_product, "annual | monthly | density")
        ->check(CLI::IsMember({"annual", "monthly", "density"}));
    stats->add_option("--cell", st_cell, "Density cell size in degrees");
    stats->add_option("--out", st_out);

    // ---- forecast ----
    auto* fc = app.add_subcommand("forecast", "Fit ARIMA to a count series and forecast");
    std::string fc_series, fc_order, fc_out;
    std::string fc_grid = "6,2,6";
    int fc_holdout = 10, fc_horizon = 10;
    fc->add_option("--series", fc_series, "CSV of year,count (or one value per line)")->required();
    fc->add_option("--order", fc_order, "Fixed order p,d,q (otherwise grid search)");
    fc->add_option("--grid", fc_grid, "Grid-search bounds p_max,d_max,q_max");
    fc->add_option("--holdout", fc_holdout, "Grid-search holdout window");
    fc->add_option("--horizon", fc_horizon, "Forecast steps")->required();
    fc->add_option("--out", fc_out);

    // ---- cluster ----
    auto* cl = app.add_subcommand("cluster", "K-means over normalized tracks");
    std::string cl_archive, cl_years = "1875:2010", cl_status = "HU", cl_mode = "latlon", cl_out;
    int cl_k = 4;
    std::uint64_t cl_seed = 0;
    cl->add_option("--archive", cl_archive)->required();
    cl->add_option("--years", cl_years);
    cl->add_option("--status", cl_status);
    cl->add_option("--k", cl_k);
    cl->add_option("--mode", cl_mode)->check(CLI::IsMember({"latlon", "latlon_pressure"}));
    cl->add_option("--seed", cl_seed, "RNG seed")->required();
    cl->add_option("--out", cl_out);

    // ---- train ----
    auto* tr = app.add_subcommand("train", "Train the autoencoder on an era");
    std::string tr_archive, tr_years = "1875:2010", tr_status = "HU", tr_out_dir = "model";
    int tr_epochs = 500, tr_batch = 32;
    double tr_lr = 1e-3;
    std::uint64_t tr_seed = 0;
    tr->add_option("--archive", tr_archive)->required();
    tr->add_option("--years", tr_years);
    tr->add_option("--status", tr_status);
    tr->add_option("--epochs", tr_epochs);
    tr->add_option("--batch-size", tr_batch);
    tr->add_option("--learning-rate", tr_lr);
    tr->add_option("--seed", tr_seed, "RNG seed")->required();
    tr->add_option("--out-dir", tr_out_dir, "Where to write model artifacts");

    // ---- synthesize ----
    auto* sy = app.add_subcommand("synthesize", "Generate perturbed tracks from a trained model");
    std::string sy_model_dir, sy_out;
    int sy_k = 4, sy_total = 0;
    double sy_mean = 0.9, sy_std = 0.1;
    std::uint64_t sy_seed = 0;
    sy->add_option("--model-dir", sy_model_dir, "Directory produced by 'train'")->required();
    sy->add_option("--k", sy_k, "Clusters for seed sampling");
    sy->add_option("--total", sy_total, "Number of synthetic tracks")->required();
    sy->add_option("--mean", sy_mean, "Perturbation multiplier mean");
    sy->add_option("--std", sy_std, "Perturbation multiplier stddev");
    sy->add_option("--seed", sy_seed, "RNG seed")->required();
    sy->add_option("--out", sy_out);

    // ---- coverage ----
    auto* cv = app.add_subcommand("coverage", "Rasterize tracks onto the coverage grid");
    std::string cv_archive, cv_tracks, cv_years = "2011:2021", cv_status = "HU", cv_out;
    std::string cv_bounds = "0,60,-100,0";
    double cv_cell = 0.5;
    bool cv_matrix = false;
    cv->add_option("--archive", cv_archive, "HURDAT2 archive (historical mode)");
    cv->add_option("--tracks", cv_tracks, "Raw track CSV (synthetic mode)");
    cv->add_option("--years", cv_years);
    cv->add_option("--status", cv_status);
    cv->add_option("--cell", cv_cell);
    cv->add_option("--bounds", cv_bounds, "lat_min,lat_max,lon_min,lon_max");
    cv->add_flag("--matrix", cv_matrix, "Emit a dense matrix instead of sparse CSV");
    cv->add_option("--out", cv_out);

    // ---- compare ----
    auto* cp = app.add_subcommand("compare", "Compare two track sets on a common grid");
    std::string cp_a, cp_b, cp_out;
    std::string cp_bounds = "0,60,-100,0";
    double cp_cell = 0.5;
    cp->add_option("--tracks-a", cp_a, "Raw track CSV (historical side)")->required();
    cp->add_option("--tracks-b", cp_b, "Raw track CSV (synthetic side)")->required();
    cp->add_option("--cell", cp_cell);
    cp->add_option("--bounds", cp_bounds);
    cp->add_option("--out", cp_out);

    // ---- run ----
    auto* rn = app.add_subcommand("run", "Execute the full pipeline from a config file");
    std::string rn_config, rn_archive, rn_out_dir;
    std::optional<std::uint64_t> rn_seed;
    rn->add_option("--config", rn_config, "key = value config with [section] headers")->required();
    rn->add_option("--archive", rn_archive, "Override the config's archive path");
    rn->add_option("--out-dir", rn_out_dir, "Override the config's output directory");
    rn->add_option("--seed", rn_seed, "Override the config's master seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        std::ofstream file;
        if (*ingest) {
            const auto storms = load_filtered(in_archive, in_years, in_status, in_min_wind);
            auto& out = output_for(file, in_out);
            out << "storm_id,name,year,n_points,peak_wind\n";
            for (const auto& s : storms) {
                int peak = -99;
                for (const auto& p : s.points)
                    if (p.max_wind) peak = std::max(peak, *p.max_wind);
                out << s.id.to_string() << ',' << s.name << ',' << s.id.year << ','
                    << s.points.size() << ',' << peak << '\n';
            }
            std::cerr << storms.size() << " storms\n";
        } else if (*stats) {
            const auto storms = load_filtered(st_archive, st_years, st_status, std::nullopt);
            const auto range = parse_years(st_years);
            auto& out = output_for(file, st_out);
            if (st_product == "annual") {
                write_annual_csv(annual_counts(storms, range.lo, range.hi), out);
            } else if (st_product == "monthly") {
                write_monthly_csv(monthly_histogram(storms), out);
            } else {
                write_density_csv(start_point_density(storms, st_cell), out);
            }
        } else if (*fc) {
            const auto series = read_series_csv(fc_series);
            ArimaOrder order;
            if (!fc_order.empty()) {
                const auto v = detail::read_values(fc_order);
                if (v.size() != 3) throw DataError("--order must be p,d,q");
                order = {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])};
            } else {
                const auto g = detail::read_values(fc_grid);
                if (g.size() != 3) throw DataError("--grid must be p_max,d_max,q_max");
                const auto search = grid_search(series, static_cast<int>(g[0]),
                                                static_cast<int>(g[1]), static_cast<int>(g[2]),
                                                fc_holdout);
                order = search.best;
                std::cerr << "grid search selected " << order.to_string() << '\n';
                for (const auto& entry : search.table)
                    if (entry.converged)
                        std::cerr << "  " << entry.order.to_string() << " rmse " << entry.rmse
                                  << '\n';
            }
            const auto model = fit(series, order);
            if (model.root_warning)
                std::cerr << "warning: ARIMA" << order.to_string()
                          << " has a unit-circle root (non-stationary or non-invertible fit)\n";
            const auto values = forecast(model, fc_horizon);
            const auto counts = forecast_counts(values);
            auto& out = output_for(file, fc_out);
            out << "step,forecast,count\n";
            char buf[80];
            for (int i = 0; i < fc_horizon; ++i) {
                std::snprintf(buf, sizeof(buf), "%d,%.17g,%d\n", i + 1,
                              values[static_cast<std::size_t>(i)],
                              counts[static_cast<std::size_t>(i)]);
                out << buf;
            }
        } else if (*cl) {
            const auto storms = load_filtered(cl_archive, cl_years, cl_status, std::nullopt);
            std::vector<std::vector<TrackSample>> resampled;
            for (const auto& s : storms) resampled.push_back(resample_track(s, 20));
            const auto scaler = fit_scaler(resampled);
            std::vector<NormalizedTrack> normalized;
            for (std::size_t i = 0; i < storms.size(); ++i)
                normalized.push_back(
                    apply_scaler(storms[i].id.to_string(), resampled[i], scaler).track);
            const auto mode =
                cl_mode == "latlon" ? FeatureMode::LatLon : FeatureMode::LatLonPressure;
            const auto model = kmeans_fit(normalized, cl_k, mode, cl_seed);
            auto& out = output_for(file, cl_out);
            write_assignments_csv(model, normalized, out);
            std::cerr << "objective " << model.objective << ", proportions:";
            for (const double p : model.proportions) std::cerr << ' ' << p;
            std::cerr << '\n';
        } else if (*tr) {
            const auto storms = load_filtered(tr_archive, tr_years, tr_status, std::nullopt);
            std::vector<std::vector<TrackSample>> resampled;
            for (const auto& s : storms) resampled.push_back(resample_track(s, 20));
            const auto scaler = fit_scaler(resampled);
            std::vector<NormalizedTrack> normalized;
            for (std::size_t i = 0; i < storms.size(); ++i)
                normalized.push_back(
                    apply_scaler(storms[i].id.to_string(), resampled[i], scaler).track);
            TrainConfig config;
            config.epochs = tr_epochs;
            config.batch_size = tr_batch;
            config.learning_rate = tr_lr;
            config.rng_seed = tr_seed;
            const auto result = train(normalized, config);
            fs::create_directories(tr_out_dir);
            {
                auto out = open_output((fs::path(tr_out_dir) / "scaler.txt").string());
                write_scaler(scaler, out);
            }
            {
                auto out =
                    open_output((fs::path(tr_out_dir) / "normalized_tracks.csv").string());
                write_normalized_csv(normalized, out);
            }
            {
                auto out =
                    open_output((fs::path(tr_out_dir) / "autoencoder_params.txt").string());
                write_network(result.params, out);
            }
            {
                auto out = open_output((fs::path(tr_out_dir) / "loss_history.csv").string());
                write_loss_history(result.loss_history, out);
            }
            std::cerr << "final loss " << result.loss_history.back() << ", artifacts in "
                      << tr_out_dir << '\n';
        } else if (*sy) {
            const auto params = [&] {
                auto in = open_input((fs::path(sy_model_dir) / "autoencoder_params.txt").string());
                return read_network(in);
            }();
            const auto scaler = [&] {
                auto in = open_input((fs::path(sy_model_dir) / "scaler.txt").string());
                return read_scaler(in);
            }();
            const auto normalized = [&] {
                auto in = open_input((fs::path(sy_model_dir) / "normalized_tracks.csv").string());
                return read_normalized_csv(in);
            }();
            const auto clusters = kmeans_fit(normalized, sy_k, FeatureMode::LatLon,
                                             derive_seed(sy_seed, "cli/kmeans"));
            const auto counts = sample_cluster_counts(clusters.proportions, sy_total,
                                                      derive_seed(sy_seed, "cli/sample_counts"));
            const auto plan = select_seeds(clusters, counts, derive_seed(sy_seed, "cli/seeds"));
            PerturbationConfig perturbation;
            perturbation.mean = sy_mean;
            perturbation.stddev = sy_std;
            Rng rng(derive_seed(sy_seed, "cli/synthesize"));
            const auto synthetic = synthesize(params, plan, normalized, perturbation, rng);
            auto& out = output_for(file, sy_out);
            out << "storm_id,index,lat,lon,pressure\n";
            char buf[160];
            for (const auto& track : synthetic) {
                const auto raw = invert_scaler(track, scaler);
                for (std::size_t i = 0; i < raw.size(); ++i) {
                    std::snprintf(buf, sizeof(buf), "%s,%zu,%.17g,%.17g,%.17g\n",
                                  track.storm_id.c_str(), i, raw[i][0], raw[i][1], raw[i][2]);
                    out << buf;
                }
            }
        } else if (*cv) {
            std::vector<std::vector<TrackSample>> tracks;
            if (!cv_archive.empty()) {
                tracks = storm_tracks(load_filtered(cv_archive, cv_years, cv_status, std::nullopt));
            } else if (!cv_tracks.empty()) {
                auto in = open_input(cv_tracks);
                tracks = read_raw_tracks_csv(in);
            } else {
                throw DataError("coverage: provide --archive or --tracks");
            }
            const auto result = rasterize(tracks, cv_cell, parse_bounds(cv_bounds));
            if (result.skipped_points > 0)
                std::cerr << result.skipped_points << " points outside bounds\n";
            auto& out = output_for(file, cv_out);
            if (cv_matrix)
                write_grid_matrix(result.grid, out);
            else
                write_grid_csv(result.grid, out);
        } else if (*cp) {
            const auto bounds = parse_bounds(cp_bounds);
            auto in_a = open_input(cp_a);
            auto in_b = open_input(cp_b);
            const auto grid_a = rasterize(read_raw_tracks_csv(in_a), cp_cell, bounds).grid;
            const auto grid_b = rasterize(read_raw_tracks_csv(in_b), cp_cell, bounds).grid;
            auto& out = output_for(file, cp_out);
            write_report(compare(grid_a, grid_b), out);
        } else if (*rn) {
            auto config = parse_config_file(rn_config);
            if (!rn_archive.empty()) config.archive = rn_archive;
            if (!rn_out_dir.empty()) config.out_dir = rn_out_dir;
            if (rn_seed) config.master_seed = *rn_seed;
            const auto manifest = run(config);
            std::cout << manifest.manifest_path << '\n';
        }
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
