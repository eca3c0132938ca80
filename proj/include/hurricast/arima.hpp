#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hurricast/common.hpp"

namespace hurricast {

struct ArimaOrder {
    int p = 0; // AR lags
    int d = 0; // differencing degree
    int q = 0; // MA order

    auto operator<=>(const ArimaOrder&) const = default;

    void validate() const {
        if (p < 0 || d < 0 || q < 0 || p > 6 || d > 6 || q > 6)
            throw DataError("ArimaOrder: p, d, q must lie in [0, 6]");
        if (d == 0 && p + q == 0)
            throw DataError("ArimaOrder: p + q must be >= 1 when d = 0");
    }

    std::string to_string() const {
        return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")";
    }
};

/// Apply the first-difference operator d times; output shrinks by d.
inline std::vector<double> difference(const std::vector<double>& series, int d) {
    if (d < 0) throw DataError("difference: d must be non-negative");
    if (series.size() <= static_cast<std::size_t>(d))
        throw DataError("difference: series length must exceed d");
    std::vector<double> out = series;
    for (int pass = 0; pass < d; ++pass) {
        for (std::size_t i = 0; i + 1 < out.size(); ++i) out[i] = out[i + 1] - out[i];
        out.pop_back();
    }
    return out;
}

/// Inverse of `difference`: `heads[j]` is the first value of the j-times
/// differenced original series, j = 0..d-1. Integer-exact for integer input.
inline std::vector<double> undifference(const std::vector<double>& diffed,
                                        const std::vector<double>& heads) {
    std::vector<double> out = diffed;
    for (auto head = heads.rbegin(); head != heads.rend(); ++head) {
        std::vector<double> next(out.size() + 1);
        next[0] = *head;
        for (std::size_t i = 0; i < out.size(); ++i) next[i + 1] = next[i] + out[i];
        out = std::move(next);
    }
    return out;
}

struct ArimaModel {
    ArimaOrder order;
    double intercept = 0.0; // mean of the differenced series
    std::vector<double> ar; // phi_1..phi_p
    std::vector<double> ma; // theta_1..theta_q
    double residual_variance = 0.0;
    double objective = 0.0; // conditional sum of squared residuals at the optimum

    // Forecasting state captured from the training data.
    std::vector<double> tail_w;            // last p mean-adjusted differenced values
    std::vector<double> tail_e;            // last q residuals
    std::vector<double> integration_tail;  // last value of each diff level j = 0..d-1

    bool root_warning = false; // an AR/MA polynomial root lies inside the unit circle
};

namespace detail {

/// CSS residuals on the mean-adjusted differenced series; residuals before
/// index max(p, q) are fixed at zero.
inline double css_objective(const std::vector<double>& w, const std::vector<double>& ar,
                            const std::vector<double>& ma, std::vector<double>* residuals_out) {
    const std::size_t p = ar.size(), q = ma.size();
    const std::size_t m = std::max(p, q);
    const std::size_t n = w.size();
    std::vector<double> e(n, 0.0);
    double obj = 0.0;
    for (std::size_t t = m; t < n; ++t) {
        double pred = 0.0;
        for (std::size_t i = 0; i < p; ++i) pred += ar[i] * w[t - 1 - i];
        for (std::size_t j = 0; j < q; ++j) pred += ma[j] * e[t - 1 - j];
        e[t] = w[t] - pred;
        obj += e[t] * e[t];
    }
    if (residuals_out) *residuals_out = std::move(e);
    return obj;
}

/// Derivative-free Nelder-Mead simplex descent. Starts from `x0`, runs up to
/// `max_iter` iterations, stops when the simplex f-spread falls below
/// `rel_tol` relative to the best value. Returns best point found; sets
/// `converged` accordingly.
inline std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x0, int max_iter, double rel_tol,
                                       bool* converged, double* best_value) {
    const std::size_t dim = x0.size();
    std::vector<std::vector<double>> pts(dim + 1, x0);
    for (std::size_t i = 0; i < dim; ++i) pts[i + 1][i] += 0.1;
    std::vector<double> fv(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) fv[i] = f(pts[i]);

    *converged = false;
    std::vector<std::size_t> idx(dim + 1);
    for (int iter = 0; iter < max_iter; ++iter) {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
        const std::size_t best = idx[0], worst = idx[dim];
        if (fv[worst] - fv[best] <= rel_tol * (std::abs(fv[best]) + 1e-12)) {
            *converged = true;
            *best_value = fv[best];
            return pts[best];
        }

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t r = 0; r < dim; ++r)
            for (std::size_t c = 0; c < dim; ++c) centroid[c] += pts[idx[r]][c];
        for (auto& c : centroid) c /= static_cast<double>(dim);

        const auto blend = [&](double coeff) {
            std::vector<double> x(dim);
            for (std::size_t c = 0; c < dim; ++c)
                x[c] = centroid[c] + coeff * (pts[worst][c] - centroid[c]);
            return x;
        };

        auto reflected = blend(-1.0);
        const double fr = f(reflected);
        if (fr < fv[idx[0]]) {
            auto expanded = blend(-2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                pts[worst] = std::move(expanded);
                fv[worst] = fe;
            } else {
                pts[worst] = std::move(reflected);
                fv[worst] = fr;
            }
        } else if (fr < fv[idx[dim - 1]]) {
            pts[worst] = std::move(reflected);
            fv[worst] = fr;
        } else {
            auto contracted = blend(fr < fv[worst] ? -0.5 : 0.5);
            const double fc = f(contracted);
            if (fc < std::min(fr, fv[worst])) {
                pts[worst] = std::move(contracted);
                fv[worst] = fc;
            } else {
                // shrink toward the best vertex
                for (std::size_t r = 0; r <= dim; ++r) {
                    if (r == best) continue;
                    for (std::size_t c = 0; c < dim; ++c)
                        pts[r][c] = pts[best][c] + 0.5 * (pts[r][c] - pts[best][c]);
                    fv[r] = f(pts[r]);
                }
            }
        }
    }
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    *best_value = fv[idx[0]];
    return pts[idx[0]];
}

/// Smallest root modulus of 1 + c_1 z + ... + c_k z^k via Durand-Kerner.
inline double min_root_modulus(const std::vector<double>& c) {
    const std::size_t k = c.size();
    if (k == 0 || c.back() == 0.0) {
        if (k == 0) return std::numeric_limits<double>::infinity();
        std::vector<double> trimmed = c;
        while (!trimmed.empty() && trimmed.back() == 0.0) trimmed.pop_back();
        return min_root_modulus(trimmed);
    }
    using C = std::complex<double>;
    std::vector<C> coeff(k + 1);
    coeff[0] = 1.0;
    for (std::size_t i = 0; i < k; ++i) coeff[i + 1] = c[i];
    const auto eval = [&](C z) {
        C acc = 0.0;
        for (std::size_t i = k + 1; i-- > 0;) acc = acc * z + coeff[i];
        return acc;
    };
    // normalize to monic for root iteration
    std::vector<C> roots(k);
    for (std::size_t i = 0; i < k; ++i)
        roots[i] = std::pow(C(0.4, 0.9), static_cast<double>(i + 1));
    for (int iter = 0; iter < 500; ++iter) {
        double moved = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            C denom = coeff[k];
            for (std::size_t j = 0; j < k; ++j)
                if (j != i) denom *= roots[i] - roots[j];
            const C delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-12) break;
    }
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& r : roots) lo = std::min(lo, std::abs(r));
    return lo;
}

} // namespace detail

/// Fit by conditional sum of squares on the d-times-differenced,
/// mean-adjusted series. The optimizer is simplex descent from a zero start
/// (2000 iterations max, relative tolerance 1e-8 on the objective).
inline ArimaModel fit(const std::vector<double>& series, const ArimaOrder& order) {
    order.validate();
    const auto w_raw = difference(series, order.d);
    const std::size_t p = static_cast<std::size_t>(order.p);
    const std::size_t q = static_cast<std::size_t>(order.q);
    if (w_raw.size() < p + q + 2)
        throw DataError("fit: differenced series too short for order " + order.to_string());

    ArimaModel model;
    model.order = order;
    model.intercept = std::accumulate(w_raw.begin(), w_raw.end(), 0.0) /
                      static_cast<double>(w_raw.size());
    std::vector<double> w(w_raw.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = w_raw[i] - model.intercept;

    std::vector<double> residuals;
    if (p + q == 0) {
        model.objective = detail::css_objective(w, {}, {}, &residuals);
    } else {
        const auto objective_of = [&](const std::vector<double>& theta) {
            std::vector<double> ar(theta.begin(), theta.begin() + static_cast<long>(p));
            std::vector<double> ma(theta.begin() + static_cast<long>(p), theta.end());
            return detail::css_objective(w, ar, ma, nullptr);
        };
        bool converged = false;
        double best = 0.0;
        auto theta = detail::nelder_mead(objective_of, std::vector<double>(p + q, 0.0), 2000,
                                         1e-8, &converged, &best);
        if (!converged)
            throw NumericError("fit: optimizer did not converge for order " + order.to_string() +
                               " (best objective " + std::to_string(best) + ")");
        model.ar.assign(theta.begin(), theta.begin() + static_cast<long>(p));
        model.ma.assign(theta.begin() + static_cast<long>(p), theta.end());
        model.objective = detail::css_objective(w, model.ar, model.ma, &residuals);
    }

    const std::size_t m = std::max(p, q);
    const std::size_t n_eff = w.size() - m;
    model.residual_variance = std::max(model.objective / static_cast<double>(n_eff), 1e-12);

    model.tail_w.assign(w.end() - static_cast<long>(p), w.end());
    model.tail_e.assign(residuals.end() - static_cast<long>(q), residuals.end());
    std::vector<double> level = series;
    for (int j = 0; j < order.d; ++j) {
        model.integration_tail.push_back(level.back());
        level = difference(level, 1);
    }

    // AR uses 1 - phi_1 z - ... - phi_p z^p, MA uses 1 + theta_1 z + ...;
    // roots inside the unit circle flag non-stationarity/non-invertibility.
    std::vector<double> ar_poly(model.ar.size());
    for (std::size_t i = 0; i < model.ar.size(); ++i) ar_poly[i] = -model.ar[i];
    model.root_warning = detail::min_root_modulus(ar_poly) < 1.0 - 1e-9 ||
                         detail::min_root_modulus(model.ma) < 1.0 - 1e-9;
    return model;
}

/// Iterated one-step prediction with future shocks at zero, then inverse
/// differencing against the stored training tail. Real-valued; count
/// post-processing happens at the pipeline boundary.
inline std::vector<double> forecast(const ArimaModel& model, int horizon) {
    if (horizon < 1) throw DataError("forecast: horizon must be >= 1");
    const std::size_t p = model.ar.size(), q = model.ma.size();
    std::vector<double> wf(static_cast<std::size_t>(horizon));
    const auto w_at = [&](long t) { // t relative to the first forecast step
        if (t >= 0) return wf[static_cast<std::size_t>(t)];
        const long idx = static_cast<long>(p) + t;
        return idx >= 0 ? model.tail_w[static_cast<std::size_t>(idx)] : 0.0;
    };
    const auto e_at = [&](long t) {
        if (t >= 0) return 0.0;
        const long idx = static_cast<long>(q) + t;
        return idx >= 0 ? model.tail_e[static_cast<std::size_t>(idx)] : 0.0;
    };
    for (long s = 0; s < horizon; ++s) {
        double pred = 0.0;
        for (std::size_t i = 0; i < p; ++i) pred += model.ar[i] * w_at(s - 1 - static_cast<long>(i));
        for (std::size_t j = 0; j < q; ++j) pred += model.ma[j] * e_at(s - 1 - static_cast<long>(j));
        wf[static_cast<std::size_t>(s)] = pred;
    }
    for (auto& v : wf) v += model.intercept;

    // integrate d times, seeded by the last value at each difference level
    std::vector<double> values = wf;
    for (std::size_t j = model.integration_tail.size(); j-- > 0;) {
        double prev = model.integration_tail[j];
        for (auto& v : values) {
            v = prev + v;
            prev = v;
        }
    }
    return values;
}

/// Round a forecast to non-negative integer counts.
inline std::vector<int> forecast_counts(const std::vector<double>& values) {
    std::vector<int> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(std::max(0, static_cast<int>(std::lround(v))));
    return out;
}

struct GridSearchEntry {
    ArimaOrder order;
    double rmse = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
};

struct GridSearchResult {
    ArimaOrder best;
    std::vector<GridSearchEntry> table; // every admissible order, evaluation order
};

/// Evaluate every admissible order by RMSE of holdout-window forecasts (fit
/// on the prefix, forecast the holdout). Ties break toward smaller p+d+q,
/// then lexicographic (p, d, q). Deterministic for identical inputs.
inline GridSearchResult grid_search(const std::vector<double>& series, int p_max, int d_max,
                                    int q_max, int holdout) {
    if (holdout < 1) throw DataError("grid_search: holdout must be >= 1");
    if (static_cast<std::size_t>(holdout) * 3 >= series.size())
        throw DataError("grid_search: holdout must be < series length / 3");
    const std::vector<double> prefix(series.begin(), series.end() - holdout);
    const std::vector<double> actual(series.end() - holdout, series.end());

    GridSearchResult result;
    bool have_best = false;
    double best_rmse = 0.0;
    for (int p = 0; p <= p_max; ++p)
        for (int d = 0; d <= d_max; ++d)
            for (int q = 0; q <= q_max; ++q) {
                const ArimaOrder order{p, d, q};
                if (d == 0 && p + q == 0) continue;
                GridSearchEntry entry;
                entry.order = order;
                try {
                    const auto model = fit(prefix, order);
                    const auto predicted = forecast(model, holdout);
                    double sq = 0.0;
                    for (int i = 0; i < holdout; ++i) {
                        const double err = predicted[static_cast<std::size_t>(i)] -
                                           actual[static_cast<std::size_t>(i)];
                        sq += err * err;
                    }
                    entry.rmse = std::sqrt(sq / holdout);
                    entry.converged = true;
                } catch (const DataError&) {
                    // series too short for this order; recorded as non-converged
                } catch (const NumericError&) {
                }
                result.table.push_back(entry);
                if (!entry.converged || !std::isfinite(entry.rmse)) continue;

                const double tie_eps = 1e-12 * std::max(1.0, std::max(entry.rmse, best_rmse));
                const bool better =
                    !have_best || entry.rmse < best_rmse - tie_eps ||
                    (std::abs(entry.rmse - best_rmse) <= tie_eps &&
                     (std::tuple(order.p + order.d + order.q, order.p, order.d, order.q) <
                      std::tuple(result.best.p + result.best.d + result.best.q, result.best.p,
                                 result.best.d, result.best.q)));
                if (better) {
                    have_best = true;
                    best_rmse = entry.rmse;
                    result.best = order;
                }
            }
    if (!have_best) throw NumericError("grid_search: no admissible order converged");
    return result;
}

namespace detail {

inline void write_values(std::ostream& out, const char* key, const std::vector<double>& values) {
    out << key << " =";
    char buf[40];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
        out << (i == 0 ? " " : ",") << buf;
    }
    out << '\n';
}

inline std::vector<double> read_values(std::string_view text) {
    std::vector<double> out;
    for (auto piece : split(text, ',')) {
        const auto t = trim(piece);
        if (t.empty()) continue;
        out.push_back(std::stod(std::string(t)));
    }
    return out;
}

} // namespace detail

/// Plain-text key=value serialization for pipeline persistence.
inline void write_model(const ArimaModel& model, std::ostream& out) {
    out << "order = " << model.order.p << ',' << model.order.d << ',' << model.order.q << '\n';
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", model.intercept);
    out << "intercept = " << buf << '\n';
    detail::write_values(out, "ar", model.ar);
    detail::write_values(out, "ma", model.ma);
    std::snprintf(buf, sizeof(buf), "%.17g", model.residual_variance);
    out << "residual_variance = " << buf << '\n';
    std::snprintf(buf, sizeof(buf), "%.17g", model.objective);
    out << "objective = " << buf << '\n';
    detail::write_values(out, "tail_w", model.tail_w);
    detail::write_values(out, "tail_e", model.tail_e);
    detail::write_values(out, "integration_tail", model.integration_tail);
    out << "root_warning = " << (model.root_warning ? 1 : 0) << '\n';
}

inline ArimaModel read_model(std::istream& in) {
    ArimaModel model;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const auto key = detail::trim(std::string_view(line).substr(0, eq));
        const auto value = detail::trim(std::string_view(line).substr(eq + 1));
        if (key == "order") {
            const auto v = detail::read_values(value);
            if (v.size() != 3) throw DataError("read_model: bad order");
            model.order = {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2])};
        } else if (key == "intercept") {
            model.intercept = std::stod(std::string(value));
        } else if (key == "ar") {
            model.ar = detail::read_values(value);
        } else if (key == "ma") {
            model.ma = detail::read_values(value);
        } else if (key == "residual_variance") {
            model.residual_variance = std::stod(std::string(value));
        } else if (key == "objective") {
            model.objective = std::stod(std::string(value));
        } else if (key == "tail_w") {
            model.tail_w = detail::read_values(value);
        } else if (key == "tail_e") {
            model.tail_e = detail::read_values(value);
        } else if (key == "integration_tail") {
            model.integration_tail = detail::read_values(value);
        } else if (key == "root_warning") {
            model.root_warning = value == "1";
        }
    }
    return model;
}

} // namespace hurricast
