#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hurricast/common.hpp"
#include "hurricast/rng.hpp"
#include "hurricast/cluster.hpp"
#include "hurricast/trackprep.hpp"

namespace hurricast {

/// Row-major dense matrix, minimal surface for the network math.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct Architecture {
    std::vector<int> widths = {60, 128, 64, 32, 16}; // encoder; decoder mirrors
    bool batch_norm = true;

    int input_dim() const { return widths.front(); }
    int latent_dim() const { return widths.back(); }
};

struct TrainConfig {
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int batch_size = 32;
    int epochs = 500;
    double input_noise_std = 0.01; // denoising noise on inputs, targets stay clean
    int input_noise_period = 2;    // applied every Nth epoch (1-based)
    std::uint64_t rng_seed = 0;
};

struct PerturbationConfig {
    double mean = 0.9;
    double stddev = 0.1;
    // support is the half-open interval (lo, hi]
    double lo = 0.0;
    double hi = 1.0;
    bool per_dimension = true;
};

constexpr double kBatchNormEpsilon = 1e-5;
constexpr double kBatchNormMomentum = 0.9; // running = m*running + (1-m)*batch

namespace detail {

struct DenseLayer {
    int in = 0, out = 0;
    std::vector<double> weights; // out x in, row-major
    std::vector<double> bias;    // out
};

struct BatchNormLayer {
    int dim = 0;
    std::vector<double> gamma, beta;
    std::vector<double> running_mean, running_var;
};

struct Layer {
    DenseLayer dense;
    bool relu = false;
    bool has_norm = false;
    BatchNormLayer norm;
};

} // namespace detail

/// Full parameter set: encoder stages followed by decoder stages. Batch
/// normalization sits after stages 1 and 2 of each half (never on the final
/// stage of a half); the decoder's last stage is linear.
struct NetworkParams {
    Architecture arch;
    std::vector<detail::Layer> layers;

    std::size_t encoder_stages() const { return arch.widths.size() - 1; }
};

namespace detail {

inline Layer make_layer(int in, int out, bool relu, bool with_norm) {
    Layer layer;
    layer.dense.in = in;
    layer.dense.out = out;
    layer.dense.weights.assign(static_cast<std::size_t>(in) * out, 0.0);
    layer.dense.bias.assign(static_cast<std::size_t>(out), 0.0);
    layer.relu = relu;
    layer.has_norm = with_norm;
    if (with_norm) {
        layer.norm.dim = out;
        layer.norm.gamma.assign(static_cast<std::size_t>(out), 1.0);
        layer.norm.beta.assign(static_cast<std::size_t>(out), 0.0);
        layer.norm.running_mean.assign(static_cast<std::size_t>(out), 0.0);
        layer.norm.running_var.assign(static_cast<std::size_t>(out), 1.0);
    }
    return layer;
}

} // namespace detail

inline NetworkParams make_network(const Architecture& arch) {
    if (arch.widths.size() < 2) throw DataError("make_network: need at least one layer");
    NetworkParams params;
    params.arch = arch;
    const std::size_t L = arch.widths.size() - 1;
    for (std::size_t i = 0; i < L; ++i) {
        const bool norm = arch.batch_norm && i < 2 && i + 1 < L;
        params.layers.push_back(detail::make_layer(arch.widths[i], arch.widths[i + 1], true, norm));
    }
    std::vector<int> rw(arch.widths.rbegin(), arch.widths.rend());
    for (std::size_t i = 0; i < L; ++i) {
        const bool last = i + 1 == L;
        const bool norm = arch.batch_norm && i < 2 && !last;
        params.layers.push_back(detail::make_layer(rw[i], rw[i + 1], !last, norm));
    }
    return params;
}

/// He-normal weight initialization from the given seed; biases stay zero.
inline NetworkParams init_network(const Architecture& arch, std::uint64_t seed) {
    NetworkParams params = make_network(arch);
    Rng rng(derive_seed(seed, "autoenc/init"));
    for (auto& layer : params.layers) {
        const double std = std::sqrt(2.0 / layer.dense.in);
        for (auto& w : layer.dense.weights) w = normal(rng, 0.0, std);
    }
    return params;
}

namespace detail {

struct StageCache {
    Matrix input;      // X
    Matrix pre_act;    // Z = X W^T + b
    Matrix activated;  // A = relu(Z) (or Z when linear)
    // batch-norm intermediates (training mode)
    std::vector<double> mean, var;
    Matrix normalized; // x_hat
    Matrix output;     // gamma * x_hat + beta (or A when no norm)
};

inline Matrix dense_forward(const DenseLayer& layer, const Matrix& x) {
    Matrix z(x.rows, static_cast<std::size_t>(layer.out));
    for (std::size_t r = 0; r < x.rows; ++r)
        for (int o = 0; o < layer.out; ++o) {
            double acc = layer.bias[static_cast<std::size_t>(o)];
            const double* w = layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
            const double* xr = x.data.data() + r * x.cols;
            for (int i = 0; i < layer.in; ++i) acc += w[i] * xr[i];
            z.at(r, static_cast<std::size_t>(o)) = acc;
        }
    return z;
}

inline void stage_forward(Layer& layer, const Matrix& x, bool training, bool update_running,
                          StageCache& cache) {
    cache.input = x;
    cache.pre_act = dense_forward(layer.dense, x);
    cache.activated = cache.pre_act;
    if (layer.relu)
        for (auto& v : cache.activated.data) v = std::max(v, 0.0);

    if (!layer.has_norm) {
        cache.output = cache.activated;
        return;
    }
    const std::size_t dim = static_cast<std::size_t>(layer.norm.dim);
    const std::size_t m = cache.activated.rows;
    cache.mean.assign(dim, 0.0);
    cache.var.assign(dim, 0.0);
    if (training) {
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t f = 0; f < dim; ++f) cache.mean[f] += cache.activated.at(r, f);
        for (auto& v : cache.mean) v /= static_cast<double>(m);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t f = 0; f < dim; ++f) {
                const double d = cache.activated.at(r, f) - cache.mean[f];
                cache.var[f] += d * d;
            }
        for (auto& v : cache.var) v /= static_cast<double>(m);
        if (update_running)
            for (std::size_t f = 0; f < dim; ++f) {
                layer.norm.running_mean[f] = kBatchNormMomentum * layer.norm.running_mean[f] +
                                             (1.0 - kBatchNormMomentum) * cache.mean[f];
                layer.norm.running_var[f] = kBatchNormMomentum * layer.norm.running_var[f] +
                                            (1.0 - kBatchNormMomentum) * cache.var[f];
            }
    } else {
        cache.mean = layer.norm.running_mean;
        cache.var = layer.norm.running_var;
    }
    cache.normalized = Matrix(m, dim);
    cache.output = Matrix(m, dim);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t f = 0; f < dim; ++f) {
            const double xhat = (cache.activated.at(r, f) - cache.mean[f]) /
                                std::sqrt(cache.var[f] + kBatchNormEpsilon);
            cache.normalized.at(r, f) = xhat;
            cache.output.at(r, f) = layer.norm.gamma[f] * xhat + layer.norm.beta[f];
        }
}

struct StageGrads {
    std::vector<double> d_weights, d_bias, d_gamma, d_beta;
};

/// Backward through one stage; returns dL/d(input).
inline Matrix stage_backward(const Layer& layer, const StageCache& cache, const Matrix& d_out,
                             bool training, StageGrads& grads) {
    Matrix d_act = d_out;
    if (layer.has_norm) {
        const std::size_t dim = static_cast<std::size_t>(layer.norm.dim);
        const std::size_t m = cache.output.rows;
        grads.d_gamma.assign(dim, 0.0);
        grads.d_beta.assign(dim, 0.0);
        Matrix d_xhat(m, dim);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t f = 0; f < dim; ++f) {
                grads.d_gamma[f] += d_out.at(r, f) * cache.normalized.at(r, f);
                grads.d_beta[f] += d_out.at(r, f);
                d_xhat.at(r, f) = d_out.at(r, f) * layer.norm.gamma[f];
            }
        d_act = Matrix(m, dim);
        if (training) {
            // gradients flow through the batch statistics
            for (std::size_t f = 0; f < dim; ++f) {
                const double inv_std = 1.0 / std::sqrt(cache.var[f] + kBatchNormEpsilon);
                double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
                for (std::size_t r = 0; r < m; ++r) {
                    sum_dxhat += d_xhat.at(r, f);
                    sum_dxhat_xhat += d_xhat.at(r, f) * cache.normalized.at(r, f);
                }
                for (std::size_t r = 0; r < m; ++r)
                    d_act.at(r, f) = inv_std / static_cast<double>(m) *
                                     (static_cast<double>(m) * d_xhat.at(r, f) - sum_dxhat -
                                      cache.normalized.at(r, f) * sum_dxhat_xhat);
            }
        } else {
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t f = 0; f < dim; ++f)
                    d_act.at(r, f) = d_xhat.at(r, f) / std::sqrt(cache.var[f] + kBatchNormEpsilon);
        }
    }

    Matrix d_pre = d_act;
    if (layer.relu)
        for (std::size_t i = 0; i < d_pre.data.size(); ++i)
            if (cache.pre_act.data[i] <= 0.0) d_pre.data[i] = 0.0;

    const auto in = static_cast<std::size_t>(layer.dense.in);
    const auto out = static_cast<std::size_t>(layer.dense.out);
    grads.d_weights.assign(in * out, 0.0);
    grads.d_bias.assign(out, 0.0);
    Matrix d_in(cache.input.rows, in);
    for (std::size_t r = 0; r < cache.input.rows; ++r)
        for (std::size_t o = 0; o < out; ++o) {
            const double g = d_pre.at(r, o);
            grads.d_bias[o] += g;
            double* dw = grads.d_weights.data() + o * in;
            const double* xr = cache.input.data.data() + r * in;
            const double* w = layer.dense.weights.data() + o * in;
            double* di = d_in.data.data() + r * in;
            for (std::size_t i = 0; i < in; ++i) {
                dw[i] += g * xr[i];
                di[i] += g * w[i];
            }
        }
    return d_in;
}

} // namespace detail

struct ForwardResult {
    Matrix latents;
    Matrix reconstructions;
};

/// Run the network. Training mode normalizes with batch statistics (without
/// touching the running averages); inference mode uses running statistics
/// and is a deterministic affine map.
inline ForwardResult forward(const NetworkParams& params, const Matrix& batch, bool training) {
    if (batch.cols != static_cast<std::size_t>(params.arch.input_dim()))
        throw DataError("forward: batch row length does not match the input width");
    ForwardResult result;
    Matrix x = batch;
    detail::StageCache cache;
    for (std::size_t s = 0; s < params.layers.size(); ++s) {
        auto& layer = const_cast<detail::Layer&>(params.layers[s]);
        detail::stage_forward(layer, x, training, /*update_running=*/false, cache);
        x = cache.output;
        if (s + 1 == params.encoder_stages()) result.latents = x;
    }
    result.reconstructions = std::move(x);
    return result;
}

struct NetworkGradients {
    std::vector<detail::StageGrads> stages;
};

/// Mean-squared-error loss over the batch plus gradients for every trainable
/// tensor, by reverse-mode accumulation through all stages including batch
/// normalization. `update_running` folds batch statistics into the running
/// averages (used by the training loop, not by gradient checks).
inline double loss_and_gradients(NetworkParams& params, const Matrix& inputs,
                                 const Matrix& targets, bool training, bool update_running,
                                 NetworkGradients& grads) {
    const std::size_t n_stages = params.layers.size();
    std::vector<detail::StageCache> caches(n_stages);
    Matrix x = inputs;
    for (std::size_t s = 0; s < n_stages; ++s) {
        detail::stage_forward(params.layers[s], x, training, update_running, caches[s]);
        x = caches[s].output;
    }

    const double scale = 1.0 / static_cast<double>(x.data.size());
    double loss = 0.0;
    Matrix d_out(x.rows, x.cols);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double diff = x.data[i] - targets.data[i];
        loss += diff * diff * scale;
        d_out.data[i] = 2.0 * diff * scale;
    }

    grads.stages.assign(n_stages, {});
    for (std::size_t s = n_stages; s-- > 0;)
        d_out = detail::stage_backward(params.layers[s], caches[s], d_out, training,
                                       grads.stages[s]);
    return loss;
}

namespace detail {

struct AdamState {
    std::vector<std::vector<double>> m, v; // one slot per trainable tensor
    long step = 0;
};

template <typename Fn>
inline void for_each_trainable(NetworkParams& params, NetworkGradients* grads, Fn&& fn) {
    for (std::size_t s = 0; s < params.layers.size(); ++s) {
        auto& layer = params.layers[s];
        StageGrads* g = grads ? &grads->stages[s] : nullptr;
        fn(layer.dense.weights, g ? &g->d_weights : nullptr);
        fn(layer.dense.bias, g ? &g->d_bias : nullptr);
        if (layer.has_norm) {
            fn(layer.norm.gamma, g ? &g->d_gamma : nullptr);
            fn(layer.norm.beta, g ? &g->d_beta : nullptr);
        }
    }
}

} // namespace detail

/// Flatten trainable parameters (weights, biases, batch-norm scale/shift) —
/// used by tests that difference the loss numerically.
inline std::vector<double> flatten_parameters(const NetworkParams& params) {
    std::vector<double> out;
    detail::for_each_trainable(const_cast<NetworkParams&>(params), nullptr,
                               [&](std::vector<double>& tensor, std::vector<double>*) {
                                   out.insert(out.end(), tensor.begin(), tensor.end());
                               });
    return out;
}

inline void unflatten_parameters(NetworkParams& params, const std::vector<double>& flat) {
    std::size_t pos = 0;
    detail::for_each_trainable(params, nullptr,
                               [&](std::vector<double>& tensor, std::vector<double>*) {
                                   std::copy(flat.begin() + static_cast<long>(pos),
                                             flat.begin() + static_cast<long>(pos + tensor.size()),
                                             tensor.begin());
                                   pos += tensor.size();
                               });
    if (pos != flat.size()) throw DataError("unflatten_parameters: size mismatch");
}

inline std::vector<double> flatten_gradients(NetworkParams& params, NetworkGradients& grads) {
    std::vector<double> out;
    detail::for_each_trainable(params, &grads,
                               [&](std::vector<double>&, std::vector<double>* g) {
                                   out.insert(out.end(), g->begin(), g->end());
                               });
    return out;
}

struct TrainResult {
    NetworkParams params;
    std::vector<double> loss_history; // per-epoch mean training loss
};

/// Minibatch Adam on MSE. On noise-period epochs the inputs receive additive
/// Gaussian noise while targets stay clean. Fully deterministic under the
/// config seed (init, batch order, and noise all derive from it).
inline TrainResult train(const std::vector<NormalizedTrack>& tracks, const TrainConfig& config,
                         const Architecture& arch = {}) {
    if (tracks.size() < static_cast<std::size_t>(config.batch_size))
        throw DataError("train: need at least batch_size tracks");
    const int dim = arch.input_dim();
    for (const auto& t : tracks)
        if (t.values.size() != static_cast<std::size_t>(dim))
            throw DataError("train: track feature length does not match the input width");

    TrainResult result;
    result.params = init_network(arch, config.rng_seed);
    Rng order_rng(derive_seed(config.rng_seed, "autoenc/batch_order"));
    Rng noise_rng(derive_seed(config.rng_seed, "autoenc/input_noise"));

    detail::AdamState adam;
    detail::for_each_trainable(result.params, nullptr,
                               [&](std::vector<double>& tensor, std::vector<double>*) {
                                   adam.m.emplace_back(tensor.size(), 0.0);
                                   adam.v.emplace_back(tensor.size(), 0.0);
                               });

    const std::size_t n = tracks.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    NetworkGradients grads;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i = n - 1; i > 0; --i)
            std::swap(order[i], order[uniform_index(order_rng, i + 1)]);
        // noise lands on epoch 1 and every Nth epoch after, so a run whose
        // length is a multiple of the period always ends on a clean epoch
        const bool noisy = config.input_noise_period > 0 && config.input_noise_std > 0.0 &&
                           (epoch - 1) % config.input_noise_period == 0;

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t rows = std::min(static_cast<std::size_t>(config.batch_size), n - start);
            Matrix inputs(rows, static_cast<std::size_t>(dim));
            Matrix targets(rows, static_cast<std::size_t>(dim));
            for (std::size_t r = 0; r < rows; ++r) {
                const auto& values = tracks[order[start + r]].values;
                std::copy(values.begin(), values.end(),
                          targets.data.begin() + static_cast<long>(r * static_cast<std::size_t>(dim)));
            }
            inputs.data = targets.data;
            if (noisy)
                for (auto& v : inputs.data) v += normal(noise_rng, 0.0, config.input_noise_std);

            const double loss = loss_and_gradients(result.params, inputs, targets,
                                                   /*training=*/true, /*update_running=*/true, grads);
            if (!std::isfinite(loss))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));
            epoch_loss += loss * static_cast<double>(rows);

            ++adam.step;
            const double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(adam.step));
            const double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(adam.step));
            std::size_t slot = 0;
            detail::for_each_trainable(
                result.params, &grads, [&](std::vector<double>& tensor, std::vector<double>* g) {
                    auto& m = adam.m[slot];
                    auto& v = adam.v[slot];
                    for (std::size_t i = 0; i < tensor.size(); ++i) {
                        m[i] = config.adam_beta1 * m[i] + (1.0 - config.adam_beta1) * (*g)[i];
                        v[i] = config.adam_beta2 * v[i] + (1.0 - config.adam_beta2) * (*g)[i] * (*g)[i];
                        tensor[i] -= config.learning_rate * (m[i] / bc1) /
                                     (std::sqrt(v[i] / bc2) + config.adam_epsilon);
                    }
                    ++slot;
                });
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(n));
    }
    return result;
}

/// Encode a seed track, scale each latent dimension by a truncated-normal
/// multiplier from (0, 1], decode, and clamp features to [0, 1]. With
/// stddev 0 and mean 1 the output is the unperturbed reconstruction.
inline NormalizedTrack perturb_and_decode(const NetworkParams& params,
                                          const NormalizedTrack& seed_track,
                                          const PerturbationConfig& perturbation, Rng& rng) {
    Matrix batch(1, seed_track.values.size());
    batch.data = seed_track.values;
    Matrix latent;
    {
        Matrix x = batch;
        detail::StageCache cache;
        for (std::size_t s = 0; s < params.encoder_stages(); ++s) {
            auto& layer = const_cast<detail::Layer&>(params.layers[s]);
            detail::stage_forward(layer, x, /*training=*/false, false, cache);
            x = cache.output;
        }
        latent = std::move(x);
    }

    if (perturbation.per_dimension) {
        for (auto& z : latent.data)
            z *= truncated_normal(rng, perturbation.mean, perturbation.stddev, perturbation.lo,
                                  perturbation.hi);
    } else {
        const double mult = truncated_normal(rng, perturbation.mean, perturbation.stddev,
                                             perturbation.lo, perturbation.hi);
        for (auto& z : latent.data) z *= mult;
    }

    Matrix x = latent;
    detail::StageCache cache;
    for (std::size_t s = params.encoder_stages(); s < params.layers.size(); ++s) {
        auto& layer = const_cast<detail::Layer&>(params.layers[s]);
        detail::stage_forward(layer, x, /*training=*/false, false, cache);
        x = cache.output;
    }

    NormalizedTrack out;
    out.storm_id = seed_track.storm_id;
    out.values = std::move(x.data);
    for (auto& v : out.values) v = std::clamp(v, 0.0, 1.0);
    return out;
}

/// One perturbed decode per planned seed replicate, in plan order.
inline std::vector<NormalizedTrack> synthesize(const NetworkParams& params, const SeedPlan& plan,
                                               const std::vector<NormalizedTrack>& tracks,
                                               const PerturbationConfig& perturbation, Rng& rng) {
    std::vector<NormalizedTrack> out;
    out.reserve(plan.entries.size());
    for (std::size_t i = 0; i < plan.entries.size(); ++i) {
        const auto& entry = plan.entries[i];
        auto synth = perturb_and_decode(params, tracks[entry.track_index], perturbation, rng);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "SYN%04zu_%s", i, synth.storm_id.c_str());
        synth.storm_id = buf;
        out.push_back(std::move(synth));
    }
    return out;
}

/// Versioned flat text tensor dump (name, shape, row-major values).
inline void write_network(const NetworkParams& params, std::ostream& out) {
    out << "hurricast-autoencoder v1\n";
    out << "widths";
    for (int w : params.arch.widths) out << ' ' << w;
    out << "\nbatch_norm " << (params.arch.batch_norm ? 1 : 0) << '\n';
    char buf[40];
    const auto tensor = [&](const std::string& name, const std::vector<double>& values,
                            std::size_t rows, std::size_t cols) {
        out << "tensor " << name << ' ' << rows << ' ' << cols << '\n';
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", values[r * cols + c]);
                out << buf << (c + 1 == cols ? '\n' : ' ');
            }
        }
    };
    for (std::size_t s = 0; s < params.layers.size(); ++s) {
        const auto& layer = params.layers[s];
        const std::string prefix = "stage" + std::to_string(s);
        tensor(prefix + ".weights", layer.dense.weights,
               static_cast<std::size_t>(layer.dense.out), static_cast<std::size_t>(layer.dense.in));
        tensor(prefix + ".bias", layer.dense.bias, 1, layer.dense.bias.size());
        if (layer.has_norm) {
            tensor(prefix + ".gamma", layer.norm.gamma, 1, layer.norm.gamma.size());
            tensor(prefix + ".beta", layer.norm.beta, 1, layer.norm.beta.size());
            tensor(prefix + ".running_mean", layer.norm.running_mean, 1,
                   layer.norm.running_mean.size());
            tensor(prefix + ".running_var", layer.norm.running_var, 1,
                   layer.norm.running_var.size());
        }
    }
}

inline NetworkParams read_network(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "hurricast-autoencoder v1")
        throw DataError("read_network: bad version header");
    Architecture arch;
    arch.widths.clear();
    std::string word;
    {
        std::getline(in, line);
        std::istringstream ls(line);
        ls >> word;
        if (word != "widths") throw DataError("read_network: missing widths");
        int w;
        while (ls >> w) arch.widths.push_back(w);
        std::getline(in, line);
        std::istringstream bs(line);
        int flag;
        bs >> word >> flag;
        if (word != "batch_norm") throw DataError("read_network: missing batch_norm");
        arch.batch_norm = flag != 0;
    }
    NetworkParams params = make_network(arch);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag, name;
        std::size_t rows, cols;
        ls >> tag >> name >> rows >> cols;
        if (tag != "tensor") throw DataError("read_network: expected tensor, got '" + line + "'");
        std::vector<double> values(rows * cols);
        for (auto& v : values)
            if (!(in >> v)) throw DataError("read_network: truncated tensor " + name);
        in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');

        const auto dot = name.find('.');
        const std::size_t stage = std::stoul(name.substr(5, dot - 5));
        const std::string field = name.substr(dot + 1);
        if (stage >= params.layers.size()) throw DataError("read_network: bad stage in " + name);
        auto& layer = params.layers[stage];
        if (field == "weights") layer.dense.weights = std::move(values);
        else if (field == "bias") layer.dense.bias = std::move(values);
        else if (field == "gamma") layer.norm.gamma = std::move(values);
        else if (field == "beta") layer.norm.beta = std::move(values);
        else if (field == "running_mean") layer.norm.running_mean = std::move(values);
        else if (field == "running_var") layer.norm.running_var = std::move(values);
        else throw DataError("read_network: unknown tensor " + name);
    }
    return params;
}

inline void write_loss_history(const std::vector<double>& history, std::ostream& out) {
    out << "epoch,loss\n";
    char buf[48];
    for (std::size_t i = 0; i < history.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, history[i]);
        out << buf;
    }
}

} // namespace hurricast
