#include "disbeanet/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "disbeanet/errors.hpp"
#include "disbeanet/eval.hpp"
#include "disbeanet/io_util.hpp"
#include "disbeanet/rng.hpp"

namespace disbeanet::mlp {

using nlohmann::json;

namespace {

constexpr int kModelVersion = 1;

double activate(Activation a, double z) {
    return a == Activation::kTanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

// Derivative in terms of the activation value (tanh) or pre-activation sign.
double activate_grad(Activation a, double act, double z) {
    if (a == Activation::kTanh) return 1.0 - act * act;
    return z > 0.0 ? 1.0 : 0.0;
}

// Per-layer activations and pre-activations kept across backward.
struct ForwardCache {
    std::vector<std::vector<double>> acts;  // acts[0] = input, acts[L] = output
    std::vector<std::vector<double>> zs;    // zs[l] = pre-activation of layer l

    void resize(const Network& net) {
        const int L = net.num_layers();
        acts.resize(static_cast<std::size_t>(L) + 1);
        zs.resize(static_cast<std::size_t>(L));
        acts[0].resize(static_cast<std::size_t>(net.input_size()));
        for (int l = 0; l < L; ++l) {
            acts[static_cast<std::size_t>(l) + 1].resize(
                static_cast<std::size_t>(net.layer_out(l)));
            zs[static_cast<std::size_t>(l)].resize(
                static_cast<std::size_t>(net.layer_out(l)));
        }
    }
};

void forward_cached(const Network& net, std::span<const double> x,
                    ForwardCache& cache) {
    const int L = net.num_layers();
    std::copy(x.begin(), x.end(), cache.acts[0].begin());
    for (int l = 0; l < L; ++l) {
        const auto lu = static_cast<std::size_t>(l);
        const int n_in = net.layer_in(l);
        const int n_out = net.layer_out(l);
        const std::vector<double>& w = net.weights[lu];
        const std::vector<double>& b = net.biases[lu];
        const std::vector<double>& a_prev = cache.acts[lu];
        const bool last = l == L - 1;
        for (int o = 0; o < n_out; ++o) {
            double z = b[static_cast<std::size_t>(o)];
            const double* row = w.data() + static_cast<std::size_t>(o) * n_in;
            for (int i = 0; i < n_in; ++i) {
                z += row[i] * a_prev[static_cast<std::size_t>(i)];
            }
            cache.zs[lu][static_cast<std::size_t>(o)] = z;
            cache.acts[lu + 1][static_cast<std::size_t>(o)] =
                last ? z : activate(net.spec.activation, z);
        }
    }
}

// Accumulates dL/dparams into grads (same shapes as the network), returns
// the sample loss. deltas is scratch sized like the activations.
double backward_accumulate(const Network& net, const ForwardCache& cache,
                           std::span<const double> target, Gradients& grads,
                           std::vector<std::vector<double>>& deltas) {
    const int L = net.num_layers();
    const auto& out = cache.acts[static_cast<std::size_t>(L)];
    const auto K = out.size();

    double sample_loss = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double e = out[k] - target[k];
        sample_loss += e * e;
        // L = mean_k e_k^2, so dL/dout_k = 2 e_k / K; output layer is identity.
        deltas[static_cast<std::size_t>(L) - 1][k] =
            2.0 * e / static_cast<double>(K);
    }
    sample_loss /= static_cast<double>(K);

    for (int l = L - 1; l >= 0; --l) {
        const auto lu = static_cast<std::size_t>(l);
        const int n_in = net.layer_in(l);
        const int n_out = net.layer_out(l);
        const std::vector<double>& a_prev = cache.acts[lu];
        const std::vector<double>& delta = deltas[lu];

        std::vector<double>& gw = grads.weights[lu];
        std::vector<double>& gb = grads.biases[lu];
        for (int o = 0; o < n_out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            gb[static_cast<std::size_t>(o)] += d;
            double* grow = gw.data() + static_cast<std::size_t>(o) * n_in;
            for (int i = 0; i < n_in; ++i) {
                grow[i] += d * a_prev[static_cast<std::size_t>(i)];
            }
        }

        if (l == 0) break;
        // delta_{l-1} = (W_l^T delta_l) .* act'(z_{l-1})
        std::vector<double>& prev_delta = deltas[lu - 1];
        const std::vector<double>& w = net.weights[lu];
        for (int i = 0; i < n_in; ++i) {
            double s = 0.0;
            for (int o = 0; o < n_out; ++o) {
                s += w[static_cast<std::size_t>(o) * n_in + i] *
                     delta[static_cast<std::size_t>(o)];
            }
            prev_delta[static_cast<std::size_t>(i)] =
                s * activate_grad(net.spec.activation,
                                  cache.acts[lu][static_cast<std::size_t>(i)],
                                  cache.zs[lu - 1][static_cast<std::size_t>(i)]);
        }
    }
    return sample_loss;
}

Gradients make_zero_grads(const Network& net) {
    Gradients g;
    g.weights.resize(net.weights.size());
    g.biases.resize(net.biases.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        g.weights[l].assign(net.weights[l].size(), 0.0);
        g.biases[l].assign(net.biases[l].size(), 0.0);
    }
    return g;
}

void zero_grads(Gradients& g) {
    for (auto& w : g.weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : g.biases) std::fill(b.begin(), b.end(), 0.0);
}

std::string activation_name(Activation a) {
    return a == Activation::kTanh ? "tanh" : "relu";
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::kTanh;
    if (name == "relu") return Activation::kRelu;
    throw LoadError("unknown activation: " + name);
}

void check_sample_shapes(const Network& net, const std::vector<TrainSample>& set,
                         const char* which) {
    for (const TrainSample& s : set) {
        if (static_cast<int>(s.y.size()) != net.output_size()) {
            throw ValidationError(std::string(which) +
                                  " sample target size does not match network output");
        }
    }
}

double mean_loss(const Network& net, const std::vector<TrainSample>& set,
                 ForwardCache& cache) {
    double sum = 0.0;
    for (const TrainSample& s : set) {
        forward_cached(net, s.x, cache);
        const auto& out = cache.acts.back();
        double l = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) {
            const double e = out[k] - s.y[k];
            l += e * e;
        }
        sum += l / static_cast<double>(out.size());
    }
    return sum / static_cast<double>(set.size());
}

}  // namespace

void validate(const LayerSpec& spec) {
    if (spec.sizes.size() < 3) {
        throw ValidationError("network needs at least one hidden layer");
    }
    if (spec.sizes.front() != dataset::kNumFeatures) {
        throw ValidationError("input layer must have 7 neurons");
    }
    if (spec.sizes.back() != 2 && spec.sizes.back() != 3) {
        throw ValidationError("output layer must have 2 neurons (3 with sin/cos bearing)");
    }
    for (int s : spec.sizes) {
        if (s < 1) throw ValidationError("layer widths must be >= 1");
    }
}

LayerSpec make_spec(int hidden_width, int hidden_depth, Activation activation,
                    int outputs) {
    if (hidden_depth < 1) throw ValidationError("hidden depth must be >= 1");
    if (hidden_width < 1) throw ValidationError("hidden width must be >= 1");
    LayerSpec spec;
    spec.activation = activation;
    spec.sizes.push_back(dataset::kNumFeatures);
    for (int i = 0; i < hidden_depth; ++i) spec.sizes.push_back(hidden_width);
    spec.sizes.push_back(outputs);
    validate(spec);
    return spec;
}

Network init(const LayerSpec& spec, std::uint64_t seed) {
    validate(spec);
    Network net;
    net.spec = spec;
    net.meta.seed = seed;
    Rng rng(seed);
    const int L = net.num_layers();
    net.weights.resize(static_cast<std::size_t>(L));
    net.biases.resize(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
        const auto lu = static_cast<std::size_t>(l);
        const int n_in = net.layer_in(l);
        const int n_out = net.layer_out(l);
        const double scale = 1.0 / std::sqrt(static_cast<double>(n_in));
        net.weights[lu].resize(static_cast<std::size_t>(n_out) * n_in);
        for (double& w : net.weights[lu]) w = rng.uniform(-scale, scale);
        net.biases[lu].assign(static_cast<std::size_t>(n_out), 0.0);
    }
    return net;
}

std::vector<double> forward(const Network& net, std::span<const double> x) {
    if (static_cast<int>(x.size()) != net.input_size()) {
        throw ValidationError("input size does not match network");
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw ValidationError("non-finite network input");
    }
    ForwardCache cache;
    cache.resize(net);
    forward_cached(net, x, cache);
    return cache.acts.back();
}

double loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size() || pred.empty()) {
        throw ValidationError("loss requires equal nonempty prediction/target");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < pred.size(); ++k) {
        const double e = pred[k] - target[k];
        sum += e * e;
    }
    return sum / static_cast<double>(pred.size());
}

Gradients backward(const Network& net, std::span<const double> x,
                   std::span<const double> target) {
    if (static_cast<int>(x.size()) != net.input_size() ||
        static_cast<int>(target.size()) != net.output_size()) {
        throw ValidationError("backward input/target sizes do not match network");
    }
    ForwardCache cache;
    cache.resize(net);
    forward_cached(net, x, cache);

    Gradients grads = make_zero_grads(net);
    std::vector<std::vector<double>> deltas(cache.zs.size());
    for (std::size_t l = 0; l < deltas.size(); ++l) {
        deltas[l].resize(cache.zs[l].size());
    }
    backward_accumulate(net, cache, target, grads, deltas);
    return grads;
}

std::vector<TrainSample> to_train_samples(const dataset::NormStats& stats,
                                          const std::vector<dataset::LabeledSample>& samples) {
    std::vector<TrainSample> out;
    out.reserve(samples.size());
    for (const dataset::LabeledSample& s : samples) {
        dataset::NormalizedSample n = dataset::apply_norm(stats, s);
        out.push_back(TrainSample{n.x, std::move(n.y)});
    }
    return out;
}

TrainResult train(Network& net, const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& val_set, const TrainConfig& cfg) {
    if (train_set.empty()) throw ValidationError("training set is empty");
    if (cfg.epochs < 1) throw ValidationError("epochs must be >= 1");
    if (cfg.batch_size < 1) throw ValidationError("batch size must be >= 1");
    if (!(cfg.learning_rate >= 0.0)) throw ValidationError("learning rate must be >= 0");
    check_sample_shapes(net, train_set, "train");
    check_sample_shapes(net, val_set, "val");

    const std::size_t n = train_set.size();
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    ForwardCache cache;
    cache.resize(net);
    Gradients grads = make_zero_grads(net);
    std::vector<std::vector<double>> deltas(cache.zs.size());
    for (std::size_t l = 0; l < deltas.size(); ++l) {
        deltas[l].resize(cache.zs[l].size());
    }

    // Optimizer state, shaped like the parameters.
    Gradients vel = make_zero_grads(net);       // SGD momentum / Adam m
    Gradients adam_v = make_zero_grads(net);    // Adam second moment
    long adam_t = 0;

    TrainResult result;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best_weights = net.weights;
    std::vector<std::vector<double>> best_biases = net.biases;
    long since_best = 0;

    for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss_sum = 0.0;

        for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
            const auto batch_n = static_cast<double>(end - start);
            zero_grads(grads);
            for (std::size_t i = start; i < end; ++i) {
                const TrainSample& s = train_set[order[i]];
                forward_cached(net, s.x, cache);
                epoch_loss_sum += backward_accumulate(net, cache, s.y, grads, deltas);
            }

            const double inv_batch = 1.0 / batch_n;
            if (cfg.optimizer == Optimizer::kSgdMomentum) {
                for (std::size_t l = 0; l < net.weights.size(); ++l) {
                    for (std::size_t j = 0; j < net.weights[l].size(); ++j) {
                        const double g = grads.weights[l][j] * inv_batch;
                        vel.weights[l][j] = cfg.momentum * vel.weights[l][j] - cfg.learning_rate * g;
                        net.weights[l][j] += vel.weights[l][j];
                    }
                    for (std::size_t j = 0; j < net.biases[l].size(); ++j) {
                        const double g = grads.biases[l][j] * inv_batch;
                        vel.biases[l][j] = cfg.momentum * vel.biases[l][j] - cfg.learning_rate * g;
                        net.biases[l][j] += vel.biases[l][j];
                    }
                }
            } else {
                ++adam_t;
                const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam_t));
                const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam_t));
                for (std::size_t l = 0; l < net.weights.size(); ++l) {
                    auto step = [&](std::vector<double>& p, std::vector<double>& m,
                                    std::vector<double>& v, const std::vector<double>& graw) {
                        for (std::size_t j = 0; j < p.size(); ++j) {
                            const double g = graw[j] * inv_batch;
                            m[j] = cfg.adam_beta1 * m[j] + (1.0 - cfg.adam_beta1) * g;
                            v[j] = cfg.adam_beta2 * v[j] + (1.0 - cfg.adam_beta2) * g * g;
                            p[j] -= cfg.learning_rate * (m[j] / bc1) /
                                    (std::sqrt(v[j] / bc2) + cfg.adam_eps);
                        }
                    };
                    step(net.weights[l], vel.weights[l], adam_v.weights[l], grads.weights[l]);
                    step(net.biases[l], vel.biases[l], adam_v.biases[l], grads.biases[l]);
                }
            }
        }

        const double train_loss = epoch_loss_sum / static_cast<double>(n);
        result.train_loss.push_back(train_loss);
        if (!std::isfinite(train_loss)) {
            throw TrainingDiverged(epoch, "training diverged at epoch " +
                                              std::to_string(epoch));
        }

        if (!val_set.empty()) {
            const double val_loss = mean_loss(net, val_set, cache);
            result.val_loss.push_back(val_loss);
            if (!std::isfinite(val_loss)) {
                throw TrainingDiverged(epoch, "validation loss diverged at epoch " +
                                                  std::to_string(epoch));
            }
            if (val_loss < best_val) {
                best_val = val_loss;
                best_weights = net.weights;
                best_biases = net.biases;
                result.best_epoch = epoch;
                since_best = 0;
            } else {
                ++since_best;
            }
            if (cfg.patience >= 0 && since_best > cfg.patience) {
                result.epochs_run = epoch + 1;
                break;
            }
        }
        result.epochs_run = epoch + 1;
    }

    if (!val_set.empty()) {
        net.weights = std::move(best_weights);
        net.biases = std::move(best_biases);
        result.best_val_loss = best_val;
    } else {
        result.best_val_loss = result.train_loss.back();
        result.best_epoch = result.epochs_run - 1;
    }
    net.meta.epochs_run = result.epochs_run;
    net.meta.best_val_loss = result.best_val_loss;
    return result;
}

Prediction predict_features(const Network& net, const dataset::FeatureVector& features) {
    if (!net.norm) {
        throw ValidationError("model carries no normalization stats; train it first");
    }
    const auto x = dataset::apply_feature_norm(*net.norm, features);
    const std::vector<double> out = forward(net, x);
    auto [distance, bearing] = dataset::invert_norm(*net.norm, out);

    Prediction p;
    p.distance_clamped = distance < 0.0;
    p.rb.distance_nm = p.distance_clamped ? 0.0 : distance;
    p.rb.bearing_deg = geodesy::wrap_deg_360(bearing);
    return p;
}

Prediction predict(const Network& net, const dataset::Detection& d,
                   int frame_w, int frame_h) {
    return predict_features(net, dataset::extract_features(d, frame_w, frame_h));
}

void save_model(const Network& net, const std::string& path) {
    json j;
    j["version"] = kModelVersion;
    j["sizes"] = net.spec.sizes;
    j["activation"] = activation_name(net.spec.activation);
    j["weights"] = net.weights;
    j["biases"] = net.biases;
    if (net.norm) {
        const dataset::NormStats& s = *net.norm;
        j["norm_stats"] = {
            {"feature_mean", s.feature_mean},
            {"feature_sd", s.feature_sd},
            {"target_mean", s.target_mean},
            {"target_sd", s.target_sd},
            {"bearing_encoding",
             s.encoding == dataset::BearingEncoding::kDegrees ? "degrees" : "sincos"},
        };
    } else {
        j["norm_stats"] = nullptr;
    }
    j["metadata"] = {
        {"seed", net.meta.seed},
        {"epochs_run", net.meta.epochs_run},
        {"best_val_loss", std::isfinite(net.meta.best_val_loss)
                              ? json(net.meta.best_val_loss)
                              : json(nullptr)},
    };
    io::atomic_write(path, j.dump(2) + "\n");
}

Network load_model(const std::string& path) {
    json j;
    try {
        j = json::parse(io::read_file(path));
    } catch (const IoError& e) {
        throw LoadError(e.what());
    } catch (const json::exception& e) {
        throw LoadError(path + ": " + e.what());
    }

    try {
        if (j.at("version").get<int>() != kModelVersion) {
            throw LoadError(path + ": unsupported model version " +
                            j.at("version").dump());
        }
        Network net;
        net.spec.sizes = j.at("sizes").get<std::vector<int>>();
        net.spec.activation = activation_from_name(j.at("activation").get<std::string>());
        try {
            validate(net.spec);
        } catch (const ValidationError& e) {
            throw LoadError(path + ": " + e.what());
        }

        net.weights = j.at("weights").get<std::vector<std::vector<double>>>();
        net.biases = j.at("biases").get<std::vector<std::vector<double>>>();
        const auto L = static_cast<std::size_t>(net.num_layers());
        if (net.weights.size() != L || net.biases.size() != L) {
            throw LoadError(path + ": layer count does not match sizes");
        }
        for (int l = 0; l < net.num_layers(); ++l) {
            const auto lu = static_cast<std::size_t>(l);
            const auto want_w = static_cast<std::size_t>(net.layer_out(l)) *
                                static_cast<std::size_t>(net.layer_in(l));
            if (net.weights[lu].size() != want_w ||
                net.biases[lu].size() != static_cast<std::size_t>(net.layer_out(l))) {
                throw LoadError(path + ": weight/bias shape mismatch in layer " +
                                std::to_string(l));
            }
        }
        for (const auto& w : net.weights) {
            for (double v : w) {
                if (!std::isfinite(v)) throw LoadError(path + ": non-finite weight");
            }
        }

        if (!j.at("norm_stats").is_null()) {
            const json& ns = j.at("norm_stats");
            dataset::NormStats s;
            const auto fm = ns.at("feature_mean").get<std::vector<double>>();
            const auto fs = ns.at("feature_sd").get<std::vector<double>>();
            if (fm.size() != dataset::kNumFeatures || fs.size() != dataset::kNumFeatures) {
                throw LoadError(path + ": norm stats must cover 7 features");
            }
            std::copy(fm.begin(), fm.end(), s.feature_mean.begin());
            std::copy(fs.begin(), fs.end(), s.feature_sd.begin());
            s.target_mean = ns.at("target_mean").get<std::vector<double>>();
            s.target_sd = ns.at("target_sd").get<std::vector<double>>();
            const auto enc = ns.at("bearing_encoding").get<std::string>();
            if (enc == "degrees") {
                s.encoding = dataset::BearingEncoding::kDegrees;
            } else if (enc == "sincos") {
                s.encoding = dataset::BearingEncoding::kSinCos;
            } else {
                throw LoadError(path + ": unknown bearing encoding " + enc);
            }
            if (s.target_mean.size() != s.target_sd.size() ||
                static_cast<int>(s.target_mean.size()) !=
                    (s.encoding == dataset::BearingEncoding::kDegrees ? 2 : 3)) {
                throw LoadError(path + ": target stats size mismatch");
            }
            net.norm = std::move(s);
        }

        const json& meta = j.at("metadata");
        net.meta.seed = meta.at("seed").get<std::uint64_t>();
        net.meta.epochs_run = meta.at("epochs_run").get<long>();
        net.meta.best_val_loss =
            meta.at("best_val_loss").is_null()
                ? std::numeric_limits<double>::quiet_NaN()
                : meta.at("best_val_loss").get<double>();
        return net;
    } catch (const json::exception& e) {
        throw LoadError(path + ": " + e.what());
    }
}

std::vector<SweepRow> hidden_layer_sweep(const std::vector<TrainSample>& train_set,
                                         const std::vector<TrainSample>& val_set,
                                         const dataset::NormStats& stats,
                                         int hidden_width,
                                         const std::vector<int>& depths,
                                         const TrainConfig& cfg) {
    if (depths.empty()) throw ValidationError("depth list is empty");
    if (val_set.empty()) throw ValidationError("sweep needs a validation set");

    std::vector<SweepRow> rows;
    rows.reserve(depths.size());
    for (int depth : depths) {
        Network net = init(make_spec(hidden_width, depth, Activation::kTanh,
                                     stats.target_dim()),
                           cfg.seed);
        TrainResult r;
        try {
            r = train(net, train_set, val_set, cfg);
        } catch (const TrainingDiverged& e) {
            throw TrainingDiverged(e.epoch, "depth " + std::to_string(depth) +
                                                ": " + e.what());
        }

        std::vector<double> dist_pred, dist_true, brg_pred, brg_true;
        dist_pred.reserve(val_set.size());
        for (const TrainSample& s : val_set) {
            const std::vector<double> out = forward(net, s.x);
            const auto [dp, bp] = dataset::invert_norm(stats, out);
            const auto [dt, bt] = dataset::invert_norm(stats, s.y);
            dist_pred.push_back(dp);
            dist_true.push_back(dt);
            brg_pred.push_back(geodesy::wrap_deg_360(bp));
            brg_true.push_back(geodesy::wrap_deg_360(bt));
        }
        SweepRow row;
        row.depth = depth;
        row.val_rmse_norm = std::sqrt(r.best_val_loss);
        row.val_rmse_distance_nm = eval::rmse(dist_pred, dist_true);
        row.val_rmse_bearing_deg = eval::circular_rmse_deg(brg_pred, brg_true);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace disbeanet::mlp
