#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "disbeanet/dataset.hpp"
#include "disbeanet/geodesy.hpp"

namespace disbeanet::mlp {

enum class Activation { kTanh, kRelu };

// Layer widths, input to output: first entry 7, last 2 (3 with sin/cos
// bearing encoding), at least one hidden layer in between. The hidden
// activation applies to every layer except the identity output layer.
struct LayerSpec {
    std::vector<int> sizes;
    Activation activation = Activation::kTanh;
};

void validate(const LayerSpec& spec);

LayerSpec make_spec(int hidden_width, int hidden_depth,
                    Activation activation = Activation::kTanh,
                    int outputs = 2);

struct NetworkMeta {
    std::uint64_t seed = 0;
    long epochs_run = 0;
    double best_val_loss = 0.0;
};

struct Network {
    LayerSpec spec;
    // weights[l] is row-major (out x in) for layer l; biases[l] has out entries.
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
    std::optional<dataset::NormStats> norm;
    NetworkMeta meta;

    int num_layers() const { return static_cast<int>(spec.sizes.size()) - 1; }
    int layer_in(int l) const { return spec.sizes[l]; }
    int layer_out(int l) const { return spec.sizes[l + 1]; }
    int input_size() const { return spec.sizes.front(); }
    int output_size() const { return spec.sizes.back(); }
};

// Weights uniform in +-1/sqrt(fan_in), biases zero, deterministic per seed.
Network init(const LayerSpec& spec, std::uint64_t seed);

std::vector<double> forward(const Network& net, std::span<const double> x);

// Mean of squared componentwise errors.
double loss(std::span<const double> pred, std::span<const double> target);

struct Gradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};

// Exact reverse-mode gradients of loss(forward(net, x), target) with
// respect to every weight and bias.
Gradients backward(const Network& net, std::span<const double> x,
                   std::span<const double> target);

enum class Optimizer { kSgdMomentum, kAdam };

struct TrainConfig {
    long epochs = 5000;
    int batch_size = 32;
    double learning_rate = 0.05;
    Optimizer optimizer = Optimizer::kSgdMomentum;
    double momentum = 0.9;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    long patience = 200;  // early-stop patience on validation loss; <0 disables
};

struct TrainSample {
    std::array<double, dataset::kNumFeatures> x{};
    std::vector<double> y;
};

struct TrainResult {
    std::vector<double> train_loss;  // one entry per epoch run
    std::vector<double> val_loss;    // empty when val set is empty
    long epochs_run = 0;
    double best_val_loss = 0.0;
    long best_epoch = -1;
};

std::vector<TrainSample> to_train_samples(const dataset::NormStats& stats,
                                          const std::vector<dataset::LabeledSample>& samples);

// Minibatch gradient descent. Deterministic under cfg.seed; the network is
// left holding the parameters of the best validation epoch (final epoch
// when no validation set is given). Throws TrainingDiverged on a
// non-finite loss.
TrainResult train(Network& net, const std::vector<TrainSample>& train_set,
                  const std::vector<TrainSample>& val_set, const TrainConfig& cfg);

struct Prediction {
    geodesy::RangeBearing rb;
    bool distance_clamped = false;  // raw output was negative
};

Prediction predict_features(const Network& net, const dataset::FeatureVector& features);
Prediction predict(const Network& net, const dataset::Detection& d,
                   int frame_w, int frame_h);

void save_model(const Network& net, const std::string& path);
Network load_model(const std::string& path);

struct SweepRow {
    int depth = 0;
    double val_rmse_norm = 0.0;         // sqrt of best validation MSE
    double val_rmse_distance_nm = 0.0;  // physical units, linear
    double val_rmse_bearing_deg = 0.0;  // physical units, circular
};

// Trains one model per hidden depth with identical seed and config and
// reports held-out error per depth.
std::vector<SweepRow> hidden_layer_sweep(const std::vector<TrainSample>& train_set,
                                         const std::vector<TrainSample>& val_set,
                                         const dataset::NormStats& stats,
                                         int hidden_width,
                                         const std::vector<int>& depths,
                                         const TrainConfig& cfg);

}  // namespace disbeanet::mlp
