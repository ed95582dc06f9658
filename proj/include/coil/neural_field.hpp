#pragma once

#include "coil/errors.hpp"
#include "coil/geometry.hpp"
#include "coil/radon.hpp"
#include "coil/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace coil {

/// One coordinate-response training pair.
template <typename Scalar>
struct CoordinateSample {
    Coordinate<Scalar> v;
    Scalar r;
};

enum class FfmMode : std::uint8_t { none = 0, positional = 1, linear = 2 };

/// Fourier feature mapping configuration. The linear spacing k_i = pi*i/2
/// concentrates components at low frequencies; the positional variant uses
/// k_i = 2^(i-1).
struct FfmConfig {
    FfmMode mode = FfmMode::linear;
    int num_frequencies = 10;

    int output_dim() const { return mode == FfmMode::none ? 2 : 4 * num_frequencies; }

    void validate() const {
        if (num_frequencies < 1)
            throw std::invalid_argument("FfmConfig: num_frequencies must be >= 1");
    }

    double frequency(int i) const { // i = 1..L
        return mode == FfmMode::positional ? std::exp2(static_cast<double>(i - 1))
                                           : std::numbers::pi * static_cast<double>(i) / 2.0;
    }
};

/// Expands v = (theta_norm, l) into sinusoids. Layout per frequency i:
/// [sin(k_i pi t), cos(k_i pi t), sin(k_i pi l), cos(k_i pi l)], giving 4L
/// outputs. mode == none passes v through unchanged.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ffm_apply(const FfmConfig& config,
                                                   const Coordinate<Scalar>& v) {
    config.validate();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(config.output_dim());
    if (config.mode == FfmMode::none) {
        out << v.theta_norm, v.l;
        return out;
    }
    const Scalar comps[2] = {v.theta_norm, v.l};
    for (int i = 1; i <= config.num_frequencies; ++i) {
        const Scalar k = static_cast<Scalar>(config.frequency(i));
        for (int c = 0; c < 2; ++c) {
            const Scalar arg = k * std::numbers::pi_v<Scalar> * comps[c];
            out[4 * (i - 1) + 2 * c] = std::sin(arg);
            out[4 * (i - 1) + 2 * c + 1] = std::cos(arg);
        }
    }
    return out;
}

/// MLP shape. num_hidden_layers ReLU layers of hidden_width neurons, then a
/// linear layer of penultimate_width, then a scalar output head. An entry k
/// in skip_layers means the mapped input gamma(v) is concatenated onto the
/// output of hidden layer k (so layer k+1 consumes hidden_width+input_dim
/// values).
struct MlpConfig {
    int input_dim = 40;
    int hidden_width = 256;
    int num_hidden_layers = 16;
    int penultimate_width = 128;
    std::vector<int> skip_layers = {2, 4, 6, 8, 10, 12, 14};

    void validate() const {
        if (input_dim < 1 || hidden_width < 1 || num_hidden_layers < 1 || penultimate_width < 1)
            throw std::invalid_argument("MlpConfig: widths and depths must be positive");
        for (int s : skip_layers)
            if (s < 2 || s > num_hidden_layers - 2 || s % 2 != 0)
                throw std::invalid_argument(
                    "MlpConfig: skip layers must be even and within [2, num_hidden_layers-2]");
    }

    bool skip_after(int layer) const { // layer = 1..num_hidden_layers
        return std::find(skip_layers.begin(), skip_layers.end(), layer) != skip_layers.end();
    }

    /// Input width of fully-connected layer k (1-based; hidden layers first,
    /// then the penultimate layer at k = num_hidden_layers + 1).
    int layer_input_dim(int k) const {
        if (k == 1) return input_dim;
        return hidden_width + (skip_after(k - 1) ? input_dim : 0);
    }
};

/// Standard 17-FC-layer shape from which the scalar head hangs.
inline MlpConfig paper_mlp(int input_dim) {
    MlpConfig mlp;
    mlp.input_dim = input_dim;
    return mlp;
}

/// Small shape for desk-scale experiments: 4 ReLU layers of width 64 plus a
/// width-32 penultimate layer (5 FC layers), one skip.
inline MlpConfig desk_mlp(int input_dim) {
    MlpConfig mlp;
    mlp.input_dim = input_dim;
    mlp.hidden_width = 64;
    mlp.num_hidden_layers = 4;
    mlp.penultimate_width = 32;
    mlp.skip_layers = {2};
    return mlp;
}

/// The trained measurement-field representation: FFM plus all layer weights.
/// layers holds the hidden stack, then the penultimate layer, then the
/// 1-row output head. Weight matrices are (out x in), row-major.
template <typename Scalar>
struct NeuralField {
    struct Layer {
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> weights;
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> bias;
    };

    FfmConfig ffm;
    MlpConfig mlp;
    std::vector<Layer> layers;

    Eigen::Index parameter_count() const {
        Eigen::Index n = 0;
        for (const auto& l : layers) n += l.weights.size() + l.bias.size();
        return n;
    }

    void validate_shapes() const {
        ffm.validate();
        mlp.validate();
        if (mlp.input_dim != ffm.output_dim())
            throw std::invalid_argument("NeuralField: mlp input_dim must equal ffm output size");
        const auto n_layers = static_cast<int>(layers.size());
        if (n_layers != mlp.num_hidden_layers + 2)
            throw std::invalid_argument("NeuralField: layer count mismatch");
        for (int k = 1; k <= mlp.num_hidden_layers; ++k) {
            const auto& l = layers[static_cast<std::size_t>(k - 1)];
            if (l.weights.rows() != mlp.hidden_width || l.weights.cols() != mlp.layer_input_dim(k) ||
                l.bias.size() != l.weights.rows())
                throw std::invalid_argument("NeuralField: hidden layer shape mismatch");
        }
        const auto& penult = layers[static_cast<std::size_t>(mlp.num_hidden_layers)];
        if (penult.weights.rows() != mlp.penultimate_width ||
            penult.weights.cols() != mlp.hidden_width || penult.bias.size() != penult.weights.rows())
            throw std::invalid_argument("NeuralField: penultimate layer shape mismatch");
        const auto& head = layers.back();
        if (head.weights.rows() != 1 || head.weights.cols() != mlp.penultimate_width ||
            head.bias.size() != 1)
            throw std::invalid_argument("NeuralField: output head shape mismatch");
    }
};

using NeuralFieldD = NeuralField<double>;

/// Adam settings with per-epoch exponential learning-rate decay:
/// lr(epoch) = initial_lr * lr_decay_per_epoch^epoch.
struct TrainConfig {
    double initial_lr = 1e-3;
    double lr_decay_per_epoch = 0.97;
    int epochs = 300;
    int batch_size = 1024;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const {
        if (initial_lr <= 0) throw std::invalid_argument("TrainConfig: initial_lr must be > 0");
        if (lr_decay_per_epoch <= 0 || lr_decay_per_epoch > 1)
            throw std::invalid_argument("TrainConfig: lr_decay_per_epoch must be in (0, 1]");
        if (epochs < 1 || batch_size < 1)
            throw std::invalid_argument("TrainConfig: epochs and batch_size must be positive");
        if (adam_eps <= 0) throw std::invalid_argument("TrainConfig: adam_eps must be > 0");
    }
};

inline double learning_rate(const TrainConfig& config, int epoch) {
    return config.initial_lr * std::pow(config.lr_decay_per_epoch, epoch);
}

namespace detail {

template <typename Scalar>
using BatchMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// gamma(v) for a block of coordinates, one row per sample.
template <typename Scalar>
BatchMatrix<Scalar> ffm_apply_batch(const FfmConfig& config,
                                    const std::vector<Coordinate<Scalar>>& coords) {
    config.validate();
    BatchMatrix<Scalar> out(static_cast<Eigen::Index>(coords.size()), config.output_dim());
    for (Eigen::Index n = 0; n < out.rows(); ++n)
        out.row(n) = ffm_apply(config, coords[static_cast<std::size_t>(n)]).transpose();
    return out;
}

/// Activations recorded by the batch forward pass for reuse in backward.
template <typename Scalar>
struct ForwardTrace {
    std::vector<BatchMatrix<Scalar>> inputs;  // input consumed by each layer
    std::vector<BatchMatrix<Scalar>> pre_act; // pre-activation of hidden layers
};

/// Batch forward pass; gamma holds one mapped coordinate per row. When
/// check_finite is set, a non-finite intermediate raises numeric_error
/// naming the layer.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> forward_batch(const NeuralField<Scalar>& field,
                                                       const BatchMatrix<Scalar>& gamma,
                                                       ForwardTrace<Scalar>* trace,
                                                       bool check_finite) {
    const auto& mlp = field.mlp;
    const Eigen::Index n = gamma.rows();
    if (trace) {
        trace->inputs.assign(field.layers.size(), {});
        trace->pre_act.assign(static_cast<std::size_t>(mlp.num_hidden_layers), {});
    }
    BatchMatrix<Scalar> act = gamma;
    for (int k = 1; k <= mlp.num_hidden_layers; ++k) {
        const auto& layer = field.layers[static_cast<std::size_t>(k - 1)];
        if (trace) trace->inputs[static_cast<std::size_t>(k - 1)] = act;
        BatchMatrix<Scalar> z = (act * layer.weights.transpose()).rowwise() + layer.bias.transpose();
        if (check_finite && !z.allFinite())
            throw numeric_error("field_forward: non-finite value at hidden layer " +
                                std::to_string(k));
        if (trace) trace->pre_act[static_cast<std::size_t>(k - 1)] = z;
        BatchMatrix<Scalar> h = z.cwiseMax(Scalar(0));
        if (mlp.skip_after(k)) {
            act.resize(n, mlp.hidden_width + mlp.input_dim);
            act.leftCols(mlp.hidden_width) = h;
            act.rightCols(mlp.input_dim) = gamma;
        } else {
            act = std::move(h);
        }
    }
    const auto& penult = field.layers[static_cast<std::size_t>(mlp.num_hidden_layers)];
    if (trace) trace->inputs[static_cast<std::size_t>(mlp.num_hidden_layers)] = act;
    BatchMatrix<Scalar> pen =
        (act * penult.weights.transpose()).rowwise() + penult.bias.transpose();
    if (check_finite && !pen.allFinite())
        throw numeric_error("field_forward: non-finite value at penultimate layer");
    const auto& head = field.layers.back();
    if (trace) trace->inputs.back() = pen;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out =
        (pen * head.weights.transpose()).col(0).array() + head.bias[0];
    if (check_finite && !out.allFinite())
        throw numeric_error("field_forward: non-finite value at output head");
    return out;
}

/// Reverse pass for the mean-squared loss; d_out is dLoss/dPrediction.
/// Gradients land in grad (same layer layout as the field).
template <typename Scalar>
void backward_batch(const NeuralField<Scalar>& field, const ForwardTrace<Scalar>& trace,
                    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& d_out,
                    std::vector<typename NeuralField<Scalar>::Layer>& grad) {
    const auto& mlp = field.mlp;
    const auto& head = field.layers.back();
    auto& head_grad = grad.back();
    head_grad.weights.noalias() = d_out.transpose() * trace.inputs.back();
    head_grad.bias[0] = d_out.sum();

    BatchMatrix<Scalar> d_act = d_out * head.weights; // gradient wrt penultimate output
    const auto& penult = field.layers[static_cast<std::size_t>(mlp.num_hidden_layers)];
    auto& penult_grad = grad[static_cast<std::size_t>(mlp.num_hidden_layers)];
    penult_grad.weights.noalias() =
        d_act.transpose() * trace.inputs[static_cast<std::size_t>(mlp.num_hidden_layers)];
    penult_grad.bias = d_act.colwise().sum();
    d_act = d_act * penult.weights; // gradient wrt last hidden activation block

    for (int k = mlp.num_hidden_layers; k >= 1; --k) {
        const auto idx = static_cast<std::size_t>(k - 1);
        // Drop the gamma block appended after a skip point; gamma is not
        // trainable and already feeds layer 1 directly.
        BatchMatrix<Scalar> d_h = mlp.skip_after(k) ? d_act.leftCols(mlp.hidden_width).eval()
                                                    : std::move(d_act);
        BatchMatrix<Scalar> d_z =
            (trace.pre_act[idx].array() > Scalar(0)).select(d_h, Scalar(0));
        auto& layer_grad = grad[idx];
        layer_grad.weights.noalias() = d_z.transpose() * trace.inputs[idx];
        layer_grad.bias = d_z.colwise().sum();
        if (k > 1) d_act = d_z * field.layers[idx].weights;
    }
}

template <typename Scalar>
std::vector<typename NeuralField<Scalar>::Layer> make_layer_zeros(const NeuralField<Scalar>& field) {
    std::vector<typename NeuralField<Scalar>::Layer> out(field.layers.size());
    for (std::size_t i = 0; i < field.layers.size(); ++i) {
        out[i].weights.setZero(field.layers[i].weights.rows(), field.layers[i].weights.cols());
        out[i].bias.setZero(field.layers[i].bias.size());
    }
    return out;
}

/// Fixed flattening order for parameters and gradients: layers in forward
/// order, each as row-major weights then bias.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> flatten_layers(
    const std::vector<typename NeuralField<Scalar>::Layer>& layers, Eigen::Index total) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(total);
    Eigen::Index at = 0;
    for (const auto& l : layers) {
        std::copy(l.weights.data(), l.weights.data() + l.weights.size(), out.data() + at);
        at += l.weights.size();
        std::copy(l.bias.data(), l.bias.data() + l.bias.size(), out.data() + at);
        at += l.bias.size();
    }
    return out;
}

} // namespace detail

/// Fresh field with uniform fan-in initialization (+-sqrt(6/fan_in)) and
/// zero biases, drawn deterministically from the seed.
template <typename Scalar = double>
NeuralField<Scalar> init_field(const FfmConfig& ffm, const MlpConfig& mlp, std::uint64_t seed) {
    ffm.validate();
    mlp.validate();
    if (mlp.input_dim != ffm.output_dim())
        throw std::invalid_argument("init_field: mlp.input_dim must equal the FFM output size");
    NeuralField<Scalar> field;
    field.ffm = ffm;
    field.mlp = mlp;
    Rng rng(seed);
    auto add_layer = [&](int out_dim, int in_dim) {
        typename NeuralField<Scalar>::Layer layer;
        layer.weights.resize(out_dim, in_dim);
        const Scalar bound = std::sqrt(Scalar(6) / static_cast<Scalar>(in_dim));
        for (Eigen::Index i = 0; i < layer.weights.size(); ++i)
            layer.weights.data()[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
        layer.bias.setZero(out_dim);
        field.layers.push_back(std::move(layer));
    };
    for (int k = 1; k <= mlp.num_hidden_layers; ++k)
        add_layer(mlp.hidden_width, mlp.layer_input_dim(k));
    add_layer(mlp.penultimate_width, mlp.hidden_width);
    add_layer(1, mlp.penultimate_width);
    return field;
}

/// Evaluates M_phi(v) = N_phi(gamma(v)).
template <typename Scalar>
Scalar field_forward(const NeuralField<Scalar>& field, const Coordinate<Scalar>& v) {
    field.validate_shapes();
    detail::BatchMatrix<Scalar> gamma(1, field.ffm.output_dim());
    gamma.row(0) = ffm_apply(field.ffm, v).transpose();
    return detail::forward_batch(field, gamma, nullptr, true)[0];
}

/// Mean-squared loss over the batch and its exact reverse-mode gradient,
/// flattened in the documented layer order (weights row-major, then bias,
/// layers in forward order).
template <typename Scalar>
std::pair<Scalar, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> field_loss_and_grad(
    const NeuralField<Scalar>& field, const std::vector<CoordinateSample<Scalar>>& batch) {
    field.validate_shapes();
    if (batch.empty()) throw std::invalid_argument("field_loss_and_grad: batch must be nonempty");
    std::vector<Coordinate<Scalar>> coords(batch.size());
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> targets(static_cast<Eigen::Index>(batch.size()));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        coords[i] = batch[i].v;
        targets[static_cast<Eigen::Index>(i)] = batch[i].r;
    }
    const auto gamma = detail::ffm_apply_batch(field.ffm, coords);
    detail::ForwardTrace<Scalar> trace;
    const auto pred = detail::forward_batch(field, gamma, &trace, false);
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> residual = pred - targets;
    const Scalar n = static_cast<Scalar>(batch.size());
    const Scalar loss = residual.squaredNorm() / n;
    auto grad_layers = detail::make_layer_zeros(field);
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d_out = residual * (Scalar(2) / n);
    detail::backward_batch(field, trace, d_out, grad_layers);
    return {loss, detail::flatten_layers<Scalar>(grad_layers, field.parameter_count())};
}

/// Trains a field on coordinate-response pairs with mini-batch Adam
/// (Kingma-Ba bias-corrected form) and per-epoch exponential learning-rate
/// decay. loss_history[e] is the full-dataset loss after epoch e. Fully
/// deterministic in (samples, configs, seed).
template <typename Scalar>
std::pair<NeuralField<Scalar>, std::vector<Scalar>> train_field(
    const std::vector<CoordinateSample<Scalar>>& samples, const FfmConfig& ffm,
    const MlpConfig& mlp, const TrainConfig& train) {
    if (samples.empty()) throw std::invalid_argument("train_field: samples must be nonempty");
    train.validate();
    NeuralField<Scalar> field = init_field<Scalar>(ffm, mlp, train.seed);

    const auto n = static_cast<Eigen::Index>(samples.size());
    std::vector<Coordinate<Scalar>> coords(samples.size());
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> targets(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        coords[static_cast<std::size_t>(i)] = samples[static_cast<std::size_t>(i)].v;
        targets[i] = samples[static_cast<std::size_t>(i)].r;
    }
    const auto gamma_all = detail::ffm_apply_batch(field.ffm, coords);

    auto moment1 = detail::make_layer_zeros(field);
    auto moment2 = detail::make_layer_zeros(field);
    auto grad = detail::make_layer_zeros(field);
    Rng rng(mix_seed(train.seed, {0x73687566666c65ull})); // epoch shuffle stream
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    std::vector<Scalar> loss_history;
    loss_history.reserve(static_cast<std::size_t>(train.epochs));
    long step = 0;
    detail::ForwardTrace<Scalar> trace;
    detail::BatchMatrix<Scalar> batch_gamma;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> batch_targets;

    for (int epoch = 0; epoch < train.epochs; ++epoch) {
        const Scalar lr = static_cast<Scalar>(learning_rate(train, epoch));
        rng.shuffle(order);
        for (Eigen::Index start = 0; start < n; start += train.batch_size) {
            const Eigen::Index b = std::min<Eigen::Index>(train.batch_size, n - start);
            batch_gamma.resize(b, gamma_all.cols());
            batch_targets.resize(b);
            for (Eigen::Index i = 0; i < b; ++i) {
                batch_gamma.row(i) = gamma_all.row(order[static_cast<std::size_t>(start + i)]);
                batch_targets[i] = targets[order[static_cast<std::size_t>(start + i)]];
            }
            const auto pred = detail::forward_batch(field, batch_gamma, &trace, false);
            const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> residual = pred - batch_targets;
            const Scalar batch_loss = residual.squaredNorm() / static_cast<Scalar>(b);
            if (!std::isfinite(batch_loss))
                throw training_diverged(
                    "train_field: loss became non-finite at epoch " + std::to_string(epoch),
                    epoch);
            const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d_out =
                residual * (Scalar(2) / static_cast<Scalar>(b));
            detail::backward_batch(field, trace, d_out, grad);

            ++step;
            const Scalar c1 = Scalar(1) - std::pow(static_cast<Scalar>(train.adam_beta1),
                                                   static_cast<Scalar>(step));
            const Scalar c2 = Scalar(1) - std::pow(static_cast<Scalar>(train.adam_beta2),
                                                   static_cast<Scalar>(step));
            for (std::size_t l = 0; l < field.layers.size(); ++l) {
                auto update = [&](auto& param, const auto& g, auto& m1, auto& m2) {
                    m1 = static_cast<Scalar>(train.adam_beta1) * m1 +
                         (Scalar(1) - static_cast<Scalar>(train.adam_beta1)) * g;
                    m2.array() = static_cast<Scalar>(train.adam_beta2) * m2.array() +
                                 (Scalar(1) - static_cast<Scalar>(train.adam_beta2)) *
                                     g.array().square();
                    param.array() -= lr * (m1.array() / c1) /
                                     ((m2.array() / c2).sqrt() +
                                      static_cast<Scalar>(train.adam_eps));
                };
                update(field.layers[l].weights, grad[l].weights, moment1[l].weights,
                       moment2[l].weights);
                update(field.layers[l].bias, grad[l].bias, moment1[l].bias, moment2[l].bias);
            }
        }
        // Epoch loss is evaluated on the full set after the updates, so a
        // later query of the training coordinates reproduces it exactly.
        const auto pred = detail::forward_batch(field, gamma_all, nullptr, false);
        const Scalar epoch_loss = (pred - targets).squaredNorm() / static_cast<Scalar>(n);
        if (!std::isfinite(epoch_loss))
            throw training_diverged(
                "train_field: loss became non-finite at epoch " + std::to_string(epoch), epoch);
        loss_history.push_back(epoch_loss);
    }
    return {std::move(field), std::move(loss_history)};
}

/// Evaluates the field at each coordinate and assembles the CoIL field as a
/// sinogram over the target geometry.
template <typename Scalar>
Sinogram<Scalar> query_field(const NeuralField<Scalar>& field,
                             const std::vector<Coordinate<Scalar>>& coordinates,
                             const Geometry<Scalar>& target_geometry) {
    field.validate_shapes();
    target_geometry.validate();
    const Eigen::Index p = target_geometry.num_views();
    const Eigen::Index d = target_geometry.num_detectors();
    if (static_cast<Eigen::Index>(coordinates.size()) != p * d)
        throw std::invalid_argument("query_field: coordinate count must equal views*detectors");
    Sinogram<Scalar> out;
    out.geometry = target_geometry;
    out.responses.resize(p, d);
    constexpr Eigen::Index chunk = 8192;
    const auto total = static_cast<Eigen::Index>(coordinates.size());
    for (Eigen::Index start = 0; start < total; start += chunk) {
        const Eigen::Index b = std::min(chunk, total - start);
        std::vector<Coordinate<Scalar>> block(coordinates.begin() + start,
                                              coordinates.begin() + start + b);
        const auto gamma = detail::ffm_apply_batch(field.ffm, block);
        const auto values = detail::forward_batch(field, gamma, nullptr, true);
        std::copy(values.data(), values.data() + b, out.responses.data() + start);
    }
    return out;
}

} // namespace coil
