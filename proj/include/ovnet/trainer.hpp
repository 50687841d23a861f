#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ovnet/datasets.hpp"
#include "ovnet/metrics.hpp"
#include "ovnet/network.hpp"
#include "ovnet/random.hpp"

namespace ovnet {

enum class TargetEncoding { zero_one };

struct TrainConfig {
    double learning_rate = 0.1;
    std::size_t epochs = 100;
    std::size_t batch_size = 1;
    std::uint64_t seed = 0;
    double beta = 1.0;  // tanh steepness used while training
    TargetEncoding target_encoding = TargetEncoding::zero_one;
    double init_scale = 1.0;   // used by init_weights, recorded here for provenance
    double momentum = 0.0;     // 0 = plain SGD
};

struct TrainReport {
    double final_train_accuracy = 0.0;
    double final_test_accuracy = 0.0;
    std::vector<double> epoch_losses;  // mean per-sample loss seen during each epoch
    std::size_t epochs_run = 0;
};

struct TrainResult {
    FeedForwardNet net;
    TrainReport report;
};

class TrainingDivergedError : public std::runtime_error {
public:
    TrainingDivergedError(std::size_t epoch, const std::string& what)
        : std::runtime_error(what), epoch(epoch) {}
    std::size_t epoch;  // 1-based epoch in which the loss left the finite range
};

/// Fresh network for the given layer sizes: hidden layers tanh(beta*.), output
/// layer identity; weights i.i.d. uniform in +-init_scale/sqrt(fan_in), biases
/// zero. Weights are drawn layer by layer in row-major order so the result is
/// reproducible from the seed alone.
inline FeedForwardNet init_weights(const std::vector<std::size_t>& arch, std::uint64_t seed,
                                   double init_scale, double beta = 1.0) {
    if (arch.size() < 2) {
        throw std::invalid_argument("init_weights: need at least input and output sizes");
    }
    for (std::size_t s : arch) {
        if (s == 0) throw std::invalid_argument("init_weights: zero-sized layer");
    }
    if (init_scale < 0.0) {
        throw std::invalid_argument("init_weights: init_scale must be >= 0");
    }
    FeedForwardNet net;
    net.input_dim = arch.front();
    Rng rng(seed);
    for (std::size_t li = 1; li < arch.size(); ++li) {
        DenseLayer layer;
        layer.in_dim = arch[li - 1];
        layer.out_dim = arch[li];
        layer.weights.resize(layer.in_dim * layer.out_dim);
        layer.bias.assign(layer.out_dim, 0.0);
        double bound = init_scale / std::sqrt(static_cast<double>(layer.in_dim));
        for (double& w : layer.weights) w = rng.uniform(-bound, bound);
        layer.activation = (li + 1 < arch.size())
                               ? Activation{ActivationKind::tanh_beta, beta}
                               : Activation{ActivationKind::identity, 1.0};
        net.layers.push_back(std::move(layer));
    }
    return net;
}

/// Half squared error against a one-hot 0/1 target vector.
inline double sample_loss(const PointN& output, const PointN& target) {
    if (output.size() != target.size()) {
        throw std::invalid_argument("sample_loss: output/target length mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < output.size(); ++i) {
        double d = output[i] - target[i];
        s += d * d;
    }
    return 0.5 * s;
}

namespace detail {

/// Per-layer forward trace used by backpropagation.
struct ForwardTrace {
    std::vector<PointN> inputs;   // inputs[l] = input vector to layer l
    std::vector<PointN> pre;      // pre[l] = pre-activation z of layer l
    std::vector<PointN> out;      // out[l] = activated output of layer l
};

inline ForwardTrace forward_trace(const FeedForwardNet& net, const PointN& x0) {
    ForwardTrace t;
    t.inputs.reserve(net.layers.size());
    t.pre.reserve(net.layers.size());
    t.out.reserve(net.layers.size());
    PointN x = x0;
    for (const auto& layer : net.layers) {
        t.inputs.push_back(x);
        PointN z(layer.out_dim);
        PointN s(layer.out_dim);
        for (std::size_t r = 0; r < layer.out_dim; ++r) {
            double acc = layer.bias[r];
            const double* row = layer.weights.data() + r * layer.in_dim;
            for (std::size_t c = 0; c < layer.in_dim; ++c) acc += row[c] * x[c];
            z[r] = acc;
            s[r] = layer.activation.apply(acc);
        }
        t.pre.push_back(std::move(z));
        x = s;
        t.out.push_back(x);
    }
    return t;
}

/// Gradient of sample_loss(forward(net, point), target) with respect to every
/// parameter, flattened layer by layer as weights (row-major) then biases.
/// Optionally reports the loss at the same parameters via loss_out.
inline std::vector<double> backprop_core(const FeedForwardNet& net, const PointN& point,
                                         const PointN& target, double* loss_out) {
    ForwardTrace trace = forward_trace(net, point);
    const std::size_t L = net.layers.size();
    if (L == 0) throw std::invalid_argument("backprop_gradient: empty network");
    if (trace.out.back().size() != target.size()) {
        throw std::invalid_argument("backprop_gradient: target length mismatch");
    }
    if (loss_out != nullptr) {
        double s = 0.0;
        for (std::size_t i = 0; i < target.size(); ++i) {
            double d = trace.out[L - 1][i] - target[i];
            s += d * d;
        }
        *loss_out = 0.5 * s;
    }

    std::vector<PointN> delta(L);
    {
        const DenseLayer& last = net.layers[L - 1];
        PointN d(last.out_dim);
        for (std::size_t r = 0; r < last.out_dim; ++r) {
            double err = trace.out[L - 1][r] - target[r];
            d[r] = err * last.activation.derivative(trace.pre[L - 1][r], trace.out[L - 1][r]);
        }
        delta[L - 1] = std::move(d);
    }
    for (std::size_t l = L - 1; l-- > 0;) {
        const DenseLayer& upper = net.layers[l + 1];
        const DenseLayer& layer = net.layers[l];
        PointN d(layer.out_dim, 0.0);
        for (std::size_t c = 0; c < upper.in_dim; ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < upper.out_dim; ++r) {
                s += upper.weights[r * upper.in_dim + c] * delta[l + 1][r];
            }
            d[c] = s * layer.activation.derivative(trace.pre[l][c], trace.out[l][c]);
        }
        delta[l] = std::move(d);
    }

    std::vector<double> grad;
    grad.reserve(count_weights(net));
    for (std::size_t l = 0; l < L; ++l) {
        const DenseLayer& layer = net.layers[l];
        for (std::size_t r = 0; r < layer.out_dim; ++r) {
            for (std::size_t c = 0; c < layer.in_dim; ++c) {
                grad.push_back(delta[l][r] * trace.inputs[l][c]);
            }
        }
        for (std::size_t r = 0; r < layer.out_dim; ++r) grad.push_back(delta[l][r]);
    }
    return grad;
}

/// Views the net's parameters as one flat array in backprop_gradient order.
inline std::vector<double*> parameter_view(FeedForwardNet& net) {
    std::vector<double*> params;
    params.reserve(count_weights(net));
    for (auto& layer : net.layers) {
        for (auto& w : layer.weights) params.push_back(&w);
        for (auto& b : layer.bias) params.push_back(&b);
    }
    return params;
}

}  // namespace detail

/// Gradient of sample_loss(forward(net, point), target) with respect to every
/// parameter, flattened layer by layer as weights (row-major) then biases.
inline std::vector<double> backprop_gradient(const FeedForwardNet& net, const PointN& point,
                                             const PointN& target) {
    return detail::backprop_core(net, point, target, nullptr);
}

/// Compares the analytic gradient with central finite differences over every
/// parameter; returns the maximum relative error with denominator
/// max(|analytic|, |numeric|, 1e-12).
inline double numeric_gradient_check(const FeedForwardNet& net, const PointN& point,
                                     const PointN& target, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("numeric_gradient_check: h must be > 0");
    FeedForwardNet work = net;
    std::vector<double> analytic = backprop_gradient(work, point, target);
    std::vector<double*> params = detail::parameter_view(work);
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        double saved = *params[i];
        *params[i] = saved + h;
        double up = sample_loss(forward(work, point), target);
        *params[i] = saved - h;
        double down = sample_loss(forward(work, point), target);
        *params[i] = saved;
        double numeric = (up - down) / (2.0 * h);
        double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-12});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

/// Plain stochastic gradient descent with per-epoch shuffling (optional
/// momentum). Hidden tanh layers run at cfg.beta for the whole session and
/// the returned net keeps that steepness. Targets are one-hot 0/1 vectors
/// over the net's output units; the loss is the mean over each batch of
/// sample_loss. Throws TrainingDivergedError when a non-finite loss appears.
inline TrainResult train_backprop(FeedForwardNet net, const LabeledDataset& train,
                                  const LabeledDataset& test, const TrainConfig& cfg) {
    check_shape(net);
    if (net.layers.empty()) {
        throw std::invalid_argument("train_backprop: network has no layers");
    }
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        if (net.layers[li].activation.kind == ActivationKind::unit_step) {
            std::ostringstream msg;
            msg << "train_backprop: layer " << li << " uses the non-differentiable step activation";
            throw std::invalid_argument(msg.str());
        }
    }
    if (train.samples.empty()) {
        throw std::invalid_argument("train_backprop: empty training set");
    }
    if (!(cfg.learning_rate > 0.0)) {
        throw std::invalid_argument("train_backprop: learning_rate must be > 0");
    }
    if (cfg.epochs < 1) {
        throw std::invalid_argument("train_backprop: epochs must be >= 1");
    }
    if (cfg.batch_size < 1 || cfg.batch_size > train.samples.size()) {
        std::ostringstream msg;
        msg << "train_backprop: batch_size " << cfg.batch_size << " outside [1, "
            << train.samples.size() << "]";
        throw std::invalid_argument(msg.str());
    }
    const std::size_t k = net.output_dim();
    for (const auto& s : train.samples) {
        if (s.class_label < 0 || static_cast<std::size_t>(s.class_label) >= k) {
            std::ostringstream msg;
            msg << "train_backprop: class label " << s.class_label
                << " outside the network's " << k << " outputs";
            throw std::invalid_argument(msg.str());
        }
    }
    for (auto& layer : net.layers) {
        if (layer.activation.kind == ActivationKind::tanh_beta) {
            layer.activation.beta = cfg.beta;
        }
    }

    std::vector<PointN> targets(k, PointN(k, 0.0));
    for (std::size_t c = 0; c < k; ++c) targets[c][c] = 1.0;

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(train.samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    const std::size_t param_count = count_weights(net);
    std::vector<double> grad_sum(param_count, 0.0);
    std::vector<double> velocity;
    if (cfg.momentum != 0.0) velocity.assign(param_count, 0.0);
    std::vector<double*> params = detail::parameter_view(net);

    TrainResult result;
    result.report.epoch_losses.reserve(cfg.epochs);

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle(order, rng);
        double loss_sum = 0.0;
        std::size_t cursor = 0;
        while (cursor < order.size()) {
            std::size_t batch = std::min(cfg.batch_size, order.size() - cursor);
            std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
            for (std::size_t b = 0; b < batch; ++b) {
                const Sample& s = train.samples[order[cursor + b]];
                const PointN& target = targets[static_cast<std::size_t>(s.class_label)];
                double loss = 0.0;
                std::vector<double> g = detail::backprop_core(net, s.point, target, &loss);
                for (std::size_t i = 0; i < param_count; ++i) grad_sum[i] += g[i];
                loss_sum += loss;
            }
            double scale = cfg.learning_rate / static_cast<double>(batch);
            if (velocity.empty()) {
                for (std::size_t i = 0; i < param_count; ++i) {
                    *params[i] -= scale * grad_sum[i];
                }
            } else {
                for (std::size_t i = 0; i < param_count; ++i) {
                    velocity[i] = cfg.momentum * velocity[i] - scale * grad_sum[i];
                    *params[i] += velocity[i];
                }
            }
            cursor += batch;
        }
        double epoch_loss = loss_sum / static_cast<double>(order.size());
        if (!std::isfinite(epoch_loss)) {
            std::ostringstream msg;
            msg << "training diverged in epoch " << epoch << " (non-finite loss)";
            throw TrainingDivergedError(epoch, msg.str());
        }
        result.report.epoch_losses.push_back(epoch_loss);
        result.report.epochs_run = epoch;
    }

    result.report.final_train_accuracy = evaluate_accuracy(net, train);
    result.report.final_test_accuracy =
        test.samples.empty() ? 0.0 : evaluate_accuracy(net, test);
    result.net = std::move(net);
    return result;
}

}  // namespace ovnet
