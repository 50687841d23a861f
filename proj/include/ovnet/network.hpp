#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ovnet/geometry.hpp"

namespace ovnet {

enum class ActivationKind { tanh_beta, unit_step, identity };

/// Elementwise activation. tanh_beta applies tanh(beta * z); unit_step maps
/// z > 0 to 1 and everything else to 0; identity passes z through.
struct Activation {
    ActivationKind kind = ActivationKind::identity;
    double beta = 1.0;

    double apply(double z) const {
        switch (kind) {
            case ActivationKind::tanh_beta: return std::tanh(beta * z);
            case ActivationKind::unit_step: return z > 0.0 ? 1.0 : 0.0;
            case ActivationKind::identity: return z;
        }
        throw std::logic_error("Activation::apply: unknown kind");
    }

    /// ds/dz given pre-activation z and the already-computed output s.
    /// unit_step has no usable derivative and is rejected.
    double derivative(double z, double s) const {
        (void)z;
        switch (kind) {
            case ActivationKind::tanh_beta: return beta * (1.0 - s * s);
            case ActivationKind::unit_step:
                throw std::invalid_argument("unit_step activation is not differentiable");
            case ActivationKind::identity: return 1.0;
        }
        throw std::logic_error("Activation::derivative: unknown kind");
    }
};

/// Fully connected layer: out = act(W x + b), weights stored row-major
/// (out_dim rows of in_dim coefficients).
struct DenseLayer {
    std::size_t in_dim = 0;
    std::size_t out_dim = 0;
    std::vector<double> weights;  // out_dim * in_dim, row-major
    std::vector<double> bias;     // out_dim
    Activation activation;

    double weight_at(std::size_t row, std::size_t col) const {
        return weights[row * in_dim + col];
    }
    double& weight_at(std::size_t row, std::size_t col) {
        return weights[row * in_dim + col];
    }
};

struct FeedForwardNet {
    std::size_t input_dim = 0;
    std::vector<DenseLayer> layers;

    std::size_t output_dim() const {
        return layers.empty() ? input_dim : layers.back().out_dim;
    }
};

/// Validates layer dimensions end to end; throws on any mismatch.
inline void check_shape(const FeedForwardNet& net) {
    if (net.layers.empty()) {
        throw std::invalid_argument("network has no layers");
    }
    std::size_t current = net.input_dim;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const DenseLayer& layer = net.layers[li];
        if (layer.in_dim != current || layer.weights.size() != layer.in_dim * layer.out_dim ||
            layer.bias.size() != layer.out_dim || layer.out_dim == 0) {
            std::ostringstream msg;
            msg << "layer " << li << " has inconsistent shape (expects input "
                << current << ", declares " << layer.in_dim << "x" << layer.out_dim
                << " with " << layer.weights.size() << " weights, "
                << layer.bias.size() << " biases)";
            throw std::invalid_argument(msg.str());
        }
        current = layer.out_dim;
    }
}

/// Forward pass. Throws when the input dimension is wrong or a layer
/// produces a non-finite value (the message names the layer index).
inline PointN forward(const FeedForwardNet& net, const PointN& input) {
    if (input.size() != net.input_dim) {
        std::ostringstream msg;
        msg << "forward: input has dimension " << input.size() << ", network expects "
            << net.input_dim;
        throw std::invalid_argument(msg.str());
    }
    PointN x = input;
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
        const DenseLayer& layer = net.layers[li];
        PointN next(layer.out_dim);
        for (std::size_t r = 0; r < layer.out_dim; ++r) {
            double z = layer.bias[r];
            const double* row = layer.weights.data() + r * layer.in_dim;
            for (std::size_t c = 0; c < layer.in_dim; ++c) z += row[c] * x[c];
            double s = layer.activation.apply(z);
            if (!std::isfinite(s)) {
                std::ostringstream msg;
                msg << "forward: non-finite output in layer " << li << ", unit " << r;
                throw std::runtime_error(msg.str());
            }
            next[r] = s;
        }
        x = std::move(next);
    }
    return x;
}

struct Prediction {
    PointN output;
    int label = 0;
};

/// Runs the network and takes the argmax of the final layer as the class
/// label; ties resolve to the lowest index.
inline Prediction predict_label(const FeedForwardNet& net, const PointN& input) {
    Prediction pred;
    pred.output = forward(net, input);
    if (pred.output.empty()) {
        throw std::invalid_argument("predict_label: network has empty output");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < pred.output.size(); ++i) {
        if (pred.output[i] > pred.output[best]) best = i;
    }
    pred.label = static_cast<int>(best);
    return pred;
}

/// Total adjustable parameter count: sum over layers of (in_dim + 1) * out_dim.
inline std::size_t count_weights(const FeedForwardNet& net) {
    std::size_t total = 0;
    for (const auto& layer : net.layers) {
        total += (layer.in_dim + 1) * layer.out_dim;
    }
    return total;
}

}  // namespace ovnet
