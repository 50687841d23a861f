#pragma once

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovnet/geometry.hpp"
#include "ovnet/network.hpp"
#include "ovnet/orientation.hpp"

namespace ovnet {

/// Activation used on the collection (second) layer of a synthesized net.
/// tanh keeps the net differentiable; unit_step reproduces the exact 0/1
/// gating argument and is evaluation-only.
enum class SecondLayerKind { tanh, unit_step };

struct SynthesisInput {
    std::vector<Hyperplane> planes;       // q planes, order fixes the code layout
    std::vector<ClusterSummary> clusters; // m clusters, order fixes collection units
    int class_count = 0;                  // k
    double beta = 5.0;                    // steepness of the sign-reading layer
};

class SynthesisError : public std::runtime_error {
public:
    explicit SynthesisError(const std::string& what) : std::runtime_error(what) {}
};

/// Builds the q-m-k classifier directly from geometry:
///   layer 1 (q units)  — unit j evaluates plane j: tanh(beta * (bias_j + n_j . x));
///   layer 2 (m units)  — unit i dots the layer-1 signs with cluster i's
///                        orientation code, bias 1/2 - q; on cluster i's own
///                        side the pre-activation is ~1/2, on any other
///                        cluster's signs it is <= -3/2;
///   layer 3 (k units)  — unit l sums the layer-2 units of clusters labeled l
///                        (0/1 weights, zero bias, identity), so argmax reads
///                        off the class.
/// Throws CutClusterError / SynthesisError when the clusters are not cleanly
/// separated or a class label is out of range.
inline FeedForwardNet synthesize_three_layer(const SynthesisInput& input,
                                             SecondLayerKind second_layer_kind) {
    if (input.planes.empty()) {
        throw SynthesisError("synthesize_three_layer: no planes given");
    }
    if (input.clusters.empty()) {
        throw SynthesisError("synthesize_three_layer: no clusters given");
    }
    if (input.class_count <= 0) {
        throw SynthesisError("synthesize_three_layer: class_count must be positive");
    }
    if (!(input.beta > 0.0)) {
        throw SynthesisError("synthesize_three_layer: beta must be positive");
    }
    const std::size_t n = input.planes.front().dim();
    for (const auto& p : input.planes) {
        if (p.dim() != n) {
            throw SynthesisError("synthesize_three_layer: planes have mixed dimensions");
        }
    }
    for (const auto& c : input.clusters) {
        if (c.centroid.size() != n) {
            throw SynthesisError("synthesize_three_layer: cluster dimension mismatch");
        }
        if (c.class_label < 0 || c.class_label >= input.class_count) {
            std::ostringstream msg;
            msg << "cluster " << c.id << " has class label " << c.class_label
                << " outside [0, " << input.class_count << ")";
            throw SynthesisError(msg.str());
        }
    }

    SeparationReport report = verify_separation(input.planes, input.clusters);
    if (!report.cut_clusters.empty()) {
        const CutRecord& cut = report.cut_clusters.front();
        throw CutClusterError(cut.cluster_id, cut.plane_index, cut.clearance);
    }
    if (!report.duplicate_groups.empty()) {
        std::ostringstream msg;
        msg << "clusters";
        for (int id : report.duplicate_groups.front()) msg << ' ' << id;
        msg << " share one orientation code; add planes before synthesizing";
        throw SynthesisError(msg.str());
    }

    const std::size_t q = input.planes.size();
    const std::size_t m = input.clusters.size();
    const std::size_t k = static_cast<std::size_t>(input.class_count);

    FeedForwardNet net;
    net.input_dim = n;
    net.layers.resize(3);

    DenseLayer& l1 = net.layers[0];
    l1.in_dim = n;
    l1.out_dim = q;
    l1.weights.resize(q * n);
    l1.bias.resize(q);
    l1.activation = {ActivationKind::tanh_beta, input.beta};
    for (std::size_t j = 0; j < q; ++j) {
        for (std::size_t c = 0; c < n; ++c) l1.weights[j * n + c] = input.planes[j].normal[c];
        l1.bias[j] = input.planes[j].bias;
    }

    DenseLayer& l2 = net.layers[1];
    l2.in_dim = q;
    l2.out_dim = m;
    l2.weights.resize(m * q);
    l2.bias.assign(m, 0.5 - static_cast<double>(q));
    l2.activation = second_layer_kind == SecondLayerKind::tanh
                        ? Activation{ActivationKind::tanh_beta, input.beta}
                        : Activation{ActivationKind::unit_step, 1.0};
    for (std::size_t i = 0; i < m; ++i) {
        const OrientationCode& code = report.codes.at(input.clusters[i].id);
        for (std::size_t j = 0; j < q; ++j) {
            l2.weights[i * q + j] = static_cast<double>(code.signs[j]);
        }
    }

    DenseLayer& l3 = net.layers[2];
    l3.in_dim = m;
    l3.out_dim = k;
    l3.weights.assign(k * m, 0.0);
    l3.bias.assign(k, 0.0);
    l3.activation = {ActivationKind::identity, 1.0};
    for (std::size_t i = 0; i < m; ++i) {
        auto label = static_cast<std::size_t>(input.clusters[i].class_label);
        l3.weights[label * m + i] = 1.0;
    }

    return net;
}

}  // namespace ovnet
