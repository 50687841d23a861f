#pragma once

#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovnet/datasets.hpp"
#include "ovnet/geometry.hpp"
#include "ovnet/network.hpp"

namespace ovnet {

/// Fraction of samples whose predicted label matches the recorded class.
inline double evaluate_accuracy(const FeedForwardNet& net, const LabeledDataset& data) {
    if (data.samples.empty()) {
        throw std::invalid_argument("evaluate_accuracy: empty dataset");
    }
    std::size_t correct = 0;
    for (const auto& s : data.samples) {
        if (predict_label(net, s.point).label == s.class_label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.samples.size());
}

/// Knowledge-content-ratio family of scores. equation_count = S * k (one
/// output condition per training sample per output unit); kcr divides by
/// twice the parameter count (the convention that reproduces the reference
/// score table), kcr_raw by the parameter count itself; pew = kcr * fcp.
struct KcrPew {
    double kcr = 0.0;
    double pew = 0.0;
    double kcr_raw = 0.0;
    std::size_t equation_count = 0;
    std::size_t weight_count = 0;
};

inline KcrPew kcr_pew(const FeedForwardNet& net, std::size_t train_samples,
                      std::size_t output_units, double test_fraction_correct) {
    if (train_samples < 1 || output_units < 1) {
        throw std::invalid_argument("kcr_pew: sample and output counts must be >= 1");
    }
    std::size_t weights = count_weights(net);
    if (weights == 0) {
        throw std::invalid_argument("kcr_pew: network has no weights");
    }
    KcrPew out;
    out.equation_count = train_samples * output_units;
    out.weight_count = weights;
    out.kcr_raw = static_cast<double>(out.equation_count) / static_cast<double>(weights);
    out.kcr = out.kcr_raw / 2.0;
    out.pew = out.kcr * test_fraction_correct;
    return out;
}

/// Work needed to classify one sample: q plane evaluations at (n+1)
/// multiply-adds each, versus N squared-distance computations at n
/// multiply-adds each for a nearest-centroid scheme.
struct OpCountReport {
    std::size_t linear_ops = 0;
    std::size_t distance_ops = 0;
    double ratio = 0.0;
};

inline OpCountReport op_count_report(std::size_t planes, std::size_t dim,
                                     std::size_t clusters) {
    if (planes < 1 || dim < 1 || clusters < 1) {
        throw std::invalid_argument("op_count_report: all inputs must be >= 1");
    }
    OpCountReport r;
    r.linear_ops = planes * (dim + 1);
    r.distance_ops = clusters * dim;
    r.ratio = static_cast<double>(r.distance_ops) / static_cast<double>(r.linear_ops);
    return r;
}

/// Distance-based baseline: class of the centroid nearest to p (squared
/// Euclidean distance; ties go to the lowest cluster id).
inline int centroid_predict(const std::vector<ClusterSummary>& clusters, const PointN& p) {
    if (clusters.empty()) {
        throw std::invalid_argument("centroid_predict: no clusters");
    }
    double best = std::numeric_limits<double>::infinity();
    int best_id = 0;
    int best_label = 0;
    bool first = true;
    for (const auto& c : clusters) {
        if (c.centroid.size() != p.size()) {
            std::ostringstream msg;
            msg << "centroid_predict: cluster " << c.id << " has dimension "
                << c.centroid.size() << ", point has " << p.size();
            throw std::invalid_argument(msg.str());
        }
        double d = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            double diff = p[i] - c.centroid[i];
            d += diff * diff;
        }
        if (first || d < best || (d == best && c.id < best_id)) {
            first = false;
            best = d;
            best_id = c.id;
            best_label = c.class_label;
        }
    }
    return best_label;
}

/// One row of the architecture comparison table.
struct ArchitectureScore {
    std::vector<std::size_t> architecture;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double kcr = 0.0;
    double pew = 0.0;
    std::size_t weight_count = 0;
    std::size_t equation_count = 0;
};

}  // namespace ovnet
