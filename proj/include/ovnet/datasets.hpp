#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ovnet/geometry.hpp"
#include "ovnet/random.hpp"

namespace ovnet {

struct Sample {
    PointN point;
    int cluster_id = 0;
    int class_label = 0;
};

struct LabeledDataset {
    std::size_t dim = 0;
    std::vector<Sample> samples;
    std::vector<ClusterSummary> clusters;
};

/// Level-r nested hypercube family in n dimensions: cluster centers are all
/// sums sum_{l=1..r} 2^(r-l) * v_l with v_l in {+1,-1}^n, giving 2^(rn)
/// clusters whose coordinates are odd integers in [-(2^r - 1), 2^r - 1] with
/// a minimum center gap of 2. Classes identify the innermost sign vector
/// with its negation, giving 2^(n-1) classes.
struct NestedCubeSpec {
    std::size_t n = 0;
    std::size_t r = 1;
    double radius = 0.3;
    std::size_t train_per_cluster = 0;
    std::size_t test_per_cluster = 0;
    std::uint64_t seed = 0;
};

inline double default_radius(std::size_t r) { return r <= 1 ? 0.3 : 0.7; }

namespace detail {

inline void check_cube_params(std::size_t n, std::size_t r) {
    if (n < 1) throw std::invalid_argument("nested cube: dimension must be >= 1");
    if (r < 1) throw std::invalid_argument("nested cube: level must be >= 1");
    if (n * r > 24) {
        std::ostringstream msg;
        msg << "nested cube: 2^" << n * r << " clusters is beyond the supported size";
        throw std::invalid_argument(msg.str());
    }
}

/// Sign of axis `axis` in the vertex-group integer g: bit (n-1-axis), with a
/// zero bit meaning +1. g = 0 is the all-plus corner.
inline int group_sign(std::uint64_t g, std::size_t n, std::size_t axis) {
    return ((g >> (n - 1 - axis)) & 1ULL) ? -1 : 1;
}

}  // namespace detail

/// Enumerates the 2^(rn) cluster summaries of the level-r family, id order
/// = lexicographic over (outermost group, ..., innermost group).
inline std::vector<ClusterSummary> nested_cube_clusters(std::size_t n, std::size_t r,
                                                        double radius) {
    detail::check_cube_params(n, r);
    if (!(radius > 0.0) || !(radius < 1.0)) {
        throw std::invalid_argument("nested cube: radius must lie in (0, 1)");
    }
    const std::uint64_t groups = 1ULL << n;        // sign vectors per level
    const std::uint64_t total = 1ULL << (n * r);   // clusters
    std::vector<ClusterSummary> clusters;
    clusters.reserve(total);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        // Decode idx as r base-2^n digits, outermost level first.
        ClusterSummary c;
        c.id = static_cast<int>(idx);
        c.radius = radius;
        c.centroid.assign(n, 0.0);
        std::uint64_t rest = idx;
        std::uint64_t inner_group = 0;
        for (std::size_t level = 0; level < r; ++level) {
            std::uint64_t shift = n * (r - 1 - level);
            std::uint64_t g = (rest >> shift) & (groups - 1);
            if (level == r - 1) inner_group = g;
            double scale = static_cast<double>(1ULL << (r - 1 - level));
            for (std::size_t a = 0; a < n; ++a) {
                c.centroid[a] += scale * detail::group_sign(g, n, a);
            }
        }
        // Class label from the innermost sign vector, identified with its
        // negation: flip so the first component is +1, then read the
        // remaining n-1 signs as bits (-1 -> 1).
        std::uint64_t rep = inner_group;
        if (detail::group_sign(rep, n, 0) < 0) rep = ~rep & (groups - 1);
        c.class_label = static_cast<int>(rep & ((groups >> 1) - 1));
        clusters.push_back(std::move(c));
    }
    return clusters;
}

/// The (2^r - 1) * n axis-aligned planes x_a = c at the even integers
/// c in {-(2^r - 2), ..., 0, ..., 2^r - 2} — the midpoints between
/// consecutive center coordinates. Axis-major, offsets ascending.
inline std::vector<Hyperplane> canonical_planes(std::size_t n, std::size_t r) {
    detail::check_cube_params(n, r);
    const long long extent = (1LL << r) - 2;  // largest even offset
    std::vector<Hyperplane> planes;
    planes.reserve(((1ULL << r) - 1) * n);
    for (std::size_t a = 0; a < n; ++a) {
        for (long long c = -extent; c <= extent; c += 2) {
            Hyperplane p;
            p.normal.assign(n, 0.0);
            p.normal[a] = 1.0;
            p.bias = -static_cast<double>(c);
            planes.push_back(std::move(p));
        }
    }
    return planes;
}

struct DatasetPair {
    LabeledDataset train;
    LabeledDataset test;
};

/// Draws train + test samples uniformly inside every cluster ball. Each
/// cluster uses an independent substream mixed from (seed, cluster_id), and
/// its train samples are drawn before its test samples, so the result is
/// reproducible sample-for-sample.
inline DatasetPair generate_level_r(const NestedCubeSpec& spec) {
    std::vector<ClusterSummary> clusters = nested_cube_clusters(spec.n, spec.r, spec.radius);

    auto draw_in_ball = [&spec](Rng& rng, const ClusterSummary& c) {
        PointN dir(spec.n);
        double len = 0.0;
        do {
            for (std::size_t a = 0; a < spec.n; ++a) dir[a] = rng.normal();
            len = norm(dir);
        } while (len == 0.0);
        double t = spec.radius * std::pow(rng.uniform01(), 1.0 / static_cast<double>(spec.n));
        PointN p(spec.n);
        for (std::size_t a = 0; a < spec.n; ++a) p[a] = c.centroid[a] + t * dir[a] / len;
        return p;
    };

    DatasetPair out;
    out.train.dim = spec.n;
    out.test.dim = spec.n;
    out.train.clusters = clusters;
    out.test.clusters = clusters;
    out.train.samples.reserve(clusters.size() * spec.train_per_cluster);
    out.test.samples.reserve(clusters.size() * spec.test_per_cluster);
    for (const auto& c : clusters) {
        Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(c.id)));
        for (std::size_t i = 0; i < spec.train_per_cluster; ++i) {
            out.train.samples.push_back({draw_in_ball(rng, c), c.id, c.class_label});
        }
        for (std::size_t i = 0; i < spec.test_per_cluster; ++i) {
            out.test.samples.push_back({draw_in_ball(rng, c), c.id, c.class_label});
        }
    }
    return out;
}

}  // namespace ovnet
