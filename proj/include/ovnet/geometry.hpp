#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ovnet {

using PointN = std::vector<double>;

inline double dot(const PointN& a, const PointN& b) {
    if (a.size() != b.size()) {
        std::ostringstream msg;
        msg << "dot: dimension mismatch (" << a.size() << " vs " << b.size() << ")";
        throw std::invalid_argument(msg.str());
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const PointN& a) { return std::sqrt(dot(a, a)); }

/// Affine hyperplane  bias + normal . x = 0.
struct Hyperplane {
    double bias = 0.0;
    PointN normal;

    std::size_t dim() const { return normal.size(); }
};

/// Signed affine value  bias + normal . x  at a point.
inline double plane_eval(const Hyperplane& p, const PointN& x) {
    return p.bias + dot(p.normal, x);
}

/// Side of the plane a point lies on: +1 for a strictly positive affine
/// value, -1 otherwise (points exactly on the plane count as -1).
inline int plane_side(const Hyperplane& p, const PointN& x) {
    return plane_eval(p, x) > 0.0 ? 1 : -1;
}

/// A spherical cluster: all points within `radius` of `centroid`.
struct ClusterSummary {
    int id = 0;
    PointN centroid;
    double radius = 0.0;
    int class_label = 0;
};

/// Side and worst-case clearance of a whole cluster relative to a plane.
/// clearance = (distance from centroid to plane) - radius; negative means
/// the plane cuts into the ball.
struct ClusterMargin {
    int sign = 0;
    double clearance = 0.0;
};

inline ClusterMargin cluster_margin(const Hyperplane& p, const ClusterSummary& c) {
    double n = norm(p.normal);
    if (n == 0.0) {
        throw std::invalid_argument("cluster_margin: plane has zero normal");
    }
    double value = plane_eval(p, c.centroid);
    ClusterMargin m;
    m.sign = value > 0.0 ? 1 : -1;
    m.clearance = std::abs(value) / n - c.radius;
    return m;
}

/// Plane through the midpoint of segment ab, orthogonal to it:
/// normal = b - a, bias = -(b - a) . (a + b) / 2. Separates a from b.
inline Hyperplane perpendicular_bisector(const PointN& a, const PointN& b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("perpendicular_bisector: dimension mismatch");
    }
    Hyperplane p;
    p.normal.resize(a.size());
    double bias = 0.0;
    bool all_equal = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        p.normal[i] = b[i] - a[i];
        if (p.normal[i] != 0.0) all_equal = false;
        bias -= p.normal[i] * (a[i] + b[i]) * 0.5;
    }
    if (all_equal) {
        throw std::invalid_argument("perpendicular_bisector: points coincide");
    }
    p.bias = bias;
    return p;
}

/// Thrown when the midpoint system is numerically singular or inconsistent
/// (e.g. the requested plane would have to pass through the origin).
class MidpointFitError : public std::runtime_error {
public:
    explicit MidpointFitError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when the fitted plane fails to separate one of the input pairs.
class MidpointSeparationError : public std::runtime_error {
public:
    explicit MidpointSeparationError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kMidpointDamping = 1e-12;
inline constexpr double kMidpointResidualTol = 1e-9;
inline constexpr double kConditionLimit = 1e12;

namespace detail {

/// Solves the k-by-k symmetric system G y = rhs by Gaussian elimination with
/// partial pivoting. Throws MidpointFitError when the pivot ratio indicates
/// a singular system.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> g,
                                       std::vector<double> rhs) {
    const std::size_t k = rhs.size();
    double max_pivot = 0.0;
    double min_pivot = 0.0;
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot_row = col;
        for (std::size_t r = col + 1; r < k; ++r) {
            if (std::abs(g[r][col]) > std::abs(g[pivot_row][col])) pivot_row = r;
        }
        if (pivot_row != col) {
            std::swap(g[pivot_row], g[col]);
            std::swap(rhs[pivot_row], rhs[col]);
        }
        double pivot = g[col][col];
        double ap = std::abs(pivot);
        if (col == 0) {
            max_pivot = min_pivot = ap;
        } else {
            if (ap > max_pivot) max_pivot = ap;
            if (ap < min_pivot) min_pivot = ap;
        }
        if (ap == 0.0 || max_pivot / min_pivot > kConditionLimit) {
            throw MidpointFitError("midpoint system is singular or near-singular");
        }
        for (std::size_t r = col + 1; r < k; ++r) {
            double f = g[r][col] / pivot;
            if (f == 0.0) continue;
            for (std::size_t c2 = col; c2 < k; ++c2) g[r][c2] -= f * g[col][c2];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> y(k, 0.0);
    for (std::size_t i = k; i-- > 0;) {
        double s = rhs[i];
        for (std::size_t c2 = i + 1; c2 < k; ++c2) s -= g[i][c2] * y[c2];
        y[i] = s / g[i][i];
    }
    return y;
}

}  // namespace detail

/// Fits the minimum-norm plane  1 + alpha . x = 0  passing through the
/// midpoints of the given point pairs (at most dim pairs). The coefficient
/// vector alpha solves the underdetermined system M alpha = -1 in the
/// least-norm sense via damped normal equations alpha = M^T (M M^T + lI)^-1 (-1).
///
/// Throws MidpointFitError when the system is singular/inconsistent (which
/// includes any midpoint at the origin, since 1 + alpha . 0 = 1 != 0), and
/// MidpointSeparationError when the resulting plane does not put some pair's
/// two points on strictly opposite sides.
inline Hyperplane fit_plane_through_midpoints(
    const std::vector<std::pair<PointN, PointN>>& pairs) {
    if (pairs.empty()) {
        throw std::invalid_argument("fit_plane_through_midpoints: no pairs given");
    }
    const std::size_t n = pairs.front().first.size();
    if (pairs.size() > n) {
        std::ostringstream msg;
        msg << "fit_plane_through_midpoints: " << pairs.size()
            << " pairs exceed dimension " << n;
        throw std::invalid_argument(msg.str());
    }
    std::vector<PointN> mids;
    mids.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
        if (a.size() != n || b.size() != n) {
            throw std::invalid_argument("fit_plane_through_midpoints: dimension mismatch");
        }
        PointN m(n);
        for (std::size_t i = 0; i < n; ++i) m[i] = 0.5 * (a[i] + b[i]);
        mids.push_back(std::move(m));
    }

    const std::size_t k = mids.size();
    // Gram matrix G = M M^T + damping * I and rhs = -1.
    std::vector<std::vector<double>> g(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            double s = dot(mids[i], mids[j]);
            g[i][j] = s;
            g[j][i] = s;
        }
        g[i][i] += kMidpointDamping;
    }
    std::vector<double> y = detail::solve_dense(std::move(g), std::vector<double>(k, -1.0));

    Hyperplane p;
    p.bias = 1.0;
    p.normal.assign(n, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t c = 0; c < n; ++c) p.normal[c] += y[i] * mids[i][c];
    }

    // Residual check: each midpoint must actually lie on the plane.
    for (std::size_t i = 0; i < k; ++i) {
        double r = plane_eval(p, mids[i]);
        if (std::abs(r) > kMidpointResidualTol) {
            std::ostringstream msg;
            msg << "midpoint " << i << " misses the fitted plane by " << std::abs(r)
                << " (the midpoint configuration admits no plane of the form 1 + a.x = 0)";
            throw MidpointFitError(msg.str());
        }
    }
    // Separation check: every pair must straddle the plane.
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        int sa = plane_side(p, pairs[i].first);
        int sb = plane_side(p, pairs[i].second);
        if (sa == sb) {
            std::ostringstream msg;
            msg << "fitted plane fails to separate pair " << i;
            throw MidpointSeparationError(msg.str());
        }
    }
    return p;
}

}  // namespace ovnet
