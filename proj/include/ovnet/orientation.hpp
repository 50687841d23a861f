#pragma once

#include <cstdint>
#include <cstring>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ovnet/geometry.hpp"

namespace ovnet {

/// The sign pattern (+1/-1 per plane, in plane order) locating a point or a
/// whole cluster relative to an ordered set of hyperplanes.
struct OrientationCode {
    std::vector<std::int8_t> signs;

    std::size_t size() const { return signs.size(); }

    friend bool operator==(const OrientationCode& a, const OrientationCode& b) {
        return a.signs == b.signs;
    }
    friend bool operator!=(const OrientationCode& a, const OrientationCode& b) {
        return !(a == b);
    }
    friend bool operator<(const OrientationCode& a, const OrientationCode& b) {
        return a.signs < b.signs;
    }
};

/// Inner product of two codes over the same plane set. Equal codes give +q;
/// distinct codes give at most q-2, and the value always has the parity of q.
inline int code_dot(const OrientationCode& a, const OrientationCode& b) {
    if (a.size() != b.size()) {
        std::ostringstream msg;
        msg << "code_dot: length mismatch (" << a.size() << " vs " << b.size() << ")";
        throw std::invalid_argument(msg.str());
    }
    int s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += static_cast<int>(a.signs[i]) * static_cast<int>(b.signs[i]);
    }
    return s;
}

inline OrientationCode orientation_of_point(const std::vector<Hyperplane>& planes,
                                            const PointN& x) {
    if (planes.empty()) {
        throw std::invalid_argument("orientation_of_point: empty plane set");
    }
    OrientationCode code;
    code.signs.reserve(planes.size());
    for (const auto& p : planes) {
        code.signs.push_back(static_cast<std::int8_t>(plane_side(p, x)));
    }
    return code;
}

/// Thrown when a plane passes through (or touches) a cluster ball, so the
/// cluster has no single side.
class CutClusterError : public std::runtime_error {
public:
    CutClusterError(int cluster_id, std::size_t plane_index, double clearance)
        : std::runtime_error(make_message(cluster_id, plane_index, clearance)),
          cluster_id(cluster_id),
          plane_index(plane_index),
          clearance(clearance) {}

    int cluster_id;
    std::size_t plane_index;
    double clearance;

private:
    static std::string make_message(int cluster_id, std::size_t plane_index,
                                    double clearance) {
        std::ostringstream msg;
        msg << "plane " << plane_index << " cuts cluster " << cluster_id
            << " (clearance " << clearance << ")";
        return msg.str();
    }
};

/// Code of a whole cluster ball. Throws CutClusterError if any plane has
/// negative clearance against the ball.
inline OrientationCode orientation_of_cluster(const std::vector<Hyperplane>& planes,
                                              const ClusterSummary& cluster) {
    if (planes.empty()) {
        throw std::invalid_argument("orientation_of_cluster: empty plane set");
    }
    OrientationCode code;
    code.signs.reserve(planes.size());
    for (std::size_t i = 0; i < planes.size(); ++i) {
        ClusterMargin m = cluster_margin(planes[i], cluster);
        if (m.clearance < 0.0) {
            throw CutClusterError(cluster.id, i, m.clearance);
        }
        code.signs.push_back(static_cast<std::int8_t>(m.sign));
    }
    return code;
}

/// One plane/cluster contact found during verification.
struct CutRecord {
    int cluster_id = 0;
    std::size_t plane_index = 0;
    double clearance = 0.0;
};

/// Outcome of checking a plane set against a cluster configuration.
struct SeparationReport {
    std::uint64_t plane_set_hash = 0;
    /// Codes of all clusters that no plane cuts, keyed by cluster id.
    std::map<int, OrientationCode> codes;
    /// Groups (size >= 2) of cluster ids sharing one code.
    std::vector<std::vector<int>> duplicate_groups;
    /// Every plane/cluster contact (negative clearance).
    std::vector<CutRecord> cut_clusters;

    bool separated() const {
        return duplicate_groups.empty() && cut_clusters.empty();
    }
};

/// FNV-1a over the raw byte patterns of every plane's bias then normal
/// coefficients, in plane order. Identifies a plane set in reports.
inline std::uint64_t plane_set_hash(const std::vector<Hyperplane>& planes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix_double = [&h](double v) {
        std::uint64_t bits;
        static_assert(sizeof bits == sizeof v);
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffULL;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& p : planes) {
        mix_double(p.bias);
        for (double c : p.normal) mix_double(c);
    }
    return h;
}

/// Checks every cluster against every plane. Never throws: cut clusters are
/// recorded and excluded from the code table; clusters sharing a code are
/// grouped. An empty plane list yields a single all-clusters duplicate group
/// (every cluster has the same empty code) unless there are fewer than two
/// clusters.
inline SeparationReport verify_separation(const std::vector<Hyperplane>& planes,
                                          const std::vector<ClusterSummary>& clusters) {
    SeparationReport report;
    report.plane_set_hash = plane_set_hash(planes);
    std::map<OrientationCode, std::vector<int>> by_code;
    for (const auto& cluster : clusters) {
        OrientationCode code;
        code.signs.reserve(planes.size());
        bool cut = false;
        for (std::size_t i = 0; i < planes.size(); ++i) {
            ClusterMargin m = cluster_margin(planes[i], cluster);
            if (m.clearance < 0.0) {
                report.cut_clusters.push_back({cluster.id, i, m.clearance});
                cut = true;
            }
            code.signs.push_back(static_cast<std::int8_t>(m.sign));
        }
        if (!cut) {
            report.codes.emplace(cluster.id, code);
            by_code[code].push_back(cluster.id);
        }
    }
    for (auto& [code, ids] : by_code) {
        if (ids.size() >= 2) report.duplicate_groups.push_back(ids);
    }
    return report;
}

}  // namespace ovnet
