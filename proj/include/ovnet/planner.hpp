#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ovnet/geometry.hpp"
#include "ovnet/orientation.hpp"

namespace ovnet {

struct PlannerConfig {
    double margin_fraction = 0.4;      // headroom on the plane-count estimate
    std::size_t max_planes = 64;       // hard budget, must be >= 1
    std::uint64_t seed = 0;            // recorded in the trace for provenance
    std::size_t pending_capacity = 0;  // pairs one open plane may serve; 0 = dimension
};

/// Planes needed for N separable clusters, with headroom:
/// ceil(log2(max(N, 2)) * (1 + margin_fraction)).
inline std::size_t estimate_plane_count(std::size_t cluster_count, double margin_fraction) {
    if (cluster_count < 1) {
        throw std::invalid_argument("estimate_plane_count: cluster count must be >= 1");
    }
    if (margin_fraction < 0.0) {
        throw std::invalid_argument("estimate_plane_count: margin_fraction must be >= 0");
    }
    double base = std::log2(static_cast<double>(std::max<std::size_t>(cluster_count, 2)));
    return static_cast<std::size_t>(std::ceil(base * (1.0 + margin_fraction)));
}

enum class PlannerAction {
    accepted_fresh_code,  // cluster's code was already unique; nothing added
    refit_open_plane,     // open plane refitted through one more midpoint pair
    added_plane           // fresh perpendicular bisector appended
};

struct PlannerStep {
    int cluster_id = 0;
    PlannerAction action = PlannerAction::accepted_fresh_code;
    int conflict_partner = -1;  // cluster id whose code the new one collided with
    int plane_index = -1;       // plane added or refitted
    std::size_t code_table_size = 0;  // accepted clusters after this step
    std::size_t plane_count = 0;      // planes after this step
};

struct PlannerTrace {
    std::vector<PlannerStep> steps;
    std::size_t initial_plane_count = 0;
    std::size_t estimated_planes = 0;
    std::uint64_t seed = 0;
    bool success = false;
    std::string failure;  // empty on success
};

struct PlanResult {
    std::vector<Hyperplane> planes;
    PlannerTrace trace;
};

/// Planner failure that still carries the partial trace for inspection.
class PlannerError : public std::runtime_error {
public:
    PlannerError(const std::string& what, PlannerTrace trace)
        : std::runtime_error(what), trace(std::move(trace)) {}
    PlannerTrace trace;
};

namespace detail {

/// Cluster code over an arbitrary (possibly empty) plane list; assumes the
/// planes have already been checked against the cluster.
inline OrientationCode planner_code(const std::vector<Hyperplane>& planes,
                                    const ClusterSummary& cluster) {
    OrientationCode code;
    code.signs.reserve(planes.size());
    for (const auto& p : planes) {
        code.signs.push_back(static_cast<std::int8_t>(cluster_margin(p, cluster).sign));
    }
    return code;
}

}  // namespace detail

/// Incrementally builds a plane set whose orientation codes distinguish every
/// cluster. Clusters are processed in input order against a growing code
/// table: a cluster whose code is already unique costs nothing; a collision
/// is resolved by refitting the single "open" plane (the most recently added
/// one) through the midpoints of every centroid pair it serves plus the new
/// pair, or — when there is no open plane, it is full, or the refit is
/// rejected — by adding a fresh perpendicular bisector of the two conflicting
/// centroids, which then becomes the open plane.
///
/// A candidate plane (refit or fresh) is accepted only if it cuts no cluster
/// of the input configuration (clearance >= 0 everywhere) and leaves all
/// accepted codes plus the new cluster's code pairwise distinct. The returned
/// plane set always passes verify_separation; failures throw PlannerError
/// with the partial trace attached.
inline PlanResult incremental_separate(const std::vector<ClusterSummary>& clusters,
                                       const std::vector<Hyperplane>& initial_planes,
                                       const PlannerConfig& cfg) {
    if (clusters.empty()) {
        throw std::invalid_argument("incremental_separate: no clusters given");
    }
    if (cfg.max_planes < 1) {
        throw std::invalid_argument("incremental_separate: max_planes must be >= 1");
    }
    const std::size_t n = clusters.front().centroid.size();
    if (n == 0) {
        throw std::invalid_argument("incremental_separate: zero-dimensional clusters");
    }
    for (const auto& c : clusters) {
        if (c.centroid.size() != n) {
            throw std::invalid_argument("incremental_separate: cluster dimension mismatch");
        }
    }
    for (std::size_t i = 0; i < clusters.size(); ++i) {
        for (std::size_t j = i + 1; j < clusters.size(); ++j) {
            if (clusters[i].id == clusters[j].id) {
                std::ostringstream msg;
                msg << "incremental_separate: duplicate cluster id " << clusters[i].id;
                throw std::invalid_argument(msg.str());
            }
            PointN diff(n);
            for (std::size_t a = 0; a < n; ++a) {
                diff[a] = clusters[i].centroid[a] - clusters[j].centroid[a];
            }
            if (norm(diff) <= clusters[i].radius + clusters[j].radius) {
                std::ostringstream msg;
                msg << "incremental_separate: clusters " << clusters[i].id << " and "
                    << clusters[j].id << " overlap";
                throw std::invalid_argument(msg.str());
            }
        }
    }
    std::size_t pending_capacity = cfg.pending_capacity == 0 ? n : cfg.pending_capacity;
    if (pending_capacity > n) {
        std::ostringstream msg;
        msg << "incremental_separate: pending_capacity " << pending_capacity
            << " exceeds dimension " << n;
        throw std::invalid_argument(msg.str());
    }

    PlannerTrace trace;
    trace.initial_plane_count = initial_planes.size();
    trace.estimated_planes = estimate_plane_count(clusters.size(), cfg.margin_fraction);
    trace.seed = cfg.seed;

    // Initial planes are fixed (never refitted); they must already be clean.
    for (std::size_t pi = 0; pi < initial_planes.size(); ++pi) {
        for (const auto& c : clusters) {
            ClusterMargin m = cluster_margin(initial_planes[pi], c);
            if (m.clearance < 0.0) {
                std::ostringstream msg;
                msg << "initial plane " << pi << " cuts cluster " << c.id
                    << " (clearance " << m.clearance << ")";
                trace.failure = msg.str();
                throw PlannerError(msg.str(), std::move(trace));
            }
        }
    }

    std::vector<Hyperplane> planes = initial_planes;
    std::vector<std::size_t> accepted;  // indices into clusters, in arrival order

    auto plane_cuts_any = [&clusters](const Hyperplane& p) -> int {
        for (const auto& c : clusters) {
            if (cluster_margin(p, c).clearance < 0.0) return c.id;
        }
        return -1;
    };

    auto codes_distinct = [&](const std::vector<Hyperplane>& trial,
                              std::size_t new_index) {
        std::vector<OrientationCode> codes;
        codes.reserve(accepted.size() + 1);
        for (std::size_t idx : accepted) {
            codes.push_back(detail::planner_code(trial, clusters[idx]));
        }
        codes.push_back(detail::planner_code(trial, clusters[new_index]));
        for (std::size_t i = 0; i < codes.size(); ++i) {
            for (std::size_t j = i + 1; j < codes.size(); ++j) {
                if (codes[i] == codes[j]) return false;
            }
        }
        return true;
    };

    struct OpenPlane {
        bool active = false;
        std::size_t plane_index = 0;
        std::vector<std::pair<std::size_t, std::size_t>> served;  // cluster indices
    };
    OpenPlane open;

    for (std::size_t ci = 0; ci < clusters.size(); ++ci) {
        const ClusterSummary& cluster = clusters[ci];
        OrientationCode code = detail::planner_code(planes, cluster);

        int partner = -1;           // conflicting resident's cluster id
        std::size_t partner_index = 0;  // index into clusters
        for (std::size_t idx : accepted) {
            if (detail::planner_code(planes, clusters[idx]) == code) {
                partner = clusters[idx].id;
                partner_index = idx;
                break;
            }
        }

        if (partner < 0) {
            accepted.push_back(ci);
            trace.steps.push_back({cluster.id, PlannerAction::accepted_fresh_code, -1, -1,
                                   accepted.size(), planes.size()});
            continue;
        }

        bool resolved = false;
        if (open.active && open.served.size() < pending_capacity) {
            std::vector<std::pair<PointN, PointN>> pairs;
            pairs.reserve(open.served.size() + 1);
            for (const auto& [ia, ib] : open.served) {
                pairs.emplace_back(clusters[ia].centroid, clusters[ib].centroid);
            }
            pairs.emplace_back(cluster.centroid, clusters[partner_index].centroid);
            try {
                Hyperplane refit = fit_plane_through_midpoints(pairs);
                std::vector<Hyperplane> trial = planes;
                trial[open.plane_index] = refit;
                if (plane_cuts_any(refit) < 0 && codes_distinct(trial, ci)) {
                    planes = std::move(trial);
                    open.served.emplace_back(ci, partner_index);
                    accepted.push_back(ci);
                    trace.steps.push_back({cluster.id, PlannerAction::refit_open_plane,
                                           partner, static_cast<int>(open.plane_index),
                                           accepted.size(), planes.size()});
                    resolved = true;
                }
            } catch (const MidpointFitError&) {
                // fall through to a fresh plane
            } catch (const MidpointSeparationError&) {
                // fall through to a fresh plane
            }
        }

        if (!resolved) {
            if (planes.size() >= cfg.max_planes) {
                std::ostringstream msg;
                msg << "plane budget " << cfg.max_planes << " exhausted while separating cluster "
                    << cluster.id << " from cluster " << partner;
                trace.failure = msg.str();
                throw PlannerError(msg.str(), std::move(trace));
            }
            Hyperplane bisector =
                perpendicular_bisector(cluster.centroid, clusters[partner_index].centroid);
            int cut_id = plane_cuts_any(bisector);
            if (cut_id >= 0) {
                std::ostringstream msg;
                msg << "unresolvable conflict between clusters " << cluster.id << " and "
                    << partner << ": their bisector cuts cluster " << cut_id;
                trace.failure = msg.str();
                throw PlannerError(msg.str(), std::move(trace));
            }
            std::vector<Hyperplane> trial = planes;
            trial.push_back(bisector);
            if (!codes_distinct(trial, ci)) {
                std::ostringstream msg;
                msg << "unresolvable conflict between clusters " << cluster.id << " and "
                    << partner << ": codes remain ambiguous after adding their bisector";
                trace.failure = msg.str();
                throw PlannerError(msg.str(), std::move(trace));
            }
            planes = std::move(trial);
            open.active = true;
            open.plane_index = planes.size() - 1;
            open.served.assign(1, {ci, partner_index});
            accepted.push_back(ci);
            trace.steps.push_back({cluster.id, PlannerAction::added_plane, partner,
                                   static_cast<int>(open.plane_index), accepted.size(),
                                   planes.size()});
        }
    }

    SeparationReport report = verify_separation(planes, clusters);
    if (!report.separated()) {
        std::ostringstream msg;
        msg << "final verification failed: " << report.cut_clusters.size() << " cuts, "
            << report.duplicate_groups.size() << " duplicate code groups";
        trace.failure = msg.str();
        throw PlannerError(msg.str(), std::move(trace));
    }
    trace.success = true;
    return {std::move(planes), std::move(trace)};
}

}  // namespace ovnet
