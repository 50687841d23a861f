#include "ovnet/planner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ovnet/datasets.hpp"
#include "ovnet/orientation.hpp"
#include "ovnet/random.hpp"

using namespace ovnet;

namespace {

ClusterSummary ball(int id, PointN center, double radius = 0.05) {
    return {id, std::move(center), radius, 0};
}

}  // namespace

TEST(Planner, EstimatePlaneCount) {
    EXPECT_EQ(estimate_plane_count(10000, 0.4), 19u);  // ceil(13.29 * 1.4)
    EXPECT_EQ(estimate_plane_count(256, 0.0), 8u);
    EXPECT_EQ(estimate_plane_count(2, 0.0), 1u);
    EXPECT_EQ(estimate_plane_count(1, 0.0), 1u);  // clamped to the two-cluster case
    EXPECT_THROW(estimate_plane_count(0, 0.4), std::invalid_argument);
    EXPECT_THROW(estimate_plane_count(4, -0.1), std::invalid_argument);
}

TEST(Planner, AlreadySeparatedClustersAddNothing) {
    std::vector<ClusterSummary> clusters = nested_cube_clusters(3, 1, 0.3);
    std::vector<Hyperplane> planes = canonical_planes(3, 1);
    PlanResult r = incremental_separate(clusters, planes, {});
    EXPECT_TRUE(r.trace.success);
    EXPECT_EQ(r.planes.size(), 3u);
    EXPECT_EQ(plane_set_hash(r.planes), plane_set_hash(planes));  // untouched
    ASSERT_EQ(r.trace.steps.size(), 8u);
    for (const auto& step : r.trace.steps) {
        EXPECT_EQ(step.action, PlannerAction::accepted_fresh_code);
        EXPECT_EQ(step.conflict_partner, -1);
    }
    EXPECT_EQ(r.trace.initial_plane_count, 3u);
}

TEST(Planner, SingletonNeedsNoPlanes) {
    PlanResult r = incremental_separate({ball(0, {1.0, 2.0})}, {}, {});
    EXPECT_TRUE(r.trace.success);
    EXPECT_TRUE(r.planes.empty());
    ASSERT_EQ(r.trace.steps.size(), 1u);
    EXPECT_EQ(r.trace.steps[0].action, PlannerAction::accepted_fresh_code);
}

TEST(Planner, TwoClustersGetTheirBisector) {
    std::vector<ClusterSummary> clusters = {ball(0, {0.0, 0.0}, 0.1), ball(1, {2.0, 0.0}, 0.1)};
    PlanResult r = incremental_separate(clusters, {}, {});
    EXPECT_TRUE(r.trace.success);
    ASSERT_EQ(r.planes.size(), 1u);
    // Bisector of the two centroids: the plane x = 1 (up to orientation).
    const Hyperplane& p = r.planes[0];
    EXPECT_DOUBLE_EQ(p.bias / p.normal[0], -1.0);
    EXPECT_DOUBLE_EQ(p.normal[1], 0.0);
    ASSERT_EQ(r.trace.steps.size(), 2u);
    EXPECT_EQ(r.trace.steps[0].action, PlannerAction::accepted_fresh_code);
    EXPECT_EQ(r.trace.steps[1].action, PlannerAction::added_plane);
    EXPECT_EQ(r.trace.steps[1].conflict_partner, 0);
    EXPECT_EQ(r.trace.steps[1].plane_index, 0);
    EXPECT_TRUE(verify_separation(r.planes, clusters).separated());
}

TEST(Planner, RefitLetsOnePlaneServeTwoPairs) {
    // One fixed horizontal plane plus four clusters arranged so the second
    // conflict is resolved by refitting the open plane through both midpoint
    // pairs: the refitted plane 1 + x - 2y = 0 separates (B,A) and (D,C).
    std::vector<Hyperplane> initial = {{-1.5, {0.0, 1.0}}};  // y = 1.5
    std::vector<ClusterSummary> clusters = {
        ball(0, {1.5, 1.0}),  // A
        ball(1, {0.5, 1.0}),  // B: collides with A, bisector x = 1 added
        ball(2, {3.5, 2.0}),  // C: fresh code
        ball(3, {2.5, 2.0}),  // D: collides with C, resolved by refit
    };
    PlanResult r = incremental_separate(clusters, initial, {});
    EXPECT_TRUE(r.trace.success);
    ASSERT_EQ(r.planes.size(), 2u);

    ASSERT_EQ(r.trace.steps.size(), 4u);
    EXPECT_EQ(r.trace.steps[0].action, PlannerAction::accepted_fresh_code);
    EXPECT_EQ(r.trace.steps[1].action, PlannerAction::added_plane);
    EXPECT_EQ(r.trace.steps[1].conflict_partner, 0);
    EXPECT_EQ(r.trace.steps[2].action, PlannerAction::accepted_fresh_code);
    EXPECT_EQ(r.trace.steps[3].action, PlannerAction::refit_open_plane);
    EXPECT_EQ(r.trace.steps[3].conflict_partner, 2);
    EXPECT_EQ(r.trace.steps[3].plane_index, 1);

    const Hyperplane& refit = r.planes[1];
    EXPECT_NEAR(refit.bias, 1.0, 1e-9);
    EXPECT_NEAR(refit.normal[0], 1.0, 1e-6);
    EXPECT_NEAR(refit.normal[1], -2.0, 1e-6);
    EXPECT_TRUE(verify_separation(r.planes, clusters).separated());
}

TEST(Planner, FallsBackToFreshPlaneWhenRefitImpossible) {
    // Collinear centroids: the midpoints (1,0) and (3,0) admit no common
    // plane of the fitted form, so the planner adds a second bisector.
    std::vector<ClusterSummary> clusters = {
        ball(0, {0.0, 0.0}),
        ball(1, {2.0, 0.0}),
        ball(2, {4.0, 0.0}),
    };
    PlanResult r = incremental_separate(clusters, {}, {});
    EXPECT_TRUE(r.trace.success);
    EXPECT_EQ(r.planes.size(), 2u);
    ASSERT_EQ(r.trace.steps.size(), 3u);
    EXPECT_EQ(r.trace.steps[1].action, PlannerAction::added_plane);
    EXPECT_EQ(r.trace.steps[2].action, PlannerAction::added_plane);
    EXPECT_EQ(r.trace.steps[2].conflict_partner, 1);
    EXPECT_TRUE(verify_separation(r.planes, clusters).separated());
}

TEST(Planner, PlaneBudgetFailureCarriesTrace) {
    std::vector<ClusterSummary> clusters = {
        ball(0, {0.0, 0.0}),
        ball(1, {2.0, 0.0}),
        ball(2, {4.0, 0.0}),
    };
    PlannerConfig cfg;
    cfg.max_planes = 1;
    try {
        incremental_separate(clusters, {}, cfg);
        FAIL() << "expected PlannerError";
    } catch (const PlannerError& e) {
        EXPECT_NE(std::string(e.what()).find("budget"), std::string::npos);
        EXPECT_FALSE(e.trace.success);
        EXPECT_FALSE(e.trace.failure.empty());
        EXPECT_EQ(e.trace.steps.size(), 2u);  // two clusters were placed first
    }
}

TEST(Planner, RejectsInitialPlaneCuttingACluster) {
    std::vector<ClusterSummary> clusters = {ball(0, {0.05, 0.0}, 0.3), ball(1, {2.0, 0.0}, 0.3)};
    std::vector<Hyperplane> initial = {{0.0, {1.0, 0.0}}};  // x = 0 slices cluster 0
    try {
        incremental_separate(clusters, initial, {});
        FAIL() << "expected PlannerError";
    } catch (const PlannerError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("initial plane 0"), std::string::npos);
        EXPECT_NE(msg.find("cluster 0"), std::string::npos);
    }
}

TEST(Planner, ReportsBystanderBlockingTheBisector) {
    // The bisector of clusters 0 and 1 is x = 1, which passes straight
    // through cluster 2 sitting at (1, 0.3).
    std::vector<ClusterSummary> clusters = {
        ball(0, {0.0, 0.0}, 0.2),
        ball(1, {2.0, 0.0}, 0.2),
        ball(2, {1.0, 0.3}, 0.2),
    };
    try {
        incremental_separate(clusters, {}, {});
        FAIL() << "expected PlannerError";
    } catch (const PlannerError& e) {
        std::string msg = e.what();
        EXPECT_NE(msg.find("unresolvable conflict between clusters 1 and 0"), std::string::npos);
        EXPECT_NE(msg.find("cuts cluster 2"), std::string::npos);
        EXPECT_EQ(e.trace.steps.size(), 1u);
    }
}

TEST(Planner, InputValidation) {
    EXPECT_THROW(incremental_separate({}, {}, {}), std::invalid_argument);

    std::vector<ClusterSummary> overlapping = {ball(0, {0.0, 0.0}, 0.6), ball(1, {1.0, 0.0}, 0.6)};
    EXPECT_THROW(incremental_separate(overlapping, {}, {}), std::invalid_argument);

    std::vector<ClusterSummary> duplicate_ids = {ball(3, {0.0, 0.0}), ball(3, {2.0, 0.0})};
    EXPECT_THROW(incremental_separate(duplicate_ids, {}, {}), std::invalid_argument);

    std::vector<ClusterSummary> mismatched = {ball(0, {0.0, 0.0}), ball(1, {2.0, 0.0, 0.0})};
    EXPECT_THROW(incremental_separate(mismatched, {}, {}), std::invalid_argument);

    PlannerConfig zero_budget;
    zero_budget.max_planes = 0;
    EXPECT_THROW(incremental_separate({ball(0, {1.0, 1.0})}, {}, zero_budget),
                 std::invalid_argument);

    PlannerConfig wide;
    wide.pending_capacity = 3;  // exceeds the 2-d ambient dimension
    EXPECT_THROW(incremental_separate({ball(0, {1.0, 1.0})}, {}, wide), std::invalid_argument);
}

TEST(Planner, DeterministicAcrossRuns) {
    Rng rng(77);
    std::vector<ClusterSummary> clusters;
    for (int i = 0; i < 16; ++i) {
        PointN c(4);
        for (auto& v : c) v = rng.uniform(-10.0, 10.0);
        clusters.push_back(ball(i, c, 1e-3));
    }
    PlanResult a = incremental_separate(clusters, {}, {});
    PlanResult b = incremental_separate(clusters, {}, {});
    EXPECT_TRUE(a.trace.success);
    EXPECT_EQ(plane_set_hash(a.planes), plane_set_hash(b.planes));
    EXPECT_EQ(a.trace.steps.size(), b.trace.steps.size());
    EXPECT_TRUE(verify_separation(a.planes, clusters).separated());
}

TEST(Planner, SeparatesRandomInstancesEconomically) {
    // 30 tiny balls thrown into an 8-d box: every instance must come out
    // separated, and the plane count should sit near the log2 estimate, far
    // below the 29 a one-plane-per-pair strategy would need.
    std::size_t worst = 0;
    for (std::uint64_t inst = 0; inst < 10; ++inst) {
        Rng rng(mix_seed(4242, inst));
        std::vector<ClusterSummary> clusters;
        for (int i = 0; i < 30; ++i) {
            PointN c(8);
            for (auto& v : c) v = rng.uniform(-50.0, 50.0);
            clusters.push_back(ball(i, c, 1e-6));
        }
        PlanResult r = incremental_separate(clusters, {}, {});
        EXPECT_TRUE(r.trace.success);
        EXPECT_TRUE(verify_separation(r.planes, clusters).separated());
        worst = std::max(worst, r.planes.size());
    }
    EXPECT_LE(worst, 15u);  // 3 * ceil(log2(30))
}
