#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "dcl/sensing_graph.hpp"

using dcl::Edge;
using dcl::NodeId;
using dcl::Position;

namespace {

// 5x5 grid at spacing 0.25, built by hand so the generator under test is not involved.
std::vector<Position> lattice_5x5() {
    std::vector<Position> p;
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) p.push_back({0.25 * c, 0.25 * r});
    return p;
}

// Brute-force neighbour set straight from coordinates.
std::set<NodeId> brute_neighbors(const std::vector<Position>& p, NodeId i, double R) {
    std::set<NodeId> out;
    for (NodeId j = 0; j < p.size(); ++j) {
        if (j != i && std::hypot(p[i].x - p[j].x, p[i].y - p[j].y) <= R) out.insert(j);
    }
    return out;
}

dcl::SensingGraph path3() {
    const std::vector<Edge> e{{0, 1}, {1, 2}};
    return dcl::SensingGraph(3, 1.0, e);
}

}  // namespace

TEST(UnitDiskGraph, PairWithinRadiusIsConnected) {
    const std::vector<Position> p{{0, 0}, {0.3, 0}};
    const auto g = dcl::unit_disk_graph(p, 0.4);
    ASSERT_EQ(g.edges().size(), 1u);
    EXPECT_EQ(g.edges()[0], (Edge{0, 1}));
    EXPECT_FALSE(g.emitter().has_value());
}

TEST(UnitDiskGraph, PairBeyondRadiusIsNotConnected) {
    const std::vector<Position> p{{0, 0}, {0.5, 0}};
    EXPECT_TRUE(dcl::unit_disk_graph(p, 0.4).edges().empty());
}

TEST(UnitDiskGraph, BoundaryDistanceCountsAsEdge) {
    const std::vector<Position> p{{0, 0}, {0.5, 0}};
    EXPECT_EQ(dcl::unit_disk_graph(p, 0.5).edges().size(), 1u);
}

TEST(UnitDiskGraph, LatticeDegreesMatchBruteForce) {
    const auto p = lattice_5x5();
    const auto g = dcl::unit_disk_graph(p, 0.4);
    EXPECT_EQ(g.degree(12), 8u);  // interior: 4 axis + 4 diagonal
    EXPECT_EQ(g.degree(0), 3u);   // corner
    for (NodeId i = 0; i < p.size(); ++i) {
        const auto nb = dcl::neighbors(g, i);
        EXPECT_EQ(std::set<NodeId>(nb.begin(), nb.end()), brute_neighbors(p, i, 0.4)) << "node " << i;
    }
}

TEST(UnitDiskGraph, RejectsBadInput) {
    const std::vector<Position> empty;
    EXPECT_THROW((void)dcl::unit_disk_graph(empty, 0.4), dcl::InvalidInput);
    const std::vector<Position> nan{{0, 0}, {std::numeric_limits<double>::quiet_NaN(), 0}};
    EXPECT_THROW((void)dcl::unit_disk_graph(nan, 0.4), dcl::InvalidInput);
    const std::vector<Position> ok{{0, 0}, {1, 0}};
    EXPECT_THROW((void)dcl::unit_disk_graph(ok, 0.0), dcl::InvalidInput);
}

TEST(UnitDiskGraph, RandomizedSoundness) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 20;
        std::vector<Position> p(n);
        for (auto& q : p) q = {u(rng), u(rng)};
        const double R = 0.05 + 0.6 * u(rng);
        const auto g = dcl::unit_disk_graph(p, R);
        for (NodeId i = 0; i < n; ++i) {
            for (NodeId j = 0; j < n; ++j) {
                if (i == j) {
                    EXPECT_FALSE(g.has_edge(i, i));
                    continue;
                }
                EXPECT_EQ(g.has_edge(i, j), g.has_edge(j, i));
                EXPECT_EQ(g.has_edge(i, j), dcl::distance(p[i], p[j]) <= R);
            }
        }
    }
}

TEST(Neighbors, SingleNodeAndPath) {
    const std::vector<Position> one{{0, 0}};
    EXPECT_TRUE(dcl::neighbors(dcl::unit_disk_graph(one, 1.0), 0).empty());
    EXPECT_EQ(dcl::neighbors(path3(), 1), (std::vector<NodeId>{0, 2}));
    EXPECT_THROW((void)dcl::neighbors(path3(), 3), dcl::InvalidInput);
}

TEST(TwoHopShadowCandidates, PathAndTriangle) {
    EXPECT_EQ(dcl::two_hop_shadow_candidates(path3(), 0), (std::vector<dcl::ShadowCandidate>{{2, 1}}));
    const std::vector<Edge> k3{{0, 1}, {0, 2}, {1, 2}};
    const dcl::SensingGraph tri(3, 1.0, k3);
    for (NodeId i = 0; i < 3; ++i) EXPECT_TRUE(dcl::two_hop_shadow_candidates(tri, i).empty());
}

TEST(TwoHopShadowCandidates, LatticeCornerMatchesBruteForce) {
    const auto p = lattice_5x5();
    const auto g = dcl::unit_disk_graph(p, 0.4);
    for (NodeId i : {NodeId{0}, NodeId{12}, NodeId{7}}) {
        const auto ni = brute_neighbors(p, i, 0.4);
        std::multiset<std::pair<NodeId, NodeId>> expected;
        for (NodeId j : ni) {
            for (NodeId k : brute_neighbors(p, j, 0.4)) {
                if (k != i && !ni.count(k)) expected.insert({k, j});
            }
        }
        std::multiset<std::pair<NodeId, NodeId>> got;
        for (const auto& c : dcl::two_hop_shadow_candidates(g, i)) {
            EXPECT_NE(c.target, i);
            got.insert({c.target, c.via});
        }
        EXPECT_EQ(got, expected) << "node " << i;
    }
    // Corner: neighbours 1, 5, 6 reach 2, 7, 10, 11, 12 and so on; node 0 itself never appears.
    EXPECT_FALSE(dcl::two_hop_shadow_candidates(g, 0).empty());
}

TEST(GgrRadiusThreshold, KnownValues) {
    EXPECT_NEAR(dcl::ggr_radius_threshold(25), 0.669, 5e-4);
    EXPECT_NEAR(dcl::ggr_radius_threshold(100), 0.4, 1e-15);
    const double natural = 2.0 * std::sqrt(2.0) * std::sqrt(std::log(25.0) / 25.0);
    EXPECT_NEAR(dcl::ggr_radius_threshold(25, dcl::LogBase::Natural), natural, 1e-15);
    EXPECT_NEAR(natural, 1.015, 5e-4);
    EXPECT_THROW((void)dcl::ggr_radius_threshold(1), dcl::InvalidInput);
}

TEST(GgrRadiusThreshold, StrictlyDecreasingFromThree) {
    for (auto base : {dcl::LogBase::Ten, dcl::LogBase::Natural}) {
        for (std::size_t n = 3; n < 2000; ++n) {
            EXPECT_GT(dcl::ggr_radius_threshold(n, base), dcl::ggr_radius_threshold(n + 1, base)) << n;
        }
    }
}

TEST(AugmentWithEmitter, AddsStarAroundEmitter) {
    const std::vector<Position> far{{0, 0}, {5, 0}};
    const auto g = dcl::augment_with_emitter(dcl::unit_disk_graph(far, 0.4), 0);
    EXPECT_TRUE(g.has_edge(0, 1));
    EXPECT_EQ(g.emitter(), NodeId{0});

    const std::vector<Edge> k3{{0, 1}, {0, 2}, {1, 2}};
    const dcl::SensingGraph tri(3, 1.0, k3);
    const auto t2 = dcl::augment_with_emitter(tri, 2);
    EXPECT_EQ(t2.edges(), tri.edges());
    EXPECT_EQ(t2.emitter(), NodeId{2});

    const auto lat = dcl::augment_with_emitter(dcl::unit_disk_graph(lattice_5x5(), 0.4), 0);
    EXPECT_EQ(lat.degree(0), 24u);
    EXPECT_THROW((void)dcl::augment_with_emitter(tri, 3), dcl::InvalidInput);
}

TEST(IsConnected, Basics) {
    EXPECT_TRUE(dcl::is_connected(path3()));
    const std::vector<Position> two{{0, 0}, {1, 0}};
    EXPECT_FALSE(dcl::is_connected(dcl::unit_disk_graph(two, 0.5)));
    EXPECT_FALSE(dcl::is_connected(dcl::unit_disk_graph(lattice_5x5(), 0.2)));
    EXPECT_TRUE(dcl::is_connected(dcl::unit_disk_graph(lattice_5x5(), 0.25)));
}

TEST(SensingGraph, RejectsSelfLoops) {
    const std::vector<Edge> bad{{1, 1}};
    EXPECT_THROW(dcl::SensingGraph(2, 1.0, bad), dcl::InvalidInput);
}
