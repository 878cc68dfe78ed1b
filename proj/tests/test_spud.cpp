#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace mashspud;
namespace ts = testing_support;

namespace {

WeightedGraph random_graph(int n, double density, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    WeightedGraph g(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            if (u(gen) < density) {
                const double len = u(gen);
                g[static_cast<std::size_t>(a)].emplace_back(b, len);
                g[static_cast<std::size_t>(b)].emplace_back(a, len);
            }
        }
    }
    return g;
}

Matrix exact_cross(const Matrix& gx, const Matrix& gy, const AnchorList& anchors, double hop) {
    const Eigen::Index nx = gx.rows();
    const Eigen::Index ny = gy.rows();
    Matrix a = Matrix::Constant(nx + ny, nx + ny, kUnreachable);
    a.topLeftCorner(nx, nx) = gx;
    a.bottomRightCorner(ny, ny) = gy;
    for (const auto& p : anchors) {
        a(p.x, nx + p.y) = std::min(a(p.x, nx + p.y), hop);
        a(nx + p.y, p.x) = std::min(a(nx + p.y, p.x), hop);
    }
    return ts::floyd_warshall(a).topRightCorner(nx, ny);
}

void expect_same(const Matrix& a, const Matrix& b, double tol) {
    ASSERT_EQ(a.rows(), b.rows());
    ASSERT_EQ(a.cols(), b.cols());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double x = a.data()[i];
        const double y = b.data()[i];
        if (std::isinf(x) || std::isinf(y)) {
            EXPECT_EQ(x, y);
        } else {
            EXPECT_NEAR(x, y, tol);
        }
    }
}

} // namespace

TEST(Dijkstra, MatchesFloydWarshallOnRandomGraphs) {
    std::mt19937_64 gen(100);
    for (int trial = 0; trial < 50; ++trial) {
        const auto g = random_graph(12, 0.25, gen);
        expect_same(domain_geodesics(g), ts::floyd_warshall(ts::adjacency(g)), 1e-12);
    }
}

TEST(Dijkstra, DisconnectedNodesStayUnreachable) {
    WeightedGraph g(3);
    g[0].emplace_back(1, 0.5);
    g[1].emplace_back(0, 0.5);
    const Matrix d = domain_geodesics(g);
    EXPECT_DOUBLE_EQ(d(0, 1), 0.5);
    EXPECT_TRUE(std::isinf(d(0, 2)));
    EXPECT_DOUBLE_EQ(d(2, 2), 0.0);
}

TEST(LengthGraph, LengthsAreOneMinusSimilarityOverMax) {
    std::mt19937_64 gen(8);
    KernelParams p;
    p.k = 3;
    const auto s = build_domain_similarity(ts::make_data(ts::random_matrix(20, 2, gen)), p);
    const auto g = length_graph(s);
    double longest = 0;
    for (const auto& [a, b] : s.edges()) {
        longest = std::max(longest, 1.0 - s.weights(a, b));
    }
    double seen_max = 0;
    for (std::size_t u = 0; u < g.size(); ++u) {
        for (const auto& [v, len] : g[u]) {
            EXPECT_NEAR(len, (1.0 - s.weights(static_cast<Eigen::Index>(u), v)) / longest, 1e-15);
            seen_max = std::max(seen_max, len);
        }
    }
    EXPECT_DOUBLE_EQ(seen_max, 1.0);
}

TEST(NearestAnchorTest, PicksClosestWithLowerIndexOnTies) {
    Matrix d(4, 4);
    d << 0, 1, 2, 1,
         1, 0, 1, 2,
         2, 1, 0, 1,
         1, 2, 1, 0;
    const auto near = nearest_anchor(d, {3, 1});
    EXPECT_EQ(near[0].anchor, 1);
    EXPECT_DOUBLE_EQ(near[0].distance, 1.0);
    EXPECT_EQ(near[2].anchor, 1);
    EXPECT_EQ(near[3].anchor, 0);
    EXPECT_DOUBLE_EQ(near[3].distance, 0.0);
    EXPECT_THROW(nearest_anchor(d, {}), std::invalid_argument);
}

TEST(CrossGeodesicsTest, AllAnchorsEqualsUnionGraphShortestPaths) {
    std::mt19937_64 gen(200);
    for (int trial = 0; trial < 20; ++trial) {
        const auto gx = random_graph(10, 0.3, gen);
        const auto gy = random_graph(9, 0.3, gen);
        const Matrix dx = domain_geodesics(gx);
        const Matrix dy = domain_geodesics(gy);
        AnchorList anchors{{0, 0}, {3, 5}, {7, 2}};
        GeodesicConfig cfg;
        cfg.mode = GeodesicMode::all_anchors;
        cfg.nu = trial % 2 == 0 ? 1.0 : 0.7;
        const auto cg = cross_geodesics(anchors, dx, dy, cfg);
        expect_same(Matrix(cg.cross()), exact_cross(dx, dy, anchors, 1.0 - cfg.nu), 1e-12);
        const Matrix full = ts::floyd_warshall(ts::union_adjacency(gx, gy, anchors, 1.0 - cfg.nu));
        expect_same(Matrix(cg.cross()), Matrix(full.topRightCorner(10, 9)), 1e-12);
    }
}

TEST(CrossGeodesicsTest, NearestAnchorMatchesHandComputation) {
    Matrix gx(3, 3), gy(3, 3);
    gx << 0, 1, 1.5,
          1, 0, 0.5,
          1.5, 0.5, 0;
    gy << 0, 2, 5,
          2, 0, 3,
          5, 3, 0;
    const AnchorList anchors{{0, 0}, {2, 2}};
    // x1 routes via anchor (2, 2): 0.5 + 3. y1 routes via anchor (0, 0): 2 + 1.
    const std::vector<std::pair<Aggregation, double>> cases{
        {Aggregation::min, 3.0}, {Aggregation::max, 3.5}, {Aggregation::mean, 3.25}, {Aggregation::abs_diff, 0.5}};
    for (const auto& [agg, expected] : cases) {
        GeodesicConfig cfg;
        cfg.aggregation = agg;
        EXPECT_DOUBLE_EQ(cross_geodesics(anchors, gx, gy, cfg).cross()(1, 1), expected);
    }
    GeodesicConfig soft;
    soft.nu = 0.75;
    EXPECT_DOUBLE_EQ(cross_geodesics(anchors, gx, gy, soft).cross()(1, 1), 3.25);
}

TEST(CrossGeodesicsTest, SymmetricWithWithinDomainBlocks) {
    std::mt19937_64 gen(4);
    const Matrix dx = domain_geodesics(random_graph(8, 0.5, gen));
    const Matrix dy = domain_geodesics(random_graph(8, 0.5, gen));
    GeodesicConfig cfg;
    const auto cg = cross_geodesics(AnchorList{{1, 1}, {5, 6}}, dx, dy, cfg);
    for (Eigen::Index i = 0; i < 16; ++i) {
        for (Eigen::Index j = 0; j < 16; ++j) {
            const double a = cg.dists(i, j), b = cg.dists(j, i);
            EXPECT_TRUE(a == b || (std::isinf(a) && std::isinf(b)));
        }
    }
    EXPECT_THROW(cross_geodesics(AnchorList{}, dx, dy, cfg), std::invalid_argument);
}

TEST(Impute, InfiniteEntriesBecomeOneAndAHalfTimesMax) {
    Matrix d(2, 2);
    d << 0, kUnreachable, kUnreachable, 0;
    Matrix e(3, 3);
    e << 0, 2, kUnreachable, 2, 0, 1, kUnreachable, 1, 0;
    const Matrix out = impute_unreachable(e);
    EXPECT_DOUBLE_EQ(out(0, 2), 3.0);
    EXPECT_DOUBLE_EQ(out(2, 0), 3.0);
    EXPECT_DOUBLE_EQ(out(0, 1), 2.0);
    EXPECT_TRUE(impute_unreachable(d).allFinite());
}

TEST(SpudAlign, IdenticalDomainsWithAllAnchorsAlignNearlyPerfectly) {
    std::mt19937_64 gen(9);
    const Matrix pts = ts::two_moons(80, 0.03, gen);
    DomainPair pair;
    pair.x = ts::make_data(pts);
    pair.y = ts::make_data(pts);
    pair.anchors = identity_pairs(80);
    KernelParams k;
    k.k = 8;
    const auto r = spud_align(pair, k, GeodesicConfig{}, 2);
    EXPECT_LT(foscttm(r.coords(), 80, identity_pairs(80)), 0.05);
    EXPECT_EQ(r.method, "spud");
    EXPECT_EQ(r.coords().rows(), 160);
}

TEST(SpudAlign, DenseVariantUsesEuclideanDistances) {
    std::mt19937_64 gen(10);
    DomainPair pair;
    pair.x = ts::make_data(ts::random_matrix(20, 3, gen));
    pair.y = ts::make_data(ts::random_matrix(20, 2, gen));
    pair.anchors = {{0, 0}, {5, 5}, {10, 10}};
    GeodesicConfig cfg;
    cfg.mode = GeodesicMode::dense_nama;
    const auto r = spud_align(pair, KernelParams{}, cfg, 2);
    EXPECT_EQ(r.method, "nama");
    EXPECT_TRUE(r.distances.topLeftCorner(20, 20).isApprox(domain_distances(pair.x.values), 1e-12));
    EXPECT_TRUE(r.distances.allFinite());
}

TEST(SpudAlign, InformationDistanceIsNormalized) {
    std::mt19937_64 gen(12);
    DomainPair pair;
    pair.x = ts::make_data(ts::random_matrix(25, 3, gen));
    pair.y = ts::make_data(ts::random_matrix(25, 3, gen));
    pair.anchors = sample_anchors(25, 0.3, RandomSource(1));
    GeodesicConfig cfg;
    cfg.use_info_distance = true;
    const auto r = spud_align(pair, KernelParams{}, cfg, 3);
    EXPECT_DOUBLE_EQ(r.distances.maxCoeff(), 1.0);
    EXPECT_DOUBLE_EQ(r.distances.minCoeff(), 0.0);
}

TEST(SpudAlign, RejectsBadDimension) {
    DomainPair pair;
    pair.x = ts::make_data(Matrix::Random(10, 2));
    pair.y = ts::make_data(Matrix::Random(10, 2));
    pair.anchors = {{0, 0}};
    EXPECT_THROW(spud_align(pair, KernelParams{}, GeodesicConfig{}, 0), std::invalid_argument);
    EXPECT_THROW(spud_align(pair, KernelParams{}, GeodesicConfig{}, 20), std::invalid_argument);
}

TEST(Parsing, ModesAndAggregationsRoundTrip) {
    EXPECT_EQ(aggregation_from_string("abs_diff"), Aggregation::abs_diff);
    EXPECT_EQ(geodesic_mode_from_string("all_anchors"), GeodesicMode::all_anchors);
    EXPECT_THROW(aggregation_from_string("median"), std::invalid_argument);
    EXPECT_THROW(geodesic_mode_from_string("nope"), std::invalid_argument);
}
