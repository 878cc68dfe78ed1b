#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace mashspud;
namespace ts = testing_support;

TEST(Laplacian, NormalizedLaplacianHasZeroModePerComponent) {
    Matrix w = Matrix::Zero(4, 4);
    w(0, 1) = w(1, 0) = 1.0;
    w(2, 3) = w(3, 2) = 0.5;
    const Matrix l = normalized_laplacian(w);
    EXPECT_TRUE(l.isApprox(l.transpose()));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(l);
    EXPECT_NEAR(eig.eigenvalues()(0), 0.0, 1e-12);
    EXPECT_NEAR(eig.eigenvalues()(1), 0.0, 1e-12);
    EXPECT_GT(eig.eigenvalues()(2), 0.5);
    EXPECT_THROW(normalized_laplacian(Matrix::Zero(2, 2)), std::invalid_argument);
}

TEST(Laplacian, EigenmapsSkipTrivialModes) {
    std::mt19937_64 gen(51);
    const auto s = build_domain_similarity(ts::make_data(ts::random_matrix(30, 2, gen)), KernelParams{});
    const auto e = laplacian_eigenmaps(s.weights, 2);
    EXPECT_GE(e.zero_modes, 1);
    EXPECT_EQ(e.coords.cols(), 2);
    EXPECT_GT(e.eigenvalues(0), kLaplacianZeroTol);
    const Vector deg = s.weights.rowwise().sum();
    EXPECT_NEAR(e.coords.col(0).dot(deg), 0.0, 1e-9);
}

TEST(ProcrustesTest, RecoversSimilarityTransform) {
    std::mt19937_64 gen(52);
    const Matrix src = ts::random_matrix(12, 2, gen);
    const double theta = 0.7;
    Matrix rot(2, 2);
    rot << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    const Matrix dst = ((2.5 * src * rot).rowwise() + Eigen::RowVector2d(1.0, -3.0)).eval();
    const auto fit = fit_procrustes(dst, src);
    EXPECT_NEAR(fit.scale, 2.5, 1e-10);
    EXPECT_LT((fit.apply(src) - dst).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_FALSE(fit.degenerate);
    EXPECT_THROW(fit_procrustes(dst, src.topRows(3)), std::invalid_argument);
}

TEST(Baselines, BothProduceJointEmbeddings) {
    std::mt19937_64 gen(53);
    const Matrix pts = ts::two_moons(60, 0.05, gen);
    DomainPair pair;
    pair.x = ts::make_data(pts);
    pair.y = ts::make_data(pts);
    pair.anchors = sample_anchors(60, 0.3, RandomSource(1));
    BaselineConfig cfg;
    cfg.kparams.k = 8;
    const auto j = jlma_align(pair, cfg);
    EXPECT_EQ(j.method, "jlma");
    EXPECT_EQ(j.coords().rows(), 120);
    EXPECT_TRUE(j.coords().allFinite());
    const auto m = mapa_align(pair, cfg);
    EXPECT_EQ(m.method, "mapa");
    EXPECT_LT(foscttm(m.coords(), 60, identity_pairs(60)), 0.1);
}

TEST(Baselines, RejectInsufficientAnchors) {
    DomainPair pair;
    pair.x = ts::make_data(Matrix::Random(20, 2));
    pair.y = ts::make_data(Matrix::Random(20, 2));
    BaselineConfig cfg;
    EXPECT_THROW(jlma_align(pair, cfg), std::invalid_argument);
    pair.anchors = {{0, 0}, {1, 1}};
    EXPECT_THROW(mapa_align(pair, cfg), std::invalid_argument);
}

TEST(ProcrustesTest, RotationIsOrthogonalAndRecoversKnownTransform) {
    std::mt19937_64 gen(54);
    std::uniform_real_distribution<double> u(0.0, 6.283185307179586);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix src = ts::random_matrix(10, 2, gen, -1, 1);
        const double theta = u(gen);
        const double scale = 0.5 + theta / 4.0;
        Matrix rot(2, 2);
        rot << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
        const Matrix dst = scale * src * rot;
        const auto fit = fit_procrustes(dst, src);
        EXPECT_LT((fit.rotation.transpose() * fit.rotation - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_LT((fit.rotation - rot).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_NEAR(fit.scale, scale, 1e-6);
    }
}

TEST(Baselines, JlmaColumnsAreDegreeOrthonormal) {
    std::mt19937_64 gen(55);
    const auto s = build_domain_similarity(ts::make_data(ts::random_matrix(40, 3, gen)), KernelParams{});
    const auto e = laplacian_eigenmaps(s.weights, 3);
    const Vector deg = s.weights.rowwise().sum();
    const Matrix gram = e.coords.transpose() * deg.asDiagonal() * e.coords;
    EXPECT_LT((gram - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Baselines, MapaAlignmentReducesAnchorResidual) {
    std::mt19937_64 gen(56);
    const Matrix pts = ts::two_moons(60, 0.05, gen);
    DomainPair pair;
    pair.x = ts::make_data(pts);
    pair.y = ts::make_data(pts * 3.0);
    pair.anchors = sample_anchors(60, 0.2, RandomSource(2));
    BaselineConfig cfg;
    const auto ex = laplacian_eigenmaps(build_domain_similarity(pair.x, cfg.kparams).weights, cfg.dim).coords;
    const auto ey = laplacian_eigenmaps(build_domain_similarity(pair.y, cfg.kparams).weights, cfg.dim).coords;
    Procrustes fit;
    const auto r = mapa_align(pair, cfg, &fit);
    double before = 0, after = 0;
    for (const auto& a : pair.anchors) {
        before += (ex.row(a.x) - ey.row(a.y)).squaredNorm();
        after += (r.coords().row(a.x) - r.coords().row(60 + a.y)).squaredNorm();
    }
    EXPECT_LE(after, before + 1e-12);
}
