#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

using namespace mashspud;
namespace ts = testing_support;

namespace {

DataMatrix iris() {
    return load_csv(ts::data_dir() + "/iris.csv", "label");
}

std::set<std::string> names(const DataMatrix& d) {
    return {d.feature_names.begin(), d.feature_names.end()};
}

} // namespace

TEST(Anchors, CountIsCeilingOfFractionAndSampledWithoutReplacement) {
    EXPECT_EQ(sample_anchors(150, 0.05, RandomSource(1)).size(), 8u);
    EXPECT_EQ(sample_anchors(150, 0.2, RandomSource(1)).size(), 30u);
    EXPECT_EQ(sample_anchors(10, 0.3, RandomSource(1)).size(), 3u);
    EXPECT_EQ(sample_anchors(10, 1.0, RandomSource(1)).size(), 10u);
    const auto a = sample_anchors(100, 0.37, RandomSource(2));
    std::set<Eigen::Index> rows;
    for (const auto& p : a) {
        EXPECT_EQ(p.x, p.y);
        rows.insert(p.x);
    }
    EXPECT_EQ(rows.size(), a.size());
    EXPECT_THROW(sample_anchors(10, 0.0, RandomSource(1)), std::invalid_argument);
    EXPECT_THROW(sample_anchors(10, 1.5, RandomSource(1)), std::invalid_argument);
}

TEST(Splits, RandomSplitPartitionsFeatures) {
    const DataMatrix d = iris();
    AdaptationSpec spec;
    spec.seed = 3;
    const auto pair = adapt(d, spec);
    EXPECT_EQ(pair.x.cols(), 2);
    EXPECT_EQ(pair.y.cols(), 2);
    auto all = names(pair.x);
    for (const auto& n : pair.y.feature_names) {
        EXPECT_TRUE(all.insert(n).second);
    }
    EXPECT_EQ(all, names(d));
    EXPECT_EQ(pair.x.rows(), d.rows());
    EXPECT_EQ(*pair.x.labels, *d.labels);
}

TEST(Splits, SkewedPutsTopFeaturesInX) {
    const DataMatrix d = iris();
    AdaptationSpec spec;
    spec.kind = AdaptationKind::skewed;
    spec.importance = ranking_oracle({"petal_width", "sepal_width", "petal_length", "sepal_length"});
    const auto pair = adapt(d, spec);
    EXPECT_EQ(names(pair.x), (std::set<std::string>{"petal_width", "sepal_width"}));
}

TEST(Splits, EvenSpreadsTopFeatures) {
    const DataMatrix d = iris();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        AdaptationSpec spec;
        spec.kind = AdaptationKind::even;
        spec.seed = seed;
        spec.importance = ranking_oracle({"petal_width", "petal_length", "sepal_width", "sepal_length"});
        const auto pair = adapt(d, spec);
        EXPECT_EQ(pair.x.cols(), 2);
        EXPECT_EQ(names(pair.x).count("petal_width") + names(pair.x).count("petal_length"), 1u);
    }
}

TEST(Splits, SameSeedSameProblem) {
    const DataMatrix d = iris();
    AdaptationSpec spec;
    spec.kind = AdaptationKind::skewed;
    spec.seed = 11;
    const auto a = adapt(d, spec);
    const auto b = adapt(d, spec);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.y, b.y);
    EXPECT_EQ(a.anchors, b.anchors);
}

TEST(Splits, AnchorsIndependentOfAdaptationKind) {
    const DataMatrix d = iris();
    AdaptationSpec a, b;
    a.seed = b.seed = 9;
    b.kind = AdaptationKind::rotation;
    EXPECT_EQ(adapt(d, a).anchors, adapt(d, b).anchors);
}

TEST(Distortions, GaussianNoiseHasRequestedScale) {
    const DataMatrix d = iris();
    AdaptationSpec spec;
    spec.kind = AdaptationKind::distort;
    spec.noise_scale = 0.05;
    const auto pair = adapt(d, spec);
    const Matrix noise = pair.y.values - pair.x.values;
    const double sd = std::sqrt(noise.array().square().mean());
    EXPECT_NEAR(sd, 0.05, 0.005);
    spec.noise_scale = 0.0;
    EXPECT_TRUE(adapt(d, spec).y.values == d.values);
}

TEST(Distortions, RotationIsProperAndPreservesDistances) {
    RandomSource rng(4);
    for (int p : {2, 3, 9}) {
        const Matrix q = random_rotation(p, rng);
        EXPECT_LT((q.transpose() * q - Matrix::Identity(p, p)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(q.determinant(), 1.0, 1e-12);
    }
    const DataMatrix d = iris();
    AdaptationSpec spec;
    spec.kind = AdaptationKind::rotation;
    const auto pair = adapt(d, spec);
    EXPECT_LT((pairwise_distances(pair.x.values) - pairwise_distances(pair.y.values)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Importance, PermutationImportanceRanksInformativeFeatureFirst) {
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DataMatrix d = ts::make_data(Matrix::Zero(120, 3));
    std::vector<int> labels(120);
    for (Eigen::Index i = 0; i < 120; ++i) {
        labels[static_cast<std::size_t>(i)] = static_cast<int>(i % 2);
        d.values(i, 0) = u(gen);
        d.values(i, 1) = 0.2 * u(gen) + (i % 2 == 0 ? 0.0 : 0.8);
        d.values(i, 2) = u(gen);
    }
    d.labels = labels;
    d.label_names = {"a", "b"};
    RandomSource rng(1);
    const auto ranked = rank_features(knn_permutation_importance(d, rng));
    EXPECT_EQ(ranked.front(), 1);
}

TEST(Importance, RankingFileRoundTrip) {
    const auto path = (std::filesystem::temp_directory_path() / "mashspud_rank.txt").string();
    write_ranking_file({"b", "a"}, path);
    EXPECT_EQ(load_ranking_file(path), (std::vector<std::string>{"b", "a"}));
    RandomSource rng(1);
    EXPECT_THROW(ranking_oracle({"zzz"})(iris(), rng), std::invalid_argument);
}

TEST(Transfer, PairKeepsTopFeaturesOfSampledRows) {
    const DataMatrix d = iris();
    const std::vector<Eigen::Index> ranked{3, 2, 1, 0};
    const auto pair = label_transfer_pair(d, ranked, 2, 0.1, RandomSource(5));
    EXPECT_EQ(pair.x.rows(), 15);
    EXPECT_EQ(pair.y.rows(), 150);
    EXPECT_EQ(names(pair.x), (std::set<std::string>{d.feature_names[2], d.feature_names[3]}));
    for (std::size_t r = 0; r < pair.anchors.size(); ++r) {
        EXPECT_EQ(pair.anchors[r].x, static_cast<Eigen::Index>(r));
        EXPECT_DOUBLE_EQ(pair.x.values(static_cast<Eigen::Index>(r), 0), d.values(pair.anchors[r].y, 2));
    }
    EXPECT_THROW(label_transfer_pair(d, ranked, 4, 0.1, RandomSource(5)), std::invalid_argument);
}

TEST(Parsing, AdaptationNames) {
    EXPECT_EQ(adaptation_from_string("even"), AdaptationKind::even);
    EXPECT_THROW(adaptation_from_string("mirror"), std::invalid_argument);
}
