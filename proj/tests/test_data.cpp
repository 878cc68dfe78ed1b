#include "test_support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace mashspud;

namespace {

std::string temp_file(const std::string& name, const std::string& contents) {
    const auto path = std::filesystem::temp_directory_path() / ("mashspud_" + name);
    std::ofstream(path) << contents;
    return path.string();
}

} // namespace

TEST(Normalize, WholeMatrixMapsRangeToUnitInterval) {
    Matrix m(2, 2);
    m << 1, 3, 5, 7;
    Matrix expected(2, 2);
    expected << 0, 1.0 / 3.0, 2.0 / 3.0, 1;
    EXPECT_TRUE(normalize_01(m, NormalizeMode::whole_matrix).isApprox(expected, 1e-15));
}

TEST(Normalize, PerColumnScalesEachFeature) {
    Matrix m(3, 2);
    m << 0, 10, 5, 20, 10, 30;
    const Matrix n = normalize_01(m, NormalizeMode::per_column);
    EXPECT_DOUBLE_EQ(n(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(n(1, 1), 0.5);
    EXPECT_DOUBLE_EQ(n.colwise().maxCoeff().minCoeff(), 1.0);
}

TEST(Normalize, ConstantInputBecomesZero) {
    const Matrix m = Matrix::Constant(3, 3, 4.2);
    EXPECT_TRUE(normalize_01(m, NormalizeMode::whole_matrix).isZero());
    EXPECT_TRUE(normalize_01(m, NormalizeMode::per_column).isZero());
}

TEST(Normalize, RejectsNonFinite) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(normalize_01(m, NormalizeMode::whole_matrix), std::invalid_argument);
}

TEST(Csv, DropsIncompleteRowsAndAssignsSortedLabelIds) {
    const auto path = temp_file("drop.csv", "a,b,label\n1,2,z\n?,3,a\n3,NA,a\n5,6,m\n");
    const DataMatrix d = load_csv(path, "label", false);
    ASSERT_EQ(d.rows(), 2);
    EXPECT_EQ(d.label_names, (std::vector<std::string>{"m", "z"}));
    EXPECT_EQ(*d.labels, (std::vector<int>{1, 0}));
    EXPECT_EQ(d.feature_names, (std::vector<std::string>{"a", "b"}));
    EXPECT_DOUBLE_EQ(d.values(1, 1), 6.0);
}

TEST(Csv, StrictModeRejectsMissingCells) {
    const auto path = temp_file("strict.csv", "a,b\n1,2\n,3\n");
    EXPECT_THROW(load_csv(path, std::nullopt, true, false), std::runtime_error);
}

TEST(Csv, RoundTripPreservesValuesAndLabels) {
    DataMatrix d = testing_support::make_data(Matrix::Random(5, 3));
    d.labels = std::vector<int>{0, 1, 1, 0, 1};
    d.label_names = {"neg", "pos"};
    const auto path = (std::filesystem::temp_directory_path() / "mashspud_roundtrip.csv").string();
    write_csv(d, path);
    const DataMatrix back = load_csv(path, "label", false);
    EXPECT_EQ(back, d);
}

TEST(Csv, ErrorsNameTheProblem) {
    EXPECT_THROW(load_csv("/nonexistent/file.csv"), std::runtime_error);
    const auto ragged = temp_file("ragged.csv", "a,b\n1\n");
    EXPECT_THROW(load_csv(ragged), std::runtime_error);
    const auto nolabel = temp_file("nolabel.csv", "a,b\n1,2\n");
    EXPECT_THROW(load_csv(nolabel, "label"), std::runtime_error);
    const auto bad = temp_file("bad.csv", "a\nabc\n");
    EXPECT_THROW(load_csv(bad), std::runtime_error);
}

TEST(AnchorFile, ReadsPairsWithOptionalHeader) {
    const auto path = temp_file("anchors.csv", "x,y\n0,3\n2,1\n");
    const AnchorList a = load_anchor_file(path);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0], (AnchorPair{0, 3}));
    EXPECT_EQ(a[1], (AnchorPair{2, 1}));
}

TEST(Anchors, ValidationRejectsBadLists) {
    EXPECT_NO_THROW(validate_anchors({{0, 1}, {1, 0}}, 2, 2));
    EXPECT_THROW(validate_anchors({{0, 2}}, 2, 2), std::invalid_argument);
    EXPECT_THROW(validate_anchors({{0, 0}, {0, 1}}, 2, 2), std::invalid_argument);
    EXPECT_THROW(validate_anchors({{0, 0}, {1, 0}}, 2, 2), std::invalid_argument);
    EXPECT_THROW(validate_anchors({{0, 0}, {1, 1}, {2, 2}}, 3, 2), std::invalid_argument);
}

TEST(RandomSourceTest, SameSeedSameStream) {
    RandomSource a(42), b(42);
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(a.engine()(), b.engine()());
    }
    EXPECT_EQ(RandomSource(42).fork(1).seed(), RandomSource(42).fork(1).seed());
    EXPECT_NE(RandomSource(42).fork(1).seed(), RandomSource(42).fork(2).seed());
    EXPECT_NE(RandomSource(42).fork(1).seed(), RandomSource(43).fork(1).seed());
}

TEST(RandomSourceTest, ShuffleIsAPermutationAndDeterministic) {
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    auto a = v, b = v;
    RandomSource(7).shuffle(a);
    RandomSource r(7);
    r.shuffle(b);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, v);
    std::sort(a.begin(), a.end());
    EXPECT_EQ(a, v);
}

TEST(Selection, RowsAndColumnsKeepMetadata) {
    DataMatrix d = testing_support::make_data(Matrix::Random(4, 3));
    d.labels = std::vector<int>{0, 1, 2, 3};
    const DataMatrix r = select_rows(d, {3, 1});
    EXPECT_EQ(*r.labels, (std::vector<int>{3, 1}));
    EXPECT_TRUE(r.values.row(0).isApprox(d.values.row(3)));
    const DataMatrix c = select_columns(d, {2});
    EXPECT_EQ(c.feature_names, (std::vector<std::string>{"f2"}));
    EXPECT_TRUE(c.values.col(0).isApprox(d.values.col(2)));
}

TEST(BundledData, BreastCancerHas683CompleteRows) {
    const DataMatrix d = load_csv(testing_support::data_dir() + "/breast_cancer.csv", "label");
    EXPECT_EQ(d.rows(), 683);
    EXPECT_EQ(d.cols(), 9);
    EXPECT_EQ(d.label_names.size(), 2u);
}
