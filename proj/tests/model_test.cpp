#include "ordmed/model.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <random>

namespace ordmed {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::RowVectorXd row(std::initializer_list<double> v) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

TEST(PredictCategory, BoundaryBelongsToLowerCell) {
  const Thresholds g({0.0, 1.0});
  const ThetaSplit theta(Eigen::VectorXd::Zero(1));
  EXPECT_EQ(predict_category(row({0.0, 7.0}), theta, g), 1);
  EXPECT_EQ(predict_category(row({0.5, 7.0}), theta, g), 2);
  EXPECT_EQ(predict_category(row({1.5, 7.0}), theta, g), 3);
  EXPECT_EQ(predict_category(row({1.0, 7.0}), theta, g), 2);
}

TEST(PredictCategory, DimensionMismatchThrows) {
  const Thresholds g({0.0, 1.0});
  const ThetaSplit theta(Eigen::VectorXd::Zero(2));
  EXPECT_THROW(predict_category(row({0.0, 1.0}), theta, g), Error);
}

TEST(PredictCategory, NegativeFirstCoefficient) {
  const Thresholds g({0.0});
  const ThetaSplit theta(Eigen::VectorXd::Zero(0), -1.0);
  EXPECT_EQ(predict_category(row({2.0}), theta, g), 1);
  EXPECT_EQ(predict_category(row({-2.0}), theta, g), 2);
  EXPECT_THROW(ThetaSplit(Eigen::VectorXd::Zero(0), 2.0), Error);
}

TEST(PredictCategory, MonotoneInIndex) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> g{u(rng), u(rng), u(rng)};
    std::sort(g.begin(), g.end());
    if (g[0] == g[1] || g[1] == g[2]) continue;
    const Thresholds th(g);
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    EXPECT_LE(category_of_index(a, th), category_of_index(b, th));
  }
}

TEST(LadObjective, PerfectFitIsZero) {
  Eigen::MatrixXd x(3, 1);
  x << -1.0, 0.5, 2.0;
  const OrderedDataset d({1, 2, 3}, x, {"x1"}, 3);
  EXPECT_EQ(lad_objective(d, Eigen::VectorXd::Zero(0), Thresholds({0.0, 1.0})), 0.0);
}

TEST(LadObjective, UnitDeviationsSum) {
  Eigen::MatrixXd x(2, 1);
  x << 0.5, 0.6;
  const OrderedDataset d({1, 3}, x, {"x1"}, 3);
  EXPECT_EQ(lad_objective(d, Eigen::VectorXd::Zero(0), Thresholds({0.0, 1.0})), 2.0);
}

TEST(LadObjective, WeightsMultiplyDeviations) {
  Eigen::MatrixXd x(2, 1);
  x << 0.5, 0.6;
  const OrderedDataset d({1, 3}, x, {"x1"}, 3, std::vector<double>{2.0, 0.5});
  EXPECT_DOUBLE_EQ(lad_objective(d, Eigen::VectorXd::Zero(0), Thresholds({0.0, 1.0})), 2.5);
}

TEST(LadObjective, DirectAndDecomposedFormsAgreeOnRandomInstance) {
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> ycat(1, 3);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 20;
    Eigen::MatrixXd x(n, 2);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = nd(rng);
      x(i, 1) = nd(rng);
      y[i] = ycat(rng);
    }
    const OrderedDataset d(y, x, {"x1", "x2"}, 3);
    Eigen::VectorXd b(1);
    b << nd(rng);
    double c1 = nd(rng), c2 = nd(rng);
    if (c1 > c2) std::swap(c1, c2);
    const Thresholds g({c1, c2});
    const Eigen::VectorXd v = latent_index(d, ThetaSplit(b));
    int decomposed = 0;
    for (int i = 0; i < n; ++i) decomposed += lad_deviation_decomposed(y[i], v(i), g);
    EXPECT_EQ(lad_objective(d, b, g), static_cast<double>(decomposed));
  }
}

TEST(Decomposition, ExhaustiveIdentity) {
  int failures = 0;
  for (int J = 2; J <= 5; ++J) {
    std::vector<double> g;
    for (int j = 1; j <= J - 1; ++j) g.push_back(0.5 * j - 0.3);
    const Thresholds th(g);
    std::vector<double> grid;
    for (double t : g) {
      grid.push_back(t);
      grid.push_back(std::nextafter(t, -kInf));
      grid.push_back(std::nextafter(t, kInf));
      grid.push_back(t - 0.1);
      grid.push_back(t + 0.1);
    }
    grid.push_back(-100.0);
    grid.push_back(100.0);
    for (int y = 1; y <= J; ++y)
      for (double v : grid)
        if (std::abs(y - category_of_index(v, th)) != lad_deviation_decomposed(y, v, th)) ++failures;
  }
  EXPECT_EQ(failures, 0);
}

TEST(Decomposition, CoefficientClosedForm) {
  for (int J = 2; J <= 6; ++J)
    for (int y = 1; y <= J; ++y)
      for (int j = 1; j <= J - 1; ++j)
        EXPECT_EQ(std::abs(y - j) - std::abs(y - j - 1), lad_coefficient(y, j)) << "y=" << y << " j=" << j;
}

TEST(OrderedDataset, RejectsOutOfRangeOutcome) {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  EXPECT_THROW(OrderedDataset({1, 4}, x, {"x"}, 3), Error);
  EXPECT_THROW(OrderedDataset({0, 1}, x, {"x"}, 3), Error);
  EXPECT_THROW(OrderedDataset({1, 1}, x, {"x"}, 1), Error);
}

TEST(OrderedDataset, RejectsInterceptLikeColumn) {
  Eigen::MatrixXd x(3, 2);
  x << 0.0, 1.0, 1.0, 1.0, 2.0, 1.0;
  EXPECT_THROW(OrderedDataset({1, 2, 1}, x, {"x", "const"}, 2), Error);
  x.col(1).setZero();
  EXPECT_NO_THROW(OrderedDataset({1, 2, 1}, x, {"x", "zero"}, 2));
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(3, 1, 2.0);
  EXPECT_THROW(OrderedDataset({1, 2, 1}, c, {"x"}, 2), Error);
}

TEST(OrderedDataset, ValidatesWeights) {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  EXPECT_THROW(OrderedDataset({1, 2}, x, {"x"}, 2, std::vector<double>{1.0, -1.0}), Error);
  EXPECT_THROW(OrderedDataset({1, 2}, x, {"x"}, 2, std::vector<double>{0.0, 0.0}), Error);
  const OrderedDataset d({1, 2}, x, {"x"}, 2, std::vector<double>{0.0, 2.0});
  EXPECT_FALSE(d.unit_weights());
  EXPECT_TRUE(d.integral_weights());
}

TEST(Thresholds, MustIncreaseStrictly) {
  EXPECT_THROW(Thresholds({1.0, 1.0}), Error);
  EXPECT_THROW(Thresholds({2.0, 1.0}), Error);
  EXPECT_THROW(Thresholds(std::vector<double>{}), Error);
  EXPECT_EQ(Thresholds({0.0, 1.0}).j_max(), 3);
}

TEST(ParamBox, SymmetricBoxReachesEveryIndex) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd(0.0, 2.0);
  Eigen::MatrixXd x(30, 3);
  std::vector<int> y(30);
  for (int i = 0; i < 30; ++i) {
    for (int c = 0; c < 3; ++c) x(i, c) = nd(rng);
    y[i] = 1 + i % 3;
  }
  const OrderedDataset d(y, x, {"a", "b", "c"}, 3);
  const ParamBox box = ParamBox::symmetric(d, 2.5);
  ASSERT_EQ(box.num_free(), 2u);
  ASSERT_EQ(box.num_thresholds(), 2u);
  // Any corner of the beta box keeps every index strictly inside the gamma box.
  for (int corner = 0; corner < 4; ++corner) {
    Eigen::VectorXd b(2);
    b << (corner & 1 ? 2.5 : -2.5), (corner & 2 ? 2.5 : -2.5);
    const Eigen::VectorXd v = latent_index(d, ThetaSplit(b));
    EXPECT_LT(v.maxCoeff(), box.gamma_hi[0]);
    EXPECT_GT(v.minCoeff(), box.gamma_lo[0]);
  }
  EXPECT_THROW(ParamBox(Eigen::VectorXd::Constant(1, 1.0), Eigen::VectorXd::Constant(1, 0.0), {0.0}, {1.0}), Error);
  EXPECT_THROW(ParamBox(Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, kInf), {0.0}, {1.0}), Error);
}

TEST(PooledLayout, RowConstruction) {
  PooledLayout layout;
  layout.base_columns = 2;
  layout.base_source = {0, 1};
  layout.group_main_effect = true;
  layout.interacted = {1};
  const Eigen::RowVectorXd r1 = layout.pooled_row(row({2.0, 3.0}), 1.0);
  ASSERT_EQ(r1.size(), 4);
  EXPECT_EQ(r1(2), 1.0);
  EXPECT_EQ(r1(3), 3.0);
  const Eigen::RowVectorXd r0 = layout.pooled_row(row({2.0, 3.0}), 0.0);
  EXPECT_EQ(r0(2), 0.0);
  EXPECT_EQ(r0(3), 0.0);
}

}  // namespace
}  // namespace ordmed
