#include <gtest/gtest.h>

#include "ldl/comprehension.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace ldl;

namespace {

Eigen::RowVectorXd row(std::initializer_list<double> v) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r[i++] = x;
  return r;
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST(Correlation, MatchesOracle) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const Matrix m = fixtures::random_matrix(2, 9, rng);
    const std::vector<double> a(m.row(0).data(), m.row(0).data() + 9);
    const std::vector<double> b(m.row(1).data(), m.row(1).data() + 9);
    EXPECT_NEAR(*correlation(m.row(0), m.row(1)), oracle::pearson(a, b), 1e-12);
  }
}

TEST(Correlation, ZeroVarianceIsUndefined) {
  EXPECT_FALSE(correlation(row({1, 1, 1}), row({1, 2, 3})));
  EXPECT_FALSE(standardize(row({2})));
  EXPECT_THROW(correlation(row({1, 2}), row({1, 2, 3})), DimensionMismatch);
}

TEST(PredictSemantics, SparseMatchesDense) {
  Rng rng(2);
  CueMatrix C(5);
  C.push_row({0, 2});
  C.push_row({1, 3, 4});
  Mapping F;
  F.W = fixtures::random_matrix(5, 4, rng);
  const Matrix dense = C.to_dense() * F.W;
  EXPECT_LT((predict_semantics(C, F) - dense).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((predict_semantics(C.dense_row(1), F).transpose() - dense.row(1)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(NearestGold, PicksHighestCorrelation) {
  Matrix S(3, 4);
  S << 1, 2, 3, 4,  //
      4, 3, 2, 1,   //
      1, 3, 2, 4;
  const auto ids = iota(3);
  GoldPool pool(S, ids);
  const auto m = nearest_gold(row({0, 1, 2, 3.1}), pool);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->pool_row, 0u);
  EXPECT_FALSE(nearest_gold(row({5, 5, 5, 5}), pool));
}

TEST(NearestGold, TiesGoToLowestIndex) {
  Matrix S(2, 3);
  S << 1, 0, 0,  //
      0, 1, 0;
  GoldPool pool(S, iota(2));
  EXPECT_EQ(nearest_gold(row({1, 1, 0}), pool)->pool_row, 0u);
}

TEST(GoldPool, IdenticalRowsShareOneEntry) {
  Matrix S(3, 3);
  S << 1, 2, 3,  //
      1, 2, 3,   //
      3, 2, 1;
  GoldPool pool(S, iota(3));
  EXPECT_EQ(pool.size(), 2u);
  EXPECT_EQ(pool.members(0), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(pool.pool_row_of(1), 0u);
}

TEST(Comprehend, StrictAndLenient) {
  // Items 0 and 1 are homophones with different meanings.
  Matrix S(3, 3);
  S << 1, 2, 3,  //
      3, 1, 2,   //
      2, 3, 1;
  const std::vector<std::string> forms = {"al", "al", "bal"};
  GoldPool pool(S, iota(3));
  // Both homophones are understood as item 0.
  Matrix S_hat(3, 3);
  S_hat << S.row(0), S.row(0), S.row(2);
  const auto ids = iota(3);
  const auto res = comprehend(S_hat, ids, S, pool, forms);
  EXPECT_TRUE(res[0].correct_strict);
  EXPECT_FALSE(res[1].correct_strict);
  EXPECT_TRUE(res[1].correct_lenient);
  EXPECT_EQ(res[1].best_id, 0u);
  EXPECT_NEAR(res[2].r_max, 1.0, 1e-12);
  EXPECT_NEAR(*res[2].r_target, 1.0, 1e-12);
}

TEST(Comprehend, ZeroVariancePredictionIsIncorrect) {
  Matrix S(2, 3);
  S << 1, 2, 3,  //
      3, 2, 1;
  GoldPool pool(S, iota(2));
  Matrix S_hat = Matrix::Zero(1, 3);
  const std::vector<std::size_t> ids = {0};
  const std::vector<std::string> forms = {"a", "b"};
  const auto res = comprehend(S_hat, ids, S, pool, forms);
  EXPECT_TRUE(res[0].zero_variance);
  EXPECT_FALSE(res[0].correct_strict);
  EXPECT_FALSE(res[0].correct_lenient);
}

TEST(Evaluate, SchemesSelectItems) {
  SplitResult split;
  split.train_ids = {0, 1};
  split.val_ids = {2, 3};
  split.homophone_val_ids = {2};
  split.newform_val_ids = {3};
  std::vector<ComprehensionResult> res(4);
  for (std::size_t i = 0; i < 4; ++i) res[i].id = i;
  res[0].correct_strict = res[0].correct_lenient = true;
  res[1].correct_lenient = true;
  res[2].correct_lenient = true;
  res[3].correct_lenient = true;
  EXPECT_EQ(evaluate(res, split, Scheme::train).correct, 1u);
  EXPECT_EQ(evaluate(res, split, Scheme::train_lenient).correct, 2u);
  EXPECT_EQ(evaluate(res, split, Scheme::val_strict).correct, 0u);
  EXPECT_EQ(evaluate(res, split, Scheme::val_lenient).correct, 1u);
  EXPECT_EQ(evaluate(res, split, Scheme::val_newform).correct, 1u);
  EXPECT_EQ(evaluate(res, split, Scheme::val_all).total, 2u);
  EXPECT_TRUE(std::isnan(Accuracy{}.value()));
  EXPECT_EQ(parse_scheme("val_newform"), Scheme::val_newform);
  EXPECT_THROW(parse_scheme("bogus"), InvalidArgument);
}

TEST(Evaluate, StrictNeverExceedsLenient) {
  Rng rng(12);
  const Matrix S = fixtures::random_matrix(30, 8, rng);
  std::vector<std::string> forms;
  for (int i = 0; i < 30; ++i) forms.push_back("f" + std::to_string(i % 12));
  Matrix S_hat = S + 2.0 * fixtures::random_matrix(30, 8, rng);
  GoldPool pool(S, iota(30));
  const auto ids = iota(30);
  const auto res = comprehend(S_hat, ids, S, pool, forms);
  SplitResult split;
  split.train_ids = ids;
  EXPECT_LE(evaluate(res, split, Scheme::train).correct, evaluate(res, split, Scheme::train_lenient).correct);
}
