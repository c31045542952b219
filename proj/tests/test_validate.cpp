#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "specsim/builtin.hpp"
#include "specsim/validate.hpp"

using namespace specsim;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd X(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) X(i, j) = nd(rng);
  return X;
}

AutocovSet single(const Eigen::MatrixXd& m, const Grid& g) { return AutocovSet{{0}, {m}, g}; }

}  // namespace

TEST(Lags, NormalizeSortsAndDedupes) {
  EXPECT_EQ(normalize_lags({3, 0, 3, 1}), (std::vector<int>{0, 1, 3}));
  EXPECT_THROW(normalize_lags({1, -1}), InvalidArgument);
  EXPECT_THROW(normalize_lags({}), InvalidArgument);
}

TEST(EmpiricalAutocov, ConstantSample) {
  const int T = 20, M = 6;
  const Grid g = make_grid(M);
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(M, -1.0, 2.0);
  const Eigen::MatrixXd X = Eigen::VectorXd::Ones(T) * v.transpose();
  const auto R = empirical_autocov(X, g, {0, 1, 5});
  const Eigen::MatrixXd vv = v * v.transpose();
  EXPECT_LT((R.at(0) - vv).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((R.at(1) - vv * (T - 1.0) / T).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((R.at(5) - vv * (T - 5.0) / T).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(EmpiricalAutocov, ZeroSample) {
  const auto R = empirical_autocov(Eigen::MatrixXd::Zero(10, 4), make_grid(4), {0, 2});
  for (const auto& m : R.matrices) EXPECT_EQ(m.cwiseAbs().maxCoeff(), 0.0);
}

TEST(EmpiricalAutocov, DirectSumOrientation) {
  const int T = 15, M = 4;
  const Eigen::MatrixXd X = random_matrix(T, M, 1);
  const auto R = empirical_autocov(X, make_grid(M), {0, 3});
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(M, M);
  for (int t = 0; t + 3 < T; ++t) ref += X.row(t + 3).transpose() * X.row(t);
  EXPECT_LT((R.at(3) - ref / T).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_EQ((R.at(0) - R.at(0).transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(EmpiricalAutocov, LagTooLargeOrShapeMismatch) {
  const Grid g = make_grid(3);
  EXPECT_THROW(empirical_autocov(Eigen::MatrixXd::Zero(8, 3), g, {8}), InvalidArgument);
  EXPECT_NO_THROW(empirical_autocov(Eigen::MatrixXd::Zero(8, 3), g, {7}));
  EXPECT_THROW(empirical_autocov(Eigen::MatrixXd::Zero(8, 4), g, {0}), InvalidArgument);
  EXPECT_THROW(AutocovSet{}.at(0), InvalidArgument);
}

TEST(AverageAutocov, IdentityAndOpposites) {
  const Grid g = make_grid(5);
  const Eigen::MatrixXd A = random_matrix(5, 5, 2);
  const auto same = average_autocov({single(A, g), single(A, g), single(A, g)});
  EXPECT_LT((same.at(0) - A).cwiseAbs().maxCoeff(), 1e-15);
  const auto cancel = average_autocov({single(A, g), single(-A, g)});
  EXPECT_EQ(cancel.at(0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AverageAutocov, RejectsMismatch) {
  const Grid g = make_grid(5);
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(5, 5);
  EXPECT_THROW(average_autocov({}), InvalidArgument);
  EXPECT_THROW(average_autocov({single(A, g), AutocovSet{{1}, {A}, g}}), InvalidArgument);
  EXPECT_THROW(average_autocov({single(A, g), single(Eigen::MatrixXd::Identity(6, 6), make_grid(6))}), InvalidArgument);
}

TEST(RelativeError, ZeroAndOne) {
  const Grid g = make_grid(7);
  const Eigen::MatrixXd A = discretize_kernel(brownian_motion_kernel, g).values;
  EXPECT_EQ(relative_error(single(A, g), single(A, g))[0], 0.0);
  EXPECT_NEAR(relative_error(single(Eigen::MatrixXd::Zero(7, 7), g), single(A, g))[0], 1.0, 1e-12);
  EXPECT_NEAR(relative_error(single(2.0 * A, g), single(A, g))[0], 1.0, 1e-12);
}

TEST(RelativeError, PerLagAgainstLagZeroNorm) {
  const Grid g = make_grid(9);
  const Eigen::MatrixXd A = discretize_kernel(brownian_bridge_kernel, g).values;
  const Eigen::MatrixXd B = random_matrix(9, 9, 5);
  const AutocovSet truth{{0, 2}, {A, Eigen::MatrixXd::Zero(9, 9)}, g};
  const AutocovSet avg{{0, 2}, {A, B}, g};
  const auto err = relative_error(avg, truth);
  EXPECT_EQ(err[0], 0.0);
  EXPECT_NEAR(err[1], oracle::trace_norm(B) / oracle::trace_norm(A), 1e-10);
}

TEST(RelativeError, InvariantUnderWeightedRotation) {
  // Q orthogonal in the weighted inner product: W^{-1/2} U W^{1/2}
  const int M = 8;
  const Grid g = make_grid(M);
  const Eigen::VectorXd s = g.sqrt_weights();
  const Eigen::MatrixXd U = Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(M, M, 3)).householderQ();
  const Eigen::MatrixXd Q = s.cwiseInverse().asDiagonal() * U * s.asDiagonal();
  const Eigen::MatrixXd A = discretize_kernel(brownian_motion_kernel, g).values;
  const Eigen::MatrixXd E = random_matrix(M, M, 4);
  // conjugating the kernel K -> Q K Q^T keeps the weighted representation orthogonally similar
  auto rot = [&](const Eigen::MatrixXd& K) { return Eigen::MatrixXd(Q * K * Q.transpose()); };
  const double a = relative_error(single(A + E, g), single(A, g))[0];
  const double b = relative_error(single(rot(A + E), g), single(rot(A), g))[0];
  EXPECT_NEAR(a, b, 1e-10);
}

TEST(RelativeError, ZeroTruthRejected) {
  const Grid g = make_grid(4);
  EXPECT_THROW(relative_error(single(Eigen::MatrixXd::Identity(4, 4), g), single(Eigen::MatrixXd::Zero(4, 4), g)),
               InvalidArgument);
}

TEST(MonteCarlo, WhiteNoiseLagZeroAndOne) {
  const int M = 11;
  const Grid g = make_grid(M);
  const auto spec = white_noise();
  SimConfig c;
  c.T = 64;
  c.M = M;
  c.N = 50;
  c.seed = 3;
  c.method = Method::FarfimaSpectral;
  const auto avg = monte_carlo_autocov(spec, c, g, {1, 0}, 400);
  EXPECT_EQ(avg.lags, (std::vector<int>{0, 1}));
  const auto truth = make_autocov_set({0, 1}, finite_T_target_covariances(spec, {0, 1}, g, 64, 50));
  // the finite-T target of white noise: S at lag 0, zero at lag 1
  EXPECT_LT(truth.at(1).cwiseAbs().maxCoeff(), 1e-12);
  const auto err = relative_error(avg, truth);
  EXPECT_LT(err[0], 0.05);
  EXPECT_LT(err[1], 0.05);
}

TEST(MonteCarlo, IndependentOfThreadCount) {
  const Grid g = make_grid(7);
  SimConfig c;
  c.T = 32;
  c.M = 7;
  c.N = 20;
  c.seed = 12;
  c.method = Method::Ckl;
  const auto a = monte_carlo_autocov(example1_ckl(), c, g, {0, 1}, 20, 1);
  const auto b = monte_carlo_autocov(example1_ckl(), c, g, {0, 1}, 20, 4);
  EXPECT_EQ(a.matrices, b.matrices);
  EXPECT_THROW(monte_carlo_autocov(example1_ckl(), c, g, {0}, 0), InvalidArgument);
}

TEST(Benchmark, MedianHelper) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  EXPECT_THROW(median({}), InvalidArgument);
}

TEST(Benchmark, SingleCell) {
  const auto r = run_benchmark(example1_ckl(), {Method::Ckl}, {64}, {11}, 10, 3, 1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].method, Method::Ckl);
  EXPECT_EQ(r[0].T, 64);
  EXPECT_EQ(r[0].M, 11);
  EXPECT_EQ(r[0].N, 10);
  EXPECT_EQ(r[0].replicates, 3);
  EXPECT_GT(r[0].seconds, 0.0);
  EXPECT_TRUE(std::isfinite(r[0].seconds));
}

TEST(Benchmark, GridOfCellsAndIncompatibleMethod) {
  const auto r = run_benchmark(example2_farfima(), {Method::FarfimaSpectral, Method::Temporal}, {16, 32}, {5, 7}, 5, 1);
  EXPECT_EQ(r.size(), 8u);
  EXPECT_THROW(run_benchmark(example1_ckl(), {Method::Temporal}, {16}, {5}, 5), InvalidArgument);
  EXPECT_THROW(run_benchmark(example1_ckl(), {Method::Ckl}, {15}, {5}, 5), InvalidArgument);
}
