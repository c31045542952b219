#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "specsim/builtin.hpp"
#include "specsim/spectra.hpp"

using namespace specsim;
using std::numbers::pi;

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<SpectralDensitySpec> all_builtins() {
  std::vector<SpectralDensitySpec> out;
  for (const auto& name : builtin_names()) out.push_back(builtin_spec(name));
  return out;
}

}  // namespace

TEST(FractionalFactor, ZeroOrderIsOne) {
  for (double w : {0.1, 1.0, pi, 5.0}) EXPECT_DOUBLE_EQ(fractional_factor(w, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(fractional_factor(0.0, 0.0), 1.0);
}

TEST(FractionalFactor, AtPi) { EXPECT_NEAR(fractional_factor(pi, 0.2), 0.757858, 1e-6); }

TEST(FractionalFactor, SymmetricInOmega) {
  for (double w : {0.05, 0.7, 2.0, 3.0}) EXPECT_NEAR(fractional_factor(w, 0.3), fractional_factor(2 * pi - w, 0.3), 1e-12);
}

TEST(FractionalFactor, SingularAtEndpoints) {
  EXPECT_THROW(fractional_factor(0.0, 0.2), SingularFrequency);
  EXPECT_THROW(fractional_factor(2 * pi, -0.2), SingularFrequency);
}

TEST(Builtins, PeriodicShift) { EXPECT_NEAR(periodic_shift(0.3, 0.2), 0.9, 1e-15); }

TEST(Builtins, Example1LeadingEigenvalueAtPi) {
  EXPECT_NEAR(example1::lambda(1, pi), 1.0 / (1.9 * pi * pi), 1e-15);
  EXPECT_NEAR(example1::lambda(1, pi), 0.05333, 1e-5);
}

TEST(Builtins, Example1ShiftBranchIncludesPi) {
  EXPECT_DOUBLE_EQ(example1::shift(pi), 1.0);
  EXPECT_DOUBLE_EQ(example1::shift(pi / 2), 0.5);
  EXPECT_DOUBLE_EQ(example1::shift(1.5 * pi), -1.5);
}

TEST(Builtins, Example2ArKernelAtOne) {
  const auto spec = example2_farfima();
  const auto& f = spec.farfima();
  EXPECT_NEAR(f.ar[0].kernel(1.0, 1.0), 0.34 * std::numbers::e, 1e-14);
  EXPECT_NEAR(f.ar[0].kernel(1.0, 1.0), 0.92422, 1e-5);
  ASSERT_TRUE(f.ar[0].rank_one.has_value());
  EXPECT_DOUBLE_EQ(f.ar[0].rank_one->c, 0.34);
  EXPECT_DOUBLE_EQ(f.d, 0.2);
  for (double x : {0.0, 0.3, 1.0})
    for (double y : {0.1, 0.9})
      EXPECT_NEAR(f.ar[0].rank_one->c * f.ar[0].rank_one->g(x) * f.ar[0].rank_one->g(y), f.ar[0].kernel(x, y), 1e-14);
}

TEST(Builtins, Example3NoiseCoefficients) {
  const std::vector<double> expected{1, .6, .3, .1, .1, .1, .05, .05, .05, .05};
  EXPECT_EQ(example3::noise_coefficients(), expected);
  const auto spec = example3_farma();
  const auto& f = spec.farfima();
  EXPECT_EQ(f.p(), 4);
  EXPECT_EQ(f.q(), 3);
  EXPECT_DOUBLE_EQ(f.d, 0.0);
  // at x = y = 1/4 the surviving squares are sin(2 pi x), cos(4 pi x), sin(6 pi x), cos(8 pi x), sin(10 pi x)
  EXPECT_NEAR(example3::noise_kernel(0.25, 0.25), 1.0 + 0.1 + 0.1 + 0.05 + 0.05, 1e-12);
}

TEST(Builtins, NamedSpecTable) {
  const auto specs = builtin_specs();
  for (const char* key : {"example1_ckl", "example1_kernel", "example2_farfima", "example3_farma"})
    EXPECT_EQ(specs.count(key), 1u) << key;
  EXPECT_THROW(builtin_spec("nope"), InvalidArgument);
}

TEST(Mercer, BrownianMotionTruncationError) {
  const Grid g = make_grid(101);
  double prev = 1e9;
  for (int N : {10, 50, 200}) {
    const CovarianceSpec cov{brownian_motion_mercer(N)};
    double err = 0.0;
    for (int i = 0; i < g.M; ++i)
      for (int j = 0; j < g.M; ++j)
        err = std::max(err, std::abs(covariance_kernel_value(cov, g.points[i], g.points[j]) -
                                     oracle::brownian_motion(g.points[i], g.points[j])));
    EXPECT_LT(err, prev);
    prev = err;
    if (N == 200) EXPECT_LT(err, 2e-3);
  }
}

TEST(NoiseFactor, FactorReproducesTruncatedCovariance) {
  const Grid g = make_grid(21);
  const Eigen::MatrixXd L = noise_factor(CovarianceSpec{brownian_motion_mercer()}, g, 300);
  const Eigen::MatrixXd S = discretize_kernel(oracle::brownian_motion, g).values;
  EXPECT_LT((L * L.transpose() - S).cwiseAbs().maxCoeff(), 2e-3);
  const Eigen::MatrixXd L2 = noise_factor(CovarianceSpec{ClosedFormKernel{brownian_motion_kernel}}, g, 50);
  EXPECT_EQ(L2.cols(), 21);
  EXPECT_LT((L2 * L2.transpose() - S).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(NoiseFactor, NegativeSeriesCoefficientRejected) {
  LowRankSum lr{{1.0, -0.5}, {[](double) { return 1.0; }, [](double x) { return x; }}};
  EXPECT_THROW(noise_factor(CovarianceSpec{lr}, make_grid(5), 2), InvalidSpec);
}

TEST(Density, WhiteNoiseIsConstant) {
  const Grid g = make_grid(15);
  const auto spec = white_noise(NoiseForm::Kernel);
  const Eigen::MatrixXd S = discretize_kernel(oracle::brownian_motion, g).values;
  for (double w : {0.0, 0.4, pi, 2 * pi}) {
    const auto F = eval_spectral_density(spec, w, g, 15);
    EXPECT_LT(max_abs(F.values - (S / (2 * pi)).cast<cdouble>()), 1e-12);
  }
}

TEST(Density, Example1EigenFormMatchesKernelForm) {
  const Grid g = make_grid(101);
  const double w = pi / 2;
  const auto Fe = eval_spectral_density(example1_ckl(), w, g, 200).values;
  Eigen::MatrixXd K(101, 101);
  for (int i = 0; i < 101; ++i)
    for (int j = 0; j < 101; ++j) K(i, j) = oracle::example1_kernel(w, g.points[i], g.points[j]);
  const Eigen::MatrixXcd diff = Fe - K.cast<cdouble>();
  // Hilbert-Schmidt norm of the difference operator
  const auto ws = g.sqrt_weights();
  const double hs = (ws.asDiagonal() * diff * ws.asDiagonal()).norm();
  EXPECT_LT(hs, 1e-3);
  const auto Fk = eval_spectral_density(example1_kernel(), w, g, 101).values;
  EXPECT_LT(max_abs(Fk - K.cast<cdouble>()), 1e-14);
}

TEST(Density, HermitianNonnegativeAndConjugateSymmetric) {
  const Grid g = make_grid(21);
  for (const auto& spec : all_builtins()) {
    for (double w : {0.3, 1.1, 2.5, pi}) {
      const Eigen::MatrixXcd F = eval_spectral_density(spec, w, g, 21).values;
      const double scale = max_abs(F);
      EXPECT_LT(max_abs(F - F.adjoint()), 1e-10 * scale) << spec.name;
      const Eigen::VectorXcd ws = g.sqrt_weights().cast<cdouble>();
      const Eigen::MatrixXcd B = ws.asDiagonal() * F * ws.asDiagonal();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (B + B.adjoint()));
      EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().maxCoeff()) << spec.name;
      const Eigen::MatrixXcd G = eval_spectral_density(spec, 2 * pi - w, g, 21).values;
      EXPECT_LT(max_abs(G - F.conjugate()), 1e-10 * scale) << spec.name << " w=" << w;
    }
  }
}

TEST(Density, FarfimaSingularAtEndpointsForPositiveD) {
  const Grid g = make_grid(11);
  EXPECT_THROW(eval_spectral_density(example2_farfima(), 0.0, g, 11), SingularFrequency);
  EXPECT_THROW(eval_spectral_density(example2_farfima(), 2 * pi, g, 11), SingularFrequency);
  EXPECT_NO_THROW(eval_spectral_density(example3_farma(), 2 * pi, g, 11));
}

TEST(Density, FarmaMatchesDenseFilterFormula) {
  // F = (2 pi)^{-1} A^{-1} B S B^* A^{-*} assembled densely
  const int M = 25;
  const Grid g = make_grid(M);
  const auto spec = example3_farma(NoiseForm::Kernel);
  const auto& f = spec.farfima();
  const auto x = oracle::grid_points(M);
  const auto wts = oracle::trapezoid_weights(M);
  for (double w : {0.4, 2.0}) {
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(M, M), B = Eigen::MatrixXcd::Identity(M, M);
    for (int j = 0; j < f.p(); ++j)
      for (int r = 0; r < M; ++r)
        for (int c = 0; c < M; ++c) A(r, c) -= std::polar(1.0, -(j + 1) * w) * f.ar[j].kernel(x[r], x[c]) * wts[c];
    for (int j = 0; j < f.q(); ++j)
      for (int r = 0; r < M; ++r)
        for (int c = 0; c < M; ++c) B(r, c) += std::polar(1.0, -(j + 1) * w) * f.ma[j](x[r], x[c]) * wts[c];
    Eigen::MatrixXd S(M, M);
    for (int r = 0; r < M; ++r)
      for (int c = 0; c < M; ++c) S(r, c) = example3::noise_kernel(x[r], x[c]);
    const Eigen::MatrixXcd theta = A.fullPivLu().solve(B);
    // kernel of Theta S Theta^*: the right factor acts through the weights
    const Eigen::MatrixXcd ref = theta * S.cast<cdouble>() * theta.adjoint() / (2 * pi);
    const Eigen::MatrixXcd F = eval_spectral_density(spec, w, g, M).values;
    EXPECT_LT(max_abs(F - ref), 1e-9 * max_abs(ref));
  }
}

TEST(FrequencyResponse, TrivialSpecIsIdentity) {
  const Grid g = make_grid(9);
  FarfimaSpec s;
  s.noise_cov.form = ClosedFormKernel{brownian_motion_kernel};
  const Eigen::VectorXcd b = Eigen::VectorXcd::Random(9);
  EXPECT_LT((farfima_frequency_response(s, 1.0, g, b) - b).norm(), 1e-15);
}

TEST(FrequencyResponse, RankOneMatchesDenseSolve) {
  const int M = 51;
  const Grid g = make_grid(M);
  const auto spec = example2_farfima();
  const auto& f = spec.farfima();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uw(0.01, 2 * pi - 0.01);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const double w = trial == 0 ? 1.0 : uw(rng);
    Eigen::VectorXcd b(M);
    for (int i = 0; i < M; ++i) b[i] = cdouble(nd(rng), nd(rng));
    const auto fast = farfima_frequency_response(f, w, g, b, {true});
    const auto dense = farfima_frequency_response(f, w, g, b, {false});
    const Eigen::VectorXcd ref =
        std::pow(2 * std::sin(w / 2), -f.d) * oracle::dense_ar_operator(f.ar[0].kernel, w, M).fullPivLu().solve(b);
    EXPECT_LT((fast - dense).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((fast - ref).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(FrequencyResponse, ZeroMaKernelIsDegenerate) {
  const Grid g = make_grid(21);
  FarfimaSpec with_ma = example2_farfima().farfima();
  with_ma.ma.push_back([](double, double) { return 0.0; });
  const Eigen::VectorXcd b = Eigen::VectorXcd::Random(21);
  EXPECT_LT((farfima_frequency_response(with_ma, 0.9, g, b) - farfima_frequency_response(example2_farfima().farfima(), 0.9, g, b))
                .cwiseAbs()
                .maxCoeff(),
            1e-14);
}

TEST(FrequencyResponse, RejectsNonIntegrableOrder) {
  FarfimaSpec s = example2_farfima().farfima();
  s.d = 0.5;
  EXPECT_THROW(farfima_frequency_response(s, 1.0, make_grid(5), Eigen::VectorXcd::Ones(5)), InvalidArgument);
}

TEST(Stationarity, CompanionSpectralRadiusBelowOne) {
  const Grid g = make_grid(31);
  EXPECT_LT(companion_spectral_radius(example2_farfima().farfima(), g), 1.0);
  EXPECT_LT(companion_spectral_radius(example3_farma().farfima(), g), 1.0);
}

TEST(TrueAutocovariance, WhiteNoise) {
  const Grid g = make_grid(11);
  const auto spec = white_noise(NoiseForm::Kernel);
  const auto R = true_autocovariances(spec, {0, 1}, g, 64, 11);
  const Eigen::MatrixXd S = discretize_kernel(oracle::brownian_motion, g).values;
  EXPECT_LT((R[0].values - S).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(R[1].values.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(TrueAutocovariance, NegativeLagIsTranspose) {
  const Grid g = make_grid(15);
  const auto spec = example3_farma();
  const auto R = true_autocovariances(spec, {2, -2}, g, 256, 15);
  EXPECT_LT((R[0].values - R[1].values.transpose()).cwiseAbs().maxCoeff(), 1e-10);
}

namespace {

Eigen::MatrixXd example1_trapezoid_lag0(const Grid& g, int n) {
  Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(g.M, g.M);
  for (int k = 0; k < n; ++k) {
    const double w = 2 * pi * k / n;
    for (int i = 0; i < g.M; ++i)
      for (int j = 0; j < g.M; ++j) ref(i, j) += oracle::example1_kernel(w, g.points[i], g.points[j]) * 2 * pi / n;
  }
  return ref;
}

}  // namespace

TEST(TrueAutocovariance, Example1TwoQuadraturesAgree) {
  // midpoint rule in the library vs. trapezoid rule on the closed-form kernel
  const Grid g = make_grid(21);
  const Eigen::MatrixXd ref = example1_trapezoid_lag0(g, 2048);
  const auto R = true_autocovariance(example1_kernel(), 0, g, 2048);
  EXPECT_LT(oracle::trace_norm(R.values - ref) / oracle::trace_norm(ref), 1e-4);
}

TEST(TrueAutocovariance, Example1EigenFormWithinSeriesTail) {
  // the N-term series misses sum_{n>N} 1/(pi n)^2 < 1/(pi^2 N) of the trace 1/6 (times the mean scale)
  const Grid g = make_grid(21);
  const int N = 1000;
  const Eigen::MatrixXd ref = example1_trapezoid_lag0(g, 2048);
  const auto R = true_autocovariance(example1_ckl(), 0, g, 2048, N);
  const double tail = (1.0 / (pi * pi * N)) / (1.0 / 6.0);
  EXPECT_LT(oracle::trace_norm(R.values - ref) / oracle::trace_norm(ref), 1.2 * tail);
}

TEST(TrueAutocovariance, RejectsCoarseQuadrature) {
  EXPECT_THROW(true_autocovariance(example1_ckl(), 0, make_grid(5), 32), InvalidArgument);
}

TEST(FiniteTarget, WhiteNoise) {
  const Grid g = make_grid(11);
  const auto spec = white_noise(NoiseForm::Kernel);
  const auto R = finite_T_target_covariances(spec, {0, 1}, g, 128, 11);
  const Eigen::MatrixXd S = discretize_kernel(oracle::brownian_motion, g).values;
  EXPECT_LT((R[0].values - S).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(R[1].values.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FiniteTarget, LagZeroIsSymmetricNonnegative) {
  const Grid g = make_grid(21);
  for (const auto& spec : all_builtins()) {
    const auto R = finite_T_target_covariance(spec, 0, g, 64, 21).values;
    EXPECT_LT((R - R.transpose()).cwiseAbs().maxCoeff(), 1e-12 * R.cwiseAbs().maxCoeff());
    const auto ws = g.sqrt_weights();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ws.asDiagonal() * R * ws.asDiagonal());
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().maxCoeff()) << spec.name;
  }
}

TEST(FiniteTarget, OddHorizonRejected) {
  EXPECT_THROW(finite_T_target_covariance(example1_ckl(), 0, make_grid(5), 127, 5), InvalidArgument);
}
