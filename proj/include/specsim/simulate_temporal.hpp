#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "specsim/errors.hpp"
#include "specsim/grid.hpp"
#include "specsim/random.hpp"
#include "specsim/simulate_spectral.hpp"
#include "specsim/spectra.hpp"

namespace specsim {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Power-series coefficients of (1 - z)^{-d}: c_0 = 1, c_k = c_{k-1} (k - 1 + d) / k.
struct FracCoeffs {
  double d = 0.0;
  std::vector<double> c;
};

inline FracCoeffs frac_coeffs(double d, int K) {
  if (!(std::abs(d) < 0.5)) throw InvalidArgument("fractional order must satisfy |d| < 1/2");
  if (K < 1) throw InvalidArgument("number of fractional coefficients K must be >= 1");
  FracCoeffs out{d, std::vector<double>(static_cast<std::size_t>(K) + 1)};
  out.c[0] = 1.0;
  for (int k = 1; k <= K; ++k) out.c[k] = out.c[k - 1] * (k - 1 + d) / k;
  return out;
}

struct BurnInPolicy {
  int length = 200;

  static BurnInPolicy default_for(int p) { return {4 * std::max(p, 50)}; }
};

inline GaussianStream noise_stream(std::uint64_t seed, std::int64_t time_index) {
  return GaussianStream(seed, StreamTag::Noise, static_cast<std::uint64_t>(time_index));
}

/// Rows first_index, ..., first_index + count - 1 of an i.i.d. innovation sequence with
/// square-root covariance factor L (M x N'). Row r depends only on (seed, time index).
inline RowMatrix simulate_noise(const Eigen::MatrixXd& factor, int count, std::uint64_t seed,
                                std::int64_t first_index = 0) {
  if (count < 0) throw InvalidArgument("noise count must be >= 0");
  const long n = factor.cols();
  Eigen::MatrixXd xi(n, count);
  for (int r = 0; r < count; ++r) {
    auto col = xi.col(r);
    noise_stream(seed, first_index + r).fill_normals(col, n);
  }
  return (factor * xi).transpose();
}

inline RowMatrix simulate_noise(const CovarianceSpec& cov, int count, const Grid& grid, int N, std::uint64_t seed,
                                std::int64_t first_index = 0) {
  return simulate_noise(noise_factor(cov, grid, N), count, seed, first_index);
}

/// X_t = sum_j A_j X_{t-j} + X'_t for t > p with X_1 = ... = X_p = 0 (rows are times).
inline RowMatrix ar_recursion(const FarfimaOperators& ops, const RowMatrix& innovations) {
  const int L = static_cast<int>(innovations.rows());
  const int p = ops.p();
  RowMatrix X = RowMatrix::Zero(L, innovations.cols());
  for (int t = p; t < L; ++t) {
    X.row(t) = innovations.row(t);
    for (int j = 0; j < p; ++j) ops.ar_apply_add(j, X.row(t - j - 1), X.row(t));
  }
  return X;
}

/// Time-domain FARFIMA reference. Innovations start at t = 1 - q, so eta_t = eps_t + sum_j B_j eps_{t-j}
/// is exact for t >= 1. The FMA(infinity) fractional integration X'_t = sum_{k<K_ma} c_k eta_{t-k} runs
/// from rest (eta_s = 0 for s < 1), then the AR recursion starts from zero; the burn-in absorbs both
/// transients and is discarded.
inline FtsSample temporal_farfima(const FarfimaSpec& spec, int T, const Grid& grid, int N, int K_ma,
                                  BurnInPolicy burnin, std::uint64_t seed) {
  if (T < 1) throw InvalidArgument("T must be positive");
  if (burnin.length < 0) throw InvalidArgument("burn-in must be >= 0");
  const int L = T + burnin.length;
  if (K_ma < L) throw InvalidArgument("K_ma must be at least T + burn-in");
  const FarfimaOperators ops = prepare_farfima(spec, grid, N);
  const int q = ops.q();
  const int M = grid.M;

  const RowMatrix eps = simulate_noise(ops.noise, L + q, seed, 1 - q);
  RowMatrix eta = eps.bottomRows(L);
  for (int j = 1; j <= q; ++j) eta += eps.middleRows(q - j, L) * ops.ma[j - 1].transpose();

  RowMatrix xprime;
  if (spec.d != 0.0) {
    const FracCoeffs c = frac_coeffs(spec.d, L);
    xprime = RowMatrix::Zero(L, M);
    for (int t = 0; t < L; ++t) {
      auto row = xprime.row(t);
      for (int k = 0; k <= t; ++k) row += c.c[k] * eta.row(t - k);
    }
  } else {
    xprime = std::move(eta);
  }

  const RowMatrix X = ar_recursion(ops, xprime);
  FtsSample out;
  out.grid = grid;
  out.values = X.bottomRows(T);
  out.config.T = T;
  out.config.M = M;
  out.config.N = N;
  out.config.seed = seed;
  out.config.method = Method::Temporal;
  out.config.burnin = burnin.length;
  return out;
}

/// Hybrid FARFIMA: spectral simulation of the FARFIMA(0, d, q) part at length T + burn-in,
/// AR recursion in the time domain from rest, burn-in discarded. An odd burn-in is rounded up
/// so that the spectral length stays even.
inline FtsSample hybrid_farfima(const FarfimaSpec& spec, const SimConfig& config, const Grid& grid,
                                BurnInPolicy burnin) {
  config.validate();
  if (burnin.length < 0) throw InvalidArgument("burn-in must be >= 0");
  const int tb = burnin.length + (burnin.length % 2);
  FarfimaSpec moving_average = spec;
  moving_average.ar.clear();
  const SpectralDensitySpec inner_spec{"farfima(0,d,q)", moving_average};
  SimConfig inner = config;
  inner.T = config.T + tb;
  inner.method = Method::FarfimaSpectral;
  const FtsSample xprime = simulate_spectral(inner_spec, inner, grid);

  const FarfimaOperators ops = prepare_farfima(spec, grid, 1);
  const RowMatrix X = ar_recursion(ops, RowMatrix(xprime.values));
  FtsSample out;
  out.grid = grid;
  out.values = X.bottomRows(config.T);
  out.config = config;
  out.config.method = Method::FarfimaHybrid;
  out.config.burnin = tb;
  out.imag_residual = xprime.imag_residual;
  return out;
}

}  // namespace specsim
