#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "specsim/errors.hpp"
#include "specsim/grid.hpp"
#include "specsim/linalg.hpp"

namespace specsim {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr int kUnbounded = std::numeric_limits<int>::max();

// ---------------------------------------------------------------------------
// Covariance operators of the white-noise innovations

struct ClosedFormKernel {
  RealKernel kernel;
};

/// S = sum_{n=1}^{n_max} eta(n) e_n (x) e_n.
struct MercerSeries {
  std::function<double(int)> eta;
  std::function<double(int, double)> e;  // (n, x)
  int n_max = kUnbounded;
};

/// S = sum_r sigma_r f_r (x) f_r. The f_r need not be orthonormal.
struct LowRankSum {
  std::vector<double> sigma;
  std::vector<RealFunction> f;
};

struct CovarianceSpec {
  std::variant<ClosedFormKernel, MercerSeries, LowRankSum> form;
};

/// Pointwise value of the covariance kernel; series are summed to `terms` terms.
inline double covariance_kernel_value(const CovarianceSpec& cov, double x, double y, int terms = 1000) {
  return std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ClosedFormKernel>) {
          return f.kernel(x, y);
        } else if constexpr (std::is_same_v<T, MercerSeries>) {
          double s = 0.0;
          const int n_max = std::min(terms, f.n_max);
          for (int n = 1; n <= n_max; ++n) s += f.eta(n) * f.e(n, x) * f.e(n, y);
          return s;
        } else {
          double s = 0.0;
          for (std::size_t r = 0; r < f.sigma.size(); ++r) s += f.sigma[r] * f.f[r](x) * f.f[r](y);
          return s;
        }
      },
      cov.form);
}

/// Square-root factor of the N-truncated covariance: an M x N' matrix L with S_N = L L^T.
///
/// Closed-form kernels are decomposed numerically once (N is capped at M there);
/// series forms use their first N terms.
inline Eigen::MatrixXd noise_factor(const CovarianceSpec& cov, const Grid& grid, int N) {
  if (N < 1) throw InvalidArgument("noise truncation N must be >= 1");
  return std::visit(
      [&](const auto& f) -> Eigen::MatrixXd {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ClosedFormKernel>) {
          const auto pairs = truncated_eigendecomposition(discretize_kernel(f.kernel, grid), std::min(N, grid.M));
          Eigen::MatrixXd L = pairs.eigenfunctions.transpose();
          for (int n = 0; n < pairs.rank(); ++n) L.col(n) *= std::sqrt(pairs.eigenvalues[n]);
          return L;
        } else if constexpr (std::is_same_v<T, MercerSeries>) {
          const int n_terms = std::min(N, f.n_max);
          Eigen::MatrixXd L(grid.M, n_terms);
          for (int n = 1; n <= n_terms; ++n) {
            const double eta = f.eta(n);
            if (!(eta >= 0.0)) throw InvalidSpec("Mercer coefficient eta_" + std::to_string(n) + " is negative");
            const double s = std::sqrt(eta);
            for (int i = 0; i < grid.M; ++i) L(i, n - 1) = s * f.e(n, grid.points[i]);
          }
          return L;
        } else {
          if (f.sigma.size() != f.f.size()) throw InvalidSpec("low-rank covariance: coefficient/function count mismatch");
          const int n_terms = std::min<int>(N, static_cast<int>(f.sigma.size()));
          Eigen::MatrixXd L(grid.M, n_terms);
          for (int r = 0; r < n_terms; ++r) {
            if (!(f.sigma[r] >= 0.0)) throw InvalidSpec("low-rank covariance: negative coefficient");
            L.col(r) = std::sqrt(f.sigma[r]) * sample_function(f.f[r], grid);
          }
          return L;
        }
      },
      cov.form);
}

// ---------------------------------------------------------------------------
// Specification variants

/// F_omega = sum_n lambda(n, omega) phi_n(omega) (x) phi_n(omega); n starts at 1.
struct EigenSpec {
  int n_max = kUnbounded;
  std::function<double(int, double)> lambda;          // (n, omega)
  std::function<double(int, double, double)> phi;     // (n, omega, x)
};

struct IdentityResponse {
  cdouble scale{1.0, 0.0};
};
/// a Id + c g (x) g
struct RankOneResponse {
  cdouble identity_scale{1.0, 0.0};
  cdouble c{0.0, 0.0};
  Eigen::VectorXd g;
};
/// a Id + integral operator with kernel samples K.
struct KernelResponse {
  cdouble identity_scale{0.0, 0.0};
  Eigen::MatrixXcd kernel;
};
/// Matrix acting directly on sample vectors.
struct MatrixResponse {
  Eigen::MatrixXcd matrix;
};

using FilterResponse = std::variant<IdentityResponse, RankOneResponse, KernelResponse, MatrixResponse>;

inline Eigen::MatrixXcd apply_response(const FilterResponse& r, const Grid& grid, const Eigen::MatrixXcd& v) {
  return std::visit(
      [&](const auto& f) -> Eigen::MatrixXcd {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, IdentityResponse>) {
          return f.scale * v;
        } else if constexpr (std::is_same_v<T, RankOneResponse>) {
          const Eigen::RowVectorXcd proj = (grid.weights.array() * f.g.array()).matrix().transpose().template cast<cdouble>() * v;
          return f.identity_scale * v + f.c * f.g.template cast<cdouble>() * proj;
        } else if constexpr (std::is_same_v<T, KernelResponse>) {
          return f.identity_scale * v + f.kernel * (grid.weights.template cast<cdouble>().asDiagonal() * v);
        } else {
          return f.matrix * v;
        }
      },
      r);
}

inline Eigen::MatrixXcd response_matrix(const FilterResponse& r, const Grid& grid) {
  return apply_response(r, grid, Eigen::MatrixXcd::Identity(grid.M, grid.M));
}

/// Filtered white noise: F_omega = (2 pi)^{-1} Theta(omega) S Theta(omega)^*.
struct FilterSpec {
  std::function<FilterResponse(double, const Grid&)> theta;
  CovarianceSpec noise_cov;
};

/// Integral operator c g (x) g, used to tag rank-one autoregressive kernels.
struct RankOneTag {
  double c = 0.0;
  RealFunction g;
};

struct ArOperator {
  RealKernel kernel;
  std::optional<RankOneTag> rank_one;
};

/// FARFIMA(p, d, q): (Id - B)^d X~_t = X_t with X a FARMA(p, q) process.
/// Stationarity is the caller's responsibility; see companion_spectral_radius.
struct FarfimaSpec {
  double d = 0.0;
  std::vector<ArOperator> ar;
  std::vector<RealKernel> ma;
  CovarianceSpec noise_cov;

  int p() const { return static_cast<int>(ar.size()); }
  int q() const { return static_cast<int>(ma.size()); }
};

/// Pointwise complex kernel f_omega(x, y).
struct KernelSpec {
  std::function<cdouble(double, double, double)> kernel;  // (omega, x, y)
};

struct SpectralDensitySpec {
  std::string name;
  std::variant<EigenSpec, FilterSpec, FarfimaSpec, KernelSpec> kind;

  bool is_farfima() const { return std::holds_alternative<FarfimaSpec>(kind); }
  const FarfimaSpec& farfima() const { return std::get<FarfimaSpec>(kind); }
  /// True when F is unbounded (or set to zero) at omega in {0, 2 pi}.
  bool singular_at_zero() const { return is_farfima() && farfima().d != 0.0; }
};

// ---------------------------------------------------------------------------
// Elementary factors

namespace detail {
inline void check_frequency(double omega) {
  if (!(omega >= -1e-12 && omega <= kTwoPi + 1e-12))
    throw InvalidArgument("frequency must lie in [0, 2 pi], got " + std::to_string(omega));
}
inline bool at_endpoint(double omega) { return std::abs(omega) < 1e-14 || std::abs(omega - kTwoPi) < 1e-12; }
}  // namespace detail

/// [2 sin(omega/2)]^{-2d}.
inline double fractional_factor(double omega, double d) {
  if (d == 0.0) return 1.0;
  if (detail::at_endpoint(omega) || omega <= 0.0 || omega >= kTwoPi)
    throw SingularFrequency("fractional factor is singular at omega in {0, 2 pi} for d != 0");
  return std::pow(2.0 * std::sin(0.5 * omega), -2.0 * d);
}

// ---------------------------------------------------------------------------
// FARFIMA operators discretized once per grid

struct FarfimaOperators {
  Grid grid;
  double d = 0.0;
  std::vector<Eigen::MatrixXd> ar;  // A_j W in sample coordinates
  std::vector<Eigen::MatrixXd> ma;  // B_j W
  bool rank_one = false;            // p == 1 and tagged
  double c = 0.0;
  Eigen::VectorXd g;
  Eigen::RowVectorXd gw;  // (W g)^T
  double gram = 0.0;
  Eigen::MatrixXd noise;  // M x N' square-root factor of S_N

  int p() const { return static_cast<int>(ar.size()); }
  int q() const { return static_cast<int>(ma.size()); }

  /// A(e^{-i omega}) = Id - sum_j A_j e^{-i j omega}.
  Eigen::MatrixXcd ar_matrix(double omega) const {
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(grid.M, grid.M);
    for (int j = 0; j < p(); ++j) A -= std::polar(1.0, -(j + 1) * omega) * ar[j].cast<cdouble>();
    return A;
  }

  /// B(e^{-i omega}) v = v + sum_j B_j e^{-i j omega} v.
  Eigen::MatrixXcd ma_apply(double omega, const Eigen::MatrixXcd& v) const {
    Eigen::MatrixXcd out = v;
    for (int j = 0; j < q(); ++j) out += std::polar(1.0, -(j + 1) * omega) * (ma[j].cast<cdouble>() * v);
    return out;
  }

  /// A(e^{-i omega})^{-1} rhs, via Sherman-Morrison when the single AR operator is rank one.
  Eigen::MatrixXcd ar_solve(double omega, const Eigen::MatrixXcd& rhs) const {
    if (p() == 0) return rhs;
    if (rank_one) {
      const cdouble scale = c * std::polar(1.0, -omega);
      const cdouble denom = 1.0 - scale * gram;
      if (std::abs(denom) < 1e-12) throw NumericError("AR operator is singular at this frequency");
      const Eigen::RowVectorXcd proj = gw.cast<cdouble>() * rhs;
      return rhs + (scale / denom) * g.cast<cdouble>() * proj;
    }
    const Eigen::MatrixXcd A = ar_matrix(omega);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    if (!(lu.rcond() > 1e-12)) throw NumericError("AR operator matrix singular or ill-conditioned");
    return lu.solve(rhs);
  }

  /// Theta(omega) rhs = [2 sin(omega/2)]^{-d} A^{-1} B rhs.
  Eigen::MatrixXcd response_apply(double omega, const Eigen::MatrixXcd& rhs) const {
    const double amplitude = std::sqrt(fractional_factor(omega, d));
    return amplitude * ar_solve(omega, ma_apply(omega, rhs));
  }

  /// X <- A X for the time-domain recursion (real operators).
  void ar_apply_add(int j, const Eigen::Ref<const Eigen::RowVectorXd>& x, Eigen::Ref<Eigen::RowVectorXd> out) const {
    if (rank_one) {
      out += (c * gw.dot(x)) * g.transpose();
    } else {
      out += (ar[j] * x.transpose()).transpose();
    }
  }
};

struct PrepareOptions {
  bool use_rank_one = true;  // false forces the dense AR solve
};

inline FarfimaOperators prepare_farfima(const FarfimaSpec& spec, const Grid& grid, int N,
                                        PrepareOptions options = {}) {
  if (!(spec.d > -0.5 && spec.d < 0.5))
    throw InvalidArgument("fractional order d must lie in (-1/2, 1/2)");
  FarfimaOperators ops;
  ops.grid = grid;
  ops.d = spec.d;
  for (const auto& a : spec.ar) ops.ar.push_back(discretize_kernel(a.kernel, grid).values * grid.weights.asDiagonal());
  for (const auto& b : spec.ma) ops.ma.push_back(discretize_kernel(b, grid).values * grid.weights.asDiagonal());
  if (options.use_rank_one && spec.p() == 1 && spec.ar[0].rank_one) {
    ops.rank_one = true;
    ops.c = spec.ar[0].rank_one->c;
    ops.g = sample_function(spec.ar[0].rank_one->g, grid);
    ops.gw = (grid.weights.array() * ops.g.array()).matrix().transpose();
    ops.gram = grid.inner(ops.g, ops.g);
  }
  ops.noise = noise_factor(spec.noise_cov, grid, N);
  return ops;
}

/// Theta(omega) rhs for a FARFIMA spec: [2 sin(omega/2)]^{-d} A(e^{-i omega})^{-1} B(e^{-i omega}) rhs.
inline Eigen::VectorXcd farfima_frequency_response(const FarfimaSpec& spec, double omega, const Grid& grid,
                                                   const Eigen::VectorXcd& rhs, PrepareOptions options = {}) {
  detail::check_frequency(omega);
  if (rhs.size() != grid.M) throw InvalidArgument("farfima_frequency_response: rhs size mismatch");
  const auto ops = prepare_farfima(spec, grid, 1, options);
  return ops.response_apply(omega, rhs);
}

/// Spectral radius of the discretized companion operator [A_1 ... A_p; Id 0 ...].
/// Diagnostic only: a radius below one is necessary, not sufficient, for the
/// operator-norm stationarity condition.
inline double companion_spectral_radius(const FarfimaSpec& spec, const Grid& grid) {
  const int p = spec.p();
  if (p == 0) return 0.0;
  const int M = grid.M;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(p * M, p * M);
  for (int j = 0; j < p; ++j)
    C.block(0, j * M, M, M) = discretize_kernel(spec.ar[j].kernel, grid).values * grid.weights.asDiagonal();
  for (int j = 1; j < p; ++j) C.block(j * M, (j - 1) * M, M, M) = Eigen::MatrixXd::Identity(M, M);
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Spectral density evaluation

namespace detail {

inline Eigen::MatrixXd eigen_factor(const EigenSpec& spec, double omega, const Grid& grid, int N) {
  const int n_terms = std::min(N, spec.n_max);
  Eigen::MatrixXd L(grid.M, n_terms);
  for (int n = 1; n <= n_terms; ++n) {
    const double lam = spec.lambda(n, omega);
    if (!(lam >= 0.0) || !std::isfinite(lam))
      throw InvalidSpec("harmonic eigenvalue lambda_" + std::to_string(n) + " is negative or not finite");
    const double s = std::sqrt(lam);
    for (int i = 0; i < grid.M; ++i) L(i, n - 1) = s * spec.phi(n, omega, grid.points[i]);
  }
  return L;
}

/// Theta S_N Theta^* given a callable applying Theta to a block of columns.
template <class Apply>
Eigen::MatrixXcd sandwich(const Apply& theta, const Eigen::MatrixXd& factor) {
  const int M = static_cast<int>(factor.rows());
  if (factor.cols() <= M) {
    const Eigen::MatrixXcd G = theta(factor.cast<cdouble>());
    return G * G.adjoint();
  }
  const Eigen::MatrixXcd S = (factor * factor.transpose()).cast<cdouble>();
  const Eigen::MatrixXcd TS = theta(S);
  return theta(Eigen::MatrixXcd(TS.adjoint())).adjoint();
}

}  // namespace detail

/// Kernel samples of F_omega on the grid; series and noise covariances are truncated at N.
inline ComplexOperatorMatrix eval_spectral_density(const SpectralDensitySpec& spec, double omega, const Grid& grid,
                                                   int N) {
  detail::check_frequency(omega);
  if (N < 1) throw InvalidArgument("truncation N must be >= 1");
  ComplexOperatorMatrix out{grid, {}};
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, EigenSpec>) {
          const Eigen::MatrixXd L = detail::eigen_factor(s, omega, grid, N);
          out.values = (L * L.transpose()).cast<cdouble>();
        } else if constexpr (std::is_same_v<T, FilterSpec>) {
          const FilterResponse r = s.theta(omega, grid);
          const Eigen::MatrixXd L = noise_factor(s.noise_cov, grid, N);
          out.values = detail::sandwich([&](const Eigen::MatrixXcd& v) { return apply_response(r, grid, v); }, L) / kTwoPi;
        } else if constexpr (std::is_same_v<T, FarfimaSpec>) {
          if (s.d > 0.0 && detail::at_endpoint(omega))
            throw SingularFrequency("FARFIMA density with d > 0 is unbounded at omega in {0, 2 pi}");
          if (s.d < 0.0 && detail::at_endpoint(omega)) {
            out.values = Eigen::MatrixXcd::Zero(grid.M, grid.M);
            return;
          }
          const auto ops = prepare_farfima(s, grid, N);
          out.values =
              detail::sandwich([&](const Eigen::MatrixXcd& v) { return ops.response_apply(omega, v); }, ops.noise) / kTwoPi;
        } else {
          out.values.resize(grid.M, grid.M);
          for (int j = 0; j < grid.M; ++j)
            for (int i = 0; i < grid.M; ++i) out.values(i, j) = s.kernel(omega, grid.points[i], grid.points[j]);
          if (!out.values.allFinite()) throw NumericError("spectral kernel is not finite");
        }
      },
      spec.kind);
  return out;
}

/// Evaluates F at many frequencies, reusing the discretized operators.
class DensityEvaluator {
public:
  DensityEvaluator(const SpectralDensitySpec& spec, const Grid& grid, int N) : spec_(spec), grid_(grid), N_(N) {
    if (spec.is_farfima()) ops_ = prepare_farfima(spec.farfima(), grid, N);
    if (const auto* f = std::get_if<FilterSpec>(&spec.kind)) noise_ = noise_factor(f->noise_cov, grid, N);
  }

  Eigen::MatrixXcd operator()(double omega) const {
    if (ops_) {
      detail::check_frequency(omega);
      if (ops_->d != 0.0 && detail::at_endpoint(omega)) {
        if (ops_->d > 0.0) throw SingularFrequency("FARFIMA density with d > 0 is unbounded at omega in {0, 2 pi}");
        return Eigen::MatrixXcd::Zero(grid_.M, grid_.M);
      }
      return detail::sandwich([&](const Eigen::MatrixXcd& v) { return ops_->response_apply(omega, v); }, ops_->noise) /
             kTwoPi;
    }
    if (const auto* f = std::get_if<FilterSpec>(&spec_.kind)) {
      detail::check_frequency(omega);
      const FilterResponse r = f->theta(omega, grid_);
      return detail::sandwich([&](const Eigen::MatrixXcd& v) { return apply_response(r, grid_, v); }, noise_) / kTwoPi;
    }
    return eval_spectral_density(spec_, omega, grid_, N_).values;
  }

  const Grid& grid() const { return grid_; }

private:
  const SpectralDensitySpec& spec_;
  Grid grid_;
  int N_;
  std::optional<FarfimaOperators> ops_;
  Eigen::MatrixXd noise_;
};

/// Best rank-N approximation sum_{n<=N} mu_n v_n v_n^* of a Hermitian kernel.
inline Eigen::MatrixXcd truncate_rank(const Eigen::MatrixXcd& kernel, const Grid& grid, int N) {
  const auto pairs = truncated_eigendecomposition(ComplexOperatorMatrix{grid, kernel}, std::min(N, grid.M));
  const Eigen::MatrixXcd V = pairs.eigenfunctions.transpose();
  return V * pairs.eigenvalues.cast<cdouble>().asDiagonal() * V.adjoint();
}

// ---------------------------------------------------------------------------
// Autocovariance targets

/// Midpoint-rule approximation of R_h = int_0^{2 pi} F_omega e^{i h omega} d omega for each lag.
/// Midpoints never touch omega in {0, 2 pi}, so integrable FARFIMA singularities need no special case.
inline std::vector<RealKernelMatrix> true_autocovariances(const SpectralDensitySpec& spec, const std::vector<int>& lags,
                                                          const Grid& grid, int n_freq, int N = 1000) {
  if (n_freq < 64) throw InvalidArgument("true_autocovariance: n_freq must be >= 64");
  if (spec.is_farfima() && !(std::abs(spec.farfima().d) < 0.5))
    throw InvalidArgument("true_autocovariance: |d| >= 1/2 is not integrable");
  const DensityEvaluator density(spec, grid, N);
  std::vector<Eigen::MatrixXcd> acc(lags.size(), Eigen::MatrixXcd::Zero(grid.M, grid.M));
  const double step = kTwoPi / n_freq;
  for (int j = 0; j < n_freq; ++j) {
    const double omega = (j + 0.5) * step;
    const Eigen::MatrixXcd F = density(omega);
    for (std::size_t l = 0; l < lags.size(); ++l) acc[l] += F * std::polar(1.0, lags[l] * omega);
  }
  std::vector<RealKernelMatrix> out;
  for (auto& a : acc) {
    a *= step;
    const double re = detail::max_abs(a.real().eval());
    const double im = detail::max_abs(a.imag().eval());
    if (im > 1e-8 * std::max(re, 1e-300) && im > 1e-14)
      throw NumericError("autocovariance has a non-negligible imaginary part; density is not Hermitian-symmetric");
    out.push_back({grid, a.real()});
  }
  return out;
}

inline RealKernelMatrix true_autocovariance(const SpectralDensitySpec& spec, int h, const Grid& grid, int n_freq,
                                            int N = 1000) {
  return true_autocovariances(spec, {h}, grid, n_freq, N).front();
}

/// Exact lag-h covariances of the length-T spectral simulation:
/// (2 pi / T) sum_{k=1}^T F_{omega_k} e^{i h omega_k}, with F_{2 pi} = 0 when the density is singular there.
///
/// `realized` maps a frequency to the density the sampler actually realizes; by
/// default it is the N-truncated density.
inline std::vector<RealKernelMatrix> finite_T_target_covariances(
    const SpectralDensitySpec& spec, const std::vector<int>& lags, const Grid& grid, int T, int N,
    const std::function<Eigen::MatrixXcd(double)>& realized = {}) {
  if (T < 2 || T % 2 != 0) throw InvalidArgument("T must be a positive even integer");
  std::function<Eigen::MatrixXcd(double)> density = realized;
  std::optional<DensityEvaluator> evaluator;
  if (!density) {
    evaluator.emplace(spec, grid, N);
    const bool truncate = std::holds_alternative<KernelSpec>(spec.kind) && N < grid.M;
    density = [&evaluator, &grid, N, truncate](double w) -> Eigen::MatrixXcd {
      Eigen::MatrixXcd F = (*evaluator)(w);
      return truncate ? truncate_rank(F, grid, N) : F;
    };
  }
  std::vector<Eigen::MatrixXcd> acc(lags.size(), Eigen::MatrixXcd::Zero(grid.M, grid.M));
  for (int k = 1; k <= T; ++k) {
    if (k == T && spec.singular_at_zero()) continue;
    const double omega = kTwoPi * k / T;
    const Eigen::MatrixXcd F = density(omega);
    for (std::size_t l = 0; l < lags.size(); ++l) acc[l] += F * std::polar(1.0, lags[l] * omega);
  }
  std::vector<RealKernelMatrix> out;
  for (auto& a : acc) out.push_back({grid, (a.real() * (kTwoPi / T)).eval()});
  return out;
}

inline RealKernelMatrix finite_T_target_covariance(const SpectralDensitySpec& spec, int h, const Grid& grid, int T,
                                                   int N) {
  return finite_T_target_covariances(spec, {h}, grid, T, N).front();
}

}  // namespace specsim
