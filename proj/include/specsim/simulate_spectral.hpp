#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "specsim/errors.hpp"
#include "specsim/grid.hpp"
#include "specsim/linalg.hpp"
#include "specsim/parallel.hpp"
#include "specsim/random.hpp"
#include "specsim/spectra.hpp"

namespace specsim {

enum class Method { Ckl, Filter, FarfimaSpectral, FarfimaHybrid, Temporal };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::Ckl: return "ckl";
    case Method::Filter: return "filter";
    case Method::FarfimaSpectral: return "farfima-spectral";
    case Method::FarfimaHybrid: return "farfima-hybrid";
    case Method::Temporal: return "temporal";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "ckl") return Method::Ckl;
  if (s == "filter") return Method::Filter;
  if (s == "farfima-spectral" || s == "spectral") return Method::FarfimaSpectral;
  if (s == "farfima-hybrid" || s == "hybrid") return Method::FarfimaHybrid;
  if (s == "temporal") return Method::Temporal;
  throw InvalidArgument("unknown method '" + s + "'");
}

/// Natural spectral method for a spec kind.
inline Method default_method(const SpectralDensitySpec& spec) {
  if (std::holds_alternative<FilterSpec>(spec.kind)) return Method::Filter;
  if (spec.is_farfima()) return Method::FarfimaSpectral;
  return Method::Ckl;
}

struct SimConfig {
  int T = 0;  // even
  int M = 0;
  int N = 1;
  std::uint64_t seed = 0;
  int oversample = 1;
  Method method = Method::Ckl;
  std::optional<int> burnin;  // hybrid / temporal; default 4 max(p, 50)
  int threads = 0;            // 0: SPECSIM_THREADS or hardware concurrency

  void validate() const {
    if (T < 2 || T % 2 != 0) throw InvalidArgument("T must be a positive even integer, got " + std::to_string(T));
    if (M < 2) throw InvalidArgument("M must be >= 2");
    if (N < 1) throw InvalidArgument("N must be >= 1");
    if (oversample < 1) throw InvalidArgument("oversample must be >= 1");
    if (burnin && *burnin < 0) throw InvalidArgument("burn-in must be >= 0");
  }
};

/// Row k-1 holds Z_k on the grid, k = 1..T.
struct FrequencyEnsemble {
  int T = 0;
  Eigen::MatrixXcd atoms;
};

/// One simulated trajectory: row t-1 holds X_t on the grid.
struct FtsSample {
  Eigen::MatrixXd values;
  Grid grid;
  SimConfig config;
  double imag_residual = 0.0;  // max |Im X| / max |Re X| before the imaginary part was dropped

  int T() const { return static_cast<int>(values.rows()); }
};

inline double canonical_frequency(int k, int T) { return kTwoPi * k / T; }

/// Stream of the standard normals behind atom Z'_k (part 0) or Z''_k (part 1).
inline GaussianStream atom_stream(std::uint64_t seed, int k, int part) {
  return GaussianStream(seed, StreamTag::Atom, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(part));
}

namespace detail {

inline Eigen::VectorXd normals(const GaussianStream& s, int n) {
  Eigen::VectorXd xi(n);
  s.fill_normals(xi, n);
  return xi;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Atom samplers: draw mean-zero complex Gaussian vectors with covariance F_omega.
// Each draw at one frequency may produce several independent atoms sharing setup work.

class AtomSampler {
public:
  virtual ~AtomSampler() = default;
  /// out[j] ~ N(0, F_omega) driven by streams[j]; `real_frequency` marks omega in {pi, 2 pi}.
  virtual void draw(double omega, bool real_frequency, std::span<const GaussianStream> streams,
                    std::span<Eigen::VectorXcd> out) const = 0;
};

/// Z = sum_{n<=N} sqrt(lambda_n(omega)) phi_n(omega) xi_n from an explicit harmonic decomposition.
class CklSampler final : public AtomSampler {
public:
  CklSampler(const EigenSpec& spec, const Grid& grid, int N) : spec_(spec), grid_(grid), N_(std::min(N, spec.n_max)) {}

  void draw(double omega, bool, std::span<const GaussianStream> streams, std::span<Eigen::VectorXcd> out) const override {
    const Eigen::MatrixXd L = detail::eigen_factor(spec_, omega, grid_, N_);
    for (std::size_t j = 0; j < streams.size(); ++j) out[j] = (L * detail::normals(streams[j], N_)).cast<cdouble>();
  }

private:
  const EigenSpec& spec_;
  Grid grid_;
  int N_;
};

/// CKL with harmonic eigenpairs computed numerically from the discretized density.
class NumericalCklSampler final : public AtomSampler {
public:
  NumericalCklSampler(const SpectralDensitySpec& spec, const Grid& grid, int N)
      : density_(spec, grid, N), grid_(grid), N_(std::min(N, grid.M)) {}

  void draw(double omega, bool real_frequency, std::span<const GaussianStream> streams,
            std::span<Eigen::VectorXcd> out) const override {
    const Eigen::MatrixXcd F = density_(omega);
    Eigen::MatrixXcd L;
    if (real_frequency) {
      // F is real here; a real basis keeps the atom real.
      const auto pairs = truncated_eigendecomposition(RealKernelMatrix{grid_, F.real()}, N_);
      L = pairs.eigenfunctions.transpose().cast<cdouble>();
      for (int n = 0; n < N_; ++n) L.col(n) *= std::sqrt(pairs.eigenvalues[n]);
    } else {
      const auto pairs = truncated_eigendecomposition(ComplexOperatorMatrix{grid_, F}, N_);
      L = pairs.eigenfunctions.transpose();
      for (int n = 0; n < N_; ++n) L.col(n) *= std::sqrt(pairs.eigenvalues[n]);
    }
    for (std::size_t j = 0; j < streams.size(); ++j) out[j] = L * detail::normals(streams[j], N_).cast<cdouble>();
  }

private:
  DensityEvaluator density_;
  Grid grid_;
  int N_;
};

/// Z' = (2 pi)^{-1/2} Theta(omega) Y with Y = sum_{n<=N} sqrt(eta_n) e_n xi_n.
class FilterSampler final : public AtomSampler {
public:
  FilterSampler(const FilterSpec& spec, const Grid& grid, int N)
      : spec_(spec), grid_(grid), noise_(noise_factor(spec.noise_cov, grid, N)) {}

  void draw(double omega, bool, std::span<const GaussianStream> streams, std::span<Eigen::VectorXcd> out) const override {
    const FilterResponse r = spec_.theta(omega, grid_);
    Eigen::MatrixXcd Y(grid_.M, static_cast<long>(streams.size()));
    for (std::size_t j = 0; j < streams.size(); ++j)
      Y.col(static_cast<long>(j)) = (noise_ * detail::normals(streams[j], static_cast<int>(noise_.cols()))).cast<cdouble>();
    const Eigen::MatrixXcd Z = apply_response(r, grid_, Y) / std::sqrt(kTwoPi);
    for (std::size_t j = 0; j < streams.size(); ++j) out[j] = Z.col(static_cast<long>(j));
  }

  const Eigen::MatrixXd& noise() const { return noise_; }

private:
  const FilterSpec& spec_;
  Grid grid_;
  Eigen::MatrixXd noise_;
};

/// Z' = (2 pi)^{-1/2} [2 sin(omega/2)]^{-d} A(e^{-i omega})^{-1} B(e^{-i omega}) Y.
class FarfimaSampler final : public AtomSampler {
public:
  FarfimaSampler(const FarfimaSpec& spec, const Grid& grid, int N, PrepareOptions options = {})
      : ops_(prepare_farfima(spec, grid, N, options)) {}

  void draw(double omega, bool, std::span<const GaussianStream> streams, std::span<Eigen::VectorXcd> out) const override {
    Eigen::MatrixXcd Y(ops_.grid.M, static_cast<long>(streams.size()));
    const int n = static_cast<int>(ops_.noise.cols());
    for (std::size_t j = 0; j < streams.size(); ++j)
      Y.col(static_cast<long>(j)) = (ops_.noise * detail::normals(streams[j], n)).cast<cdouble>();
    const Eigen::MatrixXcd Z = ops_.response_apply(omega, Y) / std::sqrt(kTwoPi);
    for (std::size_t j = 0; j < streams.size(); ++j) out[j] = Z.col(static_cast<long>(j));
  }

  const FarfimaOperators& operators() const { return ops_; }

private:
  FarfimaOperators ops_;
};

inline std::unique_ptr<AtomSampler> make_sampler(const SpectralDensitySpec& spec, Method method, const Grid& grid,
                                                 int N) {
  switch (method) {
    case Method::Ckl:
      if (const auto* e = std::get_if<EigenSpec>(&spec.kind)) return std::make_unique<CklSampler>(*e, grid, N);
      return std::make_unique<NumericalCklSampler>(spec, grid, N);
    case Method::Filter:
      if (const auto* f = std::get_if<FilterSpec>(&spec.kind)) return std::make_unique<FilterSampler>(*f, grid, N);
      if (spec.is_farfima()) return std::make_unique<FarfimaSampler>(spec.farfima(), grid, N);
      break;
    case Method::FarfimaSpectral:
      if (spec.is_farfima()) return std::make_unique<FarfimaSampler>(spec.farfima(), grid, N);
      break;
    default:
      break;
  }
  throw InvalidArgument("method '" + to_string(method) + "' cannot simulate spec '" + spec.name + "' in the spectral domain");
}

// ---------------------------------------------------------------------------
// Single-atom draws

inline Eigen::VectorXcd draw_atom_ckl(const EigenSpec& spec, double omega, const Grid& grid, int N,
                                      const GaussianStream& stream) {
  Eigen::VectorXcd out;
  CklSampler(spec, grid, N).draw(omega, false, {&stream, 1}, {&out, 1});
  return out;
}

inline Eigen::VectorXcd draw_atom_filter(const FilterSpec& spec, double omega, const Grid& grid, int N,
                                         const GaussianStream& stream) {
  Eigen::VectorXcd out;
  FilterSampler(spec, grid, N).draw(omega, false, {&stream, 1}, {&out, 1});
  return out;
}

inline Eigen::VectorXcd draw_atom_farfima(const FarfimaSpec& spec, double omega, const Grid& grid, int N,
                                          const GaussianStream& stream, PrepareOptions options = {}) {
  Eigen::VectorXcd out;
  FarfimaSampler(spec, grid, N, options).draw(omega, false, {&stream, 1}, {&out, 1});
  return out;
}

// ---------------------------------------------------------------------------
// Ensemble and synthesis

/// Builds Z_1..Z_T: Z_k = Z'_k + i Z''_k for k < T/2, Z_k = sqrt(2) Z'_k for k in {T/2, T},
/// Z_k = conj(Z_{T-k}) for k > T/2. Densities singular at 2 pi get a zero atom at k = T.
inline FrequencyEnsemble assemble_ensemble(const AtomSampler& sampler, int T, int M, std::uint64_t seed,
                                           bool zero_last_atom, int threads = 0) {
  if (T < 2 || T % 2 != 0) throw InvalidArgument("T must be a positive even integer");
  FrequencyEnsemble ens{T, Eigen::MatrixXcd::Zero(T, M)};
  const int half = T / 2;
  // Work items: k = 1..T/2 and k = T.
  parallel_for(
      1, half + 2,
      [&](long item) {
        const int k = item <= half ? static_cast<int>(item) : T;
        if (k == T && zero_last_atom) return;
        const double omega = canonical_frequency(k, T);
        if (k == half || k == T) {
          const GaussianStream s = atom_stream(seed, k, 0);
          Eigen::VectorXcd z;
          sampler.draw(omega, true, {&s, 1}, {&z, 1});
          const double re = z.real().cwiseAbs().maxCoeff();
          const double im = z.imag().cwiseAbs().maxCoeff();
          if (im > 1e-8 * re && im > 1e-14)
            throw InvalidSpec("density is not real at omega = " + std::to_string(omega));
          ens.atoms.row(k - 1) = (std::numbers::sqrt2 * z.real()).cast<cdouble>().transpose();
        } else {
          const std::array<GaussianStream, 2> s{atom_stream(seed, k, 0), atom_stream(seed, k, 1)};
          std::array<Eigen::VectorXcd, 2> z;
          sampler.draw(omega, false, s, z);
          const Eigen::VectorXcd zk = z[0] + cdouble(0.0, 1.0) * z[1];
          ens.atoms.row(k - 1) = zk.transpose();
          ens.atoms.row(T - k - 1) = zk.conjugate().transpose();
        }
      },
      threads);
  return ens;
}

inline FrequencyEnsemble assemble_ensemble(const SpectralDensitySpec& spec, const SimConfig& config, const Grid& grid) {
  config.validate();
  if (grid.M != config.M) throw InvalidArgument("grid resolution does not match config.M");
  const auto sampler = make_sampler(spec, config.method, grid, config.N);
  return assemble_ensemble(*sampler, config.T, grid.M, config.seed, spec.singular_at_zero(), config.threads);
}

/// X_t = (pi/T)^{1/2} sum_{k=1}^T Z_k e^{i t omega_k}, one length-T inverse FFT per grid point.
inline FtsSample synthesize(const FrequencyEnsemble& ens, const Grid& grid, int threads = 0) {
  const int T = ens.T;
  const int M = static_cast<int>(ens.atoms.cols());
  if (T < 2 || T % 2 != 0 || ens.atoms.rows() != T) throw InvalidArgument("ensemble must have an even number T of rows");
  if (M != grid.M) throw InvalidArgument("ensemble width does not match grid");

  const double scale = std::max(ens.atoms.cwiseAbs().maxCoeff(), 1e-300);
  double asym = 0.0;
  for (int k = 1; k < T / 2; ++k)
    asym = std::max(asym, (ens.atoms.row(T - k - 1) - ens.atoms.row(k - 1).conjugate()).cwiseAbs().maxCoeff());
  asym = std::max(asym, ens.atoms.row(T / 2 - 1).imag().cwiseAbs().maxCoeff());
  asym = std::max(asym, ens.atoms.row(T - 1).imag().cwiseAbs().maxCoeff());
  if (asym > 1e-8 * scale) throw InvalidEnsemble("frequency ensemble violates conjugate symmetry");

  FtsSample out;
  out.grid = grid;
  out.values.resize(T, M);
  Eigen::VectorXd imag_max = Eigen::VectorXd::Zero(M);
  const double norm = std::sqrt(std::numbers::pi / T);
  parallel_for(
      0, M,
      [&](long m) {
        Eigen::FFT<double> fft;
        fft.SetFlag(Eigen::FFT<double>::Unscaled);
        std::vector<cdouble> a(T), y(T);
        // a_j = Z_k with j = k mod T
        for (int k = 1; k <= T; ++k) a[k % T] = ens.atoms(k - 1, m);
        fft.inv(y, a);
        double im = 0.0;
        for (int t = 1; t <= T; ++t) {
          const cdouble v = norm * y[t % T];
          out.values(t - 1, m) = v.real();
          im = std::max(im, std::abs(v.imag()));
        }
        imag_max[m] = im;
      },
      threads);
  const double re = out.values.size() ? out.values.cwiseAbs().maxCoeff() : 0.0;
  const double im = imag_max.size() ? imag_max.maxCoeff() : 0.0;
  out.imag_residual = re > 0.0 ? im / re : im;
  return out;
}

/// Spectral-domain simulation. With oversample k > 1 the pipeline runs at length kT and a
/// contiguous block of length T starting at a stream-drawn offset is returned.
inline FtsSample simulate_spectral(const SpectralDensitySpec& spec, const SimConfig& config, const Grid& grid) {
  config.validate();
  if (grid.M != config.M) throw InvalidArgument("grid resolution does not match config.M");
  const int T_full = config.T * config.oversample;
  const auto sampler = make_sampler(spec, config.method, grid, config.N);
  const FrequencyEnsemble ens =
      assemble_ensemble(*sampler, T_full, grid.M, config.seed, spec.singular_at_zero(), config.threads);
  FtsSample full = synthesize(ens, grid, config.threads);
  full.config = config;
  if (config.oversample == 1) return full;
  const std::uint64_t span = static_cast<std::uint64_t>(T_full - config.T + 1);
  const GaussianStream s(config.seed, StreamTag::Subsample);
  const int offset = static_cast<int>(s.bits(0) % span);
  FtsSample out = full;
  out.values = full.values.middleRows(offset, config.T);
  return out;
}

}  // namespace specsim
