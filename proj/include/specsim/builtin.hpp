#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "specsim/spectra.hpp"

namespace specsim {

/// delta_a(x) = (x - a) mod 1, in [0, 1).
inline double periodic_shift(double a, double x) {
  const double v = x - a;
  double r = v - std::floor(v);
  if (r >= 1.0) r = 0.0;
  return r;
}

/// Covariance kernel of the Brownian bridge.
inline double brownian_bridge_kernel(double x, double y) { return std::min(x, y) - x * y; }

inline double brownian_motion_kernel(double x, double y) { return std::min(x, y); }

/// Mercer series of min(x, y): eta_n = 1/((n - 1/2) pi)^2, e_n(x) = sqrt(2) sin((n - 1/2) pi x).
inline MercerSeries brownian_motion_mercer(int n_max = kUnbounded) {
  using std::numbers::pi;
  return MercerSeries{
      [](int n) {
        const double a = (n - 0.5) * pi;
        return 1.0 / (a * a);
      },
      [](int n, double x) { return std::numbers::sqrt2 * std::sin((n - 0.5) * pi * x); },
      n_max,
  };
}

namespace example1 {

inline double spectral_scale(double omega) { return 1.0 / (1.0 - 0.9 * std::cos(omega)); }

/// Shift of the harmonic eigenfunctions; the [0, pi] branch includes omega = pi.
inline double shift(double omega) { return omega <= std::numbers::pi ? omega / std::numbers::pi : -omega / std::numbers::pi; }

inline double lambda(int n, double omega) {
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return spectral_scale(omega) / (pi2 * n * n);
}

inline double phi(int n, double omega, double x) {
  return std::numbers::sqrt2 * std::sin(n * std::numbers::pi * periodic_shift(shift(omega), x));
}

inline double kernel(double omega, double x, double y) {
  const double a = shift(omega);
  return spectral_scale(omega) * brownian_bridge_kernel(periodic_shift(a, x), periodic_shift(a, y));
}

}  // namespace example1

inline SpectralDensitySpec example1_ckl() {
  return {"example1", EigenSpec{kUnbounded, example1::lambda, example1::phi}};
}

inline SpectralDensitySpec example1_kernel() {
  return {"example1-kernel", KernelSpec{[](double w, double x, double y) { return cdouble(example1::kernel(w, x, y)); }}};
}

enum class NoiseForm { Series, Kernel };

/// FARFIMA(1, 0.2, 0) with A_1(x,y) = 0.34 exp((x^2+y^2)/2) and Brownian-motion innovations.
inline SpectralDensitySpec example2_farfima(NoiseForm noise = NoiseForm::Series) {
  FarfimaSpec s;
  s.d = 0.2;
  s.ar.push_back(ArOperator{
      [](double x, double y) { return 0.34 * std::exp(0.5 * (x * x + y * y)); },
      RankOneTag{0.34, [](double x) { return std::exp(0.5 * x * x); }},
  });
  if (noise == NoiseForm::Series)
    s.noise_cov.form = brownian_motion_mercer();
  else
    s.noise_cov.form = ClosedFormKernel{brownian_motion_kernel};
  return {noise == NoiseForm::Series ? "example2" : "example2-svd", s};
}

namespace example3 {

inline const std::vector<double>& noise_coefficients() {
  static const std::vector<double> c{1.0, 0.6, 0.3, 0.1, 0.1, 0.1, 0.05, 0.05, 0.05, 0.05};
  return c;
}

/// r-th basis function: sin(2 pi x), cos(2 pi x), sin(4 pi x), cos(4 pi x), ...
inline double basis(int r, double x) {
  const double freq = 2.0 * std::numbers::pi * (r / 2 + 1);
  return r % 2 == 0 ? std::sin(freq * x) : std::cos(freq * x);
}

inline double noise_kernel(double x, double y) {
  double s = 0.0;
  const auto& c = noise_coefficients();
  for (int r = 0; r < static_cast<int>(c.size()); ++r) s += c[r] * basis(r, x) * basis(r, y);
  return s;
}

}  // namespace example3

/// FARMA(4, 3) with smooth kernels and a rank-10 trigonometric innovation covariance.
inline SpectralDensitySpec example3_farma(NoiseForm noise = NoiseForm::Series) {
  FarfimaSpec s;
  s.d = 0.0;
  s.ar = {
      ArOperator{[](double x, double y) { return 0.3 * std::sin(x - y); }, std::nullopt},
      ArOperator{[](double x, double y) { return 0.3 * std::cos(x - y); }, std::nullopt},
      ArOperator{[](double x, double) { return 0.3 * std::sin(2.0 * x); }, std::nullopt},
      ArOperator{[](double, double y) { return 0.3 * std::cos(y); }, std::nullopt},
  };
  s.ma = {
      [](double x, double y) { return x + y; },
      [](double x, double) { return x; },
      [](double, double y) { return y; },
  };
  if (noise == NoiseForm::Series) {
    LowRankSum lr;
    lr.sigma = example3::noise_coefficients();
    for (int r = 0; r < static_cast<int>(lr.sigma.size()); ++r)
      lr.f.push_back([r](double x) { return example3::basis(r, x); });
    s.noise_cov.form = lr;
  } else {
    s.noise_cov.form = ClosedFormKernel{example3::noise_kernel};
  }
  return {noise == NoiseForm::Series ? "example3" : "example3-svd", s};
}

/// White noise with Brownian-motion covariance: F_omega = S / (2 pi).
inline SpectralDensitySpec white_noise(NoiseForm noise = NoiseForm::Series) {
  FarfimaSpec s;
  if (noise == NoiseForm::Series)
    s.noise_cov.form = brownian_motion_mercer();
  else
    s.noise_cov.form = ClosedFormKernel{brownian_motion_kernel};
  return {"white-noise", s};
}

inline std::vector<std::string> builtin_names() {
  return {"example1", "example1-kernel", "example2", "example2-svd", "example3", "example3-svd", "white-noise"};
}

inline SpectralDensitySpec builtin_spec(const std::string& name) {
  if (name == "example1") return example1_ckl();
  if (name == "example1-kernel") return example1_kernel();
  if (name == "example2") return example2_farfima(NoiseForm::Series);
  if (name == "example2-svd") return example2_farfima(NoiseForm::Kernel);
  if (name == "example3") return example3_farma(NoiseForm::Series);
  if (name == "example3-svd") return example3_farma(NoiseForm::Kernel);
  if (name == "white-noise") return white_noise();
  throw InvalidArgument("unknown built-in spec '" + name + "'");
}

/// The four specs of the worked examples, keyed by their spec-level names.
inline std::map<std::string, SpectralDensitySpec> builtin_specs() {
  return {
      {"example1_ckl", example1_ckl()},
      {"example1_kernel", example1_kernel()},
      {"example2_farfima", example2_farfima()},
      {"example3_farma", example3_farma()},
  };
}

}  // namespace specsim
