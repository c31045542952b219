#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>

#include <Eigen/Dense>

#include "specsim/errors.hpp"

namespace specsim {

using cdouble = std::complex<double>;
using RealKernel = std::function<double(double, double)>;
using RealFunction = std::function<double(double)>;

/// Regular grid x_m = (m-1)/(M-1) on [0,1] with trapezoidal quadrature weights.
///
/// All functions are represented by their samples on the grid. An integral
/// operator with kernel K acts on samples f as (K f)_i = sum_j K(x_i, x_j) w_j f_j,
/// so the matrix of the operator in sample coordinates is K W.
struct Grid {
  int M = 0;
  Eigen::VectorXd points;
  Eigen::VectorXd weights;

  Eigen::VectorXd sqrt_weights() const { return weights.array().sqrt(); }

  /// Quadrature inner product <f, g> = sum_i w_i f_i conj(g_i).
  double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
    return (weights.array() * f.array() * g.array()).sum();
  }
  cdouble inner(const Eigen::VectorXcd& f, const Eigen::VectorXd& g) const {
    return (f.array() * (weights.array() * g.array()).cast<cdouble>()).sum();
  }
  cdouble inner(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g) const {
    return (f.array() * g.conjugate().array() * weights.array().cast<cdouble>()).sum();
  }

  double integrate(const Eigen::VectorXd& f) const { return weights.dot(f); }

  bool operator==(const Grid& other) const { return M == other.M; }
};

inline Grid make_grid(int M) {
  if (M < 2) throw InvalidArgument("grid resolution M must be >= 2, got " + std::to_string(M));
  Grid g;
  g.M = M;
  g.points.resize(M);
  g.weights.resize(M);
  const double h = 1.0 / (M - 1);
  for (int m = 0; m < M; ++m) {
    g.points[m] = static_cast<double>(m) / (M - 1);
    g.weights[m] = h;
  }
  // pin the right endpoint exactly
  g.points[M - 1] = 1.0;
  g.weights[0] = g.weights[M - 1] = 0.5 * h;
  return g;
}

/// Pointwise samples K(x_i, x_j) of a real kernel.
struct RealKernelMatrix {
  Grid grid;
  Eigen::MatrixXd values;
};

/// Samples of a complex kernel on the grid (houses F_omega, A(e^{-i omega}), ...).
struct ComplexOperatorMatrix {
  Grid grid;
  Eigen::MatrixXcd values;
};

inline RealKernelMatrix discretize_kernel(const RealKernel& kernel, const Grid& grid) {
  RealKernelMatrix out{grid, Eigen::MatrixXd(grid.M, grid.M)};
  for (int j = 0; j < grid.M; ++j) {
    for (int i = 0; i < grid.M; ++i) {
      const double v = kernel(grid.points[i], grid.points[j]);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "kernel is not finite at (x, y) = (" << grid.points[i] << ", " << grid.points[j] << ")";
        throw NumericError(msg.str());
      }
      out.values(i, j) = v;
    }
  }
  return out;
}

inline Eigen::VectorXd sample_function(const RealFunction& f, const Grid& grid) {
  Eigen::VectorXd out(grid.M);
  for (int i = 0; i < grid.M; ++i) {
    out[i] = f(grid.points[i]);
    if (!std::isfinite(out[i])) {
      std::ostringstream msg;
      msg << "function is not finite at x = " << grid.points[i];
      throw NumericError(msg.str());
    }
  }
  return out;
}

inline ComplexOperatorMatrix to_complex(const RealKernelMatrix& k) {
  return {k.grid, k.values.cast<cdouble>()};
}

/// W^{1/2} K W^{1/2}: the symmetric representation of the integral operator.
template <class Derived>
auto weighted(const Eigen::MatrixBase<Derived>& kernel, const Grid& grid) {
  const Eigen::VectorXd s = grid.sqrt_weights();
  using Scalar = typename Derived::Scalar;
  return (s.cast<Scalar>().asDiagonal() * kernel * s.cast<Scalar>().asDiagonal()).eval();
}

}  // namespace specsim
