#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <type_traits>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "specsim/errors.hpp"
#include "specsim/grid.hpp"

namespace specsim {

/// Leading eigenpairs of an integral operator on the grid.
///
/// Row n of `eigenfunctions` holds the samples of the n-th eigenfunction;
/// rows are orthonormal under the grid quadrature inner product.
template <class Scalar>
struct EigenPairs {
  using FunctionMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Eigen::VectorXd eigenvalues;  // nonincreasing, clamped at 0
  FunctionMatrix eigenfunctions;
  int clamped = 0;  // eigenvalues below -tol that were set to zero

  int rank() const { return static_cast<int>(eigenvalues.size()); }
};

namespace detail {

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

template <class Matrix>
EigenPairs<typename Matrix::Scalar> decompose_hermitian(const Matrix& kernel, const Grid& grid, int N) {
  using Scalar = typename Matrix::Scalar;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int M = grid.M;
  if (kernel.rows() != M || kernel.cols() != M)
    throw InvalidArgument("operator matrix does not match grid resolution");
  if (N < 1 || N > M)
    throw InvalidArgument("truncation rank N must lie in [1, M]; got N=" + std::to_string(N) +
                          ", M=" + std::to_string(M));

  const double scale = max_abs(kernel);
  const double asym = max_abs((kernel - kernel.adjoint()).eval());
  if (asym > 1e-8 * std::max(scale, 1e-300) && asym > 0.0)
    throw InvalidArgument("operator is not Hermitian (max asymmetry " + std::to_string(asym) + ")");

  Dense sym = weighted((0.5 * (kernel + kernel.adjoint())).eval(), grid);
  Eigen::SelfAdjointEigenSolver<Dense> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericError("Hermitian eigensolver did not converge");

  const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
  const Dense& vecs = solver.eigenvectors();
  const Eigen::VectorXd inv_sqrt_w = grid.sqrt_weights().cwiseInverse();

  EigenPairs<Scalar> out;
  out.eigenvalues.resize(N);
  out.eigenfunctions.resize(N, M);
  const double top = std::max(ev[M - 1], 0.0);
  const double tol = 1e-10 * top;
  for (int n = 0; n < N; ++n) {
    const int src = M - 1 - n;
    double mu = ev[src];
    if (mu < 0.0) {
      if (mu < -tol) ++out.clamped;
      mu = 0.0;
    }
    out.eigenvalues[n] = mu;
    out.eigenfunctions.row(n) = (inv_sqrt_w.cast<Scalar>().asDiagonal() * vecs.col(src)).transpose();
  }
  return out;
}

}  // namespace detail

/// Top-N eigenpairs of the operator with Hermitian kernel `op`.
///
/// Decomposes W^{1/2} K W^{1/2} = U diag(mu) U^* and rescales U by W^{-1/2}, so that
/// K = sum_n mu_n v_n v_n^* with v_n quadrature-orthonormal.
inline EigenPairs<double> truncated_eigendecomposition(const RealKernelMatrix& op, int N) {
  return detail::decompose_hermitian(op.values, op.grid, N);
}

inline EigenPairs<cdouble> truncated_eigendecomposition(const ComplexOperatorMatrix& op, int N) {
  return detail::decompose_hermitian(op.values, op.grid, N);
}

/// Solves A x = b with partial-pivoting LU; rejects matrices with condition estimate above 1e12.
inline Eigen::VectorXcd solve_linear_system(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw InvalidArgument("solve_linear_system: dimension mismatch");
  if (!A.allFinite() || !b.allFinite()) throw NumericError("solve_linear_system: non-finite input");
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12)) throw NumericError("solve_linear_system: matrix singular or ill-conditioned (rcond " +
                                           std::to_string(rcond) + ")");
  Eigen::VectorXcd x = lu.solve(b);
  const double bnorm = b.norm();
  if (bnorm > 0.0 && (A * x - b).norm() > 1e-8 * bnorm)
    throw NumericError("solve_linear_system: residual check failed");
  return x;
}

inline Eigen::VectorXcd solve_linear_system(const ComplexOperatorMatrix& A, const Eigen::VectorXcd& b) {
  return solve_linear_system(A.values, b);
}

/// Applies (Id - c g (x) g)^{-1} to b, where (g (x) g) f = <f, g> g under the quadrature
/// inner product and `gram` = ||g||^2.
inline Eigen::VectorXcd sherman_morrison_inverse_apply(cdouble c, const Eigen::VectorXd& g, double gram,
                                                       const Eigen::VectorXcd& b, const Grid& grid) {
  if (g.size() != grid.M || b.size() != grid.M)
    throw InvalidArgument("sherman_morrison_inverse_apply: dimension mismatch");
  const cdouble denom = 1.0 - c * gram;
  if (std::abs(denom) < 1e-12)
    throw NumericError("sherman_morrison_inverse_apply: 1 - c ||g||^2 vanishes (resonant frequency)");
  const cdouble coef = c / denom * grid.inner(b, g);
  return b + coef * g.cast<cdouble>();
}

struct OperatorNorms {
  double trace_norm = 0.0;
  double hs_norm = 0.0;
};

/// Trace and Hilbert-Schmidt norms of the integral operator with the given kernel samples.
template <class Derived>
OperatorNorms operator_norms(const Eigen::MatrixBase<Derived>& kernel, const Grid& grid) {
  if (!kernel.allFinite()) throw NumericError("operator_norms: non-finite kernel");
  const auto w = weighted(kernel.eval(), grid);
  OperatorNorms out;
  out.hs_norm = w.norm();
  if (out.hs_norm == 0.0) return out;
  Eigen::BDCSVD<std::decay_t<decltype(w)>> svd(w);
  out.trace_norm = svd.singularValues().sum();
  return out;
}

inline OperatorNorms operator_norms(const ComplexOperatorMatrix& op) { return operator_norms(op.values, op.grid); }
inline OperatorNorms operator_norms(const RealKernelMatrix& op) { return operator_norms(op.values, op.grid); }

template <class Derived>
double trace_norm(const Eigen::MatrixBase<Derived>& kernel, const Grid& grid) {
  return operator_norms(kernel, grid).trace_norm;
}

}  // namespace specsim
