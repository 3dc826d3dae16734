#pragma once

#include <complex>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace roomimp {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Compressed sparse row storage. FEM systems built on it are complex
/// symmetric (A = A^T, no conjugation).
using SparseComplexMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor, int>;

/// Relative residual bound every solve must meet.
inline constexpr double kSolveResidualTolerance = 1e-10;

/// max |A - A^T| over the stored pattern, divided by max |A|.
double symmetry_defect(const SparseComplexMatrix& a);

/// True when (i, j) is stored exactly when (j, i) is.
bool is_structurally_symmetric(const SparseComplexMatrix& a);

/// Sparse LU factorization (column approximate minimum degree ordering with
/// partial pivoting). Immutable once constructed; solve() may be called from
/// several threads at once.
class SparseDirectSolver {
 public:
  explicit SparseDirectSolver(const SparseComplexMatrix& a);
  ~SparseDirectSolver();
  SparseDirectSolver(SparseDirectSolver&&) noexcept;
  SparseDirectSolver& operator=(SparseDirectSolver&&) noexcept;

  long size() const;

  /// Solves A x = b. Throws SingularSystem when the residual bound is missed.
  ComplexVector solve(const ComplexVector& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot factorize and solve.
ComplexVector solve(const SparseComplexMatrix& a, const ComplexVector& b);

/// Dense LU solve with the same residual contract.
ComplexVector solve_dense(const ComplexMatrix& a, const ComplexVector& b);

/// Restarted GMRES for a dense system that is a compact perturbation of the
/// identity. Falls back to solve_dense when GMRES does not reach the residual
/// bound; the result obeys the same contract.
ComplexVector solve_dense_near_identity(const ComplexMatrix& a, const ComplexVector& b);

}  // namespace roomimp
