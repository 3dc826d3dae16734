#include "roomimp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include "roomimp/errors.hpp"

namespace roomimp {
namespace {

using ColMajor = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;

void check_residual(double residual, double rhs_norm) {
  if (!std::isfinite(residual) || residual > kSolveResidualTolerance * rhs_norm) {
    throw SingularSystem("linear solve missed its residual bound (relative residual " +
                         std::to_string(rhs_norm > 0 ? residual / rhs_norm : residual) +
                         "); system is numerically singular");
  }
}

}  // namespace

double symmetry_defect(const SparseComplexMatrix& a) {
  double max_entry = 0.0;
  double defect = 0.0;
  for (int row = 0; row < a.outerSize(); ++row) {
    for (SparseComplexMatrix::InnerIterator it(a, row); it; ++it) {
      max_entry = std::max(max_entry, std::abs(it.value()));
      defect = std::max(defect, std::abs(it.value() - a.coeff(it.col(), it.row())));
    }
  }
  return max_entry > 0.0 ? defect / max_entry : 0.0;
}

bool is_structurally_symmetric(const SparseComplexMatrix& a) {
  if (a.rows() != a.cols()) return false;
  for (int row = 0; row < a.outerSize(); ++row) {
    for (SparseComplexMatrix::InnerIterator it(a, row); it; ++it) {
      const int col = static_cast<int>(it.col());
      const int* begin = a.innerIndexPtr() + a.outerIndexPtr()[col];
      const int* end = a.innerIndexPtr() + a.outerIndexPtr()[col + 1];
      if (!std::binary_search(begin, end, row)) return false;
    }
  }
  return true;
}

struct SparseDirectSolver::Impl {
  ColMajor matrix;
  Eigen::SparseLU<ColMajor, Eigen::COLAMDOrdering<int>> lu;
  // Eigen's SparseLU::solve is logically const but not documented as
  // reentrant; serialize triangular solves on one factorization.
  mutable std::mutex mutex;
};

SparseDirectSolver::SparseDirectSolver(const SparseComplexMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw InvalidArgument("matrix must be square");
  impl_->matrix = a;
  impl_->matrix.makeCompressed();
  impl_->lu.analyzePattern(impl_->matrix);
  impl_->lu.factorize(impl_->matrix);
  if (impl_->lu.info() != Eigen::Success) {
    throw SingularSystem("sparse LU factorization failed: " + impl_->lu.lastErrorMessage());
  }
}

SparseDirectSolver::~SparseDirectSolver() = default;
SparseDirectSolver::SparseDirectSolver(SparseDirectSolver&&) noexcept = default;
SparseDirectSolver& SparseDirectSolver::operator=(SparseDirectSolver&&) noexcept = default;

long SparseDirectSolver::size() const { return impl_->matrix.rows(); }

ComplexVector SparseDirectSolver::solve(const ComplexVector& b) const {
  if (b.size() != impl_->matrix.rows()) throw InvalidArgument("right-hand side has wrong length");
  ComplexVector x;
  {
    std::lock_guard lock(impl_->mutex);
    x = impl_->lu.solve(b);
  }
  const double rhs_norm = b.norm();
  if (rhs_norm == 0.0) {
    if (!x.allFinite()) throw SingularSystem("solution is not finite");
    return x;
  }
  check_residual((impl_->matrix * x - b).norm(), rhs_norm);
  return x;
}

ComplexVector solve(const SparseComplexMatrix& a, const ComplexVector& b) {
  return SparseDirectSolver(a).solve(b);
}

ComplexVector solve_dense(const ComplexMatrix& a, const ComplexVector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw InvalidArgument("dimension mismatch");
  Eigen::PartialPivLU<ComplexMatrix> lu(a);
  ComplexVector x = lu.solve(b);
  const double rhs_norm = b.norm();
  if (rhs_norm == 0.0) {
    if (!x.allFinite()) throw SingularSystem("solution is not finite");
    return x;
  }
  check_residual((a * x - b).norm(), rhs_norm);
  return x;
}

ComplexVector solve_dense_near_identity(const ComplexMatrix& a, const ComplexVector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw InvalidArgument("dimension mismatch");
  const double rhs_norm = b.norm();
  if (rhs_norm == 0.0) return ComplexVector::Zero(b.size());
  Eigen::GMRES<ComplexMatrix, Eigen::IdentityPreconditioner> gmres;
  gmres.set_restart(60);
  gmres.setMaxIterations(600);
  gmres.setTolerance(1e-3 * kSolveResidualTolerance);
  gmres.compute(a);
  ComplexVector x = gmres.solve(b);
  if (gmres.info() == Eigen::Success && x.allFinite() &&
      (a * x - b).norm() <= kSolveResidualTolerance * rhs_norm) {
    return x;
  }
  return solve_dense(a, b);
}

}  // namespace roomimp
