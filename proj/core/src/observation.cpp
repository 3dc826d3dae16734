#include "roomimp/observation.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "roomimp/errors.hpp"


namespace {

// Boundary systems up to this size are solved by dense LU; larger ones by GMRES.
constexpr Eigen::Index kDenseLimit = 96;

}  // namespace
namespace roomimp {

Discretization::Discretization(SimplicialMesh m) : mesh(std::move(m)), ops(assemble_operators(mesh)) {}

std::shared_ptr<const Discretization> make_discretization(SimplicialMesh mesh) {
  return std::make_shared<const Discretization>(std::move(mesh));
}

DirectObservation::DirectObservation(std::shared_ptr<const Discretization> disc, PhysicsParams phys,
                                     Point source, std::vector<Point> microphones)
    : disc_(std::move(disc)), phys_(phys) {
  phys_.validate();
  load_ = point_source_load(disc_->mesh, source);
  rows_.reserve(microphones.size());
  for (const auto& x : microphones) rows_.push_back(interpolation_row(disc_->mesh, x));
}

PressureField DirectObservation::field(const ImpedanceSample& z) const {
  return solve_forward(disc_->ops, z, phys_, load_);
}

std::vector<Complex> DirectObservation::observe(const ImpedanceSample& z) const {
  const PressureField p = field(z);
  std::vector<Complex> out;
  out.reserve(rows_.size());
  for (const auto& row : rows_) out.push_back(row.apply(p.values));
  return out;
}

BoundaryReducedObservation::BoundaryReducedObservation(std::shared_ptr<const Discretization> disc,
                                                       PhysicsParams phys, Point source,
                                                       std::vector<Point> microphones,
                                                       ImpedanceSample base)
    : phys_(phys) {
  phys_.validate();
  const auto& ops = disc->ops;
  if (base.size() != ops.patch_count()) throw InvalidArgument("base sample does not match the patches");

  // Local numbering of every node touched by a Robin patch, in global order.
  std::map<int, int> local;
  for (const auto& b : ops.boundary_mass) {
    for (int row = 0; row < b.outerSize(); ++row) {
      if (b.outerIndexPtr()[row + 1] > b.outerIndexPtr()[row]) local.emplace(row, 0);
    }
  }
  int next = 0;
  std::vector<int> global;
  for (auto& [g, l] : local) {
    l = next++;
    global.push_back(g);
  }
  const int nb = next;

  for (std::size_t i = 0; i < ops.patch_count(); ++i) {
    beta_base_.push_back(robin_coefficient(base.z[i], phys_));
    std::vector<Eigen::Triplet<Complex, int>> t;
    const auto& b = ops.boundary_mass[i];
    for (int row = 0; row < b.outerSize(); ++row) {
      for (SparseComplexMatrix::InnerIterator it(b, row); it; ++it) {
        t.emplace_back(local.at(row), local.at(static_cast<int>(it.col())), it.value());
      }
    }
    SparseComplexMatrix restricted(nb, nb);
    restricted.setFromTriplets(t.begin(), t.end());
    patch_mass_.push_back(std::move(restricted));
  }

  const SparseDirectSolver base_solver(system_matrix(ops, base, phys_));
  const auto n = static_cast<Eigen::Index>(disc->mesh.vertex_count());
  std::vector<InterpolationRow> rows;
  for (const auto& x : microphones) rows.push_back(interpolation_row(disc->mesh, x));
  const auto m = static_cast<Eigen::Index>(rows.size());

  const ComplexVector x0 = base_solver.solve(point_source_load(disc->mesh, source));
  g0_.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) g0_[j] = rows[j].apply(x0);
  u_.resize(nb);
  for (int p = 0; p < nb; ++p) u_[p] = x0[global[p]];

  ComplexMatrix s(nb, nb);
  v_.resize(nb, m);
  ComplexVector unit = ComplexVector::Zero(n);
  for (int p = 0; p < nb; ++p) {
    unit[global[p]] = 1.0;
    const ComplexVector y = base_solver.solve(unit);
    unit[global[p]] = 0.0;
    for (int q = 0; q < nb; ++q) s(q, p) = y[global[q]];
    for (Eigen::Index j = 0; j < m; ++j) v_(p, j) = rows[j].apply(y);
  }
  for (const auto& b : patch_mass_) s_times_mass_.push_back(s * b);
}

std::vector<Complex> BoundaryReducedObservation::observe(const ImpedanceSample& z) const {
  if (z.size() != beta_base_.size()) throw InvalidArgument("impedance sample does not match the patches");
  const Eigen::Index nb = u_.size();
  ComplexMatrix e = ComplexMatrix::Identity(nb, nb);
  std::vector<Complex> beta(z.size());
  bool changed = false;
  for (std::size_t i = 0; i < z.size(); ++i) {
    beta[i] = robin_coefficient(z.z[i], phys_) - beta_base_[i];
    if (beta[i] != Complex(0.0, 0.0)) {
      e.noalias() += beta[i] * s_times_mass_[i];
      changed = true;
    }
  }
  std::vector<Complex> out(g0_.data(), g0_.data() + g0_.size());
  if (!changed) return out;

  const ComplexVector t = nb > kDenseLimit ? solve_dense_near_identity(e, u_) : solve_dense(e, u_);
  ComplexVector ct = ComplexVector::Zero(nb);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (beta[i] != Complex(0.0, 0.0)) ct += beta[i] * (patch_mass_[i] * t);
  }
  const ComplexVector correction = v_.transpose() * ct;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= correction[static_cast<Eigen::Index>(j)];
  return out;
}

std::unique_ptr<ObservationMap> make_observation_map(ForwardMethod method,
                                                     std::shared_ptr<const Discretization> disc,
                                                     const PhysicsParams& phys, const Point& source,
                                                     std::vector<Point> microphones,
                                                     const ImpedanceSample& base) {
  if (method == ForwardMethod::kDirect) {
    return std::make_unique<DirectObservation>(std::move(disc), phys, source, std::move(microphones));
  }
  return std::make_unique<BoundaryReducedObservation>(std::move(disc), phys, source,
                                                      std::move(microphones), base);
}

}  // namespace roomimp
