#include "roomimp/fem.hpp"

#include <cmath>
#include <string>

#include "roomimp/errors.hpp"

namespace roomimp {
namespace {

using Triplet = Eigen::Triplet<Complex, int>;

SparseComplexMatrix from_triplets(std::size_t n, const std::vector<Triplet>& triplets) {
  SparseComplexMatrix m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

void PhysicsParams::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("speed of sound must be positive");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("density must be positive");
  if (!(f > 0.0) || !std::isfinite(f)) throw InvalidArgument("frequency must be positive");
}

Complex robin_coefficient(Complex z, const PhysicsParams& phys) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    if (std::isnan(z.real()) || std::isnan(z.imag())) throw InvalidImpedance("impedance is NaN");
    return {0.0, 0.0};
  }
  if (z == Complex(0.0, 0.0)) throw InvalidImpedance("impedance must be nonzero");
  if (!(z.real() > 0.0)) {
    throw InvalidImpedance("impedance real part must be positive, got " + std::to_string(z.real()));
  }
  return Complex(0.0, phys.omega() * phys.rho) / z;
}

ElementMatrices element_matrices(int dim, std::span<const Point> vertices) {
  ElementMatrices out;
  Eigen::Matrix3d jac = Eigen::Matrix3d::Identity();
  for (int a = 0; a < dim; ++a) {
    for (int v = 0; v < dim; ++v) jac(a, v) = vertices[v + 1][a] - vertices[0][a];
  }
  const Eigen::MatrixXd j = jac.topLeftCorner(dim, dim);
  const double det = j.determinant();
  const double volume = std::abs(det) / (dim == 2 ? 2.0 : 6.0);
  // Rows of J^{-1} are the gradients of barycentric coordinates 1..dim.
  const Eigen::MatrixXd inv = j.inverse();
  Eigen::MatrixXd grads(dim + 1, dim);
  grads.bottomRows(dim) = inv;
  grads.row(0) = -inv.colwise().sum();
  const Eigen::MatrixXd k = volume * grads * grads.transpose();
  out.stiffness.topLeftCorner(dim + 1, dim + 1) = k;
  const double scale = volume / ((dim + 1) * (dim + 2));
  for (int a = 0; a <= dim; ++a) {
    for (int b = 0; b <= dim; ++b) out.mass(a, b) = scale * (a == b ? 2.0 : 1.0);
  }
  return out;
}

AssembledOperators assemble_operators(const SimplicialMesh& mesh) {
  const int dim = mesh.dim();
  const std::size_t n = mesh.vertex_count();
  const auto& verts = mesh.vertices();
  std::vector<Triplet> k_triplets, m_triplets;
  k_triplets.reserve(mesh.element_count() * (dim + 1) * (dim + 1));
  m_triplets.reserve(k_triplets.capacity());

  std::array<Point, 4> local{};
  for (const auto& el : mesh.elements()) {
    for (int v = 0; v <= dim; ++v) local[v] = verts[el[v]];
    const ElementMatrices em = element_matrices(dim, std::span<const Point>(local.data(), dim + 1));
    for (int a = 0; a <= dim; ++a) {
      for (int b = 0; b <= dim; ++b) {
        k_triplets.emplace_back(el[a], el[b], em.stiffness(a, b));
        m_triplets.emplace_back(el[a], el[b], em.mass(a, b));
      }
    }
  }

  const int patches = mesh.layout().robin_patch_count();
  std::vector<std::vector<Triplet>> b_triplets(patches);
  // Facet mass of a (dim-1)-simplex: |F| (1 + delta_ab) / (dim (dim + 1)).
  for (const auto& facet : mesh.boundary_facets()) {
    if (facet.tag == kNeumannTag) continue;
    const double scale = mesh.facet_measure(facet) / (dim * (dim + 1));
    auto& out = b_triplets[facet.tag - 1];
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) {
        out.emplace_back(facet.vertices[a], facet.vertices[b], scale * (a == b ? 2.0 : 1.0));
      }
    }
  }

  AssembledOperators ops;
  ops.stiffness = from_triplets(n, k_triplets);
  ops.mass = from_triplets(n, m_triplets);
  for (const auto& t : b_triplets) ops.boundary_mass.push_back(from_triplets(n, t));
  return ops;
}

SparseComplexMatrix system_matrix(const AssembledOperators& ops, const ImpedanceSample& z,
                                  const PhysicsParams& phys) {
  phys.validate();
  if (z.size() != ops.patch_count()) {
    throw InvalidArgument("impedance sample has " + std::to_string(z.size()) + " entries, mesh has " +
                          std::to_string(ops.patch_count()) + " Robin patches");
  }
  const double k = phys.wavenumber();
  SparseComplexMatrix a = ops.stiffness - (k * k) * ops.mass;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const Complex coeff = robin_coefficient(z.z[i], phys);
    if (coeff != Complex(0.0, 0.0)) a += coeff * ops.boundary_mass[i];
  }
  a.makeCompressed();
  return a;
}

ComplexVector point_source_load(const SimplicialMesh& mesh, const Point& s) {
  if (!mesh.strictly_inside(s)) throw OutOfDomain("point source must lie strictly inside the room");
  const InterpolationRow row = interpolation_row(mesh, s);
  ComplexVector load = ComplexVector::Zero(static_cast<Eigen::Index>(mesh.vertex_count()));
  for (int v = 0; v < row.count; ++v) load[row.vertices[v]] += row.weights[v];
  return load;
}

PressureField solve_forward(const AssembledOperators& ops, const ImpedanceSample& z,
                            const PhysicsParams& phys, const ComplexVector& load) {
  return {solve(system_matrix(ops, z, phys), load)};
}

Complex InterpolationRow::apply(const ComplexVector& field) const {
  Complex value(0.0, 0.0);
  for (int v = 0; v < count; ++v) value += weights[v] * field[vertices[v]];
  return value;
}

InterpolationRow interpolation_row(const SimplicialMesh& mesh, const Point& x) {
  const PointLocation loc = locate_point(mesh, x);
  InterpolationRow row;
  row.count = mesh.dim() + 1;
  for (int v = 0; v < row.count; ++v) {
    row.vertices[v] = mesh.elements()[loc.element][v];
    row.weights[v] = loc.barycentric[v];
  }
  return row;
}

std::vector<Complex> observe(const PressureField& field, const SimplicialMesh& mesh,
                             std::span<const Point> microphones) {
  if (field.values.size() != static_cast<Eigen::Index>(mesh.vertex_count())) {
    throw InvalidArgument("field does not match the mesh");
  }
  std::vector<Complex> out;
  out.reserve(microphones.size());
  for (const auto& x : microphones) out.push_back(interpolation_row(mesh, x).apply(field.values));
  return out;
}

Complex fundamental_solution(const PhysicsParams& phys, int dim, const Point& s, const Point& x) {
  phys.validate();
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += (s[a] - x[a]) * (s[a] - x[a]);
  const double r = std::sqrt(r2);
  if (r == 0.0) throw InvalidArgument("fundamental solution is singular at the source");
  const double kr = phys.wavenumber() * r;
  if (dim == 2) return {std::cyl_neumann(0.0, kr) / (2.0 * std::numbers::pi), 0.0};
  if (dim == 3) return std::exp(Complex(0.0, -kr)) / (4.0 * std::numbers::pi * r);
  throw InvalidArgument("dimension must be 2 or 3");
}

}  // namespace roomimp
