#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "roomimp/linalg.hpp"
#include "roomimp/mesh.hpp"

namespace roomimp {

struct PhysicsParams {
  double c = 343.0;   // speed of sound, m/s
  double rho = 1.2;   // air density, kg/m^3
  double f = 50.0;    // frequency, Hz

  double omega() const { return 2.0 * std::numbers::pi * f; }
  double wavenumber() const { return omega() / c; }
  /// Throws InvalidArgument unless c, rho and f are positive and finite.
  void validate() const;
};

/// One impedance value per Robin patch (Pa s / m^3). An infinite entry is the
/// sound-hard limit |z| -> infinity.
struct ImpedanceSample {
  std::vector<Complex> z;

  std::size_t size() const { return z.size(); }
  bool operator==(const ImpedanceSample&) const = default;
};

/// Robin coefficient i*omega*rho / z; zero for an infinite impedance.
Complex robin_coefficient(Complex z, const PhysicsParams& phys);

/// Real P1 operators of a mesh in complex CSR form. K and M share the FEM
/// graph; each B_i stores only the couplings of its patch.
struct AssembledOperators {
  SparseComplexMatrix stiffness;                   // int grad(phi_a) . grad(phi_b)
  SparseComplexMatrix mass;                        // int phi_a phi_b
  std::vector<SparseComplexMatrix> boundary_mass;  // int_{patch i} phi_a phi_b

  std::size_t dofs() const { return static_cast<std::size_t>(stiffness.rows()); }
  std::size_t patch_count() const { return boundary_mass.size(); }
};

/// Closed-form P1 element matrices of one simplex given its dim+1 vertices.
struct ElementMatrices {
  Eigen::Matrix4d stiffness = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d mass = Eigen::Matrix4d::Zero();
};
ElementMatrices element_matrices(int dim, std::span<const Point> vertices);

AssembledOperators assemble_operators(const SimplicialMesh& mesh);

/// A(Z) = K + sum_i (i omega rho / z_i) B_i - k^2 M.
SparseComplexMatrix system_matrix(const AssembledOperators& ops, const ImpedanceSample& z,
                                  const PhysicsParams& phys);

/// Nodal coefficients of the discrete solution.
struct PressureField {
  ComplexVector values;
};

/// Load of a unit point source: ell(q_h) = conj(q_h(s)) gives the barycentric
/// weights of s at the vertices of its element.
ComplexVector point_source_load(const SimplicialMesh& mesh, const Point& s);

PressureField solve_forward(const AssembledOperators& ops, const ImpedanceSample& z,
                            const PhysicsParams& phys, const ComplexVector& load);

/// P1 interpolation weights of a point: (vertex, weight) pairs.
struct InterpolationRow {
  std::array<int, 4> vertices{-1, -1, -1, -1};
  std::array<double, 4> weights{};
  int count = 0;

  Complex apply(const ComplexVector& field) const;
};
InterpolationRow interpolation_row(const SimplicialMesh& mesh, const Point& x);

/// Field values at the microphones.
std::vector<Complex> observe(const PressureField& field, const SimplicialMesh& mesh,
                             std::span<const Point> microphones);

/// Free-space kernel: (1/2pi) Y0(k r) in 2D and exp(-i k r) / (4 pi r) in 3D.
Complex fundamental_solution(const PhysicsParams& phys, int dim, const Point& s, const Point& x);

}  // namespace roomimp
