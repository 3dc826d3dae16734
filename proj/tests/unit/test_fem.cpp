#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <complex>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "roomimp/errors.hpp"
#include "roomimp/fem.hpp"

using namespace roomimp;
using namespace std::complex_literals;

namespace {

PatchLayout room_layout() { return PatchLayout{{{0, Side::kLow}, {1, Side::kLow}}}; }

SimplicialMesh room_2d(double h) { return build_box_mesh(std::vector<double>{3.0, 3.5}, h, room_layout()); }
SimplicialMesh room_3d(double h) { return build_box_mesh(std::vector<double>{3.0, 3.5, 2.5}, h, room_layout()); }

Complex entry_sum(const SparseComplexMatrix& a) {
  Complex s = 0.0;
  for (int r = 0; r < a.outerSize(); ++r) {
    for (SparseComplexMatrix::InnerIterator it(a, r); it; ++it) s += it.value();
  }
  return s;
}

double max_abs(const SparseComplexMatrix& a) {
  double m = 0.0;
  for (int r = 0; r < a.outerSize(); ++r) {
    for (SparseComplexMatrix::InnerIterator it(a, r); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

const ImpedanceSample kZref{{Complex(400.0, -700.0), Complex(500.0, 800.0)}};

}  // namespace

TEST(ElementMatrices, ReferenceTriangle) {
  const std::vector<Point> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  const auto em = element_matrices(2, v);
  const double k[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      EXPECT_NEAR(em.stiffness(a, b), k[a][b], 1e-14);
      EXPECT_NEAR(em.mass(a, b), (a == b ? 2.0 : 1.0) / 24.0, 1e-14);
    }
  }
}

TEST(ElementMatrices, ReferenceTetrahedron) {
  const std::vector<Point> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const auto em = element_matrices(3, v);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      double k = 0.0;
      if (a == 0 && b == 0) k = 0.5;
      else if (a == 0 || b == 0) k = -1.0 / 6.0;
      else if (a == b) k = 1.0 / 6.0;
      EXPECT_NEAR(em.stiffness(a, b), k, 1e-14);
      EXPECT_NEAR(em.mass(a, b), (a == b ? 2.0 : 1.0) / 120.0, 1e-14);
    }
  }
}

TEST(ElementMatrices, ScaledTriangleMass) {
  // mass scales with the area, stiffness is scale invariant in 2D
  const std::vector<Point> v{{0, 0, 0}, {2, 0, 0}, {0, 2, 0}};
  const auto em = element_matrices(2, v);
  EXPECT_NEAR(em.mass(0, 0), 4.0 * 2.0 / 24.0, 1e-14);
  EXPECT_NEAR(em.stiffness(1, 1), 0.5, 1e-14);
}

TEST(Assembly, Sums2d) {
  const auto mesh = room_2d(0.3);
  const auto ops = assemble_operators(mesh);
  EXPECT_NEAR(entry_sum(ops.mass).real(), 10.5, 1e-10);
  ASSERT_EQ(ops.patch_count(), 2u);
  EXPECT_NEAR(entry_sum(ops.boundary_mass[0]).real(), 3.5, 1e-10);
  EXPECT_NEAR(entry_sum(ops.boundary_mass[1]).real(), 3.0, 1e-10);
  const ComplexVector kc = ops.stiffness * ComplexVector::Ones(static_cast<Eigen::Index>(ops.dofs()));
  EXPECT_LE(kc.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(symmetry_defect(ops.stiffness), 1e-14);
  EXPECT_LE(symmetry_defect(ops.mass), 1e-14);
}

TEST(Assembly, Sums3d) {
  const auto mesh = room_3d(0.6);
  const auto ops = assemble_operators(mesh);
  EXPECT_NEAR(entry_sum(ops.mass).real(), 3.0 * 3.5 * 2.5, 1e-10);
  EXPECT_NEAR(entry_sum(ops.boundary_mass[0]).real(), 3.5 * 2.5, 1e-10);
  EXPECT_NEAR(entry_sum(ops.boundary_mass[1]).real(), 3.0 * 2.5, 1e-10);
  const ComplexVector kc = ops.stiffness * ComplexVector::Ones(static_cast<Eigen::Index>(ops.dofs()));
  EXPECT_LE(kc.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SystemMatrix, ComplexSymmetric) {
  const auto mesh = room_2d(0.3);
  const auto ops = assemble_operators(mesh);
  PhysicsParams phys;
  const auto a = system_matrix(ops, kZref, phys);
  EXPECT_TRUE(is_structurally_symmetric(a));
  EXPECT_LE(symmetry_defect(a), 1e-14);
  EXPECT_GT(max_abs(a), 0.0);
}

TEST(SystemMatrix, SoundHardLimit) {
  const auto ops = assemble_operators(room_2d(0.5));
  PhysicsParams phys;
  const double inf = std::numeric_limits<double>::infinity();
  const auto a = system_matrix(ops, ImpedanceSample{{Complex(inf, 0.0), Complex(inf, 0.0)}}, phys);
  const double k2 = phys.wavenumber() * phys.wavenumber();
  const SparseComplexMatrix ref = ops.stiffness - k2 * ops.mass;
  EXPECT_LE(max_abs(a - ref), 1e-14 * max_abs(ref));
}

TEST(SystemMatrix, LinearInInverseImpedance) {
  const auto ops = assemble_operators(room_2d(0.5));
  PhysicsParams phys;
  const ImpedanceSample z1{{Complex(400.0, -700.0), Complex(500.0, 800.0)}};
  const ImpedanceSample z2{{Complex(900.0, 300.0), Complex(500.0, 800.0)}};
  const SparseComplexMatrix diff = system_matrix(ops, z1, phys) - system_matrix(ops, z2, phys);
  const Complex coef = 1i * phys.omega() * phys.rho * (1.0 / z1.z[0] - 1.0 / z2.z[0]);
  const SparseComplexMatrix expect = coef * ops.boundary_mass[0];
  EXPECT_LE(max_abs(diff - expect), 1e-14 * max_abs(system_matrix(ops, z1, phys)));
}

TEST(SystemMatrix, Guards) {
  const auto ops = assemble_operators(room_2d(0.5));
  PhysicsParams phys;
  phys.f = 0.0;
  EXPECT_THROW(system_matrix(ops, kZref, phys), InvalidArgument);
  PhysicsParams ok;
  EXPECT_THROW(system_matrix(ops, ImpedanceSample{{Complex(0.0, 0.0), Complex(1.0, 0.0)}}, ok), InvalidImpedance);
  EXPECT_THROW(system_matrix(ops, ImpedanceSample{{Complex(-1.0, 0.0), Complex(1.0, 0.0)}}, ok), InvalidImpedance);
  EXPECT_THROW(system_matrix(ops, ImpedanceSample{{Complex(1.0, 0.0)}}, ok), InvalidArgument);
}

TEST(PointSource, VertexCentroidAndPartitionOfUnity) {
  const auto mesh = room_2d(0.5);
  const int v = mesh.vertex_index(2, 3, 0);
  const ComplexVector lv = point_source_load(mesh, mesh.vertices()[v]);
  EXPECT_EQ(lv[v], Complex(1.0, 0.0));
  EXPECT_EQ(lv.cwiseAbs().sum(), 1.0);

  const auto& el = mesh.elements()[40];
  Point c{0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    for (int d = 0; d < 2; ++d) c[d] += mesh.vertices()[el[a]][d] / 3.0;
  }
  const ComplexVector lc = point_source_load(mesh, c);
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(lc[el[a]].real(), 1.0 / 3.0, 1e-14);

  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    const Point s{std::uniform_real_distribution<double>(0.01, 2.99)(rng),
                  std::uniform_real_distribution<double>(0.01, 3.49)(rng), 0.0};
    const ComplexVector l = point_source_load(mesh, s);
    EXPECT_NEAR(l.sum().real(), 1.0, 1e-14);
    EXPECT_GE(l.real().minCoeff(), 0.0);
    EXPECT_EQ(l.imag().cwiseAbs().maxCoeff(), 0.0);
  }
  EXPECT_THROW(point_source_load(mesh, Point{0.0, 1.0, 0.0}), OutOfDomain);
  EXPECT_THROW(point_source_load(mesh, Point{4.0, 1.0, 0.0}), OutOfDomain);
}

class ConstantSolution : public ::testing::TestWithParam<int> {};

TEST_P(ConstantSolution, SoundHardUnitLoad) {
  const int dim = GetParam();
  const auto mesh = dim == 2 ? room_2d(0.3) : room_3d(0.6);
  const auto ops = assemble_operators(mesh);
  PhysicsParams phys;
  phys.f = 47.3;
  const double inf = std::numeric_limits<double>::infinity();
  const ImpedanceSample hard{{Complex(inf, 0.0), Complex(inf, 0.0)}};
  const ComplexVector load = ops.mass * ComplexVector::Ones(static_cast<Eigen::Index>(ops.dofs()));
  const auto p = solve_forward(ops, hard, phys, load);
  const double expect = -1.0 / (phys.wavenumber() * phys.wavenumber());
  EXPECT_LE((p.values.array() - expect).abs().maxCoeff(), 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Dims, ConstantSolution, ::testing::Values(2, 3));

TEST(Reciprocity, SourceAndReceiverSwap) {
  for (int dim : {2, 3}) {
    const auto mesh = dim == 2 ? room_2d(0.2) : room_3d(0.5);
    const auto ops = assemble_operators(mesh);
    PhysicsParams phys;
    const Point s = dim == 2 ? Point{1.0, 1.0, 0.0} : Point{1.0, 1.0, 1.0};
    const Point x = dim == 2 ? Point{2.13, 2.71, 0.0} : Point{2.13, 2.71, 1.37};
    const auto ps = solve_forward(ops, kZref, phys, point_source_load(mesh, s));
    const auto px = solve_forward(ops, kZref, phys, point_source_load(mesh, x));
    const Complex a = interpolation_row(mesh, x).apply(ps.values);
    const Complex b = interpolation_row(mesh, s).apply(px.values);
    EXPECT_LE(std::abs(a - b) / std::abs(a), 1e-8) << "dim " << dim;
  }
}

TEST(Observe, VertexConstantAndCentroid) {
  const auto mesh = room_2d(0.5);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  PressureField f;
  f.values.resize(static_cast<Eigen::Index>(mesh.vertex_count()));
  for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values[i] = Complex(g(rng), g(rng));
  const int v = mesh.vertex_index(3, 4, 0);
  const auto& el = mesh.elements()[25];
  Point c{0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    for (int d = 0; d < 2; ++d) c[d] += mesh.vertices()[el[a]][d] / 3.0;
  }
  const std::vector<Point> mics{mesh.vertices()[v], c};
  const auto y = observe(f, mesh, mics);
  EXPECT_EQ(y[0], f.values[v]);
  const Complex mean = (f.values[el[0]] + f.values[el[1]] + f.values[el[2]]) / 3.0;
  EXPECT_NEAR(std::abs(y[1] - mean), 0.0, 1e-14);

  PressureField cst;
  cst.values = ComplexVector::Constant(f.values.size(), Complex(0.3, -1.7));
  for (const auto& r : observe(cst, mesh, mics)) EXPECT_NEAR(std::abs(r - Complex(0.3, -1.7)), 0.0, 1e-15);
  EXPECT_THROW(observe(cst, mesh, std::vector<Point>{{3.5, 1.0, 0.0}}), OutOfDomain);
}

TEST(FundamentalSolution, ThreeDimensionalFormula) {
  PhysicsParams phys;
  phys.f = phys.c / (2.0 * std::numbers::pi);  // k = 1
  const Complex g = fundamental_solution(phys, 3, Point{0, 0, 0}, Point{0, 1, 0});
  EXPECT_NEAR(g.real(), 0.04299589, 1e-8);
  EXPECT_NEAR(g.imag(), -0.06696213, 1e-8);
  EXPECT_NEAR(std::abs(g - std::exp(-1i) / (4.0 * std::numbers::pi)), 0.0, 1e-15);
}

TEST(FundamentalSolution, TwoDimensionalMatchesSeries) {
  EXPECT_NEAR(oracle::bessel_y0_series(1.0), 0.0882569642156769, 1e-14);
  PhysicsParams phys;
  phys.f = phys.c / (2.0 * std::numbers::pi);
  for (double r : {0.1, 0.5, 1.0, 2.5, 5.0, 8.0}) {
    const Complex g = fundamental_solution(phys, 2, Point{0, 0, 0}, Point{r, 0, 0});
    EXPECT_NEAR(g.real(), oracle::bessel_y0_series(r) / (2.0 * std::numbers::pi), 1e-11) << r;
    EXPECT_EQ(g.imag(), 0.0);
  }
}

TEST(FundamentalSolution, SingularAtSource) {
  PhysicsParams phys;
  EXPECT_THROW(fundamental_solution(phys, 3, Point{1, 1, 1}, Point{1, 1, 1}), InvalidArgument);
  EXPECT_THROW(fundamental_solution(phys, 2, Point{1, 1, 0}, Point{1, 1, 0}), InvalidArgument);
}

TEST(ForwardMap, LipschitzSmoothness) {
  const auto mesh = room_2d(0.3);
  const auto ops = assemble_operators(mesh);
  PhysicsParams phys;
  const auto load = point_source_load(mesh, Point{1.0, 1.0, 0.0});
  const Point x{2.2, 2.5, 0.0};
  const auto row = interpolation_row(mesh, x);
  const Complex g0 = row.apply(solve_forward(ops, kZref, phys, load).values);
  ImpedanceSample z = kZref;
  for (auto& v : z.z) v *= 1.0 + 1e-6;
  const Complex g1 = row.apply(solve_forward(ops, z, phys, load).values);
  const double rel = std::abs(g1 - g0) / std::abs(g0);
  EXPECT_GT(rel, 1e-9);
  EXPECT_LT(rel, 1e-5);
}

TEST(FreeField, ImpedanceMatchedBoxApproximatesKernel) {
  // all six walls at rho c absorb plane waves at normal incidence; close to
  // the source the field approaches the free-space kernel
  PatchLayout all;
  for (int a = 0; a < 3; ++a) {
    all.robin_faces.push_back({a, Side::kLow});
    all.robin_faces.push_back({a, Side::kHigh});
  }
  const auto mesh = build_box_mesh(std::vector<double>{3.0, 3.0, 3.0}, 0.1, all);
  const auto ops = assemble_operators(mesh);
  PhysicsParams phys;
  phys.f = 100.0;
  const ImpedanceSample z{std::vector<Complex>(6, Complex(phys.rho * phys.c, 0.0))};
  const Point s{1.5, 1.5, 1.5};
  const auto p = solve_forward(ops, z, phys, point_source_load(mesh, s));
  for (double r : {0.4, 0.6}) {
    const Point x{1.5 + r, 1.5, 1.5};
    const Complex g = interpolation_row(mesh, x).apply(p.values);
    const Complex ref = fundamental_solution(phys, 3, s, x);
    EXPECT_LT(std::abs(g - ref) / std::abs(ref), 0.25) << r;
  }
}

TEST(Resonance, DiscreteEigenfrequencyIsSingular) {
  const auto mesh = build_box_mesh(std::vector<double>{1.0, 1.0}, 0.5, PatchLayout{});
  const auto ops = assemble_operators(mesh);
  const Eigen::MatrixXd k = Eigen::MatrixXd(ops.stiffness.real());
  const Eigen::MatrixXd m = Eigen::MatrixXd(ops.mass.real());
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m);
  const double lambda = es.eigenvalues()[1];
  ASSERT_GT(lambda, 1.0);
  PhysicsParams phys;
  phys.f = phys.c * std::sqrt(lambda) / (2.0 * std::numbers::pi);
  const ComplexVector load = point_source_load(mesh, Point{0.3, 0.4, 0.0});
  EXPECT_THROW(solve_forward(ops, ImpedanceSample{}, phys, load), SingularSystem);
  phys.f *= 1.05;
  EXPECT_NO_THROW(solve_forward(ops, ImpedanceSample{}, phys, load));
}
