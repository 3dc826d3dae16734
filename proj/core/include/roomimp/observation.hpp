#pragma once

#include <memory>
#include <span>
#include <vector>

#include "roomimp/fem.hpp"

namespace roomimp {

/// A mesh together with its frequency-independent operators.
struct Discretization {
  SimplicialMesh mesh;
  AssembledOperators ops;

  explicit Discretization(SimplicialMesh m);
};

std::shared_ptr<const Discretization> make_discretization(SimplicialMesh mesh);

/// The discrete forward map Z -> (G_{Z,h}(x_1), ..., G_{Z,h}(x_m)) for a fixed
/// source, microphone set and frequency. Implementations are immutable and
/// observe() is safe to call concurrently.
class ObservationMap {
 public:
  virtual ~ObservationMap() = default;
  virtual std::size_t patch_count() const = 0;
  virtual std::size_t microphone_count() const = 0;
  virtual std::vector<Complex> observe(const ImpedanceSample& z) const = 0;
};

/// Assembles and factorizes A(Z) for every sample.
class DirectObservation final : public ObservationMap {
 public:
  DirectObservation(std::shared_ptr<const Discretization> disc, PhysicsParams phys, Point source,
                    std::vector<Point> microphones);

  std::size_t patch_count() const override { return disc_->ops.patch_count(); }
  std::size_t microphone_count() const override { return rows_.size(); }
  std::vector<Complex> observe(const ImpedanceSample& z) const override;

  PressureField field(const ImpedanceSample& z) const;
  const Discretization& discretization() const { return *disc_; }

 private:
  std::shared_ptr<const Discretization> disc_;
  PhysicsParams phys_;
  ComplexVector load_;
  std::vector<InterpolationRow> rows_;
};

/// Low-rank boundary update of the direct map.
///
/// A(Z) differs from A(Z_base) only on the Robin-patch nodes:
///   A(Z) = A_b + P^T C P,  C = sum_i beta_i b_i,  beta_i = a(z_i) - a(z_base_i),
/// with P the restriction to those nb nodes and b_i the restricted patch
/// masses. With S = P A_b^{-1} P^T,
///   G(Z) = G(Z_base) - V^T C (I + S C)^{-1} u,
/// where u = P A_b^{-1} l and V = P A_b^{-1} W^T (A_b is complex symmetric).
/// Setup costs nb + 1 sparse solves; each sample is an nb x nb dense solve.
class BoundaryReducedObservation final : public ObservationMap {
 public:
  BoundaryReducedObservation(std::shared_ptr<const Discretization> disc, PhysicsParams phys,
                             Point source, std::vector<Point> microphones, ImpedanceSample base);

  std::size_t patch_count() const override { return beta_base_.size(); }
  std::size_t microphone_count() const override { return static_cast<std::size_t>(g0_.size()); }
  std::vector<Complex> observe(const ImpedanceSample& z) const override;

  std::size_t boundary_nodes() const { return static_cast<std::size_t>(u_.size()); }

 private:
  PhysicsParams phys_;
  std::vector<Complex> beta_base_;
  std::vector<SparseComplexMatrix> patch_mass_;  // nb x nb
  std::vector<ComplexMatrix> s_times_mass_;      // S b_i
  ComplexVector g0_;
  ComplexVector u_;
  ComplexMatrix v_;  // nb x m
};

enum class ForwardMethod { kDirect, kBoundaryReduced };

std::unique_ptr<ObservationMap> make_observation_map(ForwardMethod method,
                                                     std::shared_ptr<const Discretization> disc,
                                                     const PhysicsParams& phys, const Point& source,
                                                     std::vector<Point> microphones,
                                                     const ImpedanceSample& base);

}  // namespace roomimp
