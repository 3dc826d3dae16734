#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roomimp/bayes.hpp"
#include "roomimp/mesh.hpp"
#include "roomimp/observation.hpp"

namespace roomimp {

struct MicrophoneGrid {
  double spacing = 0.1;  // m
  double kappa = 0.25;   // exclusion radius, m
  std::size_t count = 4;
};

struct SweepRange {
  double lo = 20.0;
  double hi = 120.0;
  double step = 0.5;

  /// lo, lo + step, ... up to hi inclusive (computed as lo + i * step).
  std::vector<double> frequencies() const;
};

/// Identification mesh size: either explicit, or (c / f) / divisor capped.
struct MeshRule {
  std::optional<double> explicit_h;
  double divisor = 20.0;
  double cap = std::numeric_limits<double>::infinity();

  double h_target(double frequency, double c) const;
};

enum class DataMeshPolicy {
  kFiner,  // one dyadic level finer than the identification mesh
  kSame,
};

struct StudySettings {
  std::vector<int> levels{0, 1, 2};
  int reference_level = 4;
  std::size_t reference_samples = std::size_t{1} << 16;
  int log2_n_min = 6;
  int log2_n_max = 13;
  std::size_t replicates = 20;
};

struct Scenario {
  std::vector<double> room;
  PatchLayout patches;
  PhysicsParams physics;
  Point source{};
  MicrophoneGrid mics;
  PriorSpec prior;
  double sigma0 = 0.02;
  std::optional<ImpedanceSample> z_ref;
  std::optional<double> frequency;
  std::optional<SweepRange> sweep;
  MeshRule mesh_rule;
  std::size_t samples = 1024;
  std::size_t runs = 1;
  std::uint64_t seed = 1;
  DataMeshPolicy data_mesh = DataMeshPolicy::kFiner;
  ForwardMethod forward = ForwardMethod::kBoundaryReduced;
  StudySettings study;

  int dim() const { return static_cast<int>(room.size()); }
  /// The single frequency, or the first sweep frequency.
  double primary_frequency() const;
  PhysicsParams physics_at(double frequency) const;
  SimplicialMesh identification_mesh(double frequency) const;
  SimplicialMesh data_mesh_for(const SimplicialMesh& identification) const;
  /// Throws ConfigurationError on an inconsistent scenario.
  void validate() const;
};

Complex complex_from_json(const nlohmann::json& j);
nlohmann::json complex_to_json(Complex z);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

/// The room experiments with the parameters used throughout the test suite.
Scenario room_2d_scenario();
Scenario room_3d_scenario();

}  // namespace roomimp
