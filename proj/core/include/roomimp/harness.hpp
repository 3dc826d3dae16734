#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "roomimp/bayes.hpp"
#include "roomimp/observation.hpp"
#include "roomimp/scenario.hpp"

namespace roomimp {

/// Grid points i * spacing (i >= 1) strictly inside the room whose distance to
/// the boundary and to the source both exceed kappa, in lexicographic order.
std::vector<Point> admissible_microphone_points(const Scenario& sc);

/// m distinct admissible points drawn uniformly without replacement.
/// Throws PlacementError when fewer than m points are admissible.
std::vector<Point> place_microphones(const Scenario& sc, Rng& rng);

/// Forward solve at z_ref on `mesh`, observed at `mics`, plus noise from `noise_rng`.
MeasurementSet synthesize_measurements(const Scenario& sc, double frequency,
                                       const SimplicialMesh& mesh, std::vector<Point> mics,
                                       Rng& noise_rng, std::uint64_t seed);

/// Synthetic data for the scenario's primary frequency. Microphones and noise
/// use streams derived from `seed`; the data mesh follows the scenario policy.
MeasurementSet generate_data(const Scenario& sc, std::uint64_t seed);

/// Draws n prior samples (sample i from stream (seed, i)) and evaluates
/// log theta = -Psi for each through `map`.
WeightedSampleSet draw_weighted_samples(const PriorSpec& prior, const ObservationMap& map,
                                        const MeasurementSet& data, std::size_t n,
                                        std::uint64_t seed, unsigned threads);

/// Re-evaluates the likelihood of an existing sample set through another map.
WeightedSampleSet reweight(const WeightedSampleSet& ws, const ObservationMap& map,
                           const MeasurementSet& data, unsigned threads);

/// The forward map of the scenario on `mesh` at the data's frequency and microphones.
std::unique_ptr<ObservationMap> observation_map_for(const Scenario& sc,
                                                    std::shared_ptr<const Discretization> disc,
                                                    const MeasurementSet& data);

struct IdentifyOptions {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::optional<std::size_t> samples;  // overrides the scenario's N
};

struct Identification {
  PosteriorReport report;
  WeightedSampleSet weighted;
};

/// Prior sampling, forward solves on the identification mesh and the posterior summary.
Identification identify(const Scenario& sc, const MeasurementSet& data, const IdentifyOptions& opt);

// ---------------------------------------------------------------------------
// Studies

struct StudyRecord {
  std::string study;
  double f_hz = 0.0;
  double h = 0.0;      // cell edge length of the mesh
  double h_max = 0.0;  // largest element diameter
  std::size_t n = 0;
  int run = 0;  // -1 marks the average over runs
  std::string param;
  std::optional<double> value;
  std::optional<double> error;
  std::optional<double> max_loglik;
  std::uint64_t seed = 0;
  std::string status = "ok";
};

struct StudyResult {
  std::vector<StudyRecord> records;

  /// Records of one study and parameter, in stored order.
  std::vector<StudyRecord> select(const std::string& study, const std::string& param) const;
};

struct StudyOptions {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::optional<std::size_t> samples;
};

/// Fitted posterior parameter names for the random patches, e.g. mu_R1, gamma_R1, mu_I1, gamma_I1.
std::vector<std::string> fitted_parameter_names(const PriorSpec& prior);
std::vector<double> fitted_parameter_values(const PosteriorReport& report);

/// Posterior mean and standard deviation names, e.g. mean_R1, std_R1, mean_I1, std_I1.
std::vector<std::string> moment_parameter_names(const PriorSpec& prior);
std::vector<double> moment_parameter_values(const PosteriorReport& report);

/// Fitted parameters on nested meshes (study levels) against the reference level,
/// with data and sample sets shared across levels. Emits per-run and mean rows.
StudyResult study_discretization(const Scenario& sc, const StudyOptions& opt);

/// Max over the microphones of |G_h(Z_ref) - G_ref(Z_ref)| on the study levels.
StudyResult study_pointwise(const Scenario& sc, const std::vector<int>& levels, const StudyOptions& opt);

/// Posterior moments for N = 2^k against a large-N reference on the base mesh.
StudyResult study_sampling(const Scenario& sc, const StudyOptions& opt);

/// Seed of the sampling-study reference set.
std::uint64_t sampling_reference_seed(std::uint64_t seed);
/// Seed of replicate r in the sampling and discretization studies.
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r);

/// Identification per frequency and run. With `external` data the sets are
/// used instead of synthetic data (runs numbered per frequency in file order).
StudyResult study_sweep(const Scenario& sc, const StudyOptions& opt,
                        const std::vector<MeasurementSet>* external = nullptr);

}  // namespace roomimp
