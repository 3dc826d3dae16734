#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roomimp/fem.hpp"
#include "roomimp/rng.hpp"

namespace roomimp {

/// Log-space parameters of a lognormal variable: log X ~ N(mu, gamma^2).
struct LognormalParams {
  double mu = 0.0;
  double gamma = 0.0;
};

/// Moment matching: mu = log(m^2 / sqrt(v + m^2)), gamma^2 = log(1 + v / m^2).
LognormalParams lognormal_from_moments(double mean, double variance);

/// Prior of one Robin patch. The real part is lognormal, the imaginary part
/// normal; both are given by the mean and standard deviation of the variable
/// itself. A known patch holds a fixed impedance and carries no randomness.
struct PatchPrior {
  bool known = false;
  Complex value{0.0, 0.0};  // used when known
  double mean_r = 0.0;
  double std_r = 0.0;
  double mean_i = 0.0;
  double std_i = 0.0;

  static PatchPrior random(double mean_r, double std_r, double mean_i, double std_i);
  static PatchPrior fixed(Complex z);

  LognormalParams real_part_log_params() const;
  Complex mean() const;
};

struct PriorSpec {
  std::vector<PatchPrior> patches;

  std::size_t patch_count() const { return patches.size(); }
  /// Throws InvalidSpec on mean_r <= 0, std_r <= 0 or std_i <= 0.
  void validate() const;
  /// Mean impedance of every patch.
  ImpedanceSample mean_sample() const;
};

/// Draws real part then imaginary part, patch by patch.
ImpedanceSample sample_prior(const PriorSpec& spec, Rng& rng);

/// Log of the joint prior density over the random patches (known patches do
/// not contribute). Returns -infinity when some Re(z_i) <= 0.
double log_prior_density(const PriorSpec& spec, const ImpedanceSample& z);

/// Per-component noise standard deviations, ordered (Re y_1, Im y_1, Re y_2, ...).
struct NoiseSpec {
  std::vector<double> sigma;

  static NoiseSpec homogeneous(double sigma0, std::size_t microphones);
  std::size_t microphone_count() const { return sigma.size() / 2; }
  /// Throws InvalidSpec unless sigma has even length and positive entries.
  void validate() const;
};

std::vector<Complex> sample_noise(const NoiseSpec& noise, Rng& rng);

struct Provenance {
  std::string kind = "synthetic";  // or "external"
  std::uint64_t seed = 0;
  std::optional<ImpedanceSample> z_ref;
  std::vector<int> data_mesh_cells;
  std::string note;
};

struct MeasurementSet {
  int dim = 2;
  double frequency = 0.0;
  Point source{};
  std::vector<Point> microphones;
  std::vector<Complex> y;
  NoiseSpec noise;
  Provenance provenance;

  std::size_t size() const { return y.size(); }
  void validate() const;
};

/// Psi = sum_j (Re r_j)^2 / (2 sigma_{2j-1}^2) + (Im r_j)^2 / (2 sigma_{2j}^2), r = y - g.
double potential(const MeasurementSet& data, std::span<const Complex> g);

struct WeightedSampleSet {
  std::vector<ImpedanceSample> samples;
  std::vector<double> log_likelihood;  // log theta_h(Z^i, y) = -Psi
  std::uint64_t seed = 0;

  std::size_t size() const { return samples.size(); }
  /// First n samples with their weights.
  WeightedSampleSet prefix(std::size_t n) const;
};

using SampleFunctional = std::function<double(const ImpedanceSample&)>;

/// Functional Re z_patch or Im z_patch.
SampleFunctional real_part(std::size_t patch);
SampleFunctional imag_part(std::size_t patch);

/// sum phi(Z^i) theta_i / sum theta_i, evaluated with max-subtracted weights.
/// Throws DegenerateWeights when every theta_i underflows to zero.
double ratio_estimate(const WeightedSampleSet& ws, const SampleFunctional& phi);

struct PosteriorMoments {
  double first = 0.0;   // posterior mean
  double second = 0.0;  // posterior central second moment
};

/// Mean by the ratio estimator, then the weighted central second moment using
/// that mean.
PosteriorMoments posterior_moments(const WeightedSampleSet& ws, const SampleFunctional& phi);

struct FittedPosterior {
  double mu_r = 0.0;
  double gamma_r = 0.0;
  double mu_i = 0.0;
  double gamma_i = 0.0;
};

/// Lognormal x normal density with the given posterior moments.
FittedPosterior fit_posterior(double m1_r, double m2_r, double m1_i, double m2_i);

/// log of (1 / (2 pi g_r g_i)) (1 / z_r) exp(-(log z_r - mu_r)^2 / 2 g_r^2 - (z_i - mu_i)^2 / 2 g_i^2).
double log_fitted_density(const FittedPosterior& fit, double z_r, double z_i);

struct LikelihoodMaximizer {
  std::size_t index = 0;
  ImpedanceSample sample;
  double log_likelihood = 0.0;
};

/// Sample with the largest log-likelihood; ties go to the lowest index.
LikelihoodMaximizer likelihood_maximizer(const WeightedSampleSet& ws);

/// log of Lambda_hat = (1/N) sum theta_i, computed without underflow.
double log_normalization(const WeightedSampleSet& ws);

/// sum theta_i / max theta_i.
double effective_sample_size(const WeightedSampleSet& ws);

struct PatchPosterior {
  bool known = false;
  PosteriorMoments real;
  PosteriorMoments imag;
  FittedPosterior fit;
};

struct PosteriorReport {
  std::vector<PatchPosterior> patches;
  double log_lambda = 0.0;
  double lambda = 0.0;
  LikelihoodMaximizer maximizer;
  double ess = 0.0;
  // Run metadata.
  double h = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  double frequency = 0.0;
};

/// Moments, fitted densities, maximizer and normalization of a weighted set.
PosteriorReport summarize_posterior(const WeightedSampleSet& ws, const PriorSpec& prior);

}  // namespace roomimp
