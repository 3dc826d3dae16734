#include "roomimp/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "roomimp/errors.hpp"

namespace roomimp {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

struct Weights {
  std::vector<double> w;  // theta_i / max theta
  double max_log = 0.0;
  double sum = 0.0;
};

Weights normalized_weights(const WeightedSampleSet& ws) {
  if (ws.samples.empty() || ws.log_likelihood.size() != ws.samples.size()) {
    throw InvalidArgument("weighted sample set is empty or inconsistent");
  }
  Weights out;
  out.max_log = -std::numeric_limits<double>::infinity();
  for (double l : ws.log_likelihood) {
    if (std::isnan(l)) throw InvalidArgument("log-likelihood is NaN");
    out.max_log = std::max(out.max_log, l);
  }
  if (std::exp(out.max_log) == 0.0) {
    throw DegenerateWeights("all likelihood weights underflow to zero (max log-likelihood " +
                                std::to_string(out.max_log) + ")",
                            out.max_log);
  }
  out.w.resize(ws.size());
  for (std::size_t i = 0; i < ws.size(); ++i) {
    out.w[i] = std::exp(ws.log_likelihood[i] - out.max_log);
    out.sum += out.w[i];
  }
  return out;
}

}  // namespace

LognormalParams lognormal_from_moments(double mean, double variance) {
  if (!(mean > 0.0)) throw InvalidMoments("lognormal mean must be positive");
  if (!(variance >= 0.0)) throw InvalidMoments("variance must be nonnegative");
  const double ratio = variance / (mean * mean);
  return {std::log(mean) - 0.5 * std::log1p(ratio), std::sqrt(std::log1p(ratio))};
}

PatchPrior PatchPrior::random(double mean_r, double std_r, double mean_i, double std_i) {
  PatchPrior p;
  p.mean_r = mean_r;
  p.std_r = std_r;
  p.mean_i = mean_i;
  p.std_i = std_i;
  return p;
}

PatchPrior PatchPrior::fixed(Complex z) {
  PatchPrior p;
  p.known = true;
  p.value = z;
  p.mean_r = z.real();
  p.mean_i = z.imag();
  return p;
}

LognormalParams PatchPrior::real_part_log_params() const {
  return lognormal_from_moments(mean_r, std_r * std_r);
}

Complex PatchPrior::mean() const { return known ? value : Complex(mean_r, mean_i); }

void PriorSpec::validate() const {
  for (std::size_t i = 0; i < patches.size(); ++i) {
    const auto& p = patches[i];
    const std::string which = "prior of patch " + std::to_string(i + 1);
    if (p.known) {
      if (!(p.value.real() > 0.0)) throw InvalidSpec(which + ": known impedance needs Re(z) > 0");
      continue;
    }
    if (!(p.mean_r > 0.0)) throw InvalidSpec(which + ": mean_r must be positive");
    if (!(p.std_r > 0.0)) throw InvalidSpec(which + ": std_r must be positive");
    if (!(p.std_i > 0.0)) throw InvalidSpec(which + ": std_i must be positive");
    if (!std::isfinite(p.mean_i)) throw InvalidSpec(which + ": mean_i must be finite");
  }
}

ImpedanceSample PriorSpec::mean_sample() const {
  ImpedanceSample z;
  for (const auto& p : patches) z.z.push_back(p.mean());
  return z;
}

ImpedanceSample sample_prior(const PriorSpec& spec, Rng& rng) {
  ImpedanceSample z;
  z.z.reserve(spec.patches.size());
  for (const auto& p : spec.patches) {
    if (p.known) {
      z.z.push_back(p.value);
      continue;
    }
    const LognormalParams lp = p.real_part_log_params();
    const double xr = standard_normal(rng);
    const double xi = standard_normal(rng);
    z.z.emplace_back(std::exp(lp.mu + lp.gamma * xr), p.mean_i + p.std_i * xi);
  }
  return z;
}

double log_prior_density(const PriorSpec& spec, const ImpedanceSample& z) {
  if (z.size() != spec.patch_count()) throw InvalidArgument("sample does not match the prior");
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const auto& p = spec.patches[i];
    if (p.known) continue;
    const double zr = z.z[i].real();
    const double zi = z.z[i].imag();
    if (!(zr > 0.0)) return -std::numeric_limits<double>::infinity();
    const LognormalParams lp = p.real_part_log_params();
    const double a = (std::log(zr) - lp.mu) / lp.gamma;
    const double b = (zi - p.mean_i) / p.std_i;
    total += -kLog2Pi - std::log(lp.gamma * p.std_i) - std::log(zr) - 0.5 * (a * a + b * b);
  }
  return total;
}

NoiseSpec NoiseSpec::homogeneous(double sigma0, std::size_t microphones) {
  NoiseSpec n;
  n.sigma.assign(2 * microphones, sigma0);
  n.validate();
  return n;
}

void NoiseSpec::validate() const {
  if (sigma.empty() || sigma.size() % 2 != 0) {
    throw InvalidSpec("noise needs two standard deviations per microphone");
  }
  for (double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidSpec("noise standard deviations must be positive");
  }
}

std::vector<Complex> sample_noise(const NoiseSpec& noise, Rng& rng) {
  noise.validate();
  std::vector<Complex> eta(noise.microphone_count());
  for (std::size_t j = 0; j < eta.size(); ++j) {
    const double re = noise.sigma[2 * j] * standard_normal(rng);
    const double im = noise.sigma[2 * j + 1] * standard_normal(rng);
    eta[j] = {re, im};
  }
  return eta;
}

void MeasurementSet::validate() const {
  if (dim != 2 && dim != 3) throw InvalidSpec("measurement dimension must be 2 or 3");
  if (!(frequency > 0.0)) throw InvalidSpec("measurement frequency must be positive");
  if (y.empty()) throw InvalidSpec("measurement set has no readings");
  if (y.size() != microphones.size()) throw InvalidSpec("one reading per microphone is required");
  noise.validate();
  if (noise.microphone_count() != y.size()) throw InvalidSpec("noise spec does not match the readings");
}

double potential(const MeasurementSet& data, std::span<const Complex> g) {
  if (g.size() != data.y.size()) {
    throw InvalidArgument("observation has " + std::to_string(g.size()) + " entries, data has " +
                          std::to_string(data.y.size()));
  }
  if (data.noise.sigma.size() != 2 * g.size()) throw InvalidArgument("noise spec does not match the data");
  double psi = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const Complex r = data.y[j] - g[j];
    // Scale before squaring so tiny sigmas do not underflow.
    const double a = r.real() / data.noise.sigma[2 * j];
    const double b = r.imag() / data.noise.sigma[2 * j + 1];
    psi += 0.5 * (a * a + b * b);
  }
  return psi;
}

WeightedSampleSet WeightedSampleSet::prefix(std::size_t n) const {
  if (n == 0 || n > samples.size()) throw InvalidArgument("prefix length out of range");
  WeightedSampleSet out;
  out.samples.assign(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n));
  out.log_likelihood.assign(log_likelihood.begin(), log_likelihood.begin() + static_cast<std::ptrdiff_t>(n));
  out.seed = seed;
  return out;
}

SampleFunctional real_part(std::size_t patch) {
  return [patch](const ImpedanceSample& z) { return z.z.at(patch).real(); };
}

SampleFunctional imag_part(std::size_t patch) {
  return [patch](const ImpedanceSample& z) { return z.z.at(patch).imag(); };
}

double ratio_estimate(const WeightedSampleSet& ws, const SampleFunctional& phi) {
  const Weights w = normalized_weights(ws);
  double num = 0.0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (w.w[i] != 0.0) num += phi(ws.samples[i]) * w.w[i];
  }
  return num / w.sum;
}

PosteriorMoments posterior_moments(const WeightedSampleSet& ws, const SampleFunctional& phi) {
  const Weights w = normalized_weights(ws);
  std::vector<double> values(ws.size());
  double num = 0.0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    values[i] = phi(ws.samples[i]);
    if (w.w[i] != 0.0) num += values[i] * w.w[i];
  }
  PosteriorMoments m;
  m.first = num / w.sum;
  double second = 0.0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (w.w[i] == 0.0) continue;
    const double d = values[i] - m.first;
    second += d * d * w.w[i];
  }
  m.second = second / w.sum;
  return m;
}

FittedPosterior fit_posterior(double m1_r, double m2_r, double m1_i, double m2_i) {
  if (!(m1_r > 0.0)) throw InvalidMoments("first moment of the real part must be positive");
  if (!(m2_r >= 0.0) || !(m2_i >= 0.0)) throw InvalidMoments("second moments must be nonnegative");
  const LognormalParams lp = lognormal_from_moments(m1_r, m2_r);
  return {lp.mu, lp.gamma, m1_i, std::sqrt(m2_i)};
}

double log_fitted_density(const FittedPosterior& fit, double z_r, double z_i) {
  if (!(z_r > 0.0)) return -std::numeric_limits<double>::infinity();
  const double a = (std::log(z_r) - fit.mu_r) / fit.gamma_r;
  const double b = (z_i - fit.mu_i) / fit.gamma_i;
  return -kLog2Pi - std::log(fit.gamma_r * fit.gamma_i) - std::log(z_r) - 0.5 * (a * a + b * b);
}

LikelihoodMaximizer likelihood_maximizer(const WeightedSampleSet& ws) {
  if (ws.samples.empty() || ws.log_likelihood.size() != ws.samples.size()) {
    throw InvalidArgument("weighted sample set is empty or inconsistent");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < ws.size(); ++i) {
    if (ws.log_likelihood[i] > ws.log_likelihood[best]) best = i;
  }
  return {best, ws.samples[best], ws.log_likelihood[best]};
}

double log_normalization(const WeightedSampleSet& ws) {
  const Weights w = normalized_weights(ws);
  return w.max_log + std::log(w.sum / static_cast<double>(ws.size()));
}

double effective_sample_size(const WeightedSampleSet& ws) { return normalized_weights(ws).sum; }

PosteriorReport summarize_posterior(const WeightedSampleSet& ws, const PriorSpec& prior) {
  if (!ws.samples.empty() && ws.samples.front().size() != prior.patch_count()) {
    throw InvalidArgument("samples do not match the prior");
  }
  PosteriorReport report;
  for (std::size_t p = 0; p < prior.patch_count(); ++p) {
    PatchPosterior pp;
    pp.known = prior.patches[p].known;
    if (pp.known) {
      // Every sample carries the fixed value; report it exactly.
      pp.real = {prior.patches[p].value.real(), 0.0};
      pp.imag = {prior.patches[p].value.imag(), 0.0};
    } else {
      pp.real = posterior_moments(ws, real_part(p));
      pp.imag = posterior_moments(ws, imag_part(p));
    }
    pp.fit = fit_posterior(pp.real.first, pp.real.second, pp.imag.first, pp.imag.second);
    report.patches.push_back(pp);
  }
  report.log_lambda = log_normalization(ws);
  report.lambda = std::exp(report.log_lambda);
  report.maximizer = likelihood_maximizer(ws);
  report.ess = effective_sample_size(ws);
  report.samples = ws.size();
  report.seed = ws.seed;
  return report;
}

}  // namespace roomimp
