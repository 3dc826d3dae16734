#include "roomimp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "roomimp/errors.hpp"
#include "roomimp/parallel.hpp"

namespace roomimp {

std::vector<Point> admissible_microphone_points(const Scenario& sc) {
  if (!(sc.mics.spacing > 0.0)) throw InvalidArgument("microphone grid spacing must be positive");
  const int dim = sc.dim();
  const double g = sc.mics.spacing;
  const double kappa = sc.mics.kappa;
  std::array<int, 3> count{1, 1, 1};
  for (int a = 0; a < dim; ++a) {
    count[a] = 0;
    while (static_cast<double>(count[a] + 1) * g < sc.room[a]) ++count[a];
  }
  std::vector<Point> out;
  for (int i = 1; i <= count[0]; ++i) {
    for (int j = 1; j <= count[1]; ++j) {
      for (int k = 1; k <= (dim == 3 ? count[2] : 1); ++k) {
        Point x{i * g, j * g, dim == 3 ? k * g : 0.0};
        double wall = std::numeric_limits<double>::infinity();
        double r2 = 0.0;
        for (int a = 0; a < dim; ++a) {
          wall = std::min({wall, x[a], sc.room[a] - x[a]});
          r2 += (x[a] - sc.source[a]) * (x[a] - sc.source[a]);
        }
        if (wall > kappa && std::sqrt(r2) > kappa) out.push_back(x);
      }
    }
  }
  return out;
}

std::vector<Point> place_microphones(const Scenario& sc, Rng& rng) {
  const auto pool = admissible_microphone_points(sc);
  if (pool.size() < sc.mics.count) {
    throw PlacementError("only " + std::to_string(pool.size()) + " admissible microphone points for m = " +
                         std::to_string(sc.mics.count));
  }
  std::vector<Point> out;
  out.reserve(sc.mics.count);
  std::sample(pool.begin(), pool.end(), std::back_inserter(out), sc.mics.count, rng);
  return out;
}

namespace {

MeasurementSet synthesize_on(const Scenario& sc, double frequency,
                             const std::shared_ptr<const Discretization>& disc, std::vector<Point> mics,
                             Rng& noise_rng, std::uint64_t seed) {
  if (!sc.z_ref) throw InvalidSpec("synthetic data need z_ref");
  DirectObservation map(disc, sc.physics_at(frequency), sc.source, mics);
  const auto g = map.observe(*sc.z_ref);
  MeasurementSet m;
  m.dim = sc.dim();
  m.frequency = frequency;
  m.source = sc.source;
  m.microphones = std::move(mics);
  m.noise = NoiseSpec::homogeneous(sc.sigma0, g.size());
  const auto eta = sample_noise(m.noise, noise_rng);
  m.y.resize(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) m.y[j] = g[j] + eta[j];
  m.provenance.kind = "synthetic";
  m.provenance.seed = seed;
  m.provenance.z_ref = sc.z_ref;
  const auto& cells = disc->mesh.cells();
  m.provenance.data_mesh_cells.assign(cells.begin(), cells.begin() + sc.dim());
  return m;
}

}  // namespace

MeasurementSet synthesize_measurements(const Scenario& sc, double frequency, const SimplicialMesh& mesh,
                                       std::vector<Point> mics, Rng& noise_rng, std::uint64_t seed) {
  return synthesize_on(sc, frequency, make_discretization(mesh), std::move(mics), noise_rng, seed);
}

MeasurementSet generate_data(const Scenario& sc, std::uint64_t seed) {
  sc.validate();
  const double f = sc.primary_frequency();
  Rng mic_rng = make_stream(derive_seed(seed, "mics"), 0);
  Rng noise_rng = make_stream(derive_seed(seed, "noise"), 0);
  auto mics = place_microphones(sc, mic_rng);
  const SimplicialMesh data_mesh = sc.data_mesh_for(sc.identification_mesh(f));
  return synthesize_measurements(sc, f, data_mesh, std::move(mics), noise_rng, seed);
}

WeightedSampleSet draw_weighted_samples(const PriorSpec& prior, const ObservationMap& map,
                                        const MeasurementSet& data, std::size_t n, std::uint64_t seed,
                                        unsigned threads) {
  if (n == 0) throw InvalidArgument("sample count must be at least 1");
  WeightedSampleSet ws;
  ws.seed = seed;
  ws.samples.resize(n);
  ws.log_likelihood.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    ws.samples[i] = sample_prior(prior, rng);
    ws.log_likelihood[i] = -potential(data, map.observe(ws.samples[i]));
  });
  return ws;
}

WeightedSampleSet reweight(const WeightedSampleSet& ws, const ObservationMap& map,
                           const MeasurementSet& data, unsigned threads) {
  WeightedSampleSet out;
  out.seed = ws.seed;
  out.samples = ws.samples;
  out.log_likelihood.resize(ws.size());
  parallel_for(ws.size(), threads, [&](std::size_t i) {
    out.log_likelihood[i] = -potential(data, map.observe(out.samples[i]));
  });
  return out;
}

std::unique_ptr<ObservationMap> observation_map_for(const Scenario& sc,
                                                    std::shared_ptr<const Discretization> disc,
                                                    const MeasurementSet& data) {
  return make_observation_map(sc.forward, std::move(disc), sc.physics_at(data.frequency), data.source,
                              data.microphones, sc.prior.mean_sample());
}

Identification identify(const Scenario& sc, const MeasurementSet& data, const IdentifyOptions& opt) {
  sc.validate();
  data.validate();
  if (data.dim != sc.dim()) throw InvalidSpec("measurement dimension does not match the scenario");
  const SimplicialMesh mesh = sc.identification_mesh(data.frequency);
  for (const auto& x : data.microphones) {
    if (!mesh.contains(x)) throw OutOfDomain("microphone lies outside the room");
  }
  const double h = mesh.cell_size();
  auto disc = make_discretization(mesh);
  const auto map = observation_map_for(sc, disc, data);
  const std::size_t n = opt.samples.value_or(sc.samples);
  Identification out;
  out.weighted = draw_weighted_samples(sc.prior, *map, data, n, opt.seed, opt.threads);
  out.report = summarize_posterior(out.weighted, sc.prior);
  out.report.h = h;
  out.report.frequency = data.frequency;
  return out;
}

}  // namespace roomimp
