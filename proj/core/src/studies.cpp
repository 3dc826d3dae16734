#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include "roomimp/errors.hpp"
#include "roomimp/harness.hpp"

namespace roomimp {

namespace {

std::string patch_suffix(std::size_t p) { return std::to_string(p + 1); }

// Data for the fixed-y studies: microphones and noise from the study seed.
MeasurementSet study_data(const Scenario& sc, double f, const SimplicialMesh& data_mesh, std::uint64_t seed) {
  Rng mic_rng = make_stream(derive_seed(seed, "mics"), 0);
  Rng noise_rng = make_stream(derive_seed(seed, "noise"), 0);
  auto mics = place_microphones(sc, mic_rng);
  return synthesize_measurements(sc, f, data_mesh, std::move(mics), noise_rng, seed);
}

void append_means(std::vector<StudyRecord>& records) {
  struct Acc {
    StudyRecord proto;
    double value = 0.0;
    double error = 0.0;
    double loglik = 0.0;
    std::size_t count = 0;
    bool has_error = false;
    bool has_loglik = false;
  };
  using Key = std::tuple<std::string, double, double, std::size_t, std::string>;
  std::map<Key, Acc> acc;
  std::vector<Key> order;
  for (const auto& r : records) {
    if (r.run < 0 || r.status != "ok" || !r.value) continue;
    const Key key{r.study, r.f_hz, r.h, r.n, r.param};
    auto it = acc.find(key);
    if (it == acc.end()) {
      it = acc.emplace(key, Acc{}).first;
      it->second.proto = r;
      order.push_back(key);
    }
    Acc& a = it->second;
    a.value += *r.value;
    if (r.error) {
      a.error += *r.error;
      a.has_error = true;
    }
    if (r.max_loglik) {
      a.loglik += *r.max_loglik;
      a.has_loglik = true;
    }
    ++a.count;
  }
  for (const auto& key : order) {
    const Acc& a = acc.at(key);
    StudyRecord m = a.proto;
    const double c = static_cast<double>(a.count);
    m.run = -1;
    m.seed = 0;
    m.value = a.value / c;
    m.error = a.has_error ? std::optional<double>(a.error / c) : std::nullopt;
    m.max_loglik = a.has_loglik ? std::optional<double>(a.loglik / c) : std::nullopt;
    records.push_back(m);
  }
}

// Sorted by (abscissa, run) with the mean rows after the individual runs.
void sort_records(std::vector<StudyRecord>& records, bool by_n) {
  std::stable_sort(records.begin(), records.end(), [by_n](const StudyRecord& a, const StudyRecord& b) {
    const double xa = by_n ? static_cast<double>(a.n) : (a.study == "sweep" ? a.f_hz : a.h);
    const double xb = by_n ? static_cast<double>(b.n) : (b.study == "sweep" ? b.f_hz : b.h);
    if (xa != xb) return xa < xb;
    const long ra = a.run < 0 ? std::numeric_limits<long>::max() : a.run;
    const long rb = b.run < 0 ? std::numeric_limits<long>::max() : b.run;
    return ra < rb;
  });
}

}  // namespace

std::vector<StudyRecord> StudyResult::select(const std::string& study, const std::string& param) const {
  std::vector<StudyRecord> out;
  for (const auto& r : records) {
    if (r.study == study && r.param == param) out.push_back(r);
  }
  return out;
}

std::uint64_t sampling_reference_seed(std::uint64_t seed) { return derive_seed(seed, "reference"); }

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r) { return derive_seed(seed, "replicate", r); }

std::vector<std::string> fitted_parameter_names(const PriorSpec& prior) {
  std::vector<std::string> out;
  for (std::size_t p = 0; p < prior.patch_count(); ++p) {
    if (prior.patches[p].known) continue;
    const auto s = patch_suffix(p);
    for (const char* n : {"mu_R", "gamma_R", "mu_I", "gamma_I"}) out.push_back(n + s);
  }
  return out;
}

std::vector<double> fitted_parameter_values(const PosteriorReport& report) {
  std::vector<double> out;
  for (const auto& pp : report.patches) {
    if (pp.known) continue;
    out.insert(out.end(), {pp.fit.mu_r, pp.fit.gamma_r, pp.fit.mu_i, pp.fit.gamma_i});
  }
  return out;
}

std::vector<std::string> moment_parameter_names(const PriorSpec& prior) {
  std::vector<std::string> out;
  for (std::size_t p = 0; p < prior.patch_count(); ++p) {
    if (prior.patches[p].known) continue;
    const auto s = patch_suffix(p);
    for (const char* n : {"mean_R", "std_R", "mean_I", "std_I"}) out.push_back(n + s);
  }
  return out;
}

std::vector<double> moment_parameter_values(const PosteriorReport& report) {
  std::vector<double> out;
  for (const auto& pp : report.patches) {
    if (pp.known) continue;
    out.insert(out.end(), {pp.real.first, std::sqrt(pp.real.second), pp.imag.first, std::sqrt(pp.imag.second)});
  }
  return out;
}

StudyResult study_discretization(const Scenario& sc, const StudyOptions& opt) {
  sc.validate();
  const double f = sc.primary_frequency();
  const SimplicialMesh base = sc.identification_mesh(f);
  const int ref_level = sc.study.reference_level;
  const int data_level = ref_level + (sc.data_mesh == DataMeshPolicy::kFiner ? 1 : 0);
  const MeasurementSet data = study_data(sc, f, refine_uniformly(base, data_level), opt.seed);

  std::set<int> all(sc.study.levels.begin(), sc.study.levels.end());
  all.insert(ref_level);
  std::map<int, std::shared_ptr<const Discretization>> disc;
  std::map<int, std::unique_ptr<ObservationMap>> maps;
  for (int l : all) {
    if (l < 0) throw InvalidSpec("study levels must be nonnegative");
    disc[l] = make_discretization(refine_uniformly(base, l));
    maps[l] = observation_map_for(sc, disc[l], data);
  }

  const auto names = fitted_parameter_names(sc.prior);
  const std::size_t n = opt.samples.value_or(sc.samples);
  StudyResult out;
  for (std::size_t r = 0; r < sc.study.replicates; ++r) {
    const std::uint64_t seed_r = replicate_seed(opt.seed, r);
    const WeightedSampleSet ws_ref = draw_weighted_samples(sc.prior, *maps[ref_level], data, n, seed_r, opt.threads);
    const auto ref = fitted_parameter_values(summarize_posterior(ws_ref, sc.prior));
    for (int l : sc.study.levels) {
      const WeightedSampleSet ws = l == ref_level ? ws_ref : reweight(ws_ref, *maps[l], data, opt.threads);
      const PosteriorReport rep = summarize_posterior(ws, sc.prior);
      const auto val = fitted_parameter_values(rep);
      for (std::size_t q = 0; q < names.size(); ++q) {
        StudyRecord rec;
        rec.study = "discretization";
        rec.f_hz = f;
        rec.h = disc[l]->mesh.cell_size();
        rec.h_max = disc[l]->mesh.h();
        rec.n = n;
        rec.run = static_cast<int>(r);
        rec.param = names[q];
        rec.value = val[q];
        rec.error = std::abs(val[q] - ref[q]);
        rec.max_loglik = rep.maximizer.log_likelihood;
        rec.seed = seed_r;
        out.records.push_back(rec);
      }
    }
  }
  append_means(out.records);
  sort_records(out.records, false);
  return out;
}

StudyResult study_pointwise(const Scenario& sc, const std::vector<int>& levels, const StudyOptions& opt) {
  sc.validate();
  if (!sc.z_ref) throw InvalidSpec("the pointwise study needs z_ref");
  const double f = sc.primary_frequency();
  const PhysicsParams phys = sc.physics_at(f);
  const SimplicialMesh base = sc.identification_mesh(f);
  Rng mic_rng = make_stream(derive_seed(opt.seed, "mics"), 0);
  const auto mics = place_microphones(sc, mic_rng);

  auto field_at = [&](int level) {
    DirectObservation map(make_discretization(refine_uniformly(base, level)), phys, sc.source, mics);
    return std::make_pair(map.observe(*sc.z_ref), map.discretization().mesh);
  };
  const auto [g_ref, mesh_ref] = field_at(sc.study.reference_level);
  (void)mesh_ref;
  StudyResult out;
  for (int l : levels) {
    const auto [g, mesh] = field_at(l);
    double err = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) err = std::max(err, std::abs(g[j] - g_ref[j]));
    StudyRecord rec;
    rec.study = "pointwise";
    rec.f_hz = f;
    rec.h = mesh.cell_size();
    rec.h_max = mesh.h();
    rec.param = "max_abs_error";
    rec.value = err;
    rec.error = err;
    rec.seed = opt.seed;
    out.records.push_back(rec);
  }
  sort_records(out.records, false);
  return out;
}

StudyResult study_sampling(const Scenario& sc, const StudyOptions& opt) {
  sc.validate();
  const double f = sc.primary_frequency();
  const SimplicialMesh mesh = sc.identification_mesh(f);
  const MeasurementSet data = study_data(sc, f, sc.data_mesh_for(mesh), opt.seed);
  auto disc = make_discretization(mesh);
  const auto map = observation_map_for(sc, disc, data);

  const auto names = moment_parameter_names(sc.prior);
  const std::uint64_t ref_seed = sampling_reference_seed(opt.seed);
  const auto ref_ws = draw_weighted_samples(sc.prior, *map, data, sc.study.reference_samples, ref_seed, opt.threads);
  const auto ref = moment_parameter_values(summarize_posterior(ref_ws, sc.prior));
  if (sc.study.log2_n_min < 0 || sc.study.log2_n_max < sc.study.log2_n_min || sc.study.log2_n_max > 40) {
    throw InvalidSpec("invalid sample-count range for the sampling study");
  }
  const std::size_t n_max = std::size_t{1} << sc.study.log2_n_max;

  StudyResult out;
  for (std::size_t r = 0; r < sc.study.replicates; ++r) {
    const std::uint64_t seed_r = replicate_seed(opt.seed, r);
    const auto ws = draw_weighted_samples(sc.prior, *map, data, n_max, seed_r, opt.threads);
    for (int k = sc.study.log2_n_min; k <= sc.study.log2_n_max; ++k) {
      const std::size_t n = std::size_t{1} << k;
      const PosteriorReport rep = summarize_posterior(ws.prefix(n), sc.prior);
      const auto val = moment_parameter_values(rep);
      for (std::size_t q = 0; q < names.size(); ++q) {
        StudyRecord rec;
        rec.study = "sampling";
        rec.f_hz = f;
        rec.h = mesh.cell_size();
        rec.h_max = mesh.h();
        rec.n = n;
        rec.run = static_cast<int>(r);
        rec.param = names[q];
        rec.value = val[q];
        rec.error = std::abs(val[q] - ref[q]);
        rec.max_loglik = rep.maximizer.log_likelihood;
        rec.seed = seed_r;
        out.records.push_back(rec);
      }
    }
  }
  append_means(out.records);
  sort_records(out.records, true);
  return out;
}

namespace {

void sweep_point(const Scenario& sc, const StudyOptions& opt, double f, int run, std::uint64_t sample_seed,
                 const std::shared_ptr<const Discretization>& disc, const MeasurementSet& data,
                 StudyResult& out) {
  StudyRecord proto;
  proto.study = "sweep";
  proto.f_hz = f;
  proto.h = disc->mesh.cell_size();
  proto.h_max = disc->mesh.h();
  proto.n = opt.samples.value_or(sc.samples);
  proto.run = run;
  proto.seed = sample_seed;
  try {
    const auto map = observation_map_for(sc, disc, data);
    const auto ws = draw_weighted_samples(sc.prior, *map, data, proto.n, sample_seed, opt.threads);
    const auto max_ll = likelihood_maximizer(ws);
    proto.max_loglik = max_ll.log_likelihood;
    const PosteriorReport rep = summarize_posterior(ws, sc.prior);
    auto push = [&](const std::string& param, double v) {
      StudyRecord rec = proto;
      rec.param = param;
      rec.value = v;
      out.records.push_back(rec);
    };
    push("max_loglik", rep.maximizer.log_likelihood);
    push("log_lambda", rep.log_lambda);
    const auto names = moment_parameter_names(sc.prior);
    const auto vals = moment_parameter_values(rep);
    for (std::size_t q = 0; q < names.size(); ++q) push(names[q], vals[q]);
    for (std::size_t p = 0; p < sc.prior.patch_count(); ++p) {
      if (sc.prior.patches[p].known) continue;
      push("zhat_R" + patch_suffix(p), rep.maximizer.sample.z[p].real());
      push("zhat_I" + patch_suffix(p), rep.maximizer.sample.z[p].imag());
    }
  } catch (const DegenerateWeights& e) {
    StudyRecord rec = proto;
    rec.param = "max_loglik";
    rec.value = e.max_log_likelihood();
    rec.max_loglik = e.max_log_likelihood();
    rec.status = "degenerate";
    out.records.push_back(rec);
  } catch (const SingularSystem&) {
    StudyRecord rec = proto;
    rec.status = "failed";
    out.records.push_back(rec);
  }
}

}  // namespace

StudyResult study_sweep(const Scenario& sc, const StudyOptions& opt, const std::vector<MeasurementSet>* external) {
  sc.validate();
  if (!external && !sc.z_ref) throw InvalidSpec("a synthetic sweep needs z_ref");
  StudyResult out;
  if (external) {
    std::map<double, int> runs;
    std::map<double, std::size_t> index;
    for (const auto& m : *external) index.emplace(m.frequency, index.size());
    std::map<double, std::shared_ptr<const Discretization>> disc;
    for (const auto& data : *external) {
      if (data.dim != sc.dim()) throw InvalidSpec("measurement dimension does not match the scenario");
      const double f = data.frequency;
      if (!disc.count(f)) disc[f] = make_discretization(sc.identification_mesh(f));
      const int run = runs[f]++;
      const std::uint64_t run_seed = derive_seed(derive_seed(opt.seed, "frequency", index[f]), "run", run);
      sweep_point(sc, opt, f, run, derive_seed(run_seed, "samples"), disc[f], data, out);
    }
  } else {
    const std::vector<double> freqs =
        sc.sweep ? sc.sweep->frequencies() : std::vector<double>{sc.primary_frequency()};
    for (std::size_t fi = 0; fi < freqs.size(); ++fi) {
      const double f = freqs[fi];
      const SimplicialMesh mesh = sc.identification_mesh(f);
      auto disc = make_discretization(mesh);
      auto data_disc = sc.data_mesh == DataMeshPolicy::kSame ? disc : make_discretization(sc.data_mesh_for(mesh));
      const std::uint64_t f_seed = derive_seed(opt.seed, "frequency", fi);
      for (std::size_t r = 0; r < sc.runs; ++r) {
        const std::uint64_t run_seed = derive_seed(f_seed, "run", r);
        Rng mic_rng = make_stream(derive_seed(run_seed, "mics"), 0);
        Rng noise_rng = make_stream(derive_seed(run_seed, "noise"), 0);
        const auto mics = place_microphones(sc, mic_rng);
        const std::uint64_t sample_seed = derive_seed(run_seed, "samples");
        MeasurementSet data;
        try {
          DirectObservation truth(data_disc, sc.physics_at(f), sc.source, mics);
          const auto g = truth.observe(*sc.z_ref);
          data.dim = sc.dim();
          data.frequency = f;
          data.source = sc.source;
          data.microphones = mics;
          data.noise = NoiseSpec::homogeneous(sc.sigma0, g.size());
          const auto eta = sample_noise(data.noise, noise_rng);
          data.y.resize(g.size());
          for (std::size_t j = 0; j < g.size(); ++j) data.y[j] = g[j] + eta[j];
        } catch (const SingularSystem&) {
          StudyRecord rec;
          rec.study = "sweep";
          rec.f_hz = f;
          rec.h = mesh.cell_size();
          rec.h_max = mesh.h();
          rec.n = opt.samples.value_or(sc.samples);
          rec.run = static_cast<int>(r);
          rec.seed = sample_seed;
          rec.status = "failed";
          out.records.push_back(rec);
          continue;
        }
        sweep_point(sc, opt, f, static_cast<int>(r), sample_seed, disc, data, out);
      }
    }
  }
  append_means(out.records);
  sort_records(out.records, false);
  return out;
}

}  // namespace roomimp
