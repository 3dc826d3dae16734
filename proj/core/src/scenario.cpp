#include "roomimp/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "roomimp/errors.hpp"

namespace roomimp {

using nlohmann::json;

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

BoxFace face_from_json(const json& j) {
  BoxFace f;
  f.axis = j.at("axis").get<int>();
  const std::string side = j.at("side").get<std::string>();
  if (side == "lo" || side == "low") {
    f.side = Side::kLow;
  } else if (side == "hi" || side == "high") {
    f.side = Side::kHigh;
  } else {
    throw ConfigurationError("patch side must be \"lo\" or \"hi\", got \"" + side + "\"");
  }
  return f;
}

PatchPrior patch_prior_from_json(const json& j) {
  if (j.contains("known")) return PatchPrior::fixed(complex_from_json(j.at("known")));
  return PatchPrior::random(j.at("mean_r").get<double>(), j.at("std_r").get<double>(),
                            j.at("mean_i").get<double>(), j.at("std_i").get<double>());
}

}  // namespace

std::vector<double> SweepRange::frequencies() const {
  if (!(step > 0.0) || !(hi >= lo) || !(lo > 0.0)) throw ConfigurationError("invalid sweep range");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

double MeshRule::h_target(double frequency, double c) const {
  if (explicit_h) return *explicit_h;
  return std::min(c / frequency / divisor, cap);
}

double Scenario::primary_frequency() const {
  if (frequency) return *frequency;
  if (sweep) return sweep->lo;
  throw ConfigurationError("scenario has neither a frequency nor a sweep");
}

PhysicsParams Scenario::physics_at(double f) const {
  PhysicsParams p = physics;
  p.f = f;
  p.validate();
  return p;
}

SimplicialMesh Scenario::identification_mesh(double f) const {
  return build_box_mesh(room, mesh_rule.h_target(f, physics.c), patches);
}

SimplicialMesh Scenario::data_mesh_for(const SimplicialMesh& identification) const {
  return data_mesh == DataMeshPolicy::kFiner ? refine_uniformly(identification, 1) : identification;
}

void Scenario::validate() const {
  if (room.size() != 2 && room.size() != 3) throw ConfigurationError("room needs 2 or 3 extents");
  for (double l : room) {
    if (!(l > 0.0)) throw ConfigurationError("room extents must be positive");
  }
  patches.validate(dim());
  physics_at(primary_frequency());
  if (prior.patch_count() != static_cast<std::size_t>(patches.robin_patch_count())) {
    throw ConfigurationError("prior needs one entry per Robin patch");
  }
  prior.validate();
  if (z_ref && z_ref->size() != prior.patch_count()) {
    throw ConfigurationError("z_ref needs one impedance per Robin patch");
  }
  if (!(sigma0 > 0.0)) throw ConfigurationError("noise sigma0 must be positive");
  if (mics.count < 1) throw ConfigurationError("at least one microphone is required");
  if (!(mics.spacing > 0.0)) throw ConfigurationError("microphone grid spacing must be positive");
  if (!(mics.kappa > 0.0)) throw ConfigurationError("kappa must be positive");
  if (samples < 1) throw ConfigurationError("N must be at least 1");
  if (runs < 1) throw ConfigurationError("runs must be at least 1");
  double dist = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim(); ++a) dist = std::min({dist, source[a], room[a] - source[a]});
  if (!(dist > mics.kappa)) {
    throw ConfigurationError("source must be farther than kappa from the boundary");
  }
  if (mesh_rule.explicit_h && !(*mesh_rule.explicit_h > 0.0)) throw ConfigurationError("h must be positive");
  if (!mesh_rule.explicit_h && !(mesh_rule.divisor > 0.0)) {
    throw ConfigurationError("h_rule divisor must be positive");
  }
}

Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigurationError("complex values are [re, im] pairs");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    s.room = j.at("room").get<std::vector<double>>();
    for (const auto& p : j.at("patches")) s.patches.robin_faces.push_back(face_from_json(p));
    if (j.contains("physics")) {
      const auto& ph = j.at("physics");
      s.physics.c = get_or(ph, "c", s.physics.c);
      s.physics.rho = get_or(ph, "rho", s.physics.rho);
    }
    const auto src = j.at("source").get<std::vector<double>>();
    if (src.size() != s.room.size()) throw ConfigurationError("source dimension does not match the room");
    for (std::size_t a = 0; a < src.size(); ++a) s.source[a] = src[a];
    if (j.contains("mics")) {
      const auto& m = j.at("mics");
      s.mics.spacing = get_or(m, "grid", s.mics.spacing);
      s.mics.kappa = get_or(m, "kappa", s.mics.kappa);
      s.mics.count = get_or<std::size_t>(m, "m", s.mics.count);
    }
    for (const auto& p : j.at("prior")) s.prior.patches.push_back(patch_prior_from_json(p));
    if (j.contains("noise")) s.sigma0 = j.at("noise").at("sigma0").get<double>();
    if (j.contains("z_ref")) {
      ImpedanceSample z;
      for (const auto& v : j.at("z_ref")) z.z.push_back(complex_from_json(v));
      s.z_ref = z;
    }
    if (j.contains("frequency")) s.frequency = j.at("frequency").get<double>();
    if (j.contains("sweep")) {
      const auto& sw = j.at("sweep");
      s.sweep = SweepRange{sw.at("lo").get<double>(), sw.at("hi").get<double>(), sw.at("step").get<double>()};
    }
    if (j.contains("h")) s.mesh_rule.explicit_h = j.at("h").get<double>();
    if (j.contains("h_rule")) {
      const auto& r = j.at("h_rule");
      s.mesh_rule.divisor = get_or(r, "divisor", s.mesh_rule.divisor);
      if (r.contains("cap")) s.mesh_rule.cap = r.at("cap").get<double>();
    }
    s.samples = get_or<std::size_t>(j, "N", s.samples);
    s.runs = get_or<std::size_t>(j, "runs", s.runs);
    s.seed = get_or<std::uint64_t>(j, "seed", s.seed);
    if (j.contains("data_mesh")) {
      const auto policy = j.at("data_mesh").get<std::string>();
      if (policy == "finer") {
        s.data_mesh = DataMeshPolicy::kFiner;
      } else if (policy == "same") {
        s.data_mesh = DataMeshPolicy::kSame;
      } else {
        throw ConfigurationError("data_mesh must be \"finer\" or \"same\"");
      }
    }
    if (j.contains("forward")) {
      const auto method = j.at("forward").get<std::string>();
      if (method == "reduced") {
        s.forward = ForwardMethod::kBoundaryReduced;
      } else if (method == "direct") {
        s.forward = ForwardMethod::kDirect;
      } else {
        throw ConfigurationError("forward must be \"reduced\" or \"direct\"");
      }
    }
    if (j.contains("study")) {
      const auto& st = j.at("study");
      s.study.levels = get_or(st, "levels", s.study.levels);
      s.study.reference_level = get_or(st, "reference_level", s.study.reference_level);
      s.study.reference_samples = get_or<std::size_t>(st, "reference_N", s.study.reference_samples);
      s.study.log2_n_min = get_or(st, "log2_n_min", s.study.log2_n_min);
      s.study.log2_n_max = get_or(st, "log2_n_max", s.study.log2_n_max);
      s.study.replicates = get_or<std::size_t>(st, "replicates", s.study.replicates);
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("malformed scenario: ") + e.what());
  }
}

json scenario_to_json(const Scenario& s) {
  json j;
  j["room"] = s.room;
  json patches = json::array();
  for (const auto& f : s.patches.robin_faces) {
    patches.push_back({{"axis", f.axis}, {"side", f.side == Side::kLow ? "lo" : "hi"}});
  }
  j["patches"] = patches;
  j["physics"] = {{"c", s.physics.c}, {"rho", s.physics.rho}};
  j["source"] = std::vector<double>(s.source.begin(), s.source.begin() + s.dim());
  j["mics"] = {{"grid", s.mics.spacing}, {"kappa", s.mics.kappa}, {"m", s.mics.count}};
  json prior = json::array();
  for (const auto& p : s.prior.patches) {
    if (p.known) {
      prior.push_back({{"known", complex_to_json(p.value)}});
    } else {
      prior.push_back({{"mean_r", p.mean_r}, {"std_r", p.std_r}, {"mean_i", p.mean_i}, {"std_i", p.std_i}});
    }
  }
  j["prior"] = prior;
  j["noise"] = {{"sigma0", s.sigma0}};
  if (s.z_ref) {
    json z = json::array();
    for (const auto& v : s.z_ref->z) z.push_back(complex_to_json(v));
    j["z_ref"] = z;
  }
  if (s.frequency) j["frequency"] = *s.frequency;
  if (s.sweep) j["sweep"] = {{"lo", s.sweep->lo}, {"hi", s.sweep->hi}, {"step", s.sweep->step}};
  if (s.mesh_rule.explicit_h) {
    j["h"] = *s.mesh_rule.explicit_h;
  } else {
    json rule = {{"divisor", s.mesh_rule.divisor}};
    if (std::isfinite(s.mesh_rule.cap)) rule["cap"] = s.mesh_rule.cap;
    j["h_rule"] = rule;
  }
  j["N"] = s.samples;
  j["runs"] = s.runs;
  j["seed"] = s.seed;
  j["data_mesh"] = s.data_mesh == DataMeshPolicy::kFiner ? "finer" : "same";
  j["forward"] = s.forward == ForwardMethod::kDirect ? "direct" : "reduced";
  j["study"] = {{"levels", s.study.levels},
                {"reference_level", s.study.reference_level},
                {"reference_N", s.study.reference_samples},
                {"log2_n_min", s.study.log2_n_min},
                {"log2_n_max", s.study.log2_n_max},
                {"replicates", s.study.replicates}};
  return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open scenario file " + path.string());
  try {
    return scenario_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ConfigurationError("cannot parse scenario file " + path.string() + ": " + e.what());
  }
}

Scenario room_2d_scenario() {
  Scenario s;
  s.room = {3.0, 3.5};
  s.patches.robin_faces = {{0, Side::kLow}, {1, Side::kLow}};
  s.source = {1.0, 1.0, 0.0};
  s.mics = {0.1, 0.25, 4};
  s.prior.patches = {PatchPrior::random(300.0, 200.0, -600.0, 200.0),
                     PatchPrior::random(600.0, 200.0, 900.0, 200.0)};
  s.sigma0 = 0.02;
  s.z_ref = ImpedanceSample{{Complex(400.0, -700.0), Complex(500.0, 800.0)}};
  s.frequency = 50.0;
  s.mesh_rule.divisor = 20.0;
  s.samples = std::size_t{1} << 14;
  s.runs = 20;
  s.seed = 20240601;
  return s;
}

Scenario room_3d_scenario() {
  Scenario s;
  s.room = {3.0, 3.5, 2.5};
  s.patches.robin_faces = {{0, Side::kLow}, {1, Side::kLow}};
  s.source = {1.0, 1.0, 1.0};
  s.mics = {0.1, 0.5, 16};
  s.prior.patches = {PatchPrior::fixed(Complex(500.0, -800.0)),
                     PatchPrior::random(4000.0, 10000.0, 0.0, 30000.0)};
  s.sigma0 = std::sqrt(0.02);
  s.z_ref = ImpedanceSample{{Complex(500.0, -800.0), Complex(500.0, 800.0)}};
  s.sweep = SweepRange{20.0, 120.0, 0.5};
  s.mesh_rule.divisor = 20.0;
  s.mesh_rule.cap = 0.5;
  s.samples = std::size_t{1} << 14;
  s.runs = 20;
  s.seed = 20240602;
  return s;
}

}  // namespace roomimp
