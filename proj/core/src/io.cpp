#include "roomimp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "roomimp/errors.hpp"

#ifndef ROOMIMP_VERSION
#define ROOMIMP_VERSION "0.0.0"
#endif

namespace roomimp {

using nlohmann::json;

const char* version_string() { return ROOMIMP_VERSION; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const Scenario& sc) { return fnv1a64(scenario_to_json(sc).dump()); }

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string header_lines(const OutputHeader& h) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(h.config_hash));
  std::ostringstream out;
  out << "# tool=roomimp " << version_string() << '\n'
      << "# config_hash=" << hash << '\n'
      << "# seed=" << h.seed << '\n'
      << "# command=" << h.command << '\n';
  return out.str();
}

void atomic_write(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) {
    throw ConfigurationError("output directory does not exist: " + parent.string());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigurationError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw ConfigurationError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw ConfigurationError("cannot move output into place: " + path.string());
  }
}

namespace {

json point_to_json(const Point& p, int dim) { return std::vector<double>(p.begin(), p.begin() + dim); }

Point point_from_json(const json& j, int dim) {
  const auto v = j.get<std::vector<double>>();
  if (static_cast<int>(v.size()) != dim) throw ConfigurationError("point has the wrong dimension");
  Point p{};
  for (int a = 0; a < dim; ++a) p[a] = v[a];
  return p;
}

}  // namespace

json measurement_to_json(const MeasurementSet& m) {
  json j;
  j["dim"] = m.dim;
  j["frequency"] = m.frequency;
  j["source"] = point_to_json(m.source, m.dim);
  json mics = json::array();
  for (const auto& x : m.microphones) mics.push_back(point_to_json(x, m.dim));
  j["microphones"] = mics;
  json y = json::array();
  for (const auto& v : m.y) y.push_back(complex_to_json(v));
  j["y"] = y;
  j["noise"] = {{"sigma", m.noise.sigma}};
  json prov;
  prov["kind"] = m.provenance.kind;
  prov["seed"] = m.provenance.seed;
  if (m.provenance.z_ref) {
    json z = json::array();
    for (const auto& v : m.provenance.z_ref->z) z.push_back(complex_to_json(v));
    prov["z_ref"] = z;
  }
  prov["data_mesh_cells"] = m.provenance.data_mesh_cells;
  prov["note"] = m.provenance.note;
  j["provenance"] = prov;
  return j;
}

MeasurementSet measurement_from_json(const json& j) {
  try {
    MeasurementSet m;
    m.dim = j.at("dim").get<int>();
    if (m.dim != 2 && m.dim != 3) throw ConfigurationError("measurement dim must be 2 or 3");
    m.frequency = j.at("frequency").get<double>();
    m.source = point_from_json(j.at("source"), m.dim);
    for (const auto& x : j.at("microphones")) m.microphones.push_back(point_from_json(x, m.dim));
    for (const auto& v : j.at("y")) m.y.push_back(complex_from_json(v));
    m.noise.sigma = j.at("noise").at("sigma").get<std::vector<double>>();
    if (j.contains("provenance")) {
      const auto& p = j.at("provenance");
      if (p.contains("kind")) m.provenance.kind = p.at("kind").get<std::string>();
      if (p.contains("seed")) m.provenance.seed = p.at("seed").get<std::uint64_t>();
      if (p.contains("z_ref")) {
        ImpedanceSample z;
        for (const auto& v : p.at("z_ref")) z.z.push_back(complex_from_json(v));
        m.provenance.z_ref = z;
      }
      if (p.contains("data_mesh_cells")) {
        m.provenance.data_mesh_cells = p.at("data_mesh_cells").get<std::vector<int>>();
      }
      if (p.contains("note")) m.provenance.note = p.at("note").get<std::string>();
    }
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("malformed measurement set: ") + e.what());
  }
}

std::string measurement_file_text(const std::vector<MeasurementSet>& sets, const OutputHeader& h) {
  json j;
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(h.config_hash));
  j["header"] = {{"tool", std::string("roomimp ") + version_string()},
                 {"config_hash", hash},
                 {"seed", h.seed},
                 {"command", h.command}};
  json arr = json::array();
  for (const auto& m : sets) arr.push_back(measurement_to_json(m));
  j["sets"] = arr;
  return j.dump(2) + "\n";
}

std::vector<MeasurementSet> load_measurements(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open measurement file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigurationError("cannot parse measurement file " + path.string() + ": " + e.what());
  }
  std::vector<MeasurementSet> out;
  if (j.is_object() && j.contains("sets")) {
    for (const auto& s : j.at("sets")) out.push_back(measurement_from_json(s));
  } else {
    out.push_back(measurement_from_json(j));
  }
  if (out.empty()) throw ConfigurationError("measurement file holds no sets: " + path.string());
  return out;
}

std::string report_csv(const PosteriorReport& r, const OutputHeader& h) {
  std::ostringstream out;
  out << header_lines(h) << "key,patch,value\n";
  auto row = [&out](const std::string& key, const std::string& patch, double v) {
    out << key << ',' << patch << ',' << format_number(v) << '\n';
  };
  row("f_hz", "", r.frequency);
  row("h", "", r.h);
  out << "N,," << r.samples << '\n';
  out << "seed,," << r.seed << '\n';
  row("log_lambda", "", r.log_lambda);
  row("lambda", "", r.lambda);
  row("ess", "", r.ess);
  row("max_loglik", "", r.maximizer.log_likelihood);
  out << "maximizer_index,," << r.maximizer.index << '\n';
  for (std::size_t p = 0; p < r.patches.size(); ++p) {
    const std::string id = std::to_string(p + 1);
    const auto& pp = r.patches[p];
    out << "known," << id << ',' << (pp.known ? 1 : 0) << '\n';
    row("zhat_re", id, r.maximizer.sample.z[p].real());
    row("zhat_im", id, r.maximizer.sample.z[p].imag());
    row("mean_re", id, pp.real.first);
    row("var_re", id, pp.real.second);
    row("mean_im", id, pp.imag.first);
    row("var_im", id, pp.imag.second);
    row("mu_r", id, pp.fit.mu_r);
    row("gamma_r", id, pp.fit.gamma_r);
    row("mu_i", id, pp.fit.mu_i);
    row("gamma_i", id, pp.fit.gamma_i);
  }
  return out.str();
}

std::string study_csv(const StudyResult& r, const OutputHeader& h) {
  std::ostringstream out;
  out << header_lines(h) << kStudyColumns << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& rec : r.records) {
    out << rec.study << ',' << format_number(rec.f_hz) << ',' << format_number(rec.h) << ','
        << format_number(rec.h_max) << ',' << rec.n << ','
        << (rec.run < 0 ? std::string("mean") : std::to_string(rec.run)) << ',' << rec.param << ','
        << opt(rec.value) << ',' << opt(rec.error) << ',' << opt(rec.max_loglik) << ',' << rec.seed
        << ',' << rec.status << '\n';
  }
  return out.str();
}

}  // namespace roomimp
