#include "roomimp_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>

#include "roomimp/errors.hpp"
#include "roomimp/harness.hpp"
#include "roomimp/io.hpp"
#include "roomimp/scenario.hpp"

namespace roomimp::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  unsigned threads = 0;
  std::string data;
  std::optional<std::size_t> samples;
};

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '"', '\'');
  return s;
}

void diagnose(std::ostream& err, const char* kind, const char* type, const std::string& message,
              const std::string& extra = {}) {
  err << "roomimp: error=" << kind << " type=" << type << extra << " message=\"" << one_line(message)
      << "\"\n";
}

fs::path resolve_out(const std::string& out) {
  fs::path p(out);
  if (const char* dir = std::getenv("ROOMIMP_OUT_DIR"); dir && *dir && p.is_relative()) p = fs::path(dir) / p;
  const fs::path parent = p.has_parent_path() ? p.parent_path() : fs::path(".");
  if (!fs::is_directory(parent)) throw ConfigurationError("output directory does not exist: " + parent.string());
  return p;
}

class Emitter {
 public:
  Emitter(const std::string& out, std::ostream& fallback) : fallback_(fallback) {
    if (!out.empty()) path_ = resolve_out(out);
  }
  void emit(const std::string& text) const {
    if (path_) {
      atomic_write(*path_, text);
    } else {
      fallback_ << text;
    }
  }

 private:
  std::optional<fs::path> path_;
  std::ostream& fallback_;
};

Scenario load_with_overrides(const Common& c) {
  Scenario sc = load_scenario(c.config);
  if (c.seed) sc.seed = *c.seed;
  if (c.samples) {
    if (*c.samples < 1) throw ConfigurationError("--samples must be at least 1");
    sc.samples = *c.samples;
  }
  sc.validate();
  return sc;
}

OutputHeader header_for(const std::string& command, const Scenario& sc) {
  return {command, config_hash(sc), sc.seed};
}

std::string mesh_info_text(const Scenario& sc) {
  std::ostringstream o;
  for (double f : sc.sweep ? sc.sweep->frequencies() : std::vector<double>{sc.primary_frequency()}) {
    const SimplicialMesh mesh = sc.identification_mesh(f);
    o << "f_hz=" << format_number(f) << " h_target=" << format_number(sc.mesh_rule.h_target(f, sc.physics.c))
      << " cells=";
    for (int a = 0; a < mesh.dim(); ++a) o << (a ? "x" : "") << mesh.cells()[a];
    o << " vertices=" << mesh.vertex_count() << " elements=" << mesh.element_count()
      << " cell_size=" << format_number(mesh.cell_size()) << " h_max=" << format_number(mesh.h());
    for (int t = 1; t <= sc.patches.robin_patch_count(); ++t) {
      o << " patch" << t << "_measure=" << format_number(mesh.patch_measure(t));
    }
    o << '\n';
  }
  return o.str();
}

void add_common(CLI::App* sub, Common& c, bool with_data, bool data_required) {
  sub->add_option("--config", c.config, "Scenario JSON file")->required();
  sub->add_option("--seed", c.seed, "Base seed (overrides the scenario)");
  sub->add_option("--out", c.out, "Output file (stdout when omitted)");
  sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  sub->add_option("--samples", c.samples, "Sample count N (overrides the scenario)");
  if (with_data) {
    auto* opt = sub->add_option("--data", c.data, "MeasurementSet JSON file");
    if (data_required) opt->required();
  }
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian identification of wall impedances in room acoustics", "roomimp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("roomimp ") + version_string());
  Common c;
  auto* mesh_info = app.add_subcommand("mesh-info", "Print the identification mesh of a scenario");
  auto* make_data = app.add_subcommand("make-data", "Generate a synthetic MeasurementSet");
  auto* identify_cmd = app.add_subcommand("identify", "Posterior summary for a MeasurementSet");
  auto* study_h = app.add_subcommand("study-h", "Discretization and pointwise error study");
  auto* study_n = app.add_subcommand("study-n", "Sampling error study");
  auto* sweep = app.add_subcommand("sweep", "Identification over a frequency range");
  add_common(mesh_info, c, false, false);
  add_common(make_data, c, false, false);
  add_common(identify_cmd, c, true, true);
  add_common(study_h, c, false, false);
  add_common(study_n, c, false, false);
  add_common(sweep, c, true, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "roomimp " << version_string() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    diagnose(err, "configuration", "usage", e.what());
    return kExitConfig;
  }

  try {
    const Scenario sc = load_with_overrides(c);
    const Emitter emitter(c.out, out);
    StudyOptions so{sc.seed, c.threads, c.samples};
    if (mesh_info->parsed()) {
      emitter.emit(header_lines(header_for("mesh-info", sc)) + mesh_info_text(sc));
    } else if (make_data->parsed()) {
      const MeasurementSet m = generate_data(sc, sc.seed);
      emitter.emit(measurement_file_text({m}, header_for("make-data", sc)));
    } else if (identify_cmd->parsed()) {
      const auto sets = load_measurements(c.data);
      if (sets.size() != 1) throw ConfigurationError("identify needs a file with exactly one measurement set");
      const Identification id = identify(sc, sets.front(), {sc.seed, c.threads, c.samples});
      emitter.emit(report_csv(id.report, header_for("identify", sc)));
    } else if (study_h->parsed()) {
      StudyResult r = study_discretization(sc, so);
      std::vector<int> levels = sc.study.levels;
      const StudyResult pw = study_pointwise(sc, levels, so);
      r.records.insert(r.records.end(), pw.records.begin(), pw.records.end());
      emitter.emit(study_csv(r, header_for("study-h", sc)));
    } else if (study_n->parsed()) {
      emitter.emit(study_csv(study_sampling(sc, so), header_for("study-n", sc)));
    } else if (sweep->parsed()) {
      std::optional<std::vector<MeasurementSet>> external;
      if (!c.data.empty()) external = load_measurements(c.data);
      const StudyResult r = study_sweep(sc, so, external ? &*external : nullptr);
      emitter.emit(study_csv(r, header_for("sweep", sc)));
    }
    return kExitOk;
  } catch (const DegenerateWeights& e) {
    diagnose(err, "numerical", "degenerate_weights", e.what(),
             " max_loglik=" + format_number(e.max_log_likelihood()));
    return kExitNumerical;
  } catch (const SingularSystem& e) {
    diagnose(err, "numerical", "singular_system", e.what());
    return kExitNumerical;
  } catch (const NumericalError& e) {
    diagnose(err, "numerical", "numerical", e.what());
    return kExitNumerical;
  } catch (const PlacementError& e) {
    diagnose(err, "configuration", "placement", e.what());
    return kExitConfig;
  } catch (const ConfigurationError& e) {
    diagnose(err, "configuration", "invalid_config", e.what());
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    diagnose(err, "configuration", "io", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    diagnose(err, "internal", "exception", e.what());
    return 1;
  }
}

}  // namespace roomimp::cli
