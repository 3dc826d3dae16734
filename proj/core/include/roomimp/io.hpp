#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "roomimp/bayes.hpp"
#include "roomimp/harness.hpp"

namespace roomimp {

const char* version_string();

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// Hash of the canonical JSON form of a scenario.
std::uint64_t config_hash(const Scenario& sc);

/// %.17g, with "nan", "inf" and "-inf" for non-finite values.
std::string format_number(double x);

struct OutputHeader {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

/// "# key=value" lines: tool, config_hash, seed, command.
std::string header_lines(const OutputHeader& h);

/// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view content);

nlohmann::json measurement_to_json(const MeasurementSet& m);
MeasurementSet measurement_from_json(const nlohmann::json& j);

/// JSON with a "header" block and a "sets" array.
std::string measurement_file_text(const std::vector<MeasurementSet>& sets, const OutputHeader& h);
/// Accepts a single set object or an object with a "sets" array.
std::vector<MeasurementSet> load_measurements(const std::filesystem::path& path);

/// key,patch,value rows after the provenance header.
std::string report_csv(const PosteriorReport& r, const OutputHeader& h);

inline constexpr const char* kStudyColumns =
    "study,f_hz,h,h_max,N,run,param,value,error,max_loglik,seed,status";

std::string study_csv(const StudyResult& r, const OutputHeader& h);

}  // namespace roomimp
