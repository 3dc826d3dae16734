#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "roomimp/fem.hpp"
#include "roomimp/io.hpp"
#include "roomimp/scenario.hpp"
#include "roomimp_cli/cli.hpp"

using namespace roomimp;
namespace fs = std::filesystem;

namespace {

const fs::path kData = ROOMIMP_TEST_DATA_DIR;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run_command(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("roomimp_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json(const fs::path& p, const nlohmann::json& j) {
  std::ofstream out(p);
  out << j.dump(2);
}

}  // namespace

TEST(Cli, MissingConfigIsUsageError) {
  const auto dir = scratch("noconfig");
  const auto r = run({"identify", "--data", "x.json", "--out", (dir / "r.csv").string()});
  EXPECT_EQ(r.code, cli::kExitConfig);
  EXPECT_NE(r.err.find("roomimp: error=configuration type=usage"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "r.csv"));
}

TEST(Cli, UnknownFlagAndSubcommand) {
  const auto cfg = (kData / "room2d_small.json").string();
  EXPECT_EQ(run({"mesh-info", "--config", cfg, "--bogus", "1"}).code, cli::kExitConfig);
  EXPECT_EQ(run({"frobnicate", "--config", cfg}).code, cli::kExitConfig);
  EXPECT_EQ(run({}).code, cli::kExitConfig);
}

TEST(Cli, HelpAndVersion) {
  const auto h = run({"--help"});
  EXPECT_EQ(h.code, cli::kExitOk);
  EXPECT_NE(h.out.find("identify"), std::string::npos);
  const auto v = run({"--version"});
  EXPECT_EQ(v.code, cli::kExitOk);
  EXPECT_EQ(v.out, std::string("roomimp ") + version_string() + "\n");
}

TEST(Cli, MissingOutputDirectory) {
  const auto dir = scratch("missingdir");
  const auto r = run({"make-data", "--config", (kData / "room2d_small.json").string(), "--out",
                      (dir / "nope" / "y.json").string()});
  EXPECT_EQ(r.code, cli::kExitConfig);
  EXPECT_NE(r.err.find("type=invalid_config"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "nope"));
}

TEST(Cli, BadConfigFile) {
  const auto dir = scratch("badcfg");
  std::ofstream(dir / "bad.json") << "{\"room\": [3]}";
  const auto r = run({"mesh-info", "--config", (dir / "bad.json").string()});
  EXPECT_EQ(r.code, cli::kExitConfig);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, MeshInfo) {
  const auto r = run({"mesh-info", "--config", (kData / "room2d_small.json").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("# tool=roomimp ", 0), 0u);
  EXPECT_NE(r.out.find("cells=9x11"), std::string::npos);
  EXPECT_NE(r.out.find("patch1_measure=3.5"), std::string::npos);
}

TEST(Cli, MakeDataThenIdentifyIsByteIdentical) {
  const auto dir = scratch("identify");
  const auto cfg = (kData / "room2d_small.json").string();
  ASSERT_EQ(run({"make-data", "--config", cfg, "--seed", "11", "--out", (dir / "y.json").string()}).code, 0);
  ASSERT_EQ(run({"make-data", "--config", cfg, "--seed", "11", "--out", (dir / "y2.json").string()}).code, 0);
  EXPECT_EQ(slurp(dir / "y.json"), slurp(dir / "y2.json"));
  const auto data = (dir / "y.json").string();
  const auto a = run({"identify", "--config", cfg, "--data", data, "--seed", "3", "--threads", "1",
                      "--out", (dir / "a.csv").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(run({"identify", "--config", cfg, "--data", data, "--seed", "3", "--threads", "1", "--out",
                 (dir / "b.csv").string()}).code, 0);
  ASSERT_EQ(run({"identify", "--config", cfg, "--data", data, "--seed", "3", "--threads", "4", "--out",
                 (dir / "c.csv").string()}).code, 0);
  const auto text = slurp(dir / "a.csv");
  EXPECT_FALSE(text.empty());
  EXPECT_EQ(text, slurp(dir / "b.csv"));
  EXPECT_EQ(text, slurp(dir / "c.csv"));
  EXPECT_NE(text.find("# seed=3\n# command=identify\nkey,patch,value\n"), std::string::npos);
  const auto to_stdout = run({"identify", "--config", cfg, "--data", data, "--seed", "3"});
  EXPECT_EQ(to_stdout.out, text);
}

TEST(Cli, IdentifyRequiresData) {
  const auto r = run({"identify", "--config", (kData / "room2d_small.json").string()});
  EXPECT_EQ(r.code, cli::kExitConfig);
}

TEST(Cli, DegenerateDataExitsNumerical) {
  const auto dir = scratch("degenerate");
  const auto cfg = (kData / "room2d_small.json").string();
  ASSERT_EQ(run({"make-data", "--config", cfg, "--out", (dir / "y.json").string()}).code, 0);
  auto j = nlohmann::json::parse(slurp(dir / "y.json"));
  for (auto& v : j["sets"][0]["y"]) v = {1e4, -1e4};
  write_json(dir / "bad.json", j);
  const auto r = run({"identify", "--config", cfg, "--data", (dir / "bad.json").string(), "--out",
                      (dir / "r.csv").string()});
  EXPECT_EQ(r.code, cli::kExitNumerical);
  EXPECT_NE(r.err.find("error=numerical type=degenerate_weights max_loglik=-"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "r.csv"));
}

TEST(Cli, SweepRecordsResonanceAndContinues) {
  const auto dir = scratch("sweep");
  Scenario sc = scenario_from_json(nlohmann::json::parse(slurp(kData / "room2d_small.json")));
  sc.room = {1.0, 1.0};
  sc.source = {0.3, 0.4, 0.0};
  sc.mics = {0.1, 0.1, 2};
  sc.patches.robin_faces.clear();
  sc.prior.patches.clear();
  sc.z_ref = ImpedanceSample{};
  sc.mesh_rule.explicit_h = 0.5;
  sc.data_mesh = DataMeshPolicy::kSame;
  sc.samples = 4;
  sc.runs = 1;
  const auto ops = assemble_operators(sc.identification_mesh(100.0));
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(ops.stiffness.real()),
                                                              Eigen::MatrixXd(ops.mass.real()));
  const double f_res = sc.physics.c * std::sqrt(es.eigenvalues()[1]) / (2.0 * std::numbers::pi);
  sc.frequency.reset();
  sc.sweep = SweepRange{f_res, 1.05 * f_res, 0.05 * f_res};
  write_json(dir / "res.json", scenario_to_json(sc));
  const auto r = run({"sweep", "--config", (dir / "res.json").string(), "--out", (dir / "s.csv").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const auto text = slurp(dir / "s.csv");
  EXPECT_NE(text.find(std::string(kStudyColumns) + "\n"), std::string::npos);
  EXPECT_NE(text.find(",failed\n"), std::string::npos);
  EXPECT_NE(text.find(",max_loglik,"), std::string::npos);
}

TEST(Cli, OutDirEnvironmentPrefix) {
  const auto dir = scratch("envdir");
  ::setenv("ROOMIMP_OUT_DIR", dir.c_str(), 1);
  const auto r = run({"mesh-info", "--config", (kData / "room2d_small.json").string(), "--out", "m.txt"});
  ::unsetenv("ROOMIMP_OUT_DIR");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "m.txt"));
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, StudyCommandsEmitCsv) {
  const auto cfg = (kData / "room2d_small.json").string();
  const auto n = run({"study-n", "--config", cfg, "--samples", "64"});
  ASSERT_EQ(n.code, 0) << n.err;
  EXPECT_NE(n.out.find("# command=study-n\n" + std::string(kStudyColumns) + "\nsampling,"), std::string::npos);
  const auto h = run({"study-h", "--config", cfg, "--samples", "64"});
  ASSERT_EQ(h.code, 0) << h.err;
  EXPECT_NE(h.out.find("\ndiscretization,"), std::string::npos);
  EXPECT_NE(h.out.find("\npointwise,"), std::string::npos);
}
