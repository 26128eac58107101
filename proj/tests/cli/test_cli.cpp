#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string err;
};

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("lsvqc_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliRun lsvqc(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = env + " " + LSVQC_CLI + " " + args + " 2> " + err.string() + " > /dev/null";
  const int st = std::system(cmd.c_str());
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(err)};
}

fs::path write_config(const fs::path& dir, const json& j, const std::string& name = "config.json") {
  std::ofstream(dir / name) << j.dump(2);
  return dir / name;
}

json heisenberg4() {
  return {
      {"seed", 3},
      {"model", {{"preset", "heisenberg"}, {"L", 4}}},
      {"state", {{"prep", "neel"}}},
      {"compile",
       {{"tau", 0.1},
        {"target_r", 20},
        {"L_tilde", 4},
        {"mode", "full_size"},
        {"ansatz", {{"family", "brickwall"}, {"depth", 1}}},
        {"subspace", {{"kind", "krylov"}, {"N_t", 1}, {"dt", 0.5}}},
        {"optimizer", {{"max_iter", 50}}}}},
      {"dynamics", {{"n_steps", 5}, {"observable", "state_infidelity"}, {"trotter_r", {1, 20}}}},
  };
}

json hubbard4() {
  return {
      {"model", {{"preset", "sr2cuo3"}, {"L", 4}}},
      {"state", {{"prep", "givens"}}},
      {"compile",
       {{"tau", 0.1},
        {"L_tilde", 4},
        {"ansatz", {{"family", "vha"}, {"depth", 1}}},
        {"subspace", {{"kind", "krylov"}, {"N_t", 0}}},
        {"optimizer", {{"max_iter", 20}}}}},
      {"dynamics", {{"n_steps", 3}, {"observable", "double_occupation"}, {"trotter_r", {1}}}},
  };
}

std::vector<std::string> data_lines(const fs::path& csv) {
  std::ifstream in(csv);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

}  // namespace

TEST(Cli, CompileWritesResultAndIsDeterministic) {
  const auto dir = scratch("det");
  const auto cfg = write_config(dir, heisenberg4());
  ASSERT_EQ(lsvqc("compile --config " + cfg.string() + " --out " + (dir / "a").string(), dir).code, 0);
  ASSERT_EQ(lsvqc("compile --config " + cfg.string() + " --out " + (dir / "b").string(), dir).code, 0);
  for (const char* f : {"compile_result.json", "circuit.json"}) {
    ASSERT_TRUE(fs::exists(dir / "a" / f)) << f;
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  const json r = json::parse(slurp(dir / "a" / "compile_result.json"));
  EXPECT_LT(r["final_cost"].get<double>(), r["initial_cost"].get<double>());
  EXPECT_EQ(r["theta"].size(), 10u);
}

TEST(Cli, ZeroTimeConvergesImmediately) {
  const auto dir = scratch("tau0");
  json j = heisenberg4();
  j["compile"]["tau"] = 0.0;
  const auto cfg = write_config(dir, j);
  ASSERT_EQ(lsvqc("compile --config " + cfg.string() + " --out " + dir.string(), dir).code, 0);
  const json r = json::parse(slurp(dir / "compile_result.json"));
  EXPECT_EQ(r["iterations"].get<int>(), 0);
  EXPECT_LT(r["final_cost"].get<double>(), 1e-14);
}

TEST(Cli, MissingFieldNamesIt) {
  const auto dir = scratch("missing");
  json j = heisenberg4();
  j["compile"].erase("tau");
  const auto cfg = write_config(dir, j);
  const CliRun r = lsvqc("compile --config " + cfg.string() + " --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("compile.tau"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir / "compile_result.json"));
}

TEST(Cli, UnknownKeyRejected) {
  const auto dir = scratch("unknown");
  json j = heisenberg4();
  j["compile"]["ansatz"]["width"] = 3;
  const auto cfg = write_config(dir, j);
  const CliRun r = lsvqc("compile --config " + cfg.string() + " --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("compile.ansatz.width"), std::string::npos) << r.err;
}

TEST(Cli, BadFlagsAndMissingConfigFile) {
  const auto dir = scratch("flags");
  EXPECT_EQ(lsvqc("compile --config " + (dir / "nope.json").string(), dir).code, 1);
  EXPECT_EQ(lsvqc("frobnicate", dir).code, 1);
  EXPECT_EQ(lsvqc("--help", dir).code, 0);
}

TEST(Cli, StallExitsTwo) {
  const auto dir = scratch("stall");
  json j = heisenberg4();
  j["compile"]["optimizer"]["max_iter"] = 1;
  j["compile"]["init"] = "zero";
  const auto cfg = write_config(dir, j);
  const CliRun r = lsvqc("compile --config " + cfg.string() + " --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_TRUE(fs::exists(dir / "compile_result.json"));
}

TEST(Cli, DynamicsColumnsAndIdenticalCircuitsGiveZeroError) {
  const auto dir = scratch("dyn");
  json j = heisenberg4();
  j["dynamics"]["trotter_r"] = {1, 20};  // r=20 is the reference circuit itself
  const auto cfg = write_config(dir, j);
  ASSERT_EQ(lsvqc("dynamics --config " + cfg.string() + " --out " + dir.string(), dir).code, 0);
  const auto lines = data_lines(dir / "dynamics.csv");
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "t,exact,lsvqc,trot_r1,trot_r20");
  const json s = json::parse(slurp(dir / "dynamics_summary.json"));
  EXPECT_LT(s["values"]["trot_r20"].get<double>(), 1e-13);  // 1 - |<v|v>| up to rounding
  EXPECT_GT(s["values"]["trot_r1"].get<double>(), 0.0);
  EXPECT_TRUE(s.contains("depth_compression"));
}

TEST(Cli, ZeroStepsGivesHeaderOnlyCsv) {
  const auto dir = scratch("zero");
  json j = heisenberg4();
  j["dynamics"]["n_steps"] = 0;
  const auto cfg = write_config(dir, j);
  ASSERT_EQ(lsvqc("dynamics --config " + cfg.string() + " --out " + dir.string(), dir).code, 0);
  const auto lines = data_lines(dir / "dynamics.csv");
  ASSERT_EQ(lines.size(), 1u);
  const std::string all = slurp(dir / "dynamics.csv");
  EXPECT_EQ(all.rfind("# lsvqc ", 0), 0u);
  EXPECT_NE(all.find("config_hash="), std::string::npos);
}

TEST(Cli, CircuitFileRoundTrip) {
  const auto dir = scratch("roundtrip");
  const auto cfg = write_config(dir, heisenberg4());
  ASSERT_EQ(lsvqc("dynamics --config " + cfg.string() + " --out " + (dir / "inline").string(), dir).code, 0);
  json j = heisenberg4();
  j["circuit_file"] = "inline/compile_result.json";
  const auto cfg2 = write_config(dir, j, "reuse.json");
  ASSERT_EQ(lsvqc("dynamics --config " + cfg2.string() + " --out " + (dir / "reuse").string(), dir).code, 0);
  const auto a = data_lines(dir / "inline" / "dynamics.csv"), b = data_lines(dir / "reuse" / "dynamics.csv");
  EXPECT_EQ(a, b);

  j["circuit_file"] = "absent.json";
  const auto cfg3 = write_config(dir, j, "absent.json.cfg");
  EXPECT_EQ(lsvqc("dynamics --config " + cfg3.string() + " --out " + (dir / "absent").string(), dir).code, 1);
}

TEST(Cli, SectorCapExitsThree) {
  const auto dir = scratch("cap");
  const auto cfg = write_config(dir, hubbard4());
  ASSERT_EQ(lsvqc("dynamics --config " + cfg.string() + " --out " + dir.string(), dir).code, 0);
  const CliRun r = lsvqc("dynamics --config " + cfg.string() + " --out " + dir.string(), dir, "LSVQC_SECTOR_CAP=4");
  EXPECT_EQ(r.code, 3) << r.err;
}

TEST(Cli, GfRejectsEmptyTimeGrid) {
  const auto dir = scratch("gf0");
  json j = hubbard4();
  j.erase("dynamics");
  j["gf"] = {{"n_steps", 0}};
  const auto cfg = write_config(dir, j);
  const CliRun r = lsvqc("gf --config " + cfg.string() + " --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("gf.n_steps"), std::string::npos) << r.err;
}

TEST(Cli, GfSmallRunWritesSpectra) {
  const auto dir = scratch("gf");
  json j = hubbard4();
  j.erase("dynamics");
  j["compile"]["subspace"] = {{"kind", "gf_krylov"}, {"N_t", 0}};
  j["gf"] = {{"n_steps", 20}, {"momenta", {1}}, {"trotter_r", {1}}, {"n_omega", 10}};
  const auto cfg = write_config(dir, j);
  ASSERT_EQ(lsvqc("gf --config " + cfg.string() + " --out " + dir.string(), dir).code, 0);
  EXPECT_EQ(data_lines(dir / "gf_k1.csv").size(), 22u);
  EXPECT_EQ(data_lines(dir / "spectrum_k1.csv").size(), 22u);
  EXPECT_EQ(data_lines(dir / "dos.csv").size(), 22u);
  const json s = json::parse(slurp(dir / "gf_summary.json"));
  EXPECT_LT(s["equal_time_error"].get<double>(), 1e-12);
}

TEST(Cli, ResourcesSinglePointAndNonSquare) {
  const auto dir = scratch("res");
  json j = {{"resources", {{"hubbard2d", {{"L", {25}}, {"schemes", {"average"}}}}}}};
  const auto cfg = write_config(dir, j);
  ASSERT_EQ(lsvqc("resources --config " + cfg.string() + " --out " + dir.string(), dir).code, 0);
  const auto lines = data_lines(dir / "hubbard2d.csv");
  ASSERT_EQ(lines.size(), 3u);  // header, trotter, lsvqc
  EXPECT_NE(lines[1].find(",trotter,average,500,"), std::string::npos) << lines[1];
  EXPECT_NE(lines[1].find(",270000,"), std::string::npos) << lines[1];

  j["resources"]["hubbard2d"]["L"] = {24};
  const auto bad = write_config(dir, j, "bad.json");
  EXPECT_EQ(lsvqc("resources --config " + bad.string() + " --out " + dir.string(), dir).code, 1);
}

TEST(Cli, ShippedTableConfigRuns) {
  const auto dir = scratch("table2");
  ASSERT_EQ(lsvqc(std::string("resources --config ") + LSVQC_SOURCE_DIR + "/configs/table2.json --out " + dir.string(),
                  dir)
                .code,
            0);
  const json s = json::parse(slurp(dir / "resources.json"));
  EXPECT_EQ(s["reference_cells"].get<int>(), 40);
  EXPECT_EQ(data_lines(dir / "table2.csv").size(), 21u);
}
