#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gihelm/field_io.hpp"
#include "gihelm/manifest.hpp"
#include "gihelm/neural_field.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using gihelm::testing::scratch_dir;
using nlohmann::json;

namespace {

struct Outcome {
  int code = -1;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome run(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(GIHELM_CLI) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " +
                          err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

json lens_config() {
  std::ifstream in(fs::path(GIHELM_CONFIG_DIR) / "lens_born.json");
  return json::parse(in);
}

json train_config(const std::string& mode) {
  json j = lens_config();
  j.erase("solver");
  j["medium"]["grid"] = {{"nz", 16}, {"nx", 16}, {"dz", 0.05}, {"dx", 0.05}};
  j["medium"]["center"] = {{"z", 0.4}, {"x", 0.4}};
  j["source"] = {{"z", 0.05}, {"x", 0.4}};
  j["train"] = {{"mode", mode},
                {"epochs", 40},
                {"n_x", 50},
                {"seed", 5},
                {"eval_every", 10},
                {"network", {{"width", 8}, {"hidden_layers", 2}}},
                {"pool", {{"n_pool", 200}, {"n_raw", 800}}}};
  return j;
}

fs::path write_config(const fs::path& dir, const json& j, const std::string& name = "run.json") {
  std::ofstream(dir / name) << j.dump(2);
  return dir / name;
}

std::string cfg_args(const fs::path& cfg, const fs::path& out) {
  return "--config " + cfg.string() + " --out-dir " + out.string();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(CliSolve, HomogeneousGivesZeroSolution) {
  const auto dir = scratch_dir("cli_homog");
  json j = lens_config();
  j["medium"]["kind"] = "homogeneous";
  j["medium"].erase("center");
  j["medium"].erase("sigma");
  j["medium"].erase("contrast");
  j["solver"] = {{"method", "direct"}};
  const Outcome o = run("solve " + cfg_args(write_config(dir, j), dir / "out"), dir);
  ASSERT_EQ(o.code, 0) << o.err;
  const auto f = gihelm::read_field(dir / "out" / "solution.gihf");
  EXPECT_EQ(f.grid.nz, 48u);
  for (const auto& c : f.values) ASSERT_EQ(c, gihelm::cplx{});
}

TEST(CliSolve, BornConvergesOnWeakLens) {
  const auto dir = scratch_dir("cli_born");
  const auto cfg = write_config(dir, lens_config());
  const Outcome o = run("solve " + cfg_args(cfg, dir / "out"), dir);
  ASSERT_EQ(o.code, 0) << o.err;
  const auto rows = lines(slurp(dir / "out" / "trace.csv"));
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(rows[0], "step,residual_norm,elapsed_ms\r");
  const double r0 = std::stod(rows[1].substr(rows[1].find(',') + 1));
  const double rn = std::stod(rows.back().substr(rows.back().find(',') + 1));
  // b is the first residual; tol defaults are taken from the config.
  EXPECT_LE(rn, 1e-8 * r0);
}

TEST(CliSolve, BornDivergesOnHighContrastLens) {
  const auto dir = scratch_dir("cli_born_div");
  const auto cfg = fs::path(GIHELM_CONFIG_DIR) / "lens_born_divergent.json";
  const Outcome o = run("solve " + cfg_args(cfg, dir / "out"), dir);
  EXPECT_EQ(o.code, 2) << o.err;
  const auto rows = lines(slurp(dir / "out" / "trace.csv"));
  ASSERT_GE(rows.size(), 3u);
  const double r0 = std::stod(rows[1].substr(rows[1].find(',') + 1));
  const double rn = std::stod(rows.back().substr(rows.back().find(',') + 1));
  EXPECT_GT(rn, 1e6 * r0);
}

TEST(CliSolve, ManifestChecksumsOutputs) {
  const auto dir = scratch_dir("cli_manifest");
  const auto cfg = write_config(dir, lens_config());
  ASSERT_EQ(run("solve " + cfg_args(cfg, dir / "out"), dir).code, 0);
  const json m = read_json(dir / "out" / "manifest.json");
  EXPECT_EQ(m["command"], "solve");
  EXPECT_EQ(m["config"], lens_config());
  ASSERT_EQ(m["outputs"].size(), 3u);
  for (const auto& f : m["outputs"]) {
    EXPECT_EQ(f["sha1"], gihelm::git_blob_sha1(slurp(dir / "out" / f["path"].get<std::string>())));
  }
  EXPECT_EQ(m["inputs"][0]["sha1"], gihelm::git_blob_sha1(slurp(cfg)));
}

TEST(CliSolve, LandweberMatchesDirect) {
  const auto dir = scratch_dir("cli_landweber");
  json j = lens_config();
  j["solver"] = {{"method", "landweber"}, {"max_iters", 2000}, {"tol", 1e-9}};
  ASSERT_EQ(run("solve " + cfg_args(write_config(dir, j), dir / "lw"), dir).code, 0);
  j["solver"] = {{"method", "direct"}};
  ASSERT_EQ(run("solve " + cfg_args(write_config(dir, j), dir / "dir"), dir).code, 0);
  const auto a = gihelm::read_field(dir / "lw" / "solution.gihf");
  const auto b = gihelm::read_field(dir / "dir" / "solution.gihf");
  EXPECT_LT(gihelm::testing::rel_l2(a.values, b.values), 1e-6);
}

TEST(CliErrors, UnknownKeyExitsOneNamingField) {
  const auto dir = scratch_dir("cli_unknown");
  json j = lens_config();
  j["solver"]["maxiters"] = 10;
  const Outcome o = run("solve " + cfg_args(write_config(dir, j), dir / "out"), dir);
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("/solver/maxiters"), std::string::npos) << o.err;
}

TEST(CliErrors, SyntaxErrorExitsOneNamingLine) {
  const auto dir = scratch_dir("cli_syntax");
  std::ofstream(dir / "bad.json") << "{\n  \"medium\": {\n    \"kind\": ,\n  }\n}\n";
  const Outcome o = run("solve " + cfg_args(dir / "bad.json", dir / "out"), dir);
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("line 3"), std::string::npos) << o.err;
}

TEST(CliErrors, MissingVelocityFileNamesPath) {
  const auto dir = scratch_dir("cli_missing_vel");
  json j = train_config("gi");
  j["medium"] = {{"kind", "file"}, {"velocity_file", "absent_model.f32"}, {"sidecar_file", "absent_model.json"}};
  const Outcome o = run("train " + cfg_args(write_config(dir, j), dir / "out"), dir);
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("absent_model"), std::string::npos) << o.err;
}

TEST(CliErrors, MissingConfigFile) {
  const auto dir = scratch_dir("cli_missing_cfg");
  const Outcome o = run("solve " + cfg_args(dir / "nope.json", dir / "out"), dir);
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("nope.json"), std::string::npos) << o.err;
}

TEST(CliErrors, UnknownSubcommand) {
  const auto dir = scratch_dir("cli_usage");
  EXPECT_EQ(run("frobnicate", dir).code, 1);
  EXPECT_EQ(run("", dir).code, 1);
}

TEST(CliRender, CorruptMagicExitsOne) {
  const auto dir = scratch_dir("cli_render_bad");
  std::ofstream(dir / "f.gihf") << "NOPE and some more bytes";
  const Outcome o = run("render --field " + (dir / "f.gihf").string() + " --out " + (dir / "f.pgm").string(), dir);
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("magic"), std::string::npos) << o.err;
}

TEST(CliRender, DeterministicBytes) {
  const auto dir = scratch_dir("cli_render");
  ASSERT_EQ(run("solve " + cfg_args(write_config(dir, lens_config()), dir), dir).code, 0);
  const std::string field = (dir / "solution.gihf").string();
  for (const char* part : {"re", "im", "abs"}) {
    ASSERT_EQ(run("render --field " + field + " --out " + (dir / "a.pgm").string() + " --part " + part, dir).code, 0);
    ASSERT_EQ(run("render --field " + field + " --out " + (dir / "b.pgm").string() + " --part " + part, dir).code, 0);
    const std::string a = slurp(dir / "a.pgm");
    EXPECT_EQ(a, slurp(dir / "b.pgm"));
    EXPECT_EQ(a.substr(0, 13), "P5\n48 48\n255\n");
    EXPECT_EQ(a.size(), 13u + 48 * 48);
  }
}

TEST(CliTrain, WritesArtifacts) {
  const auto dir = scratch_dir("cli_train");
  const Outcome o = run("train " + cfg_args(write_config(dir, train_config("hybrid")), dir / "out"), dir);
  ASSERT_EQ(o.code, 0) << o.err;
  for (const char* f : {"checkpoint.gihn", "loss.csv", "nmse.csv", "prediction.gihf", "reference.gihf", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  }
  EXPECT_EQ(lines(slurp(dir / "out" / "loss.csv")).size(), 41u);
  EXPECT_EQ(lines(slurp(dir / "out" / "nmse.csv")).size(), 6u);
  const auto net = gihelm::load_checkpoint(dir / "out" / "checkpoint.gihn");
  EXPECT_EQ(net.shape().width, 8u);
  const json m = read_json(dir / "out" / "manifest.json");
  EXPECT_EQ(m["seed"], 5);
  EXPECT_EQ(m["outputs"].size(), 5u);
}

TEST(CliTrain, OverridesApply) {
  const auto dir = scratch_dir("cli_train_override");
  const auto cfg = write_config(dir, train_config("gi"));
  ASSERT_EQ(run("train " + cfg_args(cfg, dir / "out") + " --epochs-override 15 --seed-override 99", dir).code, 0);
  EXPECT_EQ(lines(slurp(dir / "out" / "loss.csv")).size(), 16u);
  EXPECT_EQ(read_json(dir / "out" / "manifest.json")["seed"], 99);
}

TEST(CliTrain, SameSeedSameCurves) {
  const auto dir = scratch_dir("cli_train_repro");
  const auto cfg = write_config(dir, train_config("hybrid"));
  ASSERT_EQ(run("train " + cfg_args(cfg, dir / "a"), dir).code, 0);
  ASSERT_EQ(run("train " + cfg_args(cfg, dir / "b"), dir).code, 0);
  for (const char* f : {"loss.csv", "nmse.csv", "checkpoint.gihn", "prediction.gihf"}) {
    EXPECT_EQ(gihelm::git_blob_sha1(slurp(dir / "a" / f)), gihelm::git_blob_sha1(slurp(dir / "b" / f))) << f;
  }
  ASSERT_EQ(run("train " + cfg_args(cfg, dir / "c") + " --seed-override 6", dir).code, 0);
  EXPECT_NE(slurp(dir / "a" / "loss.csv"), slurp(dir / "c" / "loss.csv"));
}

TEST(CliTrain, ZeroLambdaHybridMatchesGi) {
  const auto dir = scratch_dir("cli_train_lambda0");
  json h = train_config("hybrid");
  h["train"]["lambda_max"] = 0.0;
  ASSERT_EQ(run("train " + cfg_args(write_config(dir, h, "h.json"), dir / "h"), dir).code, 0);
  ASSERT_EQ(run("train " + cfg_args(write_config(dir, train_config("gi"), "g.json"), dir / "g"), dir).code, 0);
  EXPECT_EQ(slurp(dir / "h" / "nmse.csv"), slurp(dir / "g" / "nmse.csv"));
}

TEST(CliTrain, NonFiniteLossExitsThreeWithCheckpoint) {
  const auto dir = scratch_dir("cli_train_nan");
  json j = train_config("gi");
  j["train"]["output_scale"] = 1e300;
  const Outcome o = run("train " + cfg_args(write_config(dir, j), dir / "out"), dir);
  EXPECT_EQ(o.code, 3) << o.err;
  EXPECT_NE(o.err.find("non-finite"), std::string::npos) << o.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "checkpoint.gihn"));
  EXPECT_NO_THROW(gihelm::load_checkpoint(dir / "out" / "checkpoint.gihn"));
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
}

TEST(CliDump, KernelAndPool) {
  const auto dir = scratch_dir("cli_dump");
  const auto cfg = write_config(dir, train_config("hybrid"));
  ASSERT_EQ(run("kernel-dump " + cfg_args(cfg, dir / "k"), dir).code, 0);
  const auto k = gihelm::read_field(dir / "k" / "kernel.gihf");
  EXPECT_GE(k.grid.nz, 31u);
  EXPECT_GE(k.grid.nx, 31u);
  ASSERT_EQ(run("pool-dump " + cfg_args(cfg, dir / "p"), dir).code, 0);
  const auto rows = lines(slurp(dir / "p" / "pool.csv"));
  ASSERT_EQ(rows.size(), 201u);
  EXPECT_EQ(rows[0], "z,x,z_norm,x_norm,dm,u0_re,u0_im\r");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(std::count(rows[i].begin(), rows[i].end(), ','), 6);
}
