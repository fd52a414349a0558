#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "fmqed/cli.hpp"

namespace fs = std::filesystem;
using namespace fmqed;

namespace {

std::string env(const char* name) {
  const char* v = std::getenv(name);
  REQUIRE_MESSAGE(v != nullptr, name << " is not set");
  return v;
}

std::string cfg(const std::string& name) { return env("FMQED_CONFIGS") + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fmqed_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args) {
  const std::string cmd = env("FMQED_CLI") + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// every CSV in a is byte-identical to its namesake in b
void same_csv(const fs::path& a, const fs::path& b) {
  int count = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    ++count;
    const fs::path other = b / e.path().filename();
    REQUIRE(fs::exists(other));
    CHECK_MESSAGE(slurp(e.path()) == slurp(other), e.path().filename());
  }
  CHECK(count > 0);
}

}  // namespace

TEST_CASE("subcommand list") {
  const auto& names = subcommand_names();
  for (const char* n : {"modes", "coulomb-limit", "riemann", "fock-spectrum", "action-eval", "propagate",
                        "residual", "rho-star", "g-equivalence"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
}

TEST_CASE("usage errors and version") {
  CHECK(run("") == kExitUsage);
  CHECK(run("no-such-command") == kExitUsage);
  CHECK(run("modes") == kExitUsage);
  CHECK(run("--version") == kExitOk);
  CHECK(run("--jobs 0 modes " + cfg("modes.cfg")) == kExitUsage);
}

TEST_CASE("configuration errors") {
  const fs::path out = scratch("bad");
  CHECK(run("modes " + cfg("invalid_cutoffs.cfg") + " --out " + out.string()) == kExitConfig);
  CHECK(run("modes /nonexistent/file.cfg --out " + out.string()) == kExitConfig);
}

TEST_CASE("modes: outputs, manifest and byte-identical rerun") {
  const fs::path a = scratch("modes_a"), b = scratch("modes_b");
  REQUIRE(run("modes " + cfg("modes.cfg") + " --out " + a.string()) == kExitOk);
  REQUIRE(run("modes " + cfg("modes.cfg") + " --out " + b.string()) == kExitOk);
  CHECK(fs::exists(a / "modes_3.csv"));
  CHECK(fs::exists(a / "field_legend.csv"));
  REQUIRE(fs::exists(a / "manifest.json"));
  same_csv(a, b);
  const RunManifest m = RunManifest::from_json(nlohmann::json::parse(slurp(a / "manifest.json")));
  CHECK(m.subcommand == "modes");
  CHECK(m.version == version_string());
  CHECK(m.config.at("M") == "1 1 2");
  CHECK_FALSE(m.outputs.empty());
}

TEST_CASE("action-eval hand value") {
  const fs::path a = scratch("action");
  REQUIRE(run("action-eval " + cfg("action_eval.cfg") + " --out " + a.string()) == kExitOk);
  const auto j = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(j["summary"]["total"].get<double>() == doctest::Approx(2.5).epsilon(1e-10));
}

TEST_CASE("replay reproduces a run") {
  const fs::path a = scratch("res_a"), b = scratch("res_b");
  REQUIRE(run("--seed 7 residual " + cfg("residual.cfg") + " --out " + a.string()) == kExitOk);
  REQUIRE(run("replay " + (a / "manifest.json").string() + " --out " + b.string()) == kExitOk);
  same_csv(a, b);
  const auto j = nlohmann::json::parse(slurp(b / "manifest.json"));
  CHECK(j["seed"].get<std::uint64_t>() == 7);
}

TEST_CASE("in-process runner") {
  const fs::path a = scratch("inproc");
  const KeyValueFile kv = KeyValueFile::parse("L = 6.283185307179586\nmode_select = 1 0 0\nfock.cap = 1\n");
  const RunManifest m = run_subcommand("fock-spectrum", kv, a.string(), {});
  CHECK(fs::exists(a / "spectrum.csv"));
  CHECK(fs::exists(a / "sparsity.json"));
  CHECK(m.summary.is_object());
}
