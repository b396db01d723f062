#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "s2v_test_cli";

struct Outcome {
  int code;
  std::string err;
};

Outcome run(const std::string& args) {
  const std::string cmd = std::string(S2V_CLI) + " " + args + " >" + (kRoot / "stdout").string() + " 2>" +
                          (kRoot / "stderr").string();
  const int status = std::system(cmd.c_str());
  std::ifstream in(kRoot / "stderr");
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string path(const std::string& rel) { return (kRoot / rel).string(); }

}  // namespace

TEST_CASE("cli runs are byte-identical on repeat") {
  fs::remove_all(kRoot);
  fs::create_directories(kRoot);
  std::ofstream(kRoot / "tiny.json")
      << R"({"net": {"hidden": [16, 16], "channels": [4, 4, 8], "feature_dim": 8},
            "sac": {"batch_size": 16, "warmup": 100, "eval_interval": 150, "eval_episodes": 2},
            "dagger": {"batch_size": 16, "eval_interval": 128, "eval_episodes": 2}})";
  const std::string common = "--env reach --seed 3 --config " + path("tiny.json");
  for (const char* dir : {"a", "b"}) {
    const std::string d = dir;
    REQUIRE(run("train-state " + common + " --steps 300 --out " + path(d + "/teacher")).code == 0);
    REQUIRE(run("distill " + common + " --steps 256 --teacher " + path(d + "/teacher/policy.ckpt") + " --out " +
                path(d + "/student"))
                .code == 0);
    REQUIRE(run("train-visual " + common + " --steps 300 --out " + path(d + "/visual")).code == 0);
  }
  for (const char* run_dir : {"teacher", "student", "visual"})
    for (const char* file : {"curve.csv", "policy.ckpt", "policy.ckpt.bin"}) {
      CAPTURE(run_dir);
      CAPTURE(file);
      const auto a = slurp(kRoot / "a" / run_dir / file);
      CHECK(!a.empty());
      CHECK(a == slurp(kRoot / "b" / run_dir / file));
    }
  CHECK(slurp(kRoot / "a/student/rounds.csv") == slurp(kRoot / "b/student/rounds.csv"));

  REQUIRE(run("eval --checkpoint " + path("a/student/policy.ckpt") + " --episodes 2 --out " + path("a/eval")).code ==
          0);
  CHECK(fs::exists(kRoot / "a/eval/eval.json"));
  REQUIRE(run("report --runs " + path("a") + " --out " + path("rep1")).code == 0);
  REQUIRE(run("report --runs " + path("a") + " --out " + path("rep2")).code == 0);
  for (const char* f : {"summary.csv", "curves_steps_offset.csv", "curves_wall.csv"})
    CHECK(slurp(kRoot / "rep1" / f) == slurp(kRoot / "rep2" / f));
}

TEST_CASE("cli errors exit nonzero with one diagnostic line") {
  fs::create_directories(kRoot);
  auto one_line = [](const std::string& s) { return !s.empty() && s.find('\n') == s.size() - 1; };

  auto bad_env = run("distill --env push --teacher " + path("a/teacher/policy.ckpt") + " --out " + path("x"));
  CHECK(bad_env.code != 0);
  CHECK(one_line(bad_env.err));
  CHECK(bad_env.err.find("reach") != std::string::npos);

  std::ofstream(kRoot / "typo.json") << R"({"sac": {"gama": 0.9}})";
  auto typo = run("train-state --env reach --out " + path("y") + " --config " + path("typo.json"));
  CHECK(typo.code != 0);
  CHECK(one_line(typo.err));
  CHECK(typo.err.find("sac.gama") != std::string::npos);

  for (const std::string args : {"train-state --env cartpole --out " + path("z"),
                                 "distill --env reach --out " + path("z"), std::string("bogus"),
                                 "report --runs " + path("typo.json") + " --out " + path("r")}) {
    CAPTURE(args);
    auto o = run(args);
    CHECK(o.code != 0);
    CHECK(one_line(o.err));
  }
}
