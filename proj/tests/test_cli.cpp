#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(VIGIL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') ++n;
  return n;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("exit codes") {
    CHECK(run("--version") == 0);
    CHECK(run("nosuchcommand") == 2);
    CHECK(run("eval --out /tmp/vigil_cli_r.json --set run.sed=1") == 2);
    CHECK(run("eeg-features --in /nonexistent.csv --out /tmp/x.csv") == 3);
    CHECK(run("detect --in /nonexistent.csv --out /tmp/x.jsonl") == 3);
  }

  TEST_CASE("stage commands chain together") {
    const fs::path dir = fs::temp_directory_path() / "vigil_cli_test";
    fs::remove_all(dir);
    const std::string d = dir.string();
    REQUIRE(run("synth --seed 3 --duration 200 --out " + d) == 0);
    CHECK(fs::exists(dir / "forehead.csv"));
    CHECK(fs::exists(dir / "gaze.jsonl"));
    CHECK(lines(dir / "truth_perclos.csv") == 26);  // header + 25 windows

    REQUIRE(run("separate --in " + d + "/forehead.csv --method minus --out " + d + "/eog.csv") == 0);
    REQUIRE(run("detect --in " + d + "/eog.csv --out " + d + "/events.jsonl") == 0);
    CHECK(lines(dir / "events.jsonl") > 10);
    REQUIRE(run("eog-features --events " + d + "/events.jsonl --duration 200 --out " + d + "/eogf.csv") == 0);
    CHECK(lines(dir / "eogf.csv") == 26);
    REQUIRE(run("eeg-features --in " + d + "/forehead.csv --banding 5band --out " + d + "/eegf.csv") == 0);
    REQUIRE(run("label --gaze " + d + "/gaze.jsonl --duration 200 --out " + d + "/labels.csv") == 0);
    REQUIRE(run("fuse " + d + "/eogf.csv " + d + "/eegf.csv --out " + d + "/fused.csv") == 0);
    REQUIRE(run("train --features " + d + "/fused.csv --labels " + d + "/labels.csv --model svr --out " + d +
                "/model.json --set svr.c_exp=0:2 --set svr.g_exp=-4:-2") == 0);
    REQUIRE(run("predict --model " + d + "/model.json --features " + d + "/fused.csv --out " + d + "/pred.csv") == 0);
    CHECK(lines(dir / "pred.csv") == 26);
    // A table with other columns is refused.
    CHECK(run("predict --model " + d + "/model.json --features " + d + "/eogf.csv --out " + d + "/bad.csv") == 3);

    // A recorded session evaluated against a given PERCLOS table.
    const std::string eval = "eval --out " + d + "/report.json --set input.forehead=" + d +
                             "/forehead.csv --set eval.modalities=eog --set eval.models=svr --set svr.c_exp=0:1 "
                             "--set svr.g_exp=-3:-2";
    CHECK(run(eval + " --set input.labels=" + d + "/truth_perclos.csv") == 0);
    CHECK(fs::exists(dir / "report.json"));
    CHECK(run(eval) == 2);
    CHECK(run(eval + " --set input.labels=" + d + "/truth_perclos.csv --set input.gaze=" + d + "/gaze.jsonl") == 2);
    fs::remove_all(dir);
  }
}
