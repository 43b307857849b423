#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cpdetect_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

RunResult run_tool(const TempDir& dir, const std::string& args) {
  const fs::path out = dir.path / "stdout.txt";
  const fs::path err = dir.path / "stderr.txt";
  const std::string cmd = std::string(CPDETECT_BIN) + " " + args + " > " + out.string() + " 2> " +
                          err.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// A series long enough for k=2, n=20 geometry but quick to score.
void write_toy_series(const fs::path& p, int len = 140) {
  std::ofstream f(p);
  for (int t = 0; t < len; ++t) {
    const double base = t < len / 2 ? 0.0 : 4.0;
    // Deterministic wiggle stands in for noise; detection quality is not at
    // stake here, only plumbing.
    f << base + 0.1 * ((t * 7919) % 13) << "\n";
  }
}

const std::string kFastDetect =
    " --k 2 --n 20 --dt 20 --seed 5 --estimator kernel-rulsif";

}  // namespace

TEST_CASE("generate writes series, labels, and a manifest; reruns are identical") {
  TempDir dir;
  const fs::path series = dir.path / "d3.csv";
  const fs::path labels = dir.path / "d3_cp.txt";
  const std::string args = "generate --dataset 3 --segments 3 --segment-length 120 --seed 11 "
                           "--out-series " +
                           series.string() + " --out-labels " + labels.string();
  const RunResult first = run_tool(dir, args);
  CHECK(first.exit_code == 0);
  CHECK(first.out.find("360") != std::string::npos);  // reported length
  REQUIRE(fs::exists(series));
  REQUIRE(fs::exists(labels));
  REQUIRE(fs::exists(series.string() + ".manifest.json"));
  CHECK(slurp(labels) == "120\n240\n");

  const std::string once = slurp(series);
  CHECK(run_tool(dir, args).exit_code == 0);
  CHECK(slurp(series) == once);

  const std::string manifest = slurp(series.string() + ".manifest.json");
  CHECK(manifest.find("\"tool\": \"cpdetect\"") != std::string::npos);
  CHECK(manifest.find("\"argv\"") != std::string::npos);
}

TEST_CASE("generate rejects unknown dataset ids as a usage error") {
  TempDir dir;
  const RunResult r = run_tool(dir, "generate --dataset 4 --out-series " +
                                        (dir.path / "x.csv").string() + " --out-labels " +
                                        (dir.path / "x.txt").string());
  CHECK(r.exit_code == 2);
  CHECK(!r.err.empty());
}

TEST_CASE("unknown subcommands and missing required options are usage errors") {
  TempDir dir;
  CHECK(run_tool(dir, "frobnicate").exit_code == 2);
  CHECK(run_tool(dir, "detect").exit_code == 2);  // --series/--out missing
  CHECK(run_tool(dir, "--version").exit_code == 0);
  CHECK(run_tool(dir, "--help").exit_code == 0);
  CHECK(run_tool(dir, "detect --help").exit_code == 0);
}

TEST_CASE("detect writes a scores table plus manifest and replays from it") {
  TempDir dir;
  const fs::path series = dir.path / "toy.csv";
  write_toy_series(series);
  const fs::path scores = dir.path / "scores.csv";
  const RunResult r = run_tool(dir, "detect --series " + series.string() + kFastDetect +
                                        " --out " + scores.string());
  CHECK(r.exit_code == 0);
  const std::string table = slurp(scores);
  CHECK(table.rfind("t,D\n", 0) == 0);
  // k-1+2n = 41; stride 20 evaluates 41, 61, 81, 101, 121.
  CHECK(table.find("\n41,") != std::string::npos);
  CHECK(table.find("\n121,") != std::string::npos);

  // Replaying the recorded invocation reproduces the output byte for byte.
  const fs::path manifest = fs::path(scores.string() + ".manifest.json");
  REQUIRE(fs::exists(manifest));
  fs::remove(scores);
  const RunResult replay = run_tool(dir, "--from-manifest " + manifest.string());
  CHECK(replay.exit_code == 0);
  CHECK(slurp(scores) == table);
}

TEST_CASE("detect reports impossible geometry as a data error") {
  TempDir dir;
  const fs::path series = dir.path / "short.csv";
  write_toy_series(series, 30);  // shorter than k + 2n = 42
  const RunResult r = run_tool(dir, "detect --series " + series.string() + kFastDetect +
                                        " --out " + (dir.path / "s.csv").string());
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("shorter than k + 2n") != std::string::npos);
}

TEST_CASE("detect rejects malformed CSV with the offending line") {
  TempDir dir;
  const fs::path series = dir.path / "bad.csv";
  std::ofstream(series) << "1\n2\noops\n";
  const RunResult r = run_tool(dir, "detect --series " + series.string() + kFastDetect +
                                        " --out " + (dir.path / "s.csv").string());
  CHECK(r.exit_code == 3);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("detect with a threshold prints alarm lines") {
  TempDir dir;
  const fs::path series = dir.path / "toy.csv";
  write_toy_series(series);
  const RunResult r = run_tool(dir, "detect --series " + series.string() + kFastDetect +
                                        " --mu -10 --out " + (dir.path / "s.csv").string());
  CHECK(r.exit_code == 0);
  // Threshold below every score: one alarm at the first evaluated timestamp.
  CHECK(r.out.find("alarm 41") != std::string::npos);
}

TEST_CASE("the kepler preset sets n only when not given explicitly") {
  TempDir dir;
  const fs::path series = dir.path / "long.csv";
  write_toy_series(series, 480);
  const fs::path scores = dir.path / "s.csv";
  RunResult r = run_tool(dir, "detect --series " + series.string() +
                                  " --preset kepler --k 2 --dt 400 --seed 1 --out " +
                                  scores.string());
  CHECK(r.exit_code == 0);
  std::string manifest = slurp(scores.string() + ".manifest.json");
  CHECK(manifest.find("\"n\": 200") != std::string::npos);

  r = run_tool(dir, "detect --series " + series.string() +
                        " --preset kepler --k 2 --n 30 --dt 400 --seed 1 --out " + scores.string());
  CHECK(r.exit_code == 0);
  manifest = slurp(scores.string() + ".manifest.json");
  CHECK(manifest.find("\"n\": 30") != std::string::npos);

  CHECK(run_tool(dir, "detect --series " + series.string() + " --preset unknown --out " +
                          scores.string())
            .exit_code == 2);
}

TEST_CASE("evaluate computes AUC over the evaluated timestamps") {
  TempDir dir;
  const fs::path series = dir.path / "toy.csv";
  write_toy_series(series);
  const fs::path scores = dir.path / "s.csv";
  REQUIRE(run_tool(dir, "detect --series " + series.string() + kFastDetect + " --out " +
                            scores.string())
              .exit_code == 0);
  const fs::path labels = dir.path / "cp.txt";
  std::ofstream(labels) << "70\n";
  const fs::path report = dir.path / "report.csv";
  const RunResult r = run_tool(dir, "evaluate --scores " + scores.string() + " --labels " +
                                        labels.string() + " --n 20 --out " + report.string());
  CHECK(r.exit_code == 0);
  const std::string table = slurp(report);
  CHECK(table.rfind("auc,evaluated,positives,negatives,n,dt,seed\n", 0) == 0);
  // 5 evaluated timestamps; label window [70, 110) covers 81 and 101.
  CHECK(table.find(",5,2,3,20,") != std::string::npos);
  const double auc = std::stod(table.substr(table.find('\n') + 1));
  CHECK(auc >= 0.0);
  CHECK(auc <= 1.0);
}

TEST_CASE("evaluate with single-class labels is a data error") {
  TempDir dir;
  const fs::path series = dir.path / "toy.csv";
  write_toy_series(series);
  const fs::path scores = dir.path / "s.csv";
  REQUIRE(run_tool(dir, "detect --series " + series.string() + kFastDetect + " --out " +
                            scores.string())
              .exit_code == 0);
  const fs::path labels = dir.path / "cp.txt";
  std::ofstream(labels) << "";  // no change points: all labels negative
  const RunResult r = run_tool(dir, "evaluate --scores " + scores.string() + " --labels " +
                                        labels.string() + " --n 20 --out " +
                                        (dir.path / "r.csv").string());
  CHECK(r.exit_code == 3);
}

TEST_CASE("export-plot renders a two-panel SVG") {
  TempDir dir;
  const fs::path series = dir.path / "toy.csv";
  write_toy_series(series);
  const fs::path scores = dir.path / "s.csv";
  REQUIRE(run_tool(dir, "detect --series " + series.string() + kFastDetect + " --out " +
                            scores.string())
              .exit_code == 0);
  const fs::path svg = dir.path / "plot.svg";
  const RunResult r = run_tool(dir, "export-plot --series " + series.string() + " --scores " +
                                        scores.string() + " --out " + svg.string());
  CHECK(r.exit_code == 0);
  const std::string body = slurp(svg);
  CHECK(body.find("<svg") != std::string::npos);
  CHECK(body.find("signal") != std::string::npos);
  CHECK(body.find("dissimilarity") != std::string::npos);
  CHECK(body.find("<polyline") != std::string::npos);

  // Scores that name timestamps missing from the series are a data error.
  std::ofstream(dir.path / "empty.csv") << "t,D\n";
  CHECK(run_tool(dir, "export-plot --series " + series.string() + " --scores " +
                          (dir.path / "empty.csv").string() + " --out " + svg.string())
            .exit_code == 3);
}

TEST_CASE("benchmark writes a deterministic CSV table") {
  TempDir dir;
  const fs::path out = dir.path / "bench.csv";
  // Tiny protocol: one dataset, one run, the cheapest estimator. The stride
  // must visit the labeled windows [t*, t* + 2n): with k=2, n=50 the grid
  // 101 + 100j passes through t = 2000m + 1.
  const std::string args = "benchmark --datasets 3 --estimators kernel-rulsif --runs 1 "
                           "--n 50 --k 2 --dt 100 --seed 4 --out " +
                           out.string();
  const RunResult a = run_tool(dir, args);
  CHECK(a.exit_code == 0);
  const std::string table = slurp(out);
  CHECK(table.rfind("algorithm,dataset,mean_auc,std_auc,stderr,runs,dt,seed\n", 0) == 0);
  CHECK(table.find("kernel-rulsif,3,") != std::string::npos);
  CHECK(a.out.find("kernel-rulsif") != std::string::npos);  // table echoed to stdout

  const RunResult b = run_tool(dir, args);
  CHECK(b.exit_code == 0);
  CHECK(slurp(out) == table);
}
