// cpdetect: sliding-window change-point detection over CSV time series.
// Subcommands: generate, detect, evaluate, benchmark, export-plot.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpd/benchmark.hpp"
#include "cpd/datasets.hpp"
#include "cpd/detector.hpp"
#include "cpd/estimator.hpp"
#include "cpd/evaluation.hpp"
#include "cpd/io_util.hpp"
#include "cpd/svg_plot.hpp"
#include "cpd/version.hpp"

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

std::string format_double(double value) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("value formatting failed");
  return std::string(buf, ptr);
}

cpd::ScoreKind parse_score(const std::string& name) {
  if (name == "pe") return cpd::ScoreKind::PearsonSymmetric;
  if (name == "kl") return cpd::ScoreKind::KlSymmetric;
  throw CLI::ValidationError("--score", "expected 'pe' or 'kl'");
}

std::string score_name(cpd::ScoreKind kind) {
  return kind == cpd::ScoreKind::PearsonSymmetric ? "pe" : "kl";
}

// Manifest sidecar: enough resolved state to re-run the command byte-for-byte.
void write_manifest(const fs::path& primary_output, const std::string& command,
                    const std::vector<std::string>& argv, const json& params,
                    const std::vector<std::string>& outputs) {
  json manifest;
  manifest["tool"] = cpd::kToolName;
  manifest["version"] = cpd::kToolVersion;
  manifest["command"] = command;
  manifest["argv"] = argv;
  manifest["params"] = params;
  manifest["outputs"] = outputs;
  cpd::write_text_atomically(primary_output.string() + ".manifest.json", manifest.dump(2) + "\n");
}

cpd::ScoreSeries load_scores(const fs::path& path) {
  const cpd::TimeSeries table = cpd::load_csv(path, /*expect_header=*/true);
  if (table.dim() != 2)
    throw cpd::CsvError("score file must have exactly the columns t,D", 1);
  cpd::ScoreSeries scores;
  for (cpd::Index i = 0; i < table.length(); ++i) {
    scores.t.push_back(static_cast<cpd::Index>(table.values()(i, 0)));
    if (i > 0 && scores.t.back() <= scores.t[static_cast<std::size_t>(i - 1)])
      throw cpd::CsvError("timestamps must be strictly increasing",
                          static_cast<std::size_t>(i) + 2);
  }
  scores.d = table.values().col(1);
  return scores;
}

struct GenerateArgs {
  int dataset = 1;
  int segments = 10;
  cpd::Index segment_length = 2000;
  std::uint64_t seed = 0;
  std::string out_series;
  std::string out_labels;
};

struct DetectArgs {
  std::string series_path;
  bool header = false;
  std::string estimator = "kernel-rulsif";
  std::string score;  // empty: estimator's natural score
  cpd::DetectorConfig config;
  std::string preset;
  std::optional<double> mu;
  std::string out;
};

struct EvaluateArgs {
  std::string scores_path;
  std::string labels_path;
  cpd::Index n = 500;
  std::string out;
};

struct BenchmarkArgs {
  std::vector<int> datasets = {1, 2, 3};
  std::vector<std::string> estimators;  // empty: all five
  int runs = 10;
  cpd::DetectorConfig base;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
};

struct PlotArgs {
  std::string series_path;
  bool header = false;
  std::string scores_path;
  std::string out;
};

int run_generate(const GenerateArgs& args, const std::vector<std::string>& argv) {
  cpd::SyntheticSpec spec{args.dataset, args.segments, args.segment_length, args.seed};
  const cpd::LabeledSeries labeled = cpd::gen_synthetic(spec);
  cpd::save_csv(labeled.series, args.out_series);
  cpd::save_labels(labeled.change_points, args.out_labels);

  json params;
  params["dataset"] = args.dataset;
  params["segments"] = args.segments;
  params["segment_length"] = args.segment_length;
  params["seed"] = args.seed;
  write_manifest(args.out_series, "generate", argv, params, {args.out_series, args.out_labels});
  std::cout << "wrote " << args.out_series << " (" << labeled.series.length() << " rows, "
            << labeled.series.dim() << " columns), " << labeled.change_points.size()
            << " change points\n";
  return 0;
}

json detect_params(const cpd::DetectorConfig& config) {
  json params;
  params["k"] = config.k;
  params["n"] = config.n;
  params["m"] = config.m;
  params["dt"] = config.stride;
  params["estimator"] = cpd::to_string(config.estimator);
  params["score"] = score_name(config.resolved_score());
  params["alpha"] = config.estimator_config.alpha;
  params["clip_eps"] = config.clip_eps;
  params["seed"] = config.seed;
  if (config.threshold) params["mu"] = *config.threshold;
  return params;
}

int run_detect(DetectArgs& args, const std::vector<std::string>& argv) {
  const cpd::TimeSeries series = cpd::load_csv(args.series_path, args.header);
  args.config.estimator = cpd::parse_estimator(args.estimator);
  if (!args.score.empty()) args.config.score = parse_score(args.score);
  args.config.threshold = args.mu;

  const cpd::ScoreSeries scores = cpd::detect(series, args.config);

  std::string csv = "t,D\n";
  for (std::size_t i = 0; i < scores.t.size(); ++i) {
    csv += std::to_string(scores.t[i]);
    csv += ',';
    csv += format_double(scores.d(static_cast<cpd::Index>(i)));
    csv += '\n';
  }
  cpd::write_text_atomically(args.out, csv);

  json params = detect_params(args.config);
  params["series"] = args.series_path;
  params["header"] = args.header;
  write_manifest(args.out, "detect", argv, params, {args.out});

  std::cout << "wrote " << args.out << " (" << scores.t.size() << " scores, t = "
            << scores.t.front() << ".." << scores.t.back() << ")\n";
  if (args.mu) {
    const cpd::AlarmList alarms = cpd::threshold_alarms(scores, *args.mu);
    for (cpd::Index t : alarms.detections) std::cout << "alarm " << t << "\n";
  }
  return 0;
}

int run_evaluate(const EvaluateArgs& args, const std::vector<std::string>& argv) {
  const cpd::ScoreSeries scores = load_scores(args.scores_path);
  const std::vector<cpd::Index> change_points = cpd::load_labels(args.labels_path);

  cpd::Index total_len = scores.t.empty() ? 0 : scores.t.back() + 1;
  for (cpd::Index cp : change_points) total_len = std::max(total_len, cp + 1);
  const std::vector<int> labels = cpd::label_series(total_len, change_points, args.n);
  const cpd::LabeledRun run = cpd::align(scores, labels);
  const double auc = cpd::roc_auc(run.scores.d, run.labels);

  // Provenance travels with the score file as its manifest sidecar.
  std::string dt = "", seed = "";
  const fs::path manifest_path = args.scores_path + ".manifest.json";
  if (fs::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    json manifest = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (!manifest.is_discarded() && manifest.contains("params")) {
      if (manifest["params"].contains("dt")) dt = manifest["params"]["dt"].dump();
      if (manifest["params"].contains("seed")) seed = manifest["params"]["seed"].dump();
    }
  }

  std::size_t positives = 0;
  for (int y : run.labels) positives += static_cast<std::size_t>(y);
  std::string report = "auc,evaluated,positives,negatives,n,dt,seed\n";
  char auc_buf[32];
  std::snprintf(auc_buf, sizeof auc_buf, "%.6f", auc);
  report += std::string(auc_buf) + "," + std::to_string(run.labels.size()) + "," +
            std::to_string(positives) + "," + std::to_string(run.labels.size() - positives) + "," +
            std::to_string(args.n) + "," + dt + "," + seed + "\n";
  cpd::write_text_atomically(args.out, report);

  json params;
  params["scores"] = args.scores_path;
  params["labels"] = args.labels_path;
  params["n"] = args.n;
  write_manifest(args.out, "evaluate", argv, params, {args.out});
  std::cout << "auc " << auc_buf << " over " << run.labels.size() << " evaluated timestamps\n";
  return 0;
}

int run_benchmark(const BenchmarkArgs& args, const std::vector<std::string>& argv) {
  cpd::BenchmarkSpec spec;
  spec.datasets = args.datasets;
  if (!args.estimators.empty()) {
    spec.estimators.clear();
    for (const std::string& name : args.estimators)
      spec.estimators.push_back(cpd::parse_estimator(name));
  }
  spec.runs = args.runs;
  spec.seed = args.seed;
  spec.base = args.base;
  spec.base.seed = args.seed;
  spec.jobs = args.jobs;

  const cpd::BenchmarkTable table = cpd::run_benchmark(spec);
  cpd::write_benchmark_csv(table, args.out);

  json params = detect_params(spec.base);
  params.erase("estimator");
  params.erase("score");
  json dataset_list = json::array();
  for (int d : spec.datasets) dataset_list.push_back(d);
  json estimator_list = json::array();
  for (cpd::EstimatorKind kind : spec.estimators) estimator_list.push_back(cpd::to_string(kind));
  params["datasets"] = dataset_list;
  params["estimators"] = estimator_list;
  params["runs"] = spec.runs;
  params["seed"] = spec.seed;
  params["jobs"] = spec.jobs;
  write_manifest(args.out, "benchmark", argv, params, {args.out});

  std::cout << cpd::benchmark_csv(table);
  return 0;
}

int run_export_plot(const PlotArgs& args, const std::vector<std::string>& argv) {
  const cpd::TimeSeries series = cpd::load_csv(args.series_path, args.header);
  const cpd::ScoreSeries scores = load_scores(args.scores_path);
  cpd::write_text_atomically(args.out, cpd::render_two_panel_svg(series, scores));

  json params;
  params["series"] = args.series_path;
  params["header"] = args.header;
  params["scores"] = args.scores_path;
  write_manifest(args.out, "export-plot", argv, params, {args.out});
  std::cout << "wrote " << args.out << "\n";
  return 0;
}

void add_detector_flags(CLI::App* cmd, cpd::DetectorConfig& config) {
  cmd->add_option("--k", config.k, "embedding window length")->check(CLI::PositiveNumber);
  cmd->add_option("--n", config.n, "embeddings per sliding sample")
      ->check(CLI::Range(static_cast<cpd::Index>(4), std::numeric_limits<cpd::Index>::max()));
  cmd->add_option("--m", config.m, "score-averaging iterations")->check(CLI::PositiveNumber);
  cmd->add_option("--dt", config.stride, "stride between evaluated timestamps")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", config.estimator_config.alpha, "relative-ratio mixing weight")
      ->check(CLI::Range(0.0, 0.999));
  cmd->add_option("--clip-eps", config.clip_eps, "probability clipping bound")
      ->check(CLI::Range(1e-12, 0.499));
}

const std::vector<std::string> kEstimatorNames = {"kernel-rulsif", "gbdt-rulsif", "nn-rulsif",
                                                  "gbdt-classifier", "nn-classifier"};

int dispatch(const std::vector<std::string>& argv, bool allow_manifest_replay);

int replay_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("manifest parse failed: ") + e.what());
  }
  if (!manifest.contains("tool") || manifest["tool"] != cpd::kToolName)
    throw std::invalid_argument("manifest was not produced by this tool");
  if (!manifest.contains("argv") || !manifest["argv"].is_array())
    throw std::invalid_argument("manifest lacks a replayable argv");
  std::vector<std::string> argv;
  for (const auto& item : manifest["argv"]) argv.push_back(item.get<std::string>());
  return dispatch(argv, /*allow_manifest_replay=*/false);
}

int dispatch(const std::vector<std::string>& argv, bool allow_manifest_replay) {
  CLI::App app{"offline change-point detection via density-ratio dissimilarity"};
  app.set_version_flag("--version", std::string(cpd::kToolName) + " " + cpd::kToolVersion);
  app.require_subcommand(0, 1);

  std::string manifest_path;
  if (allow_manifest_replay)
    app.add_option("--from-manifest", manifest_path, "re-run a recorded invocation");

  GenerateArgs gen;
  CLI::App* cmd_gen = app.add_subcommand("generate", "write a synthetic labeled series");
  cmd_gen->add_option("--dataset", gen.dataset, "generator id")->required()->check(CLI::Range(1, 3));
  cmd_gen->add_option("--segments", gen.segments, "number of segments")->check(CLI::PositiveNumber);
  cmd_gen->add_option("--segment-length", gen.segment_length, "steps per segment")
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--seed", gen.seed, "generator seed");
  cmd_gen->add_option("--out-series", gen.out_series, "series CSV path")->required();
  cmd_gen->add_option("--out-labels", gen.out_labels, "change-points file path")->required();

  DetectArgs det;
  CLI::App* cmd_det = app.add_subcommand("detect", "score a series for change points");
  cmd_det->add_option("--series", det.series_path, "input series CSV")->required();
  cmd_det->add_flag("--header", det.header, "first series line is a header");
  cmd_det->add_option("--estimator", det.estimator, "density-ratio estimator")
      ->check(CLI::IsMember(kEstimatorNames));
  cmd_det->add_option("--score", det.score, "dissimilarity score (default: estimator's own)")
      ->check(CLI::IsMember({"pe", "kl"}));
  add_detector_flags(cmd_det, det.config);
  CLI::Option* n_opt = cmd_det->get_option("--n");
  cmd_det->add_option("--preset", det.preset, "parameter preset (kepler: n=200)")
      ->check(CLI::IsMember({"kepler"}));
  cmd_det->add_option("--seed", det.config.seed, "run seed");
  cmd_det->add_option("--mu", det.mu, "alarm threshold; crossings printed to stdout");
  cmd_det->add_option("--jobs", det.config.jobs, "worker threads")
      ->envname("CPDETECT_JOBS")
      ->check(CLI::PositiveNumber);
  cmd_det->add_option("--out", det.out, "output scores CSV")->required();

  EvaluateArgs eval;
  CLI::App* cmd_eval = app.add_subcommand("evaluate", "ROC AUC of scores against change points");
  cmd_eval->add_option("--scores", eval.scores_path, "scores CSV from detect")->required();
  cmd_eval->add_option("--labels", eval.labels_path, "change-points file")->required();
  cmd_eval->add_option("--n", eval.n, "sample size used for labeling")->check(CLI::PositiveNumber);
  cmd_eval->add_option("--out", eval.out, "output report CSV")->required();

  BenchmarkArgs bench;
  CLI::App* cmd_bench = app.add_subcommand("benchmark", "full estimator x dataset AUC matrix");
  cmd_bench->add_option("--datasets", bench.datasets, "dataset ids")->check(CLI::Range(1, 3));
  cmd_bench->add_option("--estimators", bench.estimators, "estimators (default: all)")
      ->check(CLI::IsMember(kEstimatorNames));
  cmd_bench->add_option("--runs", bench.runs, "instances per dataset")->check(CLI::PositiveNumber);
  add_detector_flags(cmd_bench, bench.base);
  cmd_bench->add_option("--seed", bench.seed, "benchmark seed");
  cmd_bench->add_option("--jobs", bench.jobs, "worker threads")
      ->envname("CPDETECT_JOBS")
      ->check(CLI::PositiveNumber);
  cmd_bench->add_option("--out", bench.out, "output table CSV")->required();

  PlotArgs plot;
  CLI::App* cmd_plot = app.add_subcommand("export-plot", "render signal + scores as SVG");
  cmd_plot->add_option("--series", plot.series_path, "input series CSV")->required();
  cmd_plot->add_flag("--header", plot.header, "first series line is a header");
  cmd_plot->add_option("--scores", plot.scores_path, "scores CSV from detect")->required();
  cmd_plot->add_option("--out", plot.out, "output SVG path")->required();

  std::vector<std::string> reversed(argv.rbegin(), argv.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (!manifest_path.empty()) {
    if (app.get_subcommands().empty()) return replay_manifest(manifest_path);
    std::cerr << "--from-manifest cannot be combined with a subcommand\n";
    return kExitUsage;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return kExitUsage;
  }

  if (cmd_det->parsed() && det.preset == "kepler" && n_opt->count() == 0) det.config.n = 200;

  if (cmd_gen->parsed()) return run_generate(gen, argv);
  if (cmd_det->parsed()) return run_detect(det, argv);
  if (cmd_eval->parsed()) return run_evaluate(eval, argv);
  if (cmd_bench->parsed()) return run_benchmark(bench, argv);
  return run_export_plot(plot, argv);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args, /*allow_manifest_replay=*/true);
  } catch (const cpd::CsvError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::out_of_range& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
