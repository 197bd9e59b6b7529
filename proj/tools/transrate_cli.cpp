// transrate: score, rank and evaluate pre-trained models on extracted features.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <string>

#include <CLI11.hpp>

#include "transrate/errors.hpp"
#include "transrate/oracle.hpp"
#include "transrate/report.hpp"
#include "transrate/zoo.hpp"

namespace fs = std::filesystem;
using namespace transrate;

namespace {

struct ScoreFlags {
  double eps = 1e-4;
  bool no_unit_norm = false;
  bool no_per_dim = false;
  std::string class_weighting = "empirical";
  bool subtract_label_entropy = false;
  int bins = 10;
  int threads = 0;
  std::string method = "transrate";

  ScoreConfig config() const {
    ScoreConfig cfg;
    cfg.eps = eps;
    cfg.unit_norm = !no_unit_norm;
    cfg.per_dim = !no_per_dim;
    cfg.class_weighting = parse_class_weighting(class_weighting);
    cfg.subtract_label_entropy = subtract_label_entropy;
    cfg.regression_bins = bins;
    cfg.validate();
    return cfg;
  }

  int thread_count() const { return threads > 0 ? threads : threads_from_env(1); }
};

void add_score_flags(CLI::App* cmd, ScoreFlags& f) {
  cmd->add_option("--method", f.method, "transrate|leep|nce|hscore|logme|lfc|all")
      ->capture_default_str();
  cmd->add_option("--eps", f.eps, "Distortion in the 1/(n*eps) factor")->capture_default_str();
  cmd->add_flag("--no-unit-norm", f.no_unit_norm, "Skip per-sample L2 normalization");
  cmd->add_flag("--no-per-dim", f.no_per_dim, "Do not divide TransRate by the feature dimension");
  cmd->add_option("--class-weighting", f.class_weighting, "empirical|uniform|rawsum")
      ->capture_default_str();
  cmd->add_flag("--subtract-label-entropy", f.subtract_label_entropy, "Subtract H(Y)");
  cmd->add_option("--bins", f.bins, "Equal-count bins for regression targets")
      ->capture_default_str();
  cmd->add_option("--threads", f.threads, "Worker threads (default: TRANSRATE_THREADS or 1)");
}

LabelKind parse_kind(const std::string& s) {
  if (s == "classification") return LabelKind::Classification;
  if (s == "regression") return LabelKind::Regression;
  throw Error(ErrorKind::InvalidArgument, "unknown task kind '" + s + "'");
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_file(path, text);
}

// Class c sits at distance `separation * (1 + c / d)` along axis c mod d.
std::vector<std::vector<double>> axis_means(std::size_t classes, std::size_t d, double separation) {
  std::vector<std::vector<double>> means(classes, std::vector<double>(d, 0.0));
  for (std::size_t c = 0; c < classes; ++c)
    means[c][c % d] = separation * (1.0 + static_cast<double>(c / d));
  return means;
}

struct GenFlags {
  std::string preset = "blobs";
  std::size_t n = 1000;
  std::size_t d = 16;
  std::size_t classes = 4;
  std::uint64_t seed = 0;
  double stddev = 1.0;
  double separation = 3.0;
  std::size_t levels = 10;
  double spread = 60.0;
  std::string out_dir = ".";
  std::string format = "raw";
};

int run_gen(const GenFlags& g) {
  if (g.classes < 1 || g.d < 1 || g.n < g.classes)
    throw Error(ErrorKind::InvalidArgument, "need d >= 1, classes >= 1 and n >= classes");
  const fs::path dir = g.out_dir;
  fs::create_directories(dir);
  const FeatureFormat format = g.format == "csv" ? FeatureFormat::Csv : FeatureFormat::RawBinary;
  if (g.format != "csv" && g.format != "raw")
    throw Error(ErrorKind::InvalidArgument, "--format must be raw or csv");
  const std::string ext = format == FeatureFormat::Csv ? ".csv" : ".trfm";

  BlobSpec spec;
  spec.stddev = g.stddev;
  spec.per_class = g.n / g.classes;
  spec.seed = g.seed;

  if (g.preset == "blobs") {
    spec.means = axis_means(g.classes, g.d, g.separation);
    const auto data = gen_blobs(spec);
    write_feature_file(dir / ("features" + ext), data.features.data(), format);
    write_labels(dir / "labels.txt", data.labels);
    return 0;
  }

  if (g.preset == "toy-fig3-like") {
    // Two 2-D classes on rays at +-spread/2 degrees around the first axis.
    const double half = g.spread / 2.0 * std::numbers::pi / 180.0;
    spec.means = {{g.separation * std::cos(half), g.separation * std::sin(half)},
                  {g.separation * std::cos(half), -g.separation * std::sin(half)}};
    spec.per_class = g.n / 2;
    const auto data = gen_blobs(spec);
    write_feature_file(dir / ("features" + ext), data.features.data(), format);
    write_labels(dir / "labels.txt", data.labels);
    return 0;
  }

  if (g.preset == "separability-sweep") {
    spec.means = axis_means(g.classes, g.d, g.separation);
    const auto sweep = separability_sweep(g.levels, spec);
    ZooManifest manifest;
    manifest.labels_path = "labels.txt";
    write_labels(dir / "labels.txt", sweep.front().data.labels);
    for (std::size_t l = 0; l < sweep.size(); ++l) {
      char name[32];
      std::snprintf(name, sizeof name, "level_%02zu", l);
      const auto& data = sweep[l].data;
      const auto ids = data.labels.class_ids();
      const auto ref = sweep.front().data.labels.class_ids();
      ModelEntry entry{name, std::string(name) + ext, std::nullopt, std::nullopt};
      if (!std::equal(ids.begin(), ids.end(), ref.begin(), ref.end())) {
        entry.labels_path = std::string(name) + "_labels.txt";
        write_labels(dir / *entry.labels_path, data.labels);
      }
      write_feature_file(dir / entry.features_path, data.features.data(), format);
      manifest.models.push_back(std::move(entry));
    }
    write_file(dir / "manifest.json", format_manifest(manifest));
    return 0;
  }

  throw Error(ErrorKind::InvalidArgument, "unknown preset '" + g.preset + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transferability estimation for pre-trained models"};
  app.require_subcommand(1);

  ScoreFlags score_flags;
  std::string features_path, labels_path, pseudo_path, out_path, task_kind = "classification";
  auto* score = app.add_subcommand("score", "Score one feature matrix");
  score->add_option("--features", features_path, "Feature file (.trfm or .csv)")->required();
  score->add_option("--labels", labels_path, "Label file, one value per line")->required();
  score->add_option("--pseudo-labels", pseudo_path, "Source-classifier softmax outputs (LEEP/NCE)");
  score->add_option("--task", task_kind, "classification|regression")->capture_default_str();
  score->add_option("--out", out_path, "Also write a JSON report here");
  add_score_flags(score, score_flags);

  ScoreFlags rank_flags;
  std::string manifest_path, rank_format = "csv", rank_out;
  auto* rank = app.add_subcommand("rank", "Rank every model of a manifest");
  rank->add_option("--manifest", manifest_path, "Zoo manifest (JSON)")->required();
  rank->add_option("--format", rank_format, "csv|json")->capture_default_str();
  rank->add_option("--out", rank_out, "Output file (default stdout)");
  add_score_flags(rank, rank_flags);

  ScoreFlags eval_flags;
  std::string eval_manifest, eval_format = "csv", eval_out;
  auto* eval = app.add_subcommand("eval", "Correlate scores with observed accuracies");
  eval->add_option("--manifest", eval_manifest, "Zoo manifest with accuracy_path")->required();
  eval->add_option("--format", eval_format, "csv|json")->capture_default_str();
  eval->add_option("--out", eval_out, "Output file (default stdout)");
  add_score_flags(eval, eval_flags);

  GenFlags gen_flags;
  auto* gen = app.add_subcommand("gen", "Write a deterministic synthetic dataset");
  gen->add_option("--preset", gen_flags.preset, "blobs|separability-sweep|toy-fig3-like")
      ->capture_default_str();
  gen->add_option("--n", gen_flags.n, "Total samples")->capture_default_str();
  gen->add_option("--d", gen_flags.d, "Feature dimension (toy-fig3-like is always 2)")
      ->capture_default_str();
  gen->add_option("--classes", gen_flags.classes, "Number of classes")->capture_default_str();
  gen->add_option("--seed", gen_flags.seed, "Generator seed")->capture_default_str();
  gen->add_option("--std", gen_flags.stddev, "Within-class standard deviation")
      ->capture_default_str();
  gen->add_option("--separation", gen_flags.separation, "Distance of class means from the origin")
      ->capture_default_str();
  gen->add_option("--levels", gen_flags.levels, "Sweep levels")->capture_default_str();
  gen->add_option("--spread", gen_flags.spread, "Angle between the two toy classes, degrees")
      ->capture_default_str();
  gen->add_option("--out-dir", gen_flags.out_dir, "Output directory")->capture_default_str();
  gen->add_option("--format", gen_flags.format, "raw|csv")->capture_default_str();

  std::string oracle_features, oracle_labels;
  int bins_per_dim = 8;
  auto* oracle = app.add_subcommand("oracle", "Histogram mutual-information estimate (d <= 3)");
  oracle->add_option("--features", oracle_features, "Feature file")->required();
  oracle->add_option("--labels", oracle_labels, "Class label file")->required();
  oracle->add_option("--bins-per-dim", bins_per_dim, "Bins per dimension")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*score) {
      const auto cfg = score_flags.config();
      const auto methods = parse_methods(score_flags.method);
      ModelInputs model{fs::path(features_path).stem().string(), read_feature_file(features_path),
                        read_labels(labels_path, parse_kind(task_kind)), std::nullopt};
      if (!pseudo_path.empty()) model.pseudo_labels.emplace(read_matrix_file(pseudo_path));
      const bool all = score_flags.method == "all";
      const auto scores = score_model(model, methods, cfg, score_flags.thread_count(), all);
      std::cout << scores_csv(scores);
      if (!out_path.empty()) write_file(out_path, scores_json(scores));
    } else if (*rank) {
      const auto cfg = rank_flags.config();
      const auto manifest = read_manifest(manifest_path);
      const auto zoo = score_zoo(manifest, parse_methods(rank_flags.method), cfg,
                                 rank_flags.thread_count());
      const auto rankings = rank_zoo(zoo);
      write_output(rank_out, rank_format == "json" ? rankings_json(rankings) : rankings_csv(rankings));
    } else if (*eval) {
      const auto cfg = eval_flags.config();
      const auto manifest = read_manifest(eval_manifest);
      if (!manifest.accuracy_path)
        throw Error(ErrorKind::BadManifest, "manifest has no accuracy_path");
      const auto accuracies = read_accuracies(*manifest.accuracy_path);
      const auto zoo = score_zoo(manifest, parse_methods(eval_flags.method), cfg,
                                 eval_flags.thread_count());
      const auto reports = evaluate_zoo(zoo, accuracies);
      write_output(eval_out,
                   eval_format == "json" ? correlations_json(reports) : correlations_csv(reports));
    } else if (*gen) {
      return run_gen(gen_flags);
    } else if (*oracle) {
      const auto features = read_feature_file(oracle_features);
      const auto labels = read_labels(oracle_labels, LabelKind::Classification);
      std::cout << "method,score\nhistogram_mi," << format_double(histogram_mi(features, labels, bins_per_dim))
                << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
