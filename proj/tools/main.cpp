#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gvae/baselines.hpp"
#include "gvae/bigraph.hpp"
#include "gvae/checkpoint.hpp"
#include "gvae/config.hpp"
#include "gvae/error.hpp"
#include "gvae/explain.hpp"
#include "gvae/io_util.hpp"
#include "gvae/model.hpp"
#include "gvae/rng.hpp"
#include "gvae/synth.hpp"
#include "gvae/train.hpp"

namespace {

using gvae::AppConfig;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string config_key_footer() {
  std::string out = "Config keys (JSON file via --config; flags override):\n";
  for (const auto& key : gvae::config_keys()) {
    out += "  " + key.key;
    if (key.key.size() < 24) out += std::string(24 - key.key.size(), ' ');
    out += " " + key.description + " (default " + key.default_value + ")\n";
  }
  return out;
}

bool is_string_key(const std::string& key) {
  return key == "data.path" || key == "train.loss";
}

// Raw CLI override values keyed by config key, applied after the file.
using Overrides = std::map<std::string, std::string>;

void add_key_flag(CLI::App* sub, Overrides& overrides, const std::string& flag,
                  const std::string& key, const std::string& help) {
  sub->add_option_function<std::string>(
      flag, [&overrides, key](const std::string& value) { overrides[key] = value; }, help);
}

AppConfig resolve_config(const std::string& config_path, const Overrides& overrides) {
  AppConfig config;
  if (!config_path.empty()) config = gvae::load_config_file(config_path);
  for (const auto& [key, raw] : overrides) {
    nlohmann::json value;
    if (is_string_key(key)) {
      value = raw;
    } else {
      value = nlohmann::json::parse(raw, nullptr, /*allow_exceptions=*/false);
      if (value.is_discarded()) {
        throw gvae::UsageError("cannot parse value '" + raw + "' for key '" + key + "'");
      }
    }
    gvae::apply_config_key(config, key, value);
  }
  gvae::sync_seeds(config);
  return config;
}

struct DataBundle {
  gvae::BipartiteGraph graph;
  std::optional<gvae::SyntheticTruth> truth;
  std::size_t duplicates = 0;
};

DataBundle acquire_data(const AppConfig& config) {
  DataBundle bundle;
  if (!config.data_path.empty()) {
    auto loaded = gvae::load_csv(config.data_path);
    bundle.graph = std::move(loaded.graph);
    bundle.duplicates = loaded.duplicate_count;
  } else {
    auto synthetic = gvae::generate(config.synth);
    bundle.graph = std::move(synthetic.graph);
    bundle.truth = std::move(synthetic.truth);
  }
  return bundle;
}

gvae::DataSplit make_split(const gvae::BipartiteGraph& graph, const AppConfig& config) {
  return gvae::split(graph, config.split,
                     gvae::mix_seed(config.seed, gvae::seed_purpose::kSplit));
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

std::vector<gvae::QueryPair> read_pairs_csv(const std::filesystem::path& path,
                                            const gvae::BipartiteGraph& graph) {
  const std::string content = gvae::read_file(path);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw gvae::DataError("'" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "student_id,course_id") {
    throw gvae::DataError("'" + path.string() + "': expected header student_id,course_id");
  }
  std::vector<gvae::QueryPair> pairs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = gvae::split_csv_line(line);
    if (fields.size() != 2) {
      throw gvae::DataError("'" + path.string() + "' row " + std::to_string(line_no) +
                            ": expected 2 fields");
    }
    const auto student = graph.student_index(fields[0]);
    if (!student) throw gvae::DataError("unknown student id '" + fields[0] + "'");
    const auto course = graph.course_index(fields[1]);
    if (!course) throw gvae::DataError("unknown course id '" + fields[1] + "'");
    pairs.push_back({*student, *course});
  }
  return pairs;
}

std::string metrics_csv_row(const std::string& method, const std::string& role,
                            const gvae::Metrics& m) {
  return method + "," + role + "," + gvae::format_double(m.rmse) + "," +
         gvae::format_double(m.mae) + "," + gvae::format_double(m.matrix_rmse) + "," +
         std::to_string(m.count) + "\n";
}

constexpr const char* kMetricsHeader = "method,role,rmse,mae,matrix_rmse,count\n";

// Point-mass distribution at the rounded estimate, for baseline CSV output
// and the channel-form metric.
gvae::PredictionTensor baseline_predictions(const gvae::BaselinePredictor& predictor,
                                            std::span<const gvae::Edge> edges) {
  gvae::PredictionTensor pred;
  pred.logits = gvae::DenseMatrix(edges.size(), gvae::kNumLevels);
  pred.probs = gvae::DenseMatrix(edges.size(), gvae::kNumLevels);
  pred.expected_level.resize(edges.size());
  pred.argmax_level.resize(edges.size());
  pred.queries.reserve(edges.size());
  for (std::size_t t = 0; t < edges.size(); ++t) {
    const auto& e = edges[t];
    pred.queries.push_back({e.student, e.course});
    const double estimate = predictor.predict(e.student, e.course);
    const int rounded = std::clamp(static_cast<int>(std::lround(estimate)), 1, 10);
    pred.expected_level[t] = estimate;
    pred.argmax_level[t] = rounded;
    pred.probs(t, static_cast<std::size_t>(rounded - 1)) = 1.0;
  }
  return pred;
}

gvae::Metrics baseline_metrics(const gvae::PredictionTensor& pred,
                               std::span<const gvae::Edge> edges) {
  std::vector<int> truth;
  truth.reserve(edges.size());
  for (const auto& e : edges) truth.push_back(e.level);
  gvae::Metrics m = gvae::compute_metrics(pred.expected_level, truth);
  double channel_sq = 0.0;
  for (std::size_t t = 0; t < edges.size(); ++t) {
    for (int r = 0; r < gvae::kNumLevels; ++r) {
      const double y = (truth[t] == r + 1) ? 1.0 : 0.0;
      const double d = y - pred.probs(t, static_cast<std::size_t>(r));
      channel_sq += d * d;
    }
  }
  m.matrix_rmse = std::sqrt(channel_sq / gvae::kNumLevels / static_cast<double>(edges.size()));
  return m;
}

nlohmann::json make_sidecar(const AppConfig& config, const gvae::ModelDims& dims) {
  nlohmann::json side;
  side["config"] = gvae::config_to_json(config);
  side["seed"] = config.seed;
  side["dims"] = {{"nodes", dims.nodes},
                  {"features", dims.features},
                  {"hidden", dims.hidden},
                  {"latent", dims.latent}};
  return side;
}

AppConfig config_from_sidecar(const nlohmann::json& sidecar,
                              const std::filesystem::path& ckpt_path) {
  if (!sidecar.contains("config")) {
    throw gvae::DataError("'" + gvae::sidecar_path(ckpt_path).string() +
                          "' is missing the config block");
  }
  return gvae::config_from_json(sidecar["config"]);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bipartite grade-graph matrix completion: graph variational"
               " autoencoder, classical baselines, and gradient attribution"};
  app.require_subcommand(1);
  app.footer(config_key_footer());

  std::string config_path;
  Overrides overrides;
  int exit_code = kExitOk;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file of dotted keys");
    add_key_flag(sub, overrides, "--seed", "seed", "root random seed");
    sub->add_flag_callback(
        "--stable-timings", [&] { overrides["output.stable_timings"] = "true"; },
        "write 0 for all timing fields (reproducible output)");
    add_key_flag(sub, overrides, "--data", "data.path", "grade CSV input");
    sub->footer(config_key_footer());
  };

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic", "generate a synthetic grade CSV");
  std::string gen_out = "grades.csv";
  std::string gen_truth;
  gen->add_option("--out", gen_out, "grade CSV to write");
  gen->add_option("--truth", gen_truth, "cluster truth CSV to write");
  add_common(gen);
  add_key_flag(gen, overrides, "--students", "synth.students", "student count");
  add_key_flag(gen, overrides, "--courses", "synth.courses", "course count");
  add_key_flag(gen, overrides, "--student-clusters", "synth.student_clusters",
               "student cluster count");
  add_key_flag(gen, overrides, "--course-clusters", "synth.course_clusters",
               "course cluster count");
  add_key_flag(gen, overrides, "--noise", "synth.noise", "level noise sigma");
  add_key_flag(gen, overrides, "--density", "synth.density", "observation density");
  gen->callback([&] {
    AppConfig config = resolve_config(config_path, overrides);
    config.data_path.clear();  // always generates
    gvae::SyntheticData data = gvae::generate(config.synth);
    gvae::write_csv(data.graph, gen_out);
    if (!gen_truth.empty()) gvae::write_truth_csv(data, gen_truth);
    std::cout << "generated " << data.graph.num_students() << " students, "
              << data.graph.num_courses() << " courses, " << data.graph.edges().size()
              << " edges -> " << gen_out << "\n";
  });

  // ingest
  auto* ingest = app.add_subcommand("ingest", "validate a grade CSV and report stats");
  std::string ingest_split_out;
  add_common(ingest);
  ingest->add_option("--split-out", ingest_split_out, "write a split manifest CSV");
  add_key_flag(ingest, overrides, "--train-frac", "split.train", "train fraction");
  add_key_flag(ingest, overrides, "--test-frac", "split.test", "test fraction");
  add_key_flag(ingest, overrides, "--valid-frac", "split.valid", "validation fraction");
  ingest->callback([&] {
    AppConfig config = resolve_config(config_path, overrides);
    if (config.data_path.empty()) throw gvae::UsageError("ingest requires --data");
    auto loaded = gvae::load_csv(config.data_path);
    std::cout << "students: " << loaded.graph.num_students() << "\n"
              << "courses: " << loaded.graph.num_courses() << "\n"
              << "edges: " << loaded.graph.edges().size() << "\n"
              << "duplicate pairs overwritten: " << loaded.duplicate_count << "\n";
    if (!ingest_split_out.empty()) {
      const gvae::DataSplit sp = make_split(loaded.graph, config);
      gvae::write_split_manifest(sp, loaded.graph.edges().size(), ingest_split_out);
      std::cout << "split manifest -> " << ingest_split_out << "\n";
    }
  });

  const auto add_train_flags = [&](CLI::App* sub) {
    add_key_flag(sub, overrides, "--epochs", "train.epochs", "training epochs");
    add_key_flag(sub, overrides, "--lr", "train.lr", "Adam learning rate");
    add_key_flag(sub, overrides, "--dropout", "train.dropout", "node dropout rate");
    add_key_flag(sub, overrides, "--kl-weight", "train.kl_weight", "KL term weight");
    add_key_flag(sub, overrides, "--loss", "train.loss",
                 "masked-softmax-ce | literal-bce");
    add_key_flag(sub, overrides, "--eval-every", "train.eval_every", "evaluation period");
    add_key_flag(sub, overrides, "--k", "model.dims.k", "feature width");
    add_key_flag(sub, overrides, "--e1", "model.dims.e1", "conv width");
    add_key_flag(sub, overrides, "--e", "model.dims.e", "latent width");
    add_key_flag(sub, overrides, "--depth", "model.depth", "conv layers");
    add_key_flag(sub, overrides, "--train-frac", "split.train", "train fraction");
    add_key_flag(sub, overrides, "--test-frac", "split.test", "test fraction");
    add_key_flag(sub, overrides, "--valid-frac", "split.valid", "validation fraction");
  };

  // train
  auto* train_cmd = app.add_subcommand("train", "fit the model and write a checkpoint");
  std::string train_ckpt = "model.gvae";
  std::string train_log;
  train_cmd->add_option("--ckpt", train_ckpt, "checkpoint file to write");
  train_cmd->add_option("--log", train_log, "epoch log CSV to write");
  add_common(train_cmd);
  add_train_flags(train_cmd);
  train_cmd->callback([&] {
    AppConfig config = resolve_config(config_path, overrides);
    DataBundle data = acquire_data(config);
    const gvae::DataSplit sp = make_split(data.graph, config);
    gvae::FitResult fit = gvae::fit(data.graph, sp, config.train);
    gvae::save_checkpoint(train_ckpt, fit.params, make_sidecar(config, fit.params.dims));
    if (!train_log.empty()) {
      gvae::write_epoch_log_csv(train_log, fit.logs, config.stable_timings);
    }
    const auto& last = fit.logs.back();
    std::cout << "trained " << config.train.epochs << " epochs, final loss "
              << gvae::format_double(last.loss);
    if (last.train_rmse) {
      std::cout << ", train rmse " << gvae::format_double(*last.train_rmse);
    }
    if (last.valid_rmse) {
      std::cout << ", valid rmse " << gvae::format_double(*last.valid_rmse);
    }
    std::cout << "\ncheckpoint -> " << train_ckpt << "\n";
  });

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score a checkpoint on a split role");
  std::string eval_ckpt;
  std::string eval_role = "test";
  std::string eval_out;
  eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--role", eval_role, "train | test | valid");
  eval_cmd->add_option("--out", eval_out, "metrics CSV to write");
  add_common(eval_cmd);
  eval_cmd->callback([&] {
    AppConfig cli_config = resolve_config(config_path, overrides);
    const gvae::Checkpoint ckpt = gvae::load_checkpoint(eval_ckpt);
    AppConfig config = config_from_sidecar(ckpt.sidecar, eval_ckpt);
    if (!cli_config.data_path.empty()) config.data_path = cli_config.data_path;
    DataBundle data = acquire_data(config);
    const gvae::DataSplit sp = make_split(data.graph, config);
    const auto& role_indices = eval_role == "train"  ? sp.train
                               : eval_role == "test" ? sp.test
                               : eval_role == "valid"
                                   ? sp.valid
                                   : throw gvae::UsageError("unknown role '" + eval_role + "'");
    const auto train_edges = gvae::gather_edges(data.graph, sp.train);
    const auto eval_edges = gvae::gather_edges(data.graph, role_indices);
    const auto adj = gvae::LevelAdjacency::from_edges(data.graph.num_students(),
                                                      data.graph.num_courses(), train_edges);
    const auto deg = gvae::degrees(adj);
    const gvae::Metrics m = gvae::evaluate(ckpt.params, adj, deg, eval_edges);
    std::cout << "role: " << eval_role << "\nrmse: " << gvae::format_double(m.rmse)
              << "\nmae: " << gvae::format_double(m.mae)
              << "\nmatrix_rmse: " << gvae::format_double(m.matrix_rmse)
              << "\nedges: " << m.count << "\n";
    if (!eval_out.empty()) {
      gvae::atomic_write_file(eval_out,
                              std::string(kMetricsHeader) +
                                  metrics_csv_row("graph-vae", eval_role, m));
    }
  });

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "predict level distributions for pairs");
  std::string predict_ckpt;
  std::string predict_pairs;
  std::string predict_out = "predictions.csv";
  predict_cmd->add_option("--ckpt", predict_ckpt, "checkpoint file")->required();
  predict_cmd->add_option("--pairs", predict_pairs, "CSV of student_id,course_id")->required();
  predict_cmd->add_option("--out", predict_out, "prediction CSV to write");
  add_common(predict_cmd);
  predict_cmd->callback([&] {
    AppConfig cli_config = resolve_config(config_path, overrides);
    const gvae::Checkpoint ckpt = gvae::load_checkpoint(predict_ckpt);
    AppConfig config = config_from_sidecar(ckpt.sidecar, predict_ckpt);
    if (!cli_config.data_path.empty()) config.data_path = cli_config.data_path;
    DataBundle data = acquire_data(config);
    const auto pairs = read_pairs_csv(predict_pairs, data.graph);
    // Prediction encodes with every observed edge (completion mode).
    const auto adj = gvae::decompose(data.graph);
    const auto deg = gvae::degrees(adj);
    const gvae::PredictionTensor pred = gvae::predict(ckpt.params, adj, deg, pairs);
    gvae::write_predictions_csv(predict_out, data.graph, pred);
    std::cout << pred.queries.size() << " predictions -> " << predict_out << "\n";
  });

  // baseline
  auto* baseline_cmd = app.add_subcommand("baseline", "fit and score a classical baseline");
  std::string baseline_kind;
  std::string baseline_out;
  std::string baseline_preds;
  baseline_cmd->add_option("--kind", baseline_kind,
                           "global_average | user_average | item_average | user_knn |"
                           " item_knn | biased_mf")
      ->required();
  baseline_cmd->add_option("--out", baseline_out, "metrics CSV to write");
  baseline_cmd->add_option("--preds", baseline_preds, "prediction CSV to write");
  add_common(baseline_cmd);
  add_key_flag(baseline_cmd, overrides, "--knn-k", "baseline.knn_k", "kNN neighbor count");
  add_key_flag(baseline_cmd, overrides, "--mf-rank", "baseline.mf_rank", "MF rank");
  add_key_flag(baseline_cmd, overrides, "--mf-lr", "baseline.mf_lr", "MF learning rate");
  add_key_flag(baseline_cmd, overrides, "--mf-reg", "baseline.mf_reg", "MF regularization");
  add_key_flag(baseline_cmd, overrides, "--mf-epochs", "baseline.mf_epochs", "MF epochs");
  add_key_flag(baseline_cmd, overrides, "--train-frac", "split.train", "train fraction");
  add_key_flag(baseline_cmd, overrides, "--test-frac", "split.test", "test fraction");
  add_key_flag(baseline_cmd, overrides, "--valid-frac", "split.valid", "validation fraction");
  baseline_cmd->callback([&] {
    AppConfig config = resolve_config(config_path, overrides);
    const auto kind = gvae::baseline_from_string(baseline_kind);
    if (!kind) throw gvae::UsageError("unknown baseline kind '" + baseline_kind + "'");
    DataBundle data = acquire_data(config);
    const gvae::DataSplit sp = make_split(data.graph, config);
    const auto predictor =
        gvae::BaselinePredictor::fit(*kind, data.graph, sp.train, config.baseline);
    const auto test_edges = gvae::gather_edges(data.graph, sp.test);
    if (test_edges.empty()) throw gvae::DataError("baseline: empty test split");
    const auto pred = baseline_predictions(predictor, test_edges);
    const gvae::Metrics m = baseline_metrics(pred, test_edges);
    std::cout << "method: " << baseline_kind << "\nrmse: " << gvae::format_double(m.rmse)
              << "\nmae: " << gvae::format_double(m.mae) << "\nedges: " << m.count << "\n";
    if (!baseline_out.empty()) {
      gvae::atomic_write_file(baseline_out, std::string(kMetricsHeader) +
                                                metrics_csv_row(baseline_kind, "test", m));
    }
    if (!baseline_preds.empty()) {
      gvae::write_predictions_csv(baseline_preds, data.graph, pred);
    }
  });

  // attribute
  auto* attr_cmd = app.add_subcommand("attribute", "rank node influence on one prediction");
  std::string attr_ckpt;
  std::string attr_student;
  std::string attr_course;
  std::string attr_out = "attribution.csv";
  int attr_top = 12;
  attr_cmd->add_option("--ckpt", attr_ckpt, "checkpoint file")->required();
  attr_cmd->add_option("--student", attr_student, "student id")->required();
  attr_cmd->add_option("--course", attr_course, "course id")->required();
  attr_cmd->add_option("--top", attr_top, "rows to report");
  attr_cmd->add_option("--out", attr_out, "attribution CSV to write");
  add_common(attr_cmd);
  attr_cmd->callback([&] {
    AppConfig cli_config = resolve_config(config_path, overrides);
    const gvae::Checkpoint ckpt = gvae::load_checkpoint(attr_ckpt);
    AppConfig config = config_from_sidecar(ckpt.sidecar, attr_ckpt);
    if (!cli_config.data_path.empty()) config.data_path = cli_config.data_path;
    DataBundle data = acquire_data(config);
    const auto student = data.graph.student_index(attr_student);
    if (!student) throw gvae::DataError("unknown student id '" + attr_student + "'");
    const auto course = data.graph.course_index(attr_course);
    if (!course) throw gvae::DataError("unknown course id '" + attr_course + "'");
    const auto report = gvae::attribute(ckpt.params, data.graph, {*student, *course});
    gvae::write_attribution_csv(attr_out, data.graph, report, attr_top);
    std::cout << "top-" << attr_top << " attribution -> " << attr_out << "\n";
  });

  // export-embeddings
  auto* emb_cmd = app.add_subcommand("export-embeddings", "dump latent means plus PCA");
  std::string emb_ckpt;
  std::string emb_out = "embeddings.csv";
  emb_cmd->add_option("--ckpt", emb_ckpt, "checkpoint file")->required();
  emb_cmd->add_option("--out", emb_out, "embedding CSV to write");
  add_common(emb_cmd);
  emb_cmd->callback([&] {
    AppConfig cli_config = resolve_config(config_path, overrides);
    const gvae::Checkpoint ckpt = gvae::load_checkpoint(emb_ckpt);
    AppConfig config = config_from_sidecar(ckpt.sidecar, emb_ckpt);
    if (!cli_config.data_path.empty()) config.data_path = cli_config.data_path;
    DataBundle data = acquire_data(config);
    const auto dump = gvae::export_embeddings(ckpt.params, data.graph);
    gvae::write_embeddings_csv(emb_out, dump);
    std::cout << dump.node_id.size() << " embeddings -> " << emb_out << "\n";
  });

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "compare the model against all baselines");
  std::string bench_out = "bench.csv";
  bench_cmd->add_option("--out", bench_out, "summary CSV to write");
  add_common(bench_cmd);
  add_train_flags(bench_cmd);
  bench_cmd->callback([&] {
    AppConfig config = resolve_config(config_path, overrides);
    DataBundle data = acquire_data(config);
    const gvae::DataSplit sp = make_split(data.graph, config);
    const auto test_edges = gvae::gather_edges(data.graph, sp.test);
    if (test_edges.empty()) throw gvae::DataError("bench: empty test split");
    const auto train_edges = gvae::gather_edges(data.graph, sp.train);
    const auto adj = gvae::LevelAdjacency::from_edges(data.graph.num_students(),
                                                      data.graph.num_courses(), train_edges);
    const auto deg = gvae::degrees(adj);

    std::string csv = "method,rmse,mae,fit_ms\n";
    const auto add_row = [&](const std::string& method, const gvae::Metrics& m, double ms) {
      csv += method + "," + gvae::format_double(m.rmse) + "," + gvae::format_double(m.mae) +
             "," + (config.stable_timings ? "0" : gvae::format_double(ms)) + "\n";
    };

    auto t0 = std::chrono::steady_clock::now();
    gvae::FitResult fit = gvae::fit(data.graph, sp, config.train);
    const double model_ms = elapsed_ms(t0);
    add_row("graph-vae", gvae::evaluate(fit.params, adj, deg, test_edges), model_ms);

    for (const auto kind : gvae::all_baselines()) {
      t0 = std::chrono::steady_clock::now();
      const auto predictor =
          gvae::BaselinePredictor::fit(kind, data.graph, sp.train, config.baseline);
      const double ms = elapsed_ms(t0);
      const auto pred = baseline_predictions(predictor, test_edges);
      add_row(gvae::to_string(kind), baseline_metrics(pred, test_edges), ms);
    }
    gvae::atomic_write_file(bench_out, csv);
    std::cout << csv << "table -> " << bench_out << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\nrun with --help for usage\n";
    return kExitUsage;
  } catch (const gvae::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const gvae::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const gvae::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return exit_code;
}
