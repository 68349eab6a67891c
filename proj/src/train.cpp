#include "gvae/train.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "gvae/error.hpp"
#include "gvae/io_util.hpp"

namespace gvae {

namespace {

// Name the first non-finite tensor, or the largest-magnitude one if all are
// finite (the loss can overflow while parameters still are).
std::string blame_tensor(const ModelParams& params, const Gradients& grads) {
  std::string name;
  for_each_tensor(params, [&](const std::string& n, const DenseMatrix& t) {
    if (name.empty() && !t.all_finite()) name = n;
  });
  if (!name.empty()) return name;
  for_each_tensor(grads, [&](const std::string& n, const DenseMatrix& t) {
    if (name.empty() && !t.all_finite()) name = "grad " + n;
  });
  if (!name.empty()) return name;
  double best = -1.0;
  for_each_tensor(params, [&](const std::string& n, const DenseMatrix& t) {
    for (double v : t.values()) {
      if (std::abs(v) > best) {
        best = std::abs(v);
        name = n;
      }
    }
  });
  return name;
}

std::vector<int> truth_of(std::span<const Edge> edges) {
  std::vector<int> t;
  t.reserve(edges.size());
  for (const auto& e : edges) t.push_back(e.level);
  return t;
}

}  // namespace

Metrics compute_metrics(std::span<const double> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw DataError("metrics need one prediction per truth value and at least one pair");
  }
  double sq = 0.0;
  double ab = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - static_cast<double>(truth[i]);
    sq += d * d;
    ab += std::abs(d);
  }
  Metrics m;
  m.count = predicted.size();
  m.rmse = std::sqrt(sq / static_cast<double>(m.count));
  m.mae = ab / static_cast<double>(m.count);
  return m;
}

Metrics evaluate(const ModelParams& params, const LevelAdjacency& adj,
                 const DegreeVector& deg, std::span<const Edge> eval_edges) {
  if (eval_edges.empty()) throw DataError("evaluate: empty edge set");
  std::vector<QueryPair> queries;
  queries.reserve(eval_edges.size());
  for (const auto& e : eval_edges) queries.push_back({e.student, e.course});
  const PredictionTensor pred = predict(params, adj, deg, queries);

  const std::vector<int> truth = truth_of(eval_edges);
  Metrics m = compute_metrics(pred.expected_level, truth);

  // 10-channel squared error between the one-hot truth and the predicted
  // distribution, averaged over channels and evaluated pairs.
  double channel_sq = 0.0;
  for (std::size_t t = 0; t < eval_edges.size(); ++t) {
    for (int r = 0; r < kNumLevels; ++r) {
      const double y = (truth[t] == r + 1) ? 1.0 : 0.0;
      const double d = y - pred.probs(t, static_cast<std::size_t>(r));
      channel_sq += d * d;
    }
  }
  m.matrix_rmse = std::sqrt(channel_sq / static_cast<double>(kNumLevels) /
                            static_cast<double>(eval_edges.size()));
  return m;
}

PredictionTensor predict(const ModelParams& params, const LevelAdjacency& adj,
                         const DegreeVector& deg, std::span<const QueryPair> pairs) {
  const DropoutMask mask = no_dropout(params.dims.nodes);
  const EncodeResult enc = encode(adj, deg, params, mask);
  return decode(enc.z_mean, params.channel_weights, adj.num_students(), pairs);
}

FitResult fit(const BipartiteGraph& graph, const DataSplit& split,
              const TrainConfig& config) {
  if (config.epochs < 1) throw DataError("fit: epochs must be at least 1");
  if (split.train.empty()) throw DataError("fit: empty train split");
  if (config.eval_every < 1) throw DataError("fit: eval_every must be at least 1");

  const std::vector<Edge> train_edges = gather_edges(graph, split.train);
  const std::vector<Edge> valid_edges = gather_edges(graph, split.valid);
  const LevelAdjacency adj =
      LevelAdjacency::from_edges(graph.num_students(), graph.num_courses(), train_edges);
  const DegreeVector deg = degrees(adj);

  ModelDims dims;
  dims.nodes = graph.num_nodes();
  dims.features = config.feature_dim;
  dims.hidden = config.hidden_dim;
  dims.latent = config.latent_dim;
  dims.depth = config.depth;

  FitResult result;
  result.params = init_params(dims, config.seed);

  Rng root(config.seed);
  Rng noise_rng = root.fork(seed_purpose::kNoise);
  Rng dropout_rng = root.fork(seed_purpose::kDropout);

  ForwardOptions options;
  options.mode = config.loss_mode;
  options.kl_weight = config.kl_weight;

  AdamState adam;
  {
    const Gradients zero = zero_gradients(result.params);
    AdamConfig acfg;
    acfg.alpha = config.learning_rate;
    adam = AdamState(param_views(result.params, zero), acfg);
  }

  result.logs.reserve(static_cast<std::size_t>(config.epochs));
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();

    const DropoutMask mask = sample_dropout(dims.nodes, config.dropout, dropout_rng);
    const DenseMatrix eps = sample_epsilon(dims.nodes, dims.latent, noise_rng);
    const ForwardResult fwd =
        forward(result.params, adj, deg, train_edges, eps, mask, options);
    const Gradients grads =
        backward(result.params, adj, deg, train_edges, fwd, mask, options);

    if (!std::isfinite(fwd.loss)) {
      throw NumericError("fit: non-finite loss at epoch " + std::to_string(epoch) +
                         " (suspect tensor: " + blame_tensor(result.params, grads) + ")");
    }
    adam.step(param_views(result.params, grads));

    EpochLog log;
    log.epoch = epoch;
    log.loss = fwd.loss;
    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      log.train_rmse = evaluate(result.params, adj, deg, train_edges).rmse;
      if (!valid_edges.empty()) {
        log.valid_rmse = evaluate(result.params, adj, deg, valid_edges).rmse;
      }
    }
    log.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                 .count();
    result.logs.push_back(log);
  }
  return result;
}

void write_epoch_log_csv(const std::filesystem::path& path,
                         std::span<const EpochLog> logs, bool stable_timings) {
  std::string out = "epoch,loss,train_rmse,valid_rmse,ms\n";
  for (const auto& log : logs) {
    out += std::to_string(log.epoch);
    out += ',';
    out += format_double(log.loss);
    out += ',';
    if (log.train_rmse) out += format_double(*log.train_rmse);
    out += ',';
    if (log.valid_rmse) out += format_double(*log.valid_rmse);
    out += ',';
    out += stable_timings ? "0" : format_double(log.ms);
    out += '\n';
  }
  atomic_write_file(path, out);
}

void write_predictions_csv(const std::filesystem::path& path, const BipartiteGraph& graph,
                           const PredictionTensor& pred) {
  std::string out = "student_id,course_id,expected_level,argmax_level";
  for (int r = 1; r <= kNumLevels; ++r) out += ",p" + std::to_string(r);
  out += '\n';
  for (std::size_t t = 0; t < pred.queries.size(); ++t) {
    out += graph.student_id(pred.queries[t].student);
    out += ',';
    out += graph.course_id(pred.queries[t].course);
    out += ',';
    out += format_double(pred.expected_level[t]);
    out += ',';
    out += std::to_string(pred.argmax_level[t]);
    for (int r = 0; r < kNumLevels; ++r) {
      out += ',';
      out += format_double(pred.probs(t, static_cast<std::size_t>(r)));
    }
    out += '\n';
  }
  atomic_write_file(path, out);
}

double smoothed_loss(std::span<const EpochLog> logs, int epoch, int window) {
  if (epoch < 1 || static_cast<std::size_t>(epoch) > logs.size()) {
    throw DataError("smoothed_loss: epoch " + std::to_string(epoch) + " out of range");
  }
  const int first = std::max(1, epoch - window + 1);
  double sum = 0.0;
  for (int e = first; e <= epoch; ++e) {
    sum += logs[static_cast<std::size_t>(e - 1)].loss;
  }
  return sum / static_cast<double>(epoch - first + 1);
}

}  // namespace gvae
