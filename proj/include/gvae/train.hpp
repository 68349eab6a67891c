#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "gvae/bigraph.hpp"
#include "gvae/model.hpp"

namespace gvae {

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.1;
  double dropout = 0.1;
  double kl_weight = 1.0;
  std::size_t feature_dim = 64;  // K
  std::size_t hidden_dim = 64;   // E1
  std::size_t latent_dim = 32;   // E
  int depth = 1;
  std::uint64_t seed = 42;
  LossMode loss_mode = LossMode::kMaskedSoftmaxCe;
  int eval_every = 10;
};

struct EpochLog {
  int epoch = 0;  // 1-based
  double loss = 0.0;
  std::optional<double> train_rmse;
  std::optional<double> valid_rmse;
  double ms = 0.0;
};

struct FitResult {
  ModelParams params;
  std::vector<EpochLog> logs;
};

// Full-graph training on the train split; deterministic per config seed.
// Aborts with NumericError (epoch and tensor named) if the loss leaves the
// finite range.
FitResult fit(const BipartiteGraph& graph, const DataSplit& split,
              const TrainConfig& config);

struct Metrics {
  double rmse = 0.0;
  double mae = 0.0;
  double matrix_rmse = 0.0;
  std::size_t count = 0;
};

// rmse/mae between real-valued predictions and integer truth levels.
// Shared by the model path and the baselines.
Metrics compute_metrics(std::span<const double> predicted, std::span<const int> truth);

// Encodes with the given adjacency at epsilon = 0 and scores eval_edges.
// matrix_rmse is the 10-channel form sqrt(mean_r sum_e (1[r=t]-p_r)^2 / count).
Metrics evaluate(const ModelParams& params, const LevelAdjacency& adj,
                 const DegreeVector& deg, std::span<const Edge> eval_edges);

// Posterior-mean prediction for arbitrary pairs.
PredictionTensor predict(const ModelParams& params, const LevelAdjacency& adj,
                         const DegreeVector& deg, std::span<const QueryPair> pairs);

// CSV epoch,loss,train_rmse,valid_rmse,ms; unevaluated fields stay empty.
void write_epoch_log_csv(const std::filesystem::path& path,
                         std::span<const EpochLog> logs, bool stable_timings);

// CSV student_id,course_id,expected_level,argmax_level,p1..p10.
void write_predictions_csv(const std::filesystem::path& path, const BipartiteGraph& graph,
                           const PredictionTensor& pred);

// 20-epoch trailing moving average of the training loss ending at `epoch`.
double smoothed_loss(std::span<const EpochLog> logs, int epoch, int window = 20);

}  // namespace gvae
