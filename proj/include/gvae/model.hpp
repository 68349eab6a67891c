#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "gvae/adam.hpp"
#include "gvae/bigraph.hpp"
#include "gvae/matrix.hpp"
#include "gvae/rng.hpp"

namespace gvae {

struct ModelDims {
  std::size_t nodes = 0;      // N = students + courses
  std::size_t features = 64;  // K, trainable node feature width
  std::size_t hidden = 64;    // E1, conv layer width
  std::size_t latent = 32;    // E, latent embedding width
  int depth = 1;              // number of stacked conv layers
};

// All trainable tensors. Serialization order is the order visited by
// for_each_tensor: node features, conv weights layer by layer, the two
// dense heads, then the per-level decoder channel weights.
struct ModelParams {
  ModelDims dims;
  DenseMatrix node_features;                                      // N x K
  std::vector<std::array<DenseMatrix, kNumLevels>> conv_weights;  // [depth][level]
  DenseMatrix head_mean;                                          // E1 x E
  DenseMatrix head_log_std;                                       // E1 x E
  std::array<DenseMatrix, kNumLevels> channel_weights;            // N x E each
};

// Mirror of ModelParams holding d(loss)/d(parameter).
struct Gradients {
  DenseMatrix node_features;
  std::vector<std::array<DenseMatrix, kNumLevels>> conv_weights;
  DenseMatrix head_mean;
  DenseMatrix head_log_std;
  std::array<DenseMatrix, kNumLevels> channel_weights;
};

template <typename Params, typename Fn>
void for_each_tensor(Params& p, Fn&& fn) {
  fn("X", p.node_features);
  for (std::size_t layer = 0; layer < p.conv_weights.size(); ++layer) {
    for (int r = 0; r < kNumLevels; ++r) {
      std::string name = "W" + std::to_string(r + 1);
      if (layer > 0) name = "L" + std::to_string(layer + 1) + "." + name;
      fn(name, p.conv_weights[layer][static_cast<std::size_t>(r)]);
    }
  }
  fn("W_mean", p.head_mean);
  fn("W_log_std", p.head_log_std);
  for (int r = 0; r < kNumLevels; ++r) {
    fn("H" + std::to_string(r + 1), p.channel_weights[static_cast<std::size_t>(r)]);
  }
}

// Glorot-uniform init of every tensor, deterministic per seed.
ModelParams init_params(const ModelDims& dims, std::uint64_t seed);

Gradients zero_gradients(const ModelParams& params);

// Parameter/gradient pairs in serialization order, for the optimizer.
std::vector<ParamView> param_views(ModelParams& params, const Gradients& grads);

// Per-node keep scale: 0 for dropped rows, 1/(1-rate) for kept rows.
struct DropoutMask {
  std::vector<double> row_scale;
};
DropoutMask no_dropout(std::size_t nodes);
DropoutMask sample_dropout(std::size_t nodes, double rate, Rng& rng);

struct EncodeResult {
  std::vector<DenseMatrix> layer_out;  // post-ReLU output per conv layer
  DenseMatrix hidden_dropped;          // final layer after the dropout mask
  DenseMatrix z_mean;                  // N x E
  DenseMatrix z_log_std;               // N x E
};

// Conv stack: layer input A_0 = X, A_l = ReLU(sum_r Dinv * M_r * A_{l-1} * W_{l,r}),
// rows of zero-degree nodes stay zero. Heads are linear on the dropped output.
EncodeResult encode(const LevelAdjacency& adj, const DegreeVector& deg,
                    const ModelParams& params, const DropoutMask& mask);

struct Reparam {
  DenseMatrix epsilon;
  DenseMatrix z;  // z = mean + epsilon .* exp(log_std)
};
Reparam reparameterize(const DenseMatrix& z_mean, const DenseMatrix& z_log_std, Rng& rng);
DenseMatrix sample_epsilon(std::size_t rows, std::size_t cols, Rng& rng);
DenseMatrix apply_reparam(const DenseMatrix& z_mean, const DenseMatrix& z_log_std,
                          const DenseMatrix& epsilon);

// Sum over nodes and dims of -1/2 (1 + 2s - mu^2 - exp(2s)); always >= 0.
double kl_cost(const DenseMatrix& z_mean, const DenseMatrix& z_log_std);

struct QueryPair {
  std::uint32_t student = 0;
  std::uint32_t course = 0;
};

struct PredictionTensor {
  std::vector<QueryPair> queries;
  DenseMatrix logits;                 // Q x 10
  DenseMatrix probs;                  // Q x 10, softmax over levels
  std::vector<double> expected_level; // sum_r r * p_r
  std::vector<int> argmax_level;      // 1..10, lowest level wins ties
};

// logit_r(i,j) = sum_k z[i,k] * H_r[i,k] * z[m+j,k].
PredictionTensor decode(const DenseMatrix& z,
                        const std::array<DenseMatrix, kNumLevels>& channel_weights,
                        std::size_t num_students, std::span<const QueryPair> queries);

// -sum_e log p_true(e), evaluated via log-sum-exp on the cached logits.
double cross_entropy(const PredictionTensor& pred, std::span<const int> truth_levels);

enum class LossMode {
  kMaskedSoftmaxCe,  // categorical CE over the supervised edges
  kLiteralBce,       // per-channel sigmoid BCE over all N x N entries
};

struct ForwardOptions {
  LossMode mode = LossMode::kMaskedSoftmaxCe;
  double kl_weight = 1.0;
};

struct ForwardResult {
  EncodeResult enc;
  DenseMatrix epsilon;
  DenseMatrix z;
  PredictionTensor pred;                    // masked mode only
  std::vector<DenseMatrix> channel_scores;  // literal mode: 10 N x N score matrices
  double kl = 0.0;
  double data_cost = 0.0;
  double loss = 0.0;
};

// Full training forward pass with every intermediate backward needs.
// epsilon is supplied by the caller (all-zero for inference).
ForwardResult forward(const ModelParams& params, const LevelAdjacency& adj,
                      const DegreeVector& deg, std::span<const Edge> supervise,
                      const DenseMatrix& epsilon, const DropoutMask& mask,
                      const ForwardOptions& options);

// Exact reverse-mode gradients of ForwardResult.loss for every tensor.
Gradients backward(const ModelParams& params, const LevelAdjacency& adj,
                   const DegreeVector& deg, std::span<const Edge> supervise,
                   const ForwardResult& fwd, const DropoutMask& mask,
                   const ForwardOptions& options);

// d(expected level at query)/d(node_features), encoder run at epsilon = 0
// with no dropout. Used for gradient-times-input attribution.
DenseMatrix expected_level_input_gradient(const ModelParams& params,
                                          const LevelAdjacency& adj,
                                          const DegreeVector& deg, QueryPair query);

}  // namespace gvae
