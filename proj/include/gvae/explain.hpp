#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gvae/bigraph.hpp"
#include "gvae/model.hpp"

namespace gvae {

struct AttributionEntry {
  std::uint32_t node = 0;  // 0..N-1, course nodes offset by num_students
  bool is_student = false;
  int hop = -1;  // BFS distance from the target pair; -1 if unreachable
  double score = 0.0;
};

struct AttributionReport {
  QueryPair target;
  std::vector<double> node_scores;        // |sum_k dE/dX[node,k] * X[node,k]|, size N
  std::vector<int> hops;                  // size N
  std::vector<AttributionEntry> ranked;   // all nodes, score descending
};

// Gradient-times-input influence of every node on the expected level of the
// target pair. Nodes outside the conv stack's receptive field score exactly 0.
AttributionReport attribute(const ModelParams& params, const BipartiteGraph& graph,
                            QueryPair target);

struct EmbeddingDump {
  std::vector<std::string> node_id;  // students then courses
  std::size_t num_students = 0;
  DenseMatrix embeddings;            // N x E posterior means
  std::vector<double> pca_x, pca_y;  // projection fitted on student rows
};

EmbeddingDump export_embeddings(const ModelParams& params, const BipartiteGraph& graph);

// CSV node_id,kind,z_1..z_E,pca_x,pca_y.
void write_embeddings_csv(const std::filesystem::path& path, const EmbeddingDump& dump);

// Two leading principal components, deterministic sign (largest-magnitude
// loading positive, ties to the lowest index).
struct Pca2 {
  std::vector<double> mean;        // column means of the fit rows
  std::vector<double> axis1, axis2;
};
Pca2 fit_pca2(const DenseMatrix& rows);
void project_pca2(const Pca2& pca, const DenseMatrix& rows, std::vector<double>& x,
                  std::vector<double>& y);

// Lloyd iterations with k-means++ seeding, best of `restarts` by inertia.
std::vector<int> kmeans(const DenseMatrix& points, int k, int restarts,
                        std::uint64_t seed);

double adjusted_rand_index(std::span<const int> labels_a, std::span<const int> labels_b);

// ARI between k-means on the student embeddings and the true clusters.
double cluster_score(const EmbeddingDump& dump, std::span<const int> truth_student_clusters,
                     int k, std::uint64_t seed);

// CSV rank,node_id,node_kind,hop,score for the strongest `top` nodes.
void write_attribution_csv(const std::filesystem::path& path, const BipartiteGraph& graph,
                           const AttributionReport& report, int top);

}  // namespace gvae
