#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gvae/bigraph.hpp"
#include "gvae/matrix.hpp"

namespace gvae {

// Block-structured grade generator: every (student cluster, course cluster)
// block has a base level; observed levels are the base plus rounded Gaussian
// noise, clamped to 1..10, each pair kept with probability `density`.
struct SyntheticSpec {
  std::size_t num_students = 369;
  std::size_t num_courses = 142;
  std::size_t student_clusters = 4;
  std::size_t course_clusters = 3;
  DenseMatrix base_levels;      // student_clusters x course_clusters, empty = default
  double noise_sigma = 0.7;     // std-dev of the pre-rounding level noise
  double density = 0.15;        // observation probability per pair, in (0,1]
  std::uint64_t seed = 42;
};

// The 4x3 base table used when SyntheticSpec.base_levels is empty. Rows and
// columns have pairwise-distinct patterns so clusters are identifiable.
DenseMatrix default_base_levels();

struct SyntheticTruth {
  std::vector<int> student_cluster;  // indexed by graph student index
  std::vector<int> course_cluster;   // indexed by graph course index
  DenseMatrix noiseless_levels;      // m x n base level per pair, graph indices
};

struct SyntheticData {
  BipartiteGraph graph;
  SyntheticTruth truth;
};

// Deterministic per spec.seed. Nodes that end up with no observed edge do
// not appear in the graph (vanishing probability at default density).
SyntheticData generate(const SyntheticSpec& spec);

// truth CSV: node_kind,id,cluster with node_kind in {student,course}.
void write_truth_csv(const SyntheticData& data, const std::filesystem::path& path);
std::vector<int> read_truth_student_clusters(const std::filesystem::path& path,
                                             const BipartiteGraph& graph);

}  // namespace gvae
