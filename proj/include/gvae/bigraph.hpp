#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "gvae/matrix.hpp"

namespace gvae {

inline constexpr int kNumLevels = 10;

struct GradeRecord {
  std::string student_id;
  std::string course_id;
  double score = 0.0;  // raw score in [0,100]
};

// floor(score/10)+1 clamped to 10; score must lie in [0,100].
int score_to_level(double score);

struct Edge {
  std::uint32_t student = 0;  // dense student index
  std::uint32_t course = 0;   // dense course index
  int level = 0;              // 1..10
};

// Students and courses with at most one graded edge per pair. Dense indices
// are assigned in first-appearance order; node count N = m + n where student
// node i maps to row i and course node j to row m + j.
class BipartiteGraph {
 public:
  // Later records overwrite earlier ones for the same (student, course).
  static BipartiteGraph from_records(std::span<const GradeRecord> records,
                                     std::size_t* duplicate_count = nullptr);
  static BipartiteGraph from_levels(
      std::span<const std::tuple<std::string, std::string, int>> triples,
      std::size_t* duplicate_count = nullptr);

  std::size_t num_students() const { return student_ids_.size(); }
  std::size_t num_courses() const { return course_ids_.size(); }
  std::size_t num_nodes() const { return num_students() + num_courses(); }

  const std::vector<Edge>& edges() const { return edges_; }

  const std::string& student_id(std::uint32_t idx) const { return student_ids_[idx]; }
  const std::string& course_id(std::uint32_t idx) const { return course_ids_[idx]; }
  std::optional<std::uint32_t> student_index(const std::string& id) const;
  std::optional<std::uint32_t> course_index(const std::string& id) const;

 private:
  std::vector<std::string> student_ids_;
  std::vector<std::string> course_ids_;
  std::unordered_map<std::string, std::uint32_t> student_lookup_;
  std::unordered_map<std::string, std::uint32_t> course_lookup_;
  std::vector<Edge> edges_;
};

struct LoadResult {
  BipartiteGraph graph;
  std::size_t duplicate_count = 0;
};

// CSV with header student_id,course_id,score. Throws DataError on malformed
// rows, out-of-range scores (with the row number), or an empty file.
LoadResult load_csv(const std::filesystem::path& path);

// Inverse of load_csv: levels are written as their bucket midpoint score
// (level-1)*10 + 5, which maps back to the same level.
void write_csv(const BipartiteGraph& graph, const std::filesystem::path& path);

// Per-level bipartite 0-1 matrices A_r (m x n) plus their symmetric N x N
// views with entries at (i, m+j) and (m+j, i).
class LevelAdjacency {
 public:
  static LevelAdjacency from_edges(std::size_t num_students, std::size_t num_courses,
                                   std::span<const Edge> edges);

  std::size_t num_students() const { return num_students_; }
  std::size_t num_courses() const { return num_courses_; }
  std::size_t num_nodes() const { return num_students_ + num_courses_; }
  std::size_t num_edges() const { return num_edges_; }

  // level is 1-based.
  const SparseLevelMatrix& bipartite(int level) const;
  const SparseLevelMatrix& symmetric(int level) const;

  // Nodes with at least one edge of the given level, ascending.
  std::span<const std::uint32_t> active_nodes(int level) const;

 private:
  std::size_t num_students_ = 0;
  std::size_t num_courses_ = 0;
  std::size_t num_edges_ = 0;
  std::vector<SparseLevelMatrix> bipartite_;
  std::vector<SparseLevelMatrix> symmetric_;
  std::vector<std::vector<std::uint32_t>> active_;
};

LevelAdjacency decompose(const BipartiteGraph& graph);

using DegreeVector = std::vector<std::uint32_t>;

// Total observed-edge count per node across all levels.
DegreeVector degrees(const LevelAdjacency& adj);

struct SplitFractions {
  double train = 0.75;
  double test = 0.10;
  double valid = 0.05;
};

struct DataSplit {
  std::vector<std::uint32_t> train;
  std::vector<std::uint32_t> test;
  std::vector<std::uint32_t> valid;
  std::vector<std::uint32_t> unused;
  SplitFractions fractions;
  std::uint64_t seed = 0;
};

// Seeded uniform permutation of edge indices cut into train/test/valid;
// the remainder is left unused. Fraction sum must not exceed 1.
DataSplit split(const BipartiteGraph& graph, SplitFractions fractions, std::uint64_t seed);

// Manifest CSV: edge_index,role with role in {train,test,valid,unused}.
void write_split_manifest(const DataSplit& split, std::size_t num_edges,
                          const std::filesystem::path& path);
DataSplit read_split_manifest(const std::filesystem::path& path);

std::vector<Edge> gather_edges(const BipartiteGraph& graph,
                               std::span<const std::uint32_t> indices);

}  // namespace gvae
