#include "gvae/bigraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

#include "gvae/error.hpp"
#include "gvae/io_util.hpp"
#include "gvae/rng.hpp"

namespace gvae {

int score_to_level(double score) {
  if (!std::isfinite(score) || score < 0.0 || score > 100.0) {
    throw DataError("score " + format_double(score) + " outside [0,100]");
  }
  const int level = static_cast<int>(std::floor(score / 10.0)) + 1;
  return std::min(level, kNumLevels);
}

namespace {

std::uint32_t intern(const std::string& id, std::vector<std::string>& ids,
                     std::unordered_map<std::string, std::uint32_t>& lookup) {
  auto it = lookup.find(id);
  if (it != lookup.end()) return it->second;
  const auto idx = static_cast<std::uint32_t>(ids.size());
  ids.push_back(id);
  lookup.emplace(id, idx);
  return idx;
}

}  // namespace

BipartiteGraph BipartiteGraph::from_levels(
    std::span<const std::tuple<std::string, std::string, int>> triples,
    std::size_t* duplicate_count) {
  BipartiteGraph g;
  // (student, course) -> position in edges_; later triples overwrite.
  std::unordered_map<std::uint64_t, std::size_t> seen;
  std::size_t duplicates = 0;
  for (const auto& [student_id, course_id, level] : triples) {
    if (level < 1 || level > kNumLevels) {
      throw DataError("level " + std::to_string(level) + " outside 1.." +
                      std::to_string(kNumLevels));
    }
    const std::uint32_t s = intern(student_id, g.student_ids_, g.student_lookup_);
    const std::uint32_t c = intern(course_id, g.course_ids_, g.course_lookup_);
    const std::uint64_t key = (static_cast<std::uint64_t>(s) << 32) | c;
    auto it = seen.find(key);
    if (it != seen.end()) {
      g.edges_[it->second].level = level;
      ++duplicates;
    } else {
      seen.emplace(key, g.edges_.size());
      g.edges_.push_back({s, c, level});
    }
  }
  if (duplicate_count) *duplicate_count = duplicates;
  return g;
}

BipartiteGraph BipartiteGraph::from_records(std::span<const GradeRecord> records,
                                            std::size_t* duplicate_count) {
  std::vector<std::tuple<std::string, std::string, int>> triples;
  triples.reserve(records.size());
  for (const auto& r : records) {
    triples.emplace_back(r.student_id, r.course_id, score_to_level(r.score));
  }
  return from_levels(triples, duplicate_count);
}

std::optional<std::uint32_t> BipartiteGraph::student_index(const std::string& id) const {
  auto it = student_lookup_.find(id);
  if (it == student_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> BipartiteGraph::course_index(const std::string& id) const {
  auto it = course_lookup_.find(id);
  if (it == course_lookup_.end()) return std::nullopt;
  return it->second;
}

LoadResult load_csv(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  if (content.empty()) throw DataError("'" + path.string() + "' is empty");

  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;

  auto next_line = [&](std::string& out) {
    if (!std::getline(in, out)) return false;
    ++line_no;
    if (!out.empty() && out.back() == '\r') out.pop_back();
    return true;
  };

  if (!next_line(line)) throw DataError("'" + path.string() + "' is empty");
  // Tolerate a UTF-8 byte order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (line != "student_id,course_id,score") {
    throw DataError("'" + path.string() + "': expected header student_id,course_id,score");
  }

  std::vector<GradeRecord> records;
  while (next_line(line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw DataError("'" + path.string() + "' row " + std::to_string(line_no) +
                      ": expected 3 fields, got " + std::to_string(fields.size()));
    }
    if (fields[0].empty() || fields[1].empty()) {
      throw DataError("'" + path.string() + "' row " + std::to_string(line_no) +
                      ": empty id");
    }
    const double score =
        parse_double(fields[2], "'" + path.string() + "' row " + std::to_string(line_no));
    if (!std::isfinite(score) || score < 0.0 || score > 100.0) {
      throw DataError("'" + path.string() + "' row " + std::to_string(line_no) +
                      ": score " + fields[2] + " outside [0,100]");
    }
    records.push_back({fields[0], fields[1], score});
  }
  if (records.empty()) throw DataError("'" + path.string() + "' has no data rows");

  LoadResult result;
  result.graph = BipartiteGraph::from_records(records, &result.duplicate_count);
  return result;
}

void write_csv(const BipartiteGraph& graph, const std::filesystem::path& path) {
  std::string out = "student_id,course_id,score\n";
  for (const auto& e : graph.edges()) {
    const int score = (e.level - 1) * 10 + 5;
    out += graph.student_id(e.student);
    out += ',';
    out += graph.course_id(e.course);
    out += ',';
    out += std::to_string(score);
    out += '\n';
  }
  atomic_write_file(path, out);
}

LevelAdjacency LevelAdjacency::from_edges(std::size_t num_students, std::size_t num_courses,
                                          std::span<const Edge> edges) {
  LevelAdjacency adj;
  adj.num_students_ = num_students;
  adj.num_courses_ = num_courses;
  adj.num_edges_ = edges.size();
  const std::size_t n_nodes = num_students + num_courses;
  adj.bipartite_.assign(kNumLevels, SparseLevelMatrix(num_students, num_courses));
  adj.symmetric_.assign(kNumLevels, SparseLevelMatrix(n_nodes, n_nodes));
  adj.active_.assign(kNumLevels, {});

  for (const auto& e : edges) {
    if (e.level < 1 || e.level > kNumLevels) {
      throw DataError("edge level " + std::to_string(e.level) + " outside 1..10");
    }
    auto& bip = adj.bipartite_[e.level - 1];
    auto& sym = adj.symmetric_[e.level - 1];
    bip.add(e.student, e.course);
    const auto course_node = static_cast<std::uint32_t>(num_students + e.course);
    sym.add(e.student, course_node);
    sym.add(course_node, e.student);
  }
  for (int r = 0; r < kNumLevels; ++r) {
    adj.bipartite_[r].finalize();
    adj.symmetric_[r].finalize();
    auto& active = adj.active_[r];
    for (const auto& entry : adj.symmetric_[r].entries()) {
      if (active.empty() || active.back() != entry.row) active.push_back(entry.row);
    }
  }
  return adj;
}

const SparseLevelMatrix& LevelAdjacency::bipartite(int level) const {
  return bipartite_.at(static_cast<std::size_t>(level - 1));
}

const SparseLevelMatrix& LevelAdjacency::symmetric(int level) const {
  return symmetric_.at(static_cast<std::size_t>(level - 1));
}

std::span<const std::uint32_t> LevelAdjacency::active_nodes(int level) const {
  return active_.at(static_cast<std::size_t>(level - 1));
}

LevelAdjacency decompose(const BipartiteGraph& graph) {
  return LevelAdjacency::from_edges(graph.num_students(), graph.num_courses(),
                                    graph.edges());
}

DegreeVector degrees(const LevelAdjacency& adj) {
  DegreeVector deg(adj.num_nodes(), 0);
  for (int r = 1; r <= kNumLevels; ++r) {
    for (const auto& e : adj.symmetric(r).entries()) ++deg[e.row];
  }
  return deg;
}

DataSplit split(const BipartiteGraph& graph, SplitFractions fractions, std::uint64_t seed) {
  if (fractions.train < 0.0 || fractions.test < 0.0 || fractions.valid < 0.0) {
    throw DataError("split fractions must be nonnegative");
  }
  const double sum = fractions.train + fractions.test + fractions.valid;
  if (sum > 1.0 + 1e-9) {
    throw DataError("split fractions sum to " + format_double(sum) + " > 1");
  }

  const std::size_t count = graph.edges().size();
  std::vector<std::uint32_t> order(count);
  std::iota(order.begin(), order.end(), 0u);

  // Fisher-Yates driven by the seeded stream.
  Rng rng(seed);
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }

  const auto take = [&](double fraction) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(count)));
  };

  DataSplit out;
  out.fractions = fractions;
  out.seed = seed;
  std::size_t pos = 0;
  const std::size_t n_train = take(fractions.train);
  const std::size_t n_test = take(fractions.test);
  const std::size_t n_valid = take(fractions.valid);
  out.train.assign(order.begin(), order.begin() + n_train);
  pos += n_train;
  out.test.assign(order.begin() + pos, order.begin() + pos + n_test);
  pos += n_test;
  out.valid.assign(order.begin() + pos, order.begin() + pos + n_valid);
  pos += n_valid;
  out.unused.assign(order.begin() + pos, order.end());
  return out;
}

void write_split_manifest(const DataSplit& split, std::size_t num_edges,
                          const std::filesystem::path& path) {
  std::vector<std::string> role(num_edges, "unused");
  for (auto i : split.train) role.at(i) = "train";
  for (auto i : split.test) role.at(i) = "test";
  for (auto i : split.valid) role.at(i) = "valid";
  std::string out = "edge_index,role\n";
  for (std::size_t i = 0; i < num_edges; ++i) {
    out += std::to_string(i);
    out += ',';
    out += role[i];
    out += '\n';
  }
  atomic_write_file(path, out);
}

DataSplit read_split_manifest(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "edge_index,role") {
    throw DataError("'" + path.string() + "': expected header edge_index,role");
  }
  DataSplit out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2) {
      throw DataError("'" + path.string() + "' row " + std::to_string(line_no) +
                      ": expected 2 fields");
    }
    const auto idx = static_cast<std::uint32_t>(
        parse_double(fields[0], "'" + path.string() + "' row " + std::to_string(line_no)));
    if (fields[1] == "train") {
      out.train.push_back(idx);
    } else if (fields[1] == "test") {
      out.test.push_back(idx);
    } else if (fields[1] == "valid") {
      out.valid.push_back(idx);
    } else if (fields[1] == "unused") {
      out.unused.push_back(idx);
    } else {
      throw DataError("'" + path.string() + "' row " + std::to_string(line_no) +
                      ": unknown role '" + fields[1] + "'");
    }
  }
  return out;
}

std::vector<Edge> gather_edges(const BipartiteGraph& graph,
                               std::span<const std::uint32_t> indices) {
  std::vector<Edge> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(graph.edges().at(i));
  return out;
}

}  // namespace gvae
