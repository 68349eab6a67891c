#include "gvae/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "gvae/error.hpp"
#include "gvae/io_util.hpp"
#include "gvae/rng.hpp"

namespace gvae {

DenseMatrix default_base_levels() {
  DenseMatrix b(4, 3);
  const double values[4][3] = {{9, 6, 3}, {7, 4, 8}, {5, 8, 2}, {2, 9, 6}};
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 3; ++j) b(i, j) = values[i][j];
  }
  return b;
}

namespace {

std::string student_name(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "s%04zu", i + 1);
  return buf;
}

std::string course_name(std::size_t j) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "c%04zu", j + 1);
  return buf;
}

}  // namespace

SyntheticData generate(const SyntheticSpec& spec) {
  if (spec.num_students == 0 || spec.num_courses == 0) {
    throw DataError("synthetic spec requires at least one student and one course");
  }
  if (spec.student_clusters == 0 || spec.course_clusters == 0) {
    throw DataError("synthetic spec requires at least one cluster per side");
  }
  if (!(spec.density > 0.0 && spec.density <= 1.0)) {
    throw DataError("synthetic density must lie in (0,1]");
  }
  if (spec.noise_sigma < 0.0) throw DataError("synthetic noise sigma must be >= 0");

  DenseMatrix base = spec.base_levels.empty() ? default_base_levels() : spec.base_levels;
  if (base.rows() != spec.student_clusters || base.cols() != spec.course_clusters) {
    throw DataError("base level table shape does not match cluster counts");
  }
  for (double v : base.values()) {
    if (v < 1.0 || v > 10.0) throw DataError("base levels must lie in 1..10");
  }

  Rng root(spec.seed);
  Rng student_rng = root.fork(seed_purpose::kSynthStudentClusters);
  Rng course_rng = root.fork(seed_purpose::kSynthCourseClusters);
  Rng observe_rng = root.fork(seed_purpose::kSynthObserve);

  std::vector<int> student_cluster(spec.num_students);
  for (auto& c : student_cluster) {
    c = static_cast<int>(student_rng.below(spec.student_clusters));
  }
  std::vector<int> course_cluster(spec.num_courses);
  for (auto& c : course_cluster) {
    c = static_cast<int>(course_rng.below(spec.course_clusters));
  }

  std::vector<std::tuple<std::string, std::string, int>> triples;
  for (std::size_t i = 0; i < spec.num_students; ++i) {
    for (std::size_t j = 0; j < spec.num_courses; ++j) {
      if (observe_rng.uniform() >= spec.density) continue;
      const double mean = base(static_cast<std::size_t>(student_cluster[i]),
                               static_cast<std::size_t>(course_cluster[j]));
      double level = mean;
      if (spec.noise_sigma > 0.0) level += spec.noise_sigma * observe_rng.normal();
      const int rounded = static_cast<int>(std::lround(level));
      triples.emplace_back(student_name(i), course_name(j),
                           std::clamp(rounded, 1, kNumLevels));
    }
  }
  if (triples.empty()) throw DataError("synthetic spec produced no observed pairs");

  SyntheticData out;
  out.graph = BipartiteGraph::from_levels(triples);

  // Remap cluster labels and the base matrix into graph index order.
  const std::size_t m = out.graph.num_students();
  const std::size_t n = out.graph.num_courses();
  out.truth.student_cluster.resize(m);
  out.truth.course_cluster.resize(n);
  std::vector<std::size_t> student_origin(m), course_origin(n);
  for (std::size_t i = 0; i < spec.num_students; ++i) {
    if (auto idx = out.graph.student_index(student_name(i))) {
      out.truth.student_cluster[*idx] = student_cluster[i];
      student_origin[*idx] = i;
    }
  }
  for (std::size_t j = 0; j < spec.num_courses; ++j) {
    if (auto idx = out.graph.course_index(course_name(j))) {
      out.truth.course_cluster[*idx] = course_cluster[j];
      course_origin[*idx] = j;
    }
  }
  out.truth.noiseless_levels = DenseMatrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.truth.noiseless_levels(i, j) =
          base(static_cast<std::size_t>(out.truth.student_cluster[i]),
               static_cast<std::size_t>(out.truth.course_cluster[j]));
    }
  }
  return out;
}

void write_truth_csv(const SyntheticData& data, const std::filesystem::path& path) {
  std::string out = "node_kind,id,cluster\n";
  for (std::size_t i = 0; i < data.graph.num_students(); ++i) {
    out += "student,";
    out += data.graph.student_id(static_cast<std::uint32_t>(i));
    out += ',';
    out += std::to_string(data.truth.student_cluster[i]);
    out += '\n';
  }
  for (std::size_t j = 0; j < data.graph.num_courses(); ++j) {
    out += "course,";
    out += data.graph.course_id(static_cast<std::uint32_t>(j));
    out += ',';
    out += std::to_string(data.truth.course_cluster[j]);
    out += '\n';
  }
  atomic_write_file(path, out);
}

std::vector<int> read_truth_student_clusters(const std::filesystem::path& path,
                                             const BipartiteGraph& graph) {
  const std::string content = read_file(path);
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "node_kind,id,cluster") {
    throw DataError("'" + path.string() + "': expected header node_kind,id,cluster");
  }
  std::vector<int> clusters(graph.num_students(), -1);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) {
      throw DataError("'" + path.string() + "' row " + std::to_string(line_no) +
                      ": expected 3 fields");
    }
    if (fields[0] != "student") continue;
    const auto idx = graph.student_index(fields[1]);
    if (!idx) continue;
    clusters[*idx] = static_cast<int>(
        parse_double(fields[2], "'" + path.string() + "' row " + std::to_string(line_no)));
  }
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i] < 0) {
      throw DataError("'" + path.string() + "': missing cluster for student " +
                      graph.student_id(static_cast<std::uint32_t>(i)));
    }
  }
  return clusters;
}

}  // namespace gvae
