#include "gvae/explain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "gvae/error.hpp"
#include "gvae/io_util.hpp"
#include "gvae/rng.hpp"

namespace gvae {

namespace {

std::vector<int> bfs_hops(const LevelAdjacency& adj, std::uint32_t a, std::uint32_t b) {
  const std::size_t n = adj.num_nodes();
  std::vector<std::vector<std::uint32_t>> neighbors(n);
  for (int r = 1; r <= kNumLevels; ++r) {
    for (const auto& e : adj.symmetric(r).entries()) {
      neighbors[e.row].push_back(e.col);
    }
  }
  std::vector<int> hops(n, -1);
  std::deque<std::uint32_t> queue;
  hops[a] = 0;
  queue.push_back(a);
  if (hops[b] < 0) {
    hops[b] = 0;
    queue.push_back(b);
  }
  while (!queue.empty()) {
    const std::uint32_t cur = queue.front();
    queue.pop_front();
    for (auto nxt : neighbors[cur]) {
      if (hops[nxt] < 0) {
        hops[nxt] = hops[cur] + 1;
        queue.push_back(nxt);
      }
    }
  }
  return hops;
}

}  // namespace

AttributionReport attribute(const ModelParams& params, const BipartiteGraph& graph,
                            QueryPair target) {
  if (target.student >= graph.num_students() || target.course >= graph.num_courses()) {
    throw DataError("attribute: target pair out of range");
  }
  const LevelAdjacency adj = decompose(graph);
  const DegreeVector deg = degrees(adj);
  const DenseMatrix dx = expected_level_input_gradient(params, adj, deg, target);

  AttributionReport report;
  report.target = target;
  const std::size_t n = graph.num_nodes();
  report.node_scores.resize(n);
  for (std::size_t node = 0; node < n; ++node) {
    double acc = 0.0;
    const double* g = dx.row_ptr(node);
    const double* x = params.node_features.row_ptr(node);
    for (std::size_t k = 0; k < dx.cols(); ++k) acc += g[k] * x[k];
    report.node_scores[node] = std::abs(acc);
  }
  report.hops = bfs_hops(adj, target.student,
                         static_cast<std::uint32_t>(graph.num_students() + target.course));

  report.ranked.resize(n);
  for (std::size_t node = 0; node < n; ++node) {
    report.ranked[node] = {static_cast<std::uint32_t>(node),
                           node < graph.num_students(), report.hops[node],
                           report.node_scores[node]};
  }
  std::sort(report.ranked.begin(), report.ranked.end(),
            [](const AttributionEntry& a, const AttributionEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.node < b.node;
            });
  return report;
}

EmbeddingDump export_embeddings(const ModelParams& params, const BipartiteGraph& graph) {
  const LevelAdjacency adj = decompose(graph);
  const DegreeVector deg = degrees(adj);
  const EncodeResult enc = encode(adj, deg, params, no_dropout(params.dims.nodes));

  EmbeddingDump dump;
  dump.num_students = graph.num_students();
  dump.embeddings = enc.z_mean;
  dump.node_id.reserve(graph.num_nodes());
  for (std::size_t i = 0; i < graph.num_students(); ++i) {
    dump.node_id.push_back(graph.student_id(static_cast<std::uint32_t>(i)));
  }
  for (std::size_t j = 0; j < graph.num_courses(); ++j) {
    dump.node_id.push_back(graph.course_id(static_cast<std::uint32_t>(j)));
  }

  DenseMatrix students(dump.num_students, dump.embeddings.cols());
  for (std::size_t i = 0; i < dump.num_students; ++i) {
    for (std::size_t k = 0; k < dump.embeddings.cols(); ++k) {
      students(i, k) = dump.embeddings(i, k);
    }
  }
  const Pca2 pca = fit_pca2(students);
  project_pca2(pca, dump.embeddings, dump.pca_x, dump.pca_y);
  return dump;
}

void write_embeddings_csv(const std::filesystem::path& path, const EmbeddingDump& dump) {
  std::string out = "node_id,kind";
  for (std::size_t k = 1; k <= dump.embeddings.cols(); ++k) {
    out += ",z_" + std::to_string(k);
  }
  out += ",pca_x,pca_y\n";
  for (std::size_t node = 0; node < dump.node_id.size(); ++node) {
    out += dump.node_id[node];
    out += node < dump.num_students ? ",student" : ",course";
    for (std::size_t k = 0; k < dump.embeddings.cols(); ++k) {
      out += ',';
      out += format_double(dump.embeddings(node, k));
    }
    out += ',';
    out += format_double(dump.pca_x[node]);
    out += ',';
    out += format_double(dump.pca_y[node]);
    out += '\n';
  }
  atomic_write_file(path, out);
}

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
// eigenvalues and orthonormal column eigenvectors.
void jacobi_eigen(DenseMatrix a, std::vector<double>& values, DenseMatrix& vectors) {
  const std::size_t n = a.rows();
  vectors = DenseMatrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = vectors(i, p);
          const double viq = vectors(i, q);
          vectors(i, p) = c * vip - s * viq;
          vectors(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
}

void fix_sign(std::vector<double>& axis) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (std::abs(axis[i]) > std::abs(axis[best])) best = i;
  }
  if (axis[best] < 0.0) {
    for (double& v : axis) v = -v;
  }
}

}  // namespace

Pca2 fit_pca2(const DenseMatrix& rows) {
  if (rows.rows() < 2 || rows.cols() < 2) {
    throw DataError("fit_pca2 needs at least 2 rows and 2 columns");
  }
  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();
  Pca2 pca;
  pca.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) pca.mean[k] += rows(i, k);
  }
  for (double& v : pca.mean) v /= static_cast<double>(n);

  DenseMatrix centered(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) centered(i, k) = rows(i, k) - pca.mean[k];
  }
  DenseMatrix cov = matmul_at(centered, centered);
  for (double& v : cov.values()) v /= static_cast<double>(n - 1);

  std::vector<double> values;
  DenseMatrix vectors;
  jacobi_eigen(cov, values, vectors);

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

  pca.axis1.resize(d);
  pca.axis2.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    pca.axis1[k] = vectors(k, order[0]);
    pca.axis2[k] = vectors(k, order[1]);
  }
  fix_sign(pca.axis1);
  fix_sign(pca.axis2);
  return pca;
}

void project_pca2(const Pca2& pca, const DenseMatrix& rows, std::vector<double>& x,
                  std::vector<double>& y) {
  if (rows.cols() != pca.mean.size()) throw DimensionError("project_pca2: width mismatch");
  x.resize(rows.rows());
  y.resize(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    double px = 0.0;
    double py = 0.0;
    for (std::size_t k = 0; k < rows.cols(); ++k) {
      const double c = rows(i, k) - pca.mean[k];
      px += c * pca.axis1[k];
      py += c * pca.axis2[k];
    }
    x[i] = px;
    y[i] = py;
  }
}

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) {
  double acc = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = a[k] - b[k];
    acc += diff * diff;
  }
  return acc;
}

struct KmeansRun {
  std::vector<int> assignment;
  double inertia = std::numeric_limits<double>::infinity();
};

KmeansRun kmeans_once(const DenseMatrix& points, int k, Rng& rng) {
  const std::size_t n = points.rows();
  const std::size_t d = points.cols();
  const auto uk = static_cast<std::size_t>(k);

  // k-means++ seeding.
  DenseMatrix centers(uk, d);
  std::vector<double> min_sq(n, std::numeric_limits<double>::infinity());
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  for (std::size_t c = 0; c < uk; ++c) {
    std::size_t chosen = first;
    if (c > 0) {
      double total = 0.0;
      for (double v : min_sq) total += v;
      if (total > 0.0) {
        const double ticket = rng.uniform() * total;
        double acc = 0.0;
        chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
          acc += min_sq[i];
          if (acc >= ticket) {
            chosen = i;
            break;
          }
        }
      } else {
        chosen = static_cast<std::size_t>(rng.below(n));
      }
    }
    for (std::size_t j = 0; j < d; ++j) centers(c, j) = points(chosen, j);
    for (std::size_t i = 0; i < n; ++i) {
      min_sq[i] = std::min(min_sq[i], sq_dist(points.row_ptr(i), centers.row_ptr(c), d));
    }
  }

  KmeansRun run;
  run.assignment.assign(n, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_sq = sq_dist(points.row_ptr(i), centers.row_ptr(0), d);
      for (std::size_t c = 1; c < uk; ++c) {
        const double sq = sq_dist(points.row_ptr(i), centers.row_ptr(c), d);
        if (sq < best_sq) {
          best_sq = sq;
          best = static_cast<int>(c);
        }
      }
      if (run.assignment[i] != best) {
        run.assignment[i] = best;
        changed = true;
      }
    }

    centers.set_zero();
    std::vector<std::size_t> counts(uk, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(run.assignment[i]);
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) centers(c, j) += points(i, j);
    }
    for (std::size_t c = 0; c < uk; ++c) {
      if (counts[c] == 0) {
        // Reseed an empty cluster at the point farthest from its center.
        std::size_t far = 0;
        double far_sq = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const auto ci = static_cast<std::size_t>(run.assignment[i]);
          if (counts[ci] <= 1) continue;
          const double sq = sq_dist(points.row_ptr(i), centers.row_ptr(ci), d);
          if (sq > far_sq) {
            far_sq = sq;
            far = i;
          }
        }
        for (std::size_t j = 0; j < d; ++j) centers(c, j) = points(far, j);
        counts[c] = 1;
        continue;
      }
      for (std::size_t j = 0; j < d; ++j) {
        centers(c, j) /= static_cast<double>(counts[c]);
      }
    }
    if (!changed && iter > 0) break;
  }

  run.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    run.inertia += sq_dist(points.row_ptr(i),
                           centers.row_ptr(static_cast<std::size_t>(run.assignment[i])), d);
  }
  return run;
}

}  // namespace

std::vector<int> kmeans(const DenseMatrix& points, int k, int restarts,
                        std::uint64_t seed) {
  if (k < 1 || static_cast<std::size_t>(k) > points.rows()) {
    throw DataError("kmeans: k must lie in 1..point count");
  }
  Rng rng = Rng(seed).fork(seed_purpose::kKmeans);
  KmeansRun best;
  for (int t = 0; t < std::max(restarts, 1); ++t) {
    KmeansRun run = kmeans_once(points, k, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best.assignment;
}

double adjusted_rand_index(std::span<const int> labels_a, std::span<const int> labels_b) {
  if (labels_a.size() != labels_b.size() || labels_a.empty()) {
    throw DataError("adjusted_rand_index: label vectors must match and be non-empty");
  }
  const auto relabel = [](std::span<const int> labels) {
    std::vector<int> unique(labels.begin(), labels.end());
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      out[i] = static_cast<int>(
          std::lower_bound(unique.begin(), unique.end(), labels[i]) - unique.begin());
    }
    return std::pair{out, unique.size()};
  };
  const auto [a, ka] = relabel(labels_a);
  const auto [b, kb] = relabel(labels_b);

  DenseMatrix table(ka, kb);
  for (std::size_t i = 0; i < a.size(); ++i) {
    table(static_cast<std::size_t>(a[i]), static_cast<std::size_t>(b[i])) += 1.0;
  }
  const auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };

  double sum_cells = 0.0;
  for (double v : table.values()) sum_cells += comb2(v);
  double sum_rows = 0.0;
  for (std::size_t i = 0; i < ka; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < kb; ++j) row += table(i, j);
    sum_rows += comb2(row);
  }
  double sum_cols = 0.0;
  for (std::size_t j = 0; j < kb; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < ka; ++i) col += table(i, j);
    sum_cols += comb2(col);
  }
  const double total = comb2(static_cast<double>(a.size()));
  const double expected = sum_rows * sum_cols / total;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (std::abs(max_index - expected) < 1e-12) {
    return std::abs(sum_cells - expected) < 1e-12 ? 1.0 : 0.0;
  }
  return (sum_cells - expected) / (max_index - expected);
}

double cluster_score(const EmbeddingDump& dump, std::span<const int> truth_student_clusters,
                     int k, std::uint64_t seed) {
  if (truth_student_clusters.size() != dump.num_students) {
    throw DataError("cluster_score: one truth label per student required");
  }
  if (k < 1 || static_cast<std::size_t>(k) > dump.num_students) {
    throw DataError("cluster_score: k exceeds the student count");
  }
  DenseMatrix students(dump.num_students, dump.embeddings.cols());
  for (std::size_t i = 0; i < dump.num_students; ++i) {
    for (std::size_t c = 0; c < dump.embeddings.cols(); ++c) {
      students(i, c) = dump.embeddings(i, c);
    }
  }
  const std::vector<int> assignment = kmeans(students, k, 50, seed);
  return adjusted_rand_index(assignment, truth_student_clusters);
}

void write_attribution_csv(const std::filesystem::path& path, const BipartiteGraph& graph,
                           const AttributionReport& report, int top) {
  std::string out = "rank,node_id,node_kind,hop,score\n";
  const std::size_t limit =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(top, 0)), report.ranked.size());
  for (std::size_t i = 0; i < limit; ++i) {
    const auto& entry = report.ranked[i];
    out += std::to_string(i + 1);
    out += ',';
    if (entry.is_student) {
      out += graph.student_id(entry.node);
      out += ",student,";
    } else {
      out += graph.course_id(static_cast<std::uint32_t>(entry.node - graph.num_students()));
      out += ",course,";
    }
    out += std::to_string(entry.hop);
    out += ',';
    out += format_double(entry.score);
    out += '\n';
  }
  atomic_write_file(path, out);
}

}  // namespace gvae
