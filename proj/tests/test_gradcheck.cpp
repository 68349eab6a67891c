#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "gvae/bigraph.hpp"
#include "gvae/model.hpp"
#include "gvae/rng.hpp"

using namespace gvae;

namespace {

struct Toy {
  BipartiteGraph graph;
  LevelAdjacency adj;
  DegreeVector deg;
  std::vector<Edge> edges;
};

// Random bipartite instance with one edge per (student, course) pair kept
// with probability `density`.
Toy make_toy(std::size_t students, std::size_t courses, double density,
             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::tuple<std::string, std::string, int>> triples;
  for (std::size_t i = 0; i < students; ++i) {
    for (std::size_t j = 0; j < courses; ++j) {
      if (rng.uniform() >= density) continue;
      const int level = static_cast<int>(rng.below(10)) + 1;
      triples.emplace_back("s" + std::to_string(i), "c" + std::to_string(j), level);
    }
  }
  // Guarantee at least one edge.
  if (triples.empty()) triples.emplace_back("s0", "c0", 5);
  Toy toy;
  toy.graph = BipartiteGraph::from_levels(triples);
  toy.adj = decompose(toy.graph);
  toy.deg = degrees(toy.adj);
  toy.edges = toy.graph.edges();
  return toy;
}

struct CheckStats {
  double max_rel_err = 0.0;
  std::string worst;
};

// Central finite differences of the full loss against the analytic gradients,
// with epsilon and the dropout mask held fixed.
CheckStats gradient_check(Toy& toy, const ModelDims& dims, const ForwardOptions& options,
                          double dropout_rate, std::uint64_t seed, double h = 1e-5) {
  ModelParams params = init_params(dims, seed);
  Rng root(seed);
  Rng noise = root.fork(seed_purpose::kNoise);
  Rng drop = root.fork(seed_purpose::kDropout);
  const DenseMatrix eps = sample_epsilon(dims.nodes, dims.latent, noise);
  const DropoutMask mask = dropout_rate > 0.0
                               ? sample_dropout(dims.nodes, dropout_rate, drop)
                               : no_dropout(dims.nodes);

  const ForwardResult fwd = forward(params, toy.adj, toy.deg, toy.edges, eps, mask, options);
  const Gradients grads = backward(params, toy.adj, toy.deg, toy.edges, fwd, mask, options);

  const auto loss_at = [&]() {
    return forward(params, toy.adj, toy.deg, toy.edges, eps, mask, options).loss;
  };

  CheckStats stats;
  std::vector<std::pair<std::string, DenseMatrix*>> tensors;
  for_each_tensor(params, [&](const std::string& name, DenseMatrix& t) {
    tensors.emplace_back(name, &t);
  });
  std::vector<std::pair<std::string, const DenseMatrix*>> grad_tensors;
  for_each_tensor(grads, [&](const std::string& name, const DenseMatrix& t) {
    grad_tensors.emplace_back(name, &t);
  });
  REQUIRE(tensors.size() == grad_tensors.size());

  for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
    auto values = tensors[ti].second->values();
    auto analytic = grad_tensors[ti].second->values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = loss_at();
      values[i] = saved - h;
      const double down = loss_at();
      values[i] = saved;
      const double fd = (up - down) / (2.0 * h);
      const double rel =
          std::abs(analytic[i] - fd) / std::max({std::abs(analytic[i]), std::abs(fd), 1e-4});
      if (rel > stats.max_rel_err) {
        stats.max_rel_err = rel;
        stats.worst = tensors[ti].first + "[" + std::to_string(i) + "]";
      }
    }
  }
  return stats;
}

ModelDims toy_dims(const Toy& toy, int depth = 1) {
  ModelDims dims;
  dims.nodes = toy.graph.num_nodes();
  dims.features = 6;
  dims.hidden = 5;
  dims.latent = 4;
  dims.depth = depth;
  return dims;
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    Toy toy = make_toy(4, 3, 0.8, seed);
    ForwardOptions options;
    const CheckStats stats = gradient_check(toy, toy_dims(toy), options, 0.1, seed);
    INFO("seed ", seed, " worst entry ", stats.worst);
    CHECK(stats.max_rel_err < 1e-4);
  }
}

TEST_CASE("gradient check passes with a stacked encoder") {
  Toy toy = make_toy(4, 3, 0.8, 21);
  ForwardOptions options;
  const CheckStats stats = gradient_check(toy, toy_dims(toy, 2), options, 0.1, 21);
  INFO("worst entry ", stats.worst);
  CHECK(stats.max_rel_err < 1e-4);
}

TEST_CASE("gradient check passes in literal-bce mode") {
  Toy toy = make_toy(4, 3, 0.8, 31);
  ForwardOptions options;
  options.mode = LossMode::kLiteralBce;
  const CheckStats stats = gradient_check(toy, toy_dims(toy), options, 0.1, 31);
  INFO("worst entry ", stats.worst);
  CHECK(stats.max_rel_err < 1e-4);
}

TEST_CASE("zero-degree node receives no encoder gradient") {
  // Both pairs register their nodes, but only the first edge enters the
  // adjacency, leaving s2 and c2 with degree zero.
  std::vector<std::tuple<std::string, std::string, int>> triples = {
      {"s1", "c1", 4}, {"s2", "c2", 9}};
  BipartiteGraph graph = BipartiteGraph::from_levels(triples);
  const std::vector<Edge> live(graph.edges().begin(), graph.edges().begin() + 1);
  const LevelAdjacency adj =
      LevelAdjacency::from_edges(graph.num_students(), graph.num_courses(), live);
  const DegreeVector deg = degrees(adj);

  ModelDims dims;
  dims.nodes = graph.num_nodes();
  dims.features = 4;
  dims.hidden = 3;
  dims.latent = 3;
  ModelParams params = init_params(dims, 7);

  ForwardOptions options;
  const DenseMatrix eps(dims.nodes, dims.latent);
  const DropoutMask mask = no_dropout(dims.nodes);
  const ForwardResult fwd = forward(params, adj, deg, live, eps, mask, options);
  const Gradients grads = backward(params, adj, deg, live, fwd, mask, options);

  const auto s2 = *graph.student_index("s2");
  for (std::size_t k = 0; k < dims.features; ++k) {
    CHECK(grads.node_features(s2, k) == 0.0);
  }
}

TEST_CASE("kl gradients vanish when the term is disabled") {
  Toy toy = make_toy(3, 3, 1.0, 5);
  const ModelDims dims = toy_dims(toy);
  ModelParams params = init_params(dims, 5);
  ForwardOptions options;
  options.kl_weight = 0.0;

  const DenseMatrix eps(dims.nodes, dims.latent);  // epsilon = 0
  const DropoutMask mask = no_dropout(dims.nodes);
  const ForwardResult fwd = forward(params, toy.adj, toy.deg, toy.edges, eps, mask, options);
  const Gradients grads = backward(params, toy.adj, toy.deg, toy.edges, fwd, mask, options);

  // With epsilon = 0 and no KL term, nothing reaches the log-std head.
  for (double v : grads.head_log_std.values()) CHECK(v == 0.0);
}
