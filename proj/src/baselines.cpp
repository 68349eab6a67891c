#include "gvae/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gvae/error.hpp"
#include "gvae/rng.hpp"

namespace gvae {

std::array<BaselineKind, 6> all_baselines() {
  return {BaselineKind::kGlobalAverage, BaselineKind::kUserAverage,
          BaselineKind::kItemAverage,   BaselineKind::kUserKnn,
          BaselineKind::kItemKnn,       BaselineKind::kBiasedMf};
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kGlobalAverage: return "global_average";
    case BaselineKind::kUserAverage: return "user_average";
    case BaselineKind::kItemAverage: return "item_average";
    case BaselineKind::kUserKnn: return "user_knn";
    case BaselineKind::kItemKnn: return "item_knn";
    case BaselineKind::kBiasedMf: return "biased_mf";
  }
  return "unknown";
}

std::optional<BaselineKind> baseline_from_string(const std::string& name) {
  for (auto kind : all_baselines()) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

namespace {

double clamp_level(double v) { return std::clamp(v, 1.0, 10.0); }

// Shrunk cosine similarity over mean-centered rating vectors. `by_a` indexes
// the side the similarity is over, `by_b` the opposite side.
DenseMatrix build_similarity(
    const std::vector<std::vector<std::pair<std::uint32_t, int>>>& by_a,
    const std::vector<std::vector<std::pair<std::uint32_t, int>>>& by_b,
    const std::vector<double>& mean_a, double shrinkage) {
  const std::size_t count = by_a.size();
  std::vector<double> norm(count, 0.0);
  for (std::size_t a = 0; a < count; ++a) {
    for (const auto& [b, level] : by_a[a]) {
      const double c = static_cast<double>(level) - mean_a[a];
      norm[a] += c * c;
    }
    norm[a] = std::sqrt(norm[a]);
  }

  DenseMatrix dot(count, count);
  DenseMatrix co(count, count);
  for (const auto& ratings : by_b) {
    for (std::size_t x = 0; x < ratings.size(); ++x) {
      const auto [a1, l1] = ratings[x];
      const double c1 = static_cast<double>(l1) - mean_a[a1];
      for (std::size_t y = x + 1; y < ratings.size(); ++y) {
        const auto [a2, l2] = ratings[y];
        const double c2 = static_cast<double>(l2) - mean_a[a2];
        dot(a1, a2) += c1 * c2;
        dot(a2, a1) += c1 * c2;
        co(a1, a2) += 1.0;
        co(a2, a1) += 1.0;
      }
    }
  }

  DenseMatrix sim(count, count);
  for (std::size_t a = 0; a < count; ++a) {
    for (std::size_t b = 0; b < count; ++b) {
      if (a == b || co(a, b) == 0.0 || norm[a] == 0.0 || norm[b] == 0.0) continue;
      const double cosine = dot(a, b) / (norm[a] * norm[b]);
      sim(a, b) = cosine * (co(a, b) / (co(a, b) + shrinkage));
    }
  }
  return sim;
}

}  // namespace

std::optional<double> BaselinePredictor::user_mean(std::uint32_t u) const {
  if (u >= num_students_ || user_count_[u] == 0) return std::nullopt;
  return user_sum_[u] / static_cast<double>(user_count_[u]);
}

std::optional<double> BaselinePredictor::item_mean(std::uint32_t i) const {
  if (i >= num_courses_ || item_count_[i] == 0) return std::nullopt;
  return item_sum_[i] / static_cast<double>(item_count_[i]);
}

double BaselinePredictor::similarity(std::uint32_t a, std::uint32_t b) const {
  if (similarity_.empty()) {
    throw DataError("similarity is only available for kNN baselines");
  }
  return similarity_(a, b);
}

BaselinePredictor BaselinePredictor::fit(BaselineKind kind, const BipartiteGraph& graph,
                                         std::span<const std::uint32_t> train_indices,
                                         const BaselineHyper& hyper) {
  if (train_indices.empty()) throw DataError("baseline fit: empty training data");

  BaselinePredictor p;
  p.kind_ = kind;
  p.hyper_ = hyper;
  p.num_students_ = graph.num_students();
  p.num_courses_ = graph.num_courses();
  p.user_sum_.assign(p.num_students_, 0.0);
  p.user_count_.assign(p.num_students_, 0);
  p.item_sum_.assign(p.num_courses_, 0.0);
  p.item_count_.assign(p.num_courses_, 0);
  p.by_user_.assign(p.num_students_, {});
  p.by_item_.assign(p.num_courses_, {});

  const std::vector<Edge> train = gather_edges(graph, train_indices);
  double total = 0.0;
  for (const auto& e : train) {
    total += e.level;
    p.user_sum_[e.student] += e.level;
    ++p.user_count_[e.student];
    p.item_sum_[e.course] += e.level;
    ++p.item_count_[e.course];
    p.by_user_[e.student].emplace_back(e.course, e.level);
    p.by_item_[e.course].emplace_back(e.student, e.level);
  }
  p.global_mean_ = total / static_cast<double>(train.size());
  for (auto& v : p.by_user_) std::sort(v.begin(), v.end());
  for (auto& v : p.by_item_) std::sort(v.begin(), v.end());

  if (kind == BaselineKind::kUserKnn || kind == BaselineKind::kItemKnn) {
    std::vector<double> means;
    if (kind == BaselineKind::kUserKnn) {
      means.resize(p.num_students_, 0.0);
      for (std::size_t u = 0; u < p.num_students_; ++u) {
        if (p.user_count_[u] > 0) means[u] = p.user_sum_[u] / p.user_count_[u];
      }
      p.similarity_ = build_similarity(p.by_user_, p.by_item_, means, hyper.knn_shrinkage);
    } else {
      means.resize(p.num_courses_, 0.0);
      for (std::size_t i = 0; i < p.num_courses_; ++i) {
        if (p.item_count_[i] > 0) means[i] = p.item_sum_[i] / p.item_count_[i];
      }
      p.similarity_ = build_similarity(p.by_item_, p.by_user_, means, hyper.knn_shrinkage);
    }
  }

  if (kind == BaselineKind::kBiasedMf) {
    const auto rank = static_cast<std::size_t>(hyper.mf_rank);
    p.user_bias_.assign(p.num_students_, 0.0);
    p.item_bias_.assign(p.num_courses_, 0.0);
    p.user_factors_ = DenseMatrix(p.num_students_, rank);
    p.item_factors_ = DenseMatrix(p.num_courses_, rank);
    Rng rng = Rng(hyper.seed).fork(seed_purpose::kBaselineMf);
    const double scale = 0.1 / std::sqrt(static_cast<double>(rank));
    for (double& v : p.user_factors_.values()) v = scale * rng.normal();
    for (double& v : p.item_factors_.values()) v = scale * rng.normal();

    std::vector<std::uint32_t> order(train.size());
    std::iota(order.begin(), order.end(), 0u);
    for (int epoch = 0; epoch < hyper.mf_epochs; ++epoch) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
      }
      for (auto idx : order) {
        const Edge& e = train[idx];
        double* pu = p.user_factors_.row_ptr(e.student);
        double* qi = p.item_factors_.row_ptr(e.course);
        double est = p.global_mean_ + p.user_bias_[e.student] + p.item_bias_[e.course];
        for (std::size_t k = 0; k < rank; ++k) est += pu[k] * qi[k];
        const double err = static_cast<double>(e.level) - est;
        const double lr = hyper.mf_learning_rate;
        const double reg = hyper.mf_reg;
        p.user_bias_[e.student] += lr * (err - reg * p.user_bias_[e.student]);
        p.item_bias_[e.course] += lr * (err - reg * p.item_bias_[e.course]);
        for (std::size_t k = 0; k < rank; ++k) {
          const double puk = pu[k];
          pu[k] += lr * (err * qi[k] - reg * puk);
          qi[k] += lr * (err * puk - reg * qi[k]);
        }
      }
    }
  }
  return p;
}

double BaselinePredictor::fallback(std::uint32_t student, std::uint32_t course) const {
  // item -> user -> global, entered at the level matching the predictor kind.
  if (kind_ == BaselineKind::kItemAverage || kind_ == BaselineKind::kItemKnn) {
    if (auto im = item_mean(course)) return *im;
  }
  if (auto um = user_mean(student)) return *um;
  return global_mean_;
}

double BaselinePredictor::knn_predict(std::uint32_t student, std::uint32_t course) const {
  const bool user_side = kind_ == BaselineKind::kUserKnn;
  const std::uint32_t target = user_side ? student : course;
  const auto& raters = user_side ? by_item_[course] : by_user_[student];
  const auto base_mean = user_side ? user_mean(student) : item_mean(course);
  if (!base_mean) return fallback(student, course);

  // Neighbors that rated the queried opposite index, strongest first.
  std::vector<std::pair<std::uint32_t, int>> neighbors;
  neighbors.reserve(raters.size());
  for (const auto& [other, level] : raters) {
    if (other == target) continue;
    if (similarity_(target, other) != 0.0) neighbors.emplace_back(other, level);
  }
  std::sort(neighbors.begin(), neighbors.end(),
            [&](const auto& a, const auto& b) {
              const double sa = similarity_(target, a.first);
              const double sb = similarity_(target, b.first);
              if (sa != sb) return sa > sb;
              return a.first < b.first;
            });
  if (neighbors.size() > static_cast<std::size_t>(hyper_.knn_k)) {
    neighbors.resize(static_cast<std::size_t>(hyper_.knn_k));
  }

  double num = 0.0;
  double den = 0.0;
  for (const auto& [other, level] : neighbors) {
    const double sim = similarity_(target, other);
    const auto other_mean = user_side ? user_mean(other) : item_mean(other);
    num += sim * (static_cast<double>(level) - *other_mean);
    den += std::abs(sim);
  }
  if (den == 0.0) return *base_mean;
  return *base_mean + num / den;
}

double BaselinePredictor::predict(std::uint32_t student, std::uint32_t course) const {
  if (student >= num_students_ || course >= num_courses_) {
    throw DataError("baseline predict: index out of range");
  }
  double value = 0.0;
  switch (kind_) {
    case BaselineKind::kGlobalAverage:
      value = global_mean_;
      break;
    case BaselineKind::kUserAverage: {
      const auto um = user_mean(student);
      value = um ? *um : global_mean_;
      break;
    }
    case BaselineKind::kItemAverage:
      value = fallback(student, course);
      break;
    case BaselineKind::kUserKnn:
    case BaselineKind::kItemKnn:
      value = knn_predict(student, course);
      break;
    case BaselineKind::kBiasedMf: {
      value = global_mean_ + user_bias_[student] + item_bias_[course];
      if (user_count_[student] > 0 && item_count_[course] > 0) {
        const double* pu = user_factors_.row_ptr(student);
        const double* qi = item_factors_.row_ptr(course);
        for (std::size_t k = 0; k < user_factors_.cols(); ++k) value += pu[k] * qi[k];
      }
      break;
    }
  }
  return clamp_level(value);
}

}  // namespace gvae
