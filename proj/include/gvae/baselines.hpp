#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gvae/bigraph.hpp"
#include "gvae/matrix.hpp"

namespace gvae {

enum class BaselineKind {
  kGlobalAverage,
  kUserAverage,
  kItemAverage,
  kUserKnn,
  kItemKnn,
  kBiasedMf,
};

std::array<BaselineKind, 6> all_baselines();
std::string to_string(BaselineKind kind);
std::optional<BaselineKind> baseline_from_string(const std::string& name);

struct BaselineHyper {
  int knn_k = 20;
  double knn_shrinkage = 10.0;  // similarity *= co / (co + shrinkage)
  int mf_rank = 16;
  double mf_learning_rate = 0.005;
  double mf_reg = 0.02;
  int mf_epochs = 100;
  std::uint64_t seed = 42;
};

// Classical predictors fit on the train split. Instances only exist in the
// fitted state; predictions are clamped to [1,10]. Missing means fall back
// along item -> user -> global.
class BaselinePredictor {
 public:
  static BaselinePredictor fit(BaselineKind kind, const BipartiteGraph& graph,
                               std::span<const std::uint32_t> train_indices,
                               const BaselineHyper& hyper = {});

  double predict(std::uint32_t student, std::uint32_t course) const;
  BaselineKind kind() const { return kind_; }

  // Fitted-state accessors.
  double global_mean() const { return global_mean_; }
  std::optional<double> user_mean(std::uint32_t u) const;
  std::optional<double> item_mean(std::uint32_t i) const;
  // Shrunk mean-centered cosine similarity (kNN kinds only).
  double similarity(std::uint32_t a, std::uint32_t b) const;

 private:
  BaselinePredictor() = default;

  double knn_predict(std::uint32_t student, std::uint32_t course) const;
  double fallback(std::uint32_t student, std::uint32_t course) const;

  BaselineKind kind_ = BaselineKind::kGlobalAverage;
  BaselineHyper hyper_;
  std::size_t num_students_ = 0;
  std::size_t num_courses_ = 0;

  double global_mean_ = 0.0;
  std::vector<double> user_sum_, item_sum_;
  std::vector<std::uint32_t> user_count_, item_count_;

  // Ratings by user and by item, (other index, level), sorted.
  std::vector<std::vector<std::pair<std::uint32_t, int>>> by_user_, by_item_;
  DenseMatrix similarity_;  // users x users or items x items

  // Biased matrix factorization state.
  std::vector<double> user_bias_, item_bias_;
  DenseMatrix user_factors_, item_factors_;
};

}  // namespace gvae
