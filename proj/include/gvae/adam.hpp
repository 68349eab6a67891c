#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gvae/matrix.hpp"

namespace gvae {

struct AdamConfig {
  double alpha = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// A named parameter tensor paired with its gradient for one update.
struct ParamView {
  std::string name;
  DenseMatrix* value = nullptr;
  const DenseMatrix* grad = nullptr;
};

// First/second moment buffers plus the step counter for a fixed set of
// parameter tensors. Updates are bias-corrected:
//   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2
//   p <- p - alpha * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + epsilon)
class AdamState {
 public:
  AdamState() = default;
  AdamState(const std::vector<ParamView>& params, AdamConfig config);

  // Applies one update in place. Throws NumericError naming the parameter
  // on a non-finite gradient, DimensionError on any shape mismatch.
  void step(const std::vector<ParamView>& params);

  std::int64_t step_count() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::vector<DenseMatrix> m_;
  std::vector<DenseMatrix> v_;
  std::int64_t t_ = 0;
};

}  // namespace gvae
