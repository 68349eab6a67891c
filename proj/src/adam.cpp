#include "gvae/adam.hpp"

#include <cmath>

#include "gvae/error.hpp"

namespace gvae {

AdamState::AdamState(const std::vector<ParamView>& params, AdamConfig config)
    : config_(config) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params) {
    m_.emplace_back(p.value->rows(), p.value->cols());
    v_.emplace_back(p.value->rows(), p.value->cols());
  }
}

void AdamState::step(const std::vector<ParamView>& params) {
  if (params.size() != m_.size()) {
    throw DimensionError("adam_step: expected " + std::to_string(m_.size()) +
                         " tensors, got " + std::to_string(params.size()));
  }
  for (std::size_t idx = 0; idx < params.size(); ++idx) {
    const auto& p = params[idx];
    if (!p.value->same_shape(m_[idx]) || !p.grad->same_shape(m_[idx])) {
      throw DimensionError("adam_step: shape mismatch for parameter " + p.name);
    }
    if (!p.grad->all_finite()) {
      throw NumericError("adam_step: non-finite gradient in parameter " + p.name);
    }
  }

  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double m_corr = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double v_corr = 1.0 - std::pow(b2, static_cast<double>(t_));

  for (std::size_t idx = 0; idx < params.size(); ++idx) {
    auto value = params[idx].value->values();
    auto grad = params[idx].grad->values();
    auto m = m_[idx].values();
    auto v = v_[idx].values();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = b1 * m[i] + (1.0 - b1) * g;
      v[i] = b2 * v[i] + (1.0 - b2) * g * g;
      const double m_hat = m[i] / m_corr;
      const double v_hat = v[i] / v_corr;
      value[i] -= config_.alpha * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace gvae
