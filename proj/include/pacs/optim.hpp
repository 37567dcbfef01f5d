#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace pacs {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;

  void validate() const;
};

/// Moment accumulators for one parameter tensor.
struct OptimizerState {
  Eigen::MatrixXd first_moment;
  Eigen::MatrixXd second_moment;
  std::uint64_t step = 0;

  static OptimizerState zeros_like(const Eigen::MatrixXd& param);
};

/// One decoupled-weight-decay Adam update, in place:
///   w <- w * (1 - lr * wd)
///   w <- w - lr * m_hat / (sqrt(v_hat) + eps)
/// Throws kDimensionMismatch when weights, grads and state disagree in shape.
void adamw_step(Eigen::Ref<Eigen::MatrixXd> weights,
                const Eigen::Ref<const Eigen::MatrixXd>& grads, OptimizerState& state,
                double learning_rate, const AdamWConfig& cfg);

}  // namespace pacs
