#include "pacs/optim.hpp"

#include <cmath>

#include "pacs/error.hpp"

namespace pacs {

void AdamWConfig::validate() const {
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "adamw: betas must lie in (0, 1)");
  }
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "adamw: eps must be > 0");
  if (!(weight_decay >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "adamw: weight_decay must be >= 0");
  }
}

OptimizerState OptimizerState::zeros_like(const Eigen::MatrixXd& param) {
  return OptimizerState{Eigen::MatrixXd::Zero(param.rows(), param.cols()),
                        Eigen::MatrixXd::Zero(param.rows(), param.cols()), 0};
}

void adamw_step(Eigen::Ref<Eigen::MatrixXd> weights,
                const Eigen::Ref<const Eigen::MatrixXd>& grads, OptimizerState& state,
                double learning_rate, const AdamWConfig& cfg) {
  if (grads.rows() != weights.rows() || grads.cols() != weights.cols() ||
      state.first_moment.rows() != weights.rows() ||
      state.first_moment.cols() != weights.cols() ||
      state.second_moment.rows() != weights.rows() ||
      state.second_moment.cols() != weights.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "adamw: shape mismatch");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  state.first_moment = cfg.beta1 * state.first_moment + (1.0 - cfg.beta1) * grads;
  state.second_moment =
      cfg.beta2 * state.second_moment + (1.0 - cfg.beta2) * grads.cwiseProduct(grads);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);

  if (cfg.weight_decay != 0.0) weights *= (1.0 - learning_rate * cfg.weight_decay);
  weights.array() -= learning_rate * (state.first_moment.array() / bias1) /
                     ((state.second_moment.array() / bias2).sqrt() + cfg.eps);
}

}  // namespace pacs
