#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace otb::detail {

// Full-batch Adam over a flat list of parameter matrices.
class Adam {
 public:
  Adam(const std::vector<Eigen::MatrixXd>& params, double lr)
      : lr_(lr) {
    for (const auto& p : params) {
      m_.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
      v_.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
    }
  }

  void step(std::vector<Eigen::MatrixXd>& params, const std::vector<Eigen::MatrixXd>& grads) {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t k = 0; k < params.size(); ++k) {
      m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * grads[k];
      v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * grads[k].cwiseProduct(grads[k]);
      params[k] -= lr_ * (m_[k] / bc1).cwiseQuotient(((v_[k] / bc2).cwiseSqrt().array() + eps_).matrix());
    }
  }

 private:
  double lr_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  long t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

}  // namespace otb::detail
