#pragma once

#include "prawn/types.hpp"

#include <cmath>

namespace prawn::optim {

// Adam with decoupled weight decay (AdamW). One state per parameter matrix.
class AdamW {
  public:
    AdamW(Index rows, Index cols, double learning_rate, double weight_decay,
          double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
        : lr_(learning_rate), decay_(weight_decay), beta1_(beta1), beta2_(beta2),
          eps_(epsilon), m_(Mat::Zero(rows, cols)), v_(Mat::Zero(rows, cols)) {}

    void step(Mat& params, const Mat& grad) {
        ++t_;
        m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
        v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        params.array() -= lr_ * ((m_.array() / bc1) / ((v_.array() / bc2).sqrt() + eps_) +
                                 decay_ * params.array());
    }

  private:
    double lr_, decay_, beta1_, beta2_, eps_;
    long t_ = 0;
    Mat m_, v_;
};

} // namespace prawn::optim
