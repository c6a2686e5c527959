#pragma once

#include <vector>

#include "vltrack/autodiff.hpp"

namespace vltrack {

// Adam over a fixed parameter list. Step order follows the list, so runs are
// deterministic for a fixed seed and model.
class AdamOptimizer {
public:
    explicit AdamOptimizer(std::vector<ad::Mat*> params, double lr = 1e-3, double beta1 = 0.9,
                           double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        for (auto* p : params_) {
            m_.emplace_back(ad::Mat::Zero(p->rows(), p->cols()));
            v_.emplace_back(ad::Mat::Zero(p->rows(), p->cols()));
        }
    }

    void step(const ad::Tape& tape) {
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, t_);
        double bc2 = 1.0 - std::pow(beta2_, t_);
        for (size_t i = 0; i < params_.size(); ++i) {
            ad::Mat g = tape.grad(*params_[i]);
            m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
            v_[i] = (beta2_ * v_[i].array() + (1.0 - beta2_) * g.array().square()).matrix();
            ad::Mat mhat = m_[i] / bc1;
            ad::Mat vhat = v_[i] / bc2;
            params_[i]->array() -= lr_ * mhat.array() / (vhat.array().sqrt() + eps_);
        }
    }

    double learning_rate() const { return lr_; }

private:
    std::vector<ad::Mat*> params_;
    std::vector<ad::Mat> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
};

}  // namespace vltrack
