#include "dualmind/adam.hpp"

#include <cmath>

#include "dualmind/errors.hpp"
#include "dualmind/kernels.hpp"

namespace dualmind {

Adam::Adam(std::vector<Tensor> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const Tensor& p : params_) {
        m_.emplace_back(p.numel(), 0.0);
        v_.emplace_back(p.numel(), 0.0);
    }
}

void Adam::step() {
    for (const Tensor& p : params_) {
        if (!p.grad_present()) {
            throw StateError("adam: parameter " + shape_str(p.shape()) +
                             " has no gradient");
        }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Tensor& p = params_[i];
        kernels::adam_update(p.values_mut().data(), m_[i].data(), v_[i].data(),
                             p.grad().data(), p.numel(), config_.lr,
                             config_.beta1, config_.beta2, config_.eps, bc1,
                             bc2);
    }
}

void Adam::zero_grad() {
    for (Tensor& p : params_) p.zero_grad();
}

}  // namespace dualmind
