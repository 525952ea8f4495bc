#pragma once

#include <cstdint>
#include <vector>

#include "dualmind/tensor.hpp"

namespace dualmind {

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Adam with bias correction over a fixed parameter list. Moment buffers
/// mirror the parameter shapes; the step count starts at 0 and increments on
/// every step(). Gradients are left untouched, callers zero them.
class Adam {
  public:
    Adam(std::vector<Tensor> params, AdamConfig config = {});

    /// One in-place update. StateError if any parameter has no gradient.
    void step();

    void zero_grad();

    std::int64_t step_count() const { return t_; }
    const AdamConfig& config() const { return config_; }

  private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
    AdamConfig config_;
    std::int64_t t_ = 0;
};

}  // namespace dualmind
