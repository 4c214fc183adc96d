#pragma once

#include <map>
#include <string>

#include "srlood/tensor.hpp"

namespace srlood::optimizer {

struct AdamWConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

// Adam with decoupled weight decay. Per step, for every parameter:
//   theta *= 1 - lr * weight_decay        (decay first, multiplicatively)
//   m = beta1 m + (1 - beta1) g
//   v = beta2 v + (1 - beta2) g^2
//   theta -= lr * (m / (1 - beta1^t)) / (sqrt(v / (1 - beta2^t)) + eps)
// The learning rate is supplied per call so the schedule stays outside.
class AdamW {
public:
    explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) {}

    void step(std::map<std::string, Tensor>& params,
              const std::map<std::string, Tensor>& grads, double lr);

    std::size_t steps_taken() const { return t_; }

private:
    AdamWConfig cfg_;
    std::size_t t_ = 0;
    std::map<std::string, Tensor> m_, v_;
};

// Linear warm-up over warmup_ratio of the run, then linear decay to zero at
// total_steps. Steps are 1-based; lr(1) is already positive.
double lr_at(std::size_t step, std::size_t total_steps, double peak, double warmup_ratio);

}  // namespace srlood::optimizer
