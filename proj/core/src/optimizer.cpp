#include "srlood/optimizer.hpp"

#include <cmath>

#include "srlood/errors.hpp"

namespace srlood::optimizer {

void AdamW::step(std::map<std::string, Tensor>& params,
                 const std::map<std::string, Tensor>& grads, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (auto& [name, theta] : params) {
        auto git = grads.find(name);
        if (git == grads.end()) {
            throw ValidationError("missing-param", "no gradient supplied for parameter: " + name);
        }
        const Tensor& g = git->second;
        if (!g.same_shape(theta)) {
            throw ValidationError("shape-mismatch", "gradient shape differs for parameter: " + name);
        }
        Tensor& m = m_.try_emplace(name, Tensor::zeros_like(theta)).first->second;
        Tensor& v = v_.try_emplace(name, Tensor::zeros_like(theta)).first->second;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            theta[i] *= 1.0 - lr * cfg_.weight_decay;
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            theta[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
        }
    }
}

double lr_at(std::size_t step, std::size_t total_steps, double peak, double warmup_ratio) {
    if (step < 1 || step > total_steps) {
        throw ValidationError("bad-config", "lr_at: step out of range");
    }
    if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) {
        throw ValidationError("bad-config", "warm-up ratio must lie in [0, 1)");
    }
    const auto warmup = static_cast<std::size_t>(warmup_ratio * static_cast<double>(total_steps));
    if (warmup > 0 && step <= warmup) {
        return peak * static_cast<double>(step) / static_cast<double>(warmup);
    }
    if (total_steps == warmup) {
        return peak;
    }
    return peak * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warmup);
}

}  // namespace srlood::optimizer
