#include "srlood/fdcheck.hpp"

#include <algorithm>
#include <cmath>

namespace srlood {

namespace {

double eval_loss(const LossBuilder& build, const std::map<std::string, Tensor>& params) {
    Graph g;
    Value loss = build(g, params);
    return g.value(loss).item();
}

}  // namespace

double finite_diff_check(const LossBuilder& build,
                         const std::map<std::string, Tensor>& params,
                         double step) {
    if (!(step > 0.0)) {
        throw ValidationError("bad-step", "finite_diff_check: step must be positive");
    }

    Graph g;
    Value loss = build(g, params);
    const double base = g.value(loss).item();
    if (!std::isfinite(base)) {
        throw NumericError("non-finite-loss", "finite_diff_check: loss not finite at base point");
    }
    const std::map<std::string, Tensor> analytic = g.grad_of(loss);

    double worst = 0.0;
    for (const auto& [name, grad] : analytic) {
        std::map<std::string, Tensor> perturbed = params;
        Tensor& theta = perturbed.at(name);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double saved = theta[i];
            theta[i] = saved + step;
            const double up = eval_loss(build, perturbed);
            theta[i] = saved - step;
            const double down = eval_loss(build, perturbed);
            theta[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double a = grad[i];
            const double rel = std::abs(a - numeric) / std::max(1.0, std::abs(a));
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace srlood
