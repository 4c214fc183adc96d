#include "srlood/losses.hpp"

#include <cmath>
#include <string>

namespace srlood::losses {

double LossWeights::resolve_xi(std::size_t feature_dim) const {
    if (xi) {
        return *xi;
    }
    return 2.0 * static_cast<double>(feature_dim);
}

void LossWeights::validate() const {
    for (double a : {alpha1, alpha2, alpha3}) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw ValidationError("bad-config", "loss weights must be finite and non-negative");
        }
    }
    if (xi && !(*xi > 0.0)) {
        throw ValidationError("bad-config", "margin xi must be positive");
    }
}

Value margin_loss(Graph& g, std::span<const Value> h, std::span<const int> labels, double xi) {
    const std::size_t m = h.size();
    if (m < 2) {
        throw ValidationError("batch-too-small", "margin loss needs at least 2 instances, got " + std::to_string(m));
    }
    if (labels.size() != m) {
        throw ValidationError("shape-mismatch", "margin loss: one label per instance required");
    }
    if (!(xi > 0.0)) {
        throw ValidationError("bad-config", "margin xi must be positive");
    }
    const std::size_t d = g.value(h[0]).extent(0);
    for (Value v : h) {
        if (g.value(v).rank() != 1 || g.value(v).extent(0) != d) {
            throw ValidationError("shape-mismatch", "margin loss: all instances must share one vector length");
        }
    }

    const Value xi_node = g.constant(Tensor::scalar(xi));
    Value total;
    auto add_term = [&](Value t) { total = total.valid() ? g.add(total, t) : t; };

    for (std::size_t i = 0; i < m; ++i) {
        Value pos, neg;
        std::size_t n_pos = 0, n_neg = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) {
                continue;
            }
            Value dist = g.squared_l2_distance(h[i], h[j]);
            if (labels[i] == labels[j]) {
                pos = pos.valid() ? g.add(pos, dist) : dist;
                ++n_pos;
            } else {
                Value hinge = g.relu(g.sub(xi_node, dist));
                neg = neg.valid() ? g.add(neg, hinge) : hinge;
                ++n_neg;
            }
        }
        if (n_pos > 0) {
            add_term(g.scale(pos, 1.0 / static_cast<double>(n_pos)));
        }
        if (n_neg > 0) {
            add_term(g.scale(neg, 1.0 / static_cast<double>(n_neg)));
        }
    }
    // m >= 2 guarantees every i saw at least one positive or negative partner.
    return g.scale(total, 1.0 / (static_cast<double>(m) * static_cast<double>(d)));
}

Value cross_entropy(Graph& g, Value logits, std::size_t target) {
    return g.cross_entropy(logits, target);
}

Value total_loss(Graph& g, Value l_id, Value l_margin, Value l_ssl, const LossWeights& w) {
    w.validate();
    return g.add(g.scale(l_id, w.alpha1), g.add(g.scale(l_margin, w.alpha2), g.scale(l_ssl, w.alpha3)));
}

double total_loss(double l_id, double l_margin, double l_ssl, const LossWeights& w) {
    w.validate();
    return w.alpha1 * l_id + w.alpha2 * l_margin + w.alpha3 * l_ssl;
}

}  // namespace srlood::losses
