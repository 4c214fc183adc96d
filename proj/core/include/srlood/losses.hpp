#pragma once

#include <optional>
#include <span>
#include <vector>

#include "srlood/graph.hpp"

namespace srlood::losses {

struct LossWeights {
    double alpha1 = 1.0;  // ID cross-entropy
    double alpha2 = 3.0;  // margin contrastive
    double alpha3 = 1.0;  // self-supervised role prediction
    // Margin on squared distances. Unset means the dimension-scaled default
    // 2 * |h|, resolved against the feature length at use time.
    std::optional<double> xi;

    double resolve_xi(std::size_t feature_dim) const;
    void validate() const;
};

// Batch margin loss over representation vectors (squared L2 pull on same-class
// pairs, hinge push up to xi on different-class pairs, normalized by
// batch_size * dim). Positive/negative sets are formed within the batch;
// a term with no positives or no negatives contributes zero.
Value margin_loss(Graph& g, std::span<const Value> h, std::span<const int> labels, double xi);

// -log softmax(logits)[target], shift-stable.
Value cross_entropy(Graph& g, Value logits, std::size_t target);

// alpha1 * l_id + alpha2 * l_margin + alpha3 * l_ssl.
Value total_loss(Graph& g, Value l_id, Value l_margin, Value l_ssl, const LossWeights& w);
double total_loss(double l_id, double l_margin, double l_ssl, const LossWeights& w);

}  // namespace srlood::losses
