#pragma once

#include <optional>
#include <string>
#include <vector>

#include "srlood/errors.hpp"

namespace srlood::metrics {

// Detection scores under the shared orientation contract: higher = more OOD.
struct ScoreSample {
    std::vector<double> id_scores;
    std::vector<double> ood_scores;

    void validate() const;
};

// Probability that a random OOD score exceeds a random ID score, ties counted
// half. Rank-statistic implementation, O(n log n).
double auroc(const ScoreSample& sample);

struct Far95Result {
    double value = 0.0;
    // Set when the ID sample is too small for a stable 95th percentile.
    std::optional<std::string> warning;
};

// Fraction of OOD accepted as ID when the acceptance threshold is the
// nearest-rank 95th percentile of the ID scores (ties at the threshold count
// as accepted).
Far95Result far95(const ScoreSample& sample);

}  // namespace srlood::metrics
