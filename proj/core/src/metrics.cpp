#include "srlood/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace srlood::metrics {

void ScoreSample::validate() const {
    if (id_scores.empty() || ood_scores.empty()) {
        throw ValidationError("empty-scores", "both ID and OOD score lists must be non-empty");
    }
    for (const auto* list : {&id_scores, &ood_scores}) {
        for (double s : *list) {
            if (!std::isfinite(s)) {
                throw NumericError("non-finite-score", "scores must be finite");
            }
        }
    }
}

double auroc(const ScoreSample& sample) {
    sample.validate();
    const std::size_t n_id = sample.id_scores.size();
    const std::size_t n_ood = sample.ood_scores.size();

    struct Entry {
        double score;
        bool ood;
    };
    std::vector<Entry> all;
    all.reserve(n_id + n_ood);
    for (double s : sample.id_scores) all.push_back({s, false});
    for (double s : sample.ood_scores) all.push_back({s, true});
    std::stable_sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.score < b.score; });

    // Sum of OOD ranks with tied scores sharing their average rank. Average
    // ranks of ties are multiples of 0.5, so the sum is exact in doubles.
    double rank_sum_ood = 0.0;
    std::size_t i = 0;
    while (i < all.size()) {
        std::size_t j = i;
        while (j < all.size() && all[j].score == all[i].score) {
            ++j;
        }
        const double avg_rank = 0.5 * static_cast<double>((i + 1) + j);  // 1-based ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].ood) {
                rank_sum_ood += avg_rank;
            }
        }
        i = j;
    }
    const double u = rank_sum_ood - 0.5 * static_cast<double>(n_ood) * static_cast<double>(n_ood + 1);
    return u / (static_cast<double>(n_ood) * static_cast<double>(n_id));
}

Far95Result far95(const ScoreSample& sample) {
    sample.validate();
    std::vector<double> id_sorted = sample.id_scores;
    std::sort(id_sorted.begin(), id_sorted.end());
    const std::size_t n = id_sorted.size();

    // Nearest-rank 95th percentile: rank = ceil(0.95 n) = ceil(19n/20),
    // computed in integers to dodge floating-point edge cases.
    const std::size_t rank = (19 * n + 19) / 20;
    const double tau = id_sorted[rank - 1];

    std::size_t accepted = 0;
    for (double s : sample.ood_scores) {
        if (s <= tau) {
            ++accepted;
        }
    }
    Far95Result result;
    result.value = static_cast<double>(accepted) / static_cast<double>(sample.ood_scores.size());
    if (n < 20) {
        result.warning = "unstable percentile";
    }
    return result;
}

}  // namespace srlood::metrics
