#pragma once

#include <filesystem>
#include <vector>

#include "srlood/tensor.hpp"

namespace srlood::detector {

enum class Scorer { kMsp, kEnergy, kMaha, kCosine };

inline const char* scorer_name(Scorer s) {
    switch (s) {
        case Scorer::kMsp: return "msp";
        case Scorer::kEnergy: return "energy";
        case Scorer::kMaha: return "maha";
        case Scorer::kCosine: return "cosine";
    }
    return "?";
}

struct Score {
    double value = 0.0;
    Scorer scorer = Scorer::kMaha;
};

// Fitted detection state. All four scoring functions share one orientation:
// higher value = more likely OOD.
struct Detector {
    std::size_t num_classes = 0;
    std::size_t dim = 0;
    std::vector<Tensor> class_means;   // one vector[dim] per class
    Tensor cov_pinv;                   // [dim, dim] pseudo-inverse of the shared covariance
    std::vector<Tensor> bank;          // fitting features, canonical order
    std::vector<int> bank_labels;
    Tensor classifier;                 // [num_classes, dim] logits weight snapshot
};

// Fits class means, the shared maximum-likelihood covariance and its spectral
// pseudo-inverse (eigenvalues below 1e-10 of the largest are dropped), and
// keeps the full feature bank. Features are brought into a canonical order
// first so fitting is independent of presentation order.
Detector fit(const std::vector<Tensor>& features, const std::vector<int>& labels,
             std::size_t num_classes, Tensor classifier = {});

// Minimum squared Mahalanobis distance to any class mean. Always >= 0.
Score score_maha(const Detector& det, const Tensor& h);

// Negated maximum cosine similarity against the bank; range [-1, 1].
Score score_cosine(const Detector& det, const Tensor& h);

// 1 - max softmax probability.
Score score_msp(const Tensor& logits);

// Negative log-sum-exp of the logits.
Score score_energy(const Tensor& logits);

// JSON persistence, format "SRLOOD-DET-v1".
void save(const Detector& det, const std::filesystem::path& path);
Detector load(const std::filesystem::path& path);

constexpr double kEigCutoffRtol = 1e-10;

}  // namespace srlood::detector
