#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srlood/data.hpp"
#include "srlood/detector.hpp"
#include "srlood/encoder.hpp"
#include "srlood/losses.hpp"
#include "srlood/optimizer.hpp"

namespace srlood::pipeline {

enum class Selection { kValAccuracy, kDevOodMahaAuroc };

struct TrainConfig {
    encoder::EncoderConfig enc;        // vocab_size / num_classes are filled from the data
    losses::LossWeights weights;
    double p_mask = 0.3;
    double lr = 3e-4;
    optimizer::AdamWConfig adamw;
    double warmup_ratio = 0.06;
    std::size_t batch_size = 12;
    std::size_t epochs = 10;
    std::size_t eval_steps = 20;
    std::uint64_t seed = 0;
    Selection selection = Selection::kValAccuracy;
    bool fit_detector_on_train_too = false;  // default per protocol: validation only

    void validate() const;
    std::string to_json() const;
    static TrainConfig from_json(const std::string& text);
};

struct StepLog {
    std::size_t step = 0;
    double lr = 0.0;
    double loss_total = 0.0;
    double loss_id = 0.0;
    double loss_margin = 0.0;
    double loss_ssl = 0.0;
};

struct EvalLog {
    std::size_t step = 0;
    double val_accuracy = 0.0;
    std::optional<double> dev_ood_maha_auroc;
};

// Model snapshot: config, parameters, step counter, vocabulary.
struct Checkpoint {
    encoder::EncoderConfig config;
    encoder::ParamStore params;
    std::size_t step = 0;
    data::Vocab vocab;
};

// JSON persistence, format "SRLOOD-CKPT-v1".
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct TrainResult {
    Checkpoint best;
    detector::Detector best_detector;  // fitted at the best evaluation point
    std::size_t best_step = 0;
    double best_metric = 0.0;
    std::vector<StepLog> steps;
    std::vector<EvalLog> evals;
};

// Full learning loop: per batch a clean pass feeds the ID cross-entropy and
// the margin loss, a second masked pass feeds the self-supervised role
// prediction loss; the weighted total drives one AdamW update under a linear
// warm-up / linear decay schedule. Every eval_steps the detector is refitted
// on the validation split and the best checkpoint is tracked by the selection
// metric. dev_ood enables AUROC-based selection.
TrainResult train(const TrainConfig& cfg, const data::Corpus& corpus,
                  const std::vector<data::Example>* dev_ood = nullptr);

// Unmasked representations and logits for a list of examples.
struct Features {
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::vector<Tensor> h;
    std::vector<Tensor> logits;
};

Features extract_features(const Checkpoint& ckpt, const std::vector<data::Example>& examples);

detector::Detector fit_detector(const Checkpoint& ckpt, const std::vector<data::Example>& fit_set);

// Scores test and OOD sets with all four scoring functions and reports
// AUROC / FAR95 per (ood set, scorer) plus ID accuracy.
data::EvalReport evaluate(const Checkpoint& ckpt, const detector::Detector& det,
                          const std::string& id_dataset_name,
                          const std::vector<data::Example>& id_test,
                          const std::map<std::string, std::vector<data::Example>>& ood_sets,
                          std::uint64_t seed, const std::string& config_json = "{}");

// All four scores for one feature vector; logits come from the detector's
// classifier snapshot, enabling standalone scoring of embedding dumps.
std::map<std::string, double> score_embedding(const detector::Detector& det, const Tensor& h);

data::EmbeddingDump export_embeddings(const Checkpoint& ckpt, const std::vector<data::Example>& examples);

struct SweepRow {
    double p_mask = 0.0;
    double mean_auroc = 0.0;   // over the four scorers
    double mean_far95 = 0.0;
    double mean_ssl_loss = 0.0;  // over training steps
};

// Trains one model per masking probability (same seed) and evaluates each on
// the corpus test splits.
std::vector<SweepRow> sweep_mask(const TrainConfig& cfg, const data::Corpus& corpus,
                                 const std::vector<double>& probabilities);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

// The exact (deterministic) visit order of training examples in one epoch.
std::vector<std::size_t> epoch_order(std::uint64_t seed, std::size_t epoch, std::size_t n);

// Batch boundaries for one epoch; a trailing single example joins the
// previous batch so the margin loss always sees at least a pair.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, std::size_t batch_size);

}  // namespace srlood::pipeline
