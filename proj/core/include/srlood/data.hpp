#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "srlood/srl.hpp"

namespace srlood::data {

// One sequence. Position 0 of `tokens` is always "[CLS]"; label -1 marks OOD.
struct Example {
    std::string id;
    std::vector<std::string> tokens;
    int label = -1;
    srl::RoleSpans spans;

    bool is_ood() const { return label < 0; }
};

enum class OodKind { kDisjointLexicon, kRoleSwap, kFillerOnly };

const char* ood_kind_name(OodKind k);
OodKind ood_kind_from_name(const std::string& name);

struct CorpusSpec {
    std::size_t num_classes = 4;
    std::size_t train_count = 200;
    std::size_t val_count = 100;
    std::size_t test_id_count = 200;
    std::size_t test_ood_count = 200;
    std::size_t words_per_role_per_class = 6;  // class-conditional lexicon size
    std::size_t filler_vocab = 8;
    double filler_rate = 0.4;                  // chance of each extra filler, per slot
    std::size_t max_fillers_per_slot = 2;
    std::size_t template_variants = 3;         // which filler slots are active, rotated per sentence
    OodKind ood_kind = OodKind::kDisjointLexicon;
    std::uint64_t seed = 0;

    void validate() const;
};

struct Corpus {
    std::vector<Example> train, val, test_id, test_ood;
};

// Deterministic synthetic corpus. ID sentences follow
//   [CLS] filler* A0 filler* V filler* A1 filler* punct
// with the class fixed by which lexicon cluster supplied the three content
// words. OOD sentences depend on the kind: disjoint-lexicon draws content
// words from a held-out vocabulary, role-swap crosses the A0 cluster of one
// class with the V/A1 clusters of another, filler-only drops content words
// entirely. Gold spans are recorded for every sentence, and token sequences
// are unique across the whole corpus.
Corpus gen_corpus(const CorpusSpec& spec);

// The full token partition the generator draws from (all classes plus the
// held-out OOD words), suitable for srl::tag_rules over any generated split.
srl::RoleLexicon lexicon_for(const CorpusSpec& spec);

// Corpus JSONL: {"id", "tokens", "label", "srl": {"A0", "V", "A1"}}.
std::vector<Example> load_corpus(const std::filesystem::path& path);
void write_corpus(const std::vector<Example>& examples, const std::filesystem::path& path);
std::string corpus_to_jsonl(const std::vector<Example>& examples);

// Token <-> id mapping. [CLS] is always id 0; the rest are sorted.
struct Vocab {
    std::vector<std::string> tokens;
    std::map<std::string, std::size_t> ids;

    std::size_t size() const { return tokens.size(); }
    std::size_t id_of(const std::string& token) const;
    std::vector<std::size_t> encode(const std::vector<std::string>& toks) const;

    static Vocab build(const std::vector<const std::vector<Example>*>& splits);
};

void save_vocab(const Vocab& v, const std::filesystem::path& path);
Vocab load_vocab(const std::filesystem::path& path);

// Embedding dump: a header line {"format": "SRLOOD-EMB-v1", "d": int}
// followed by JSONL records {"id", "label", "h"}.
struct EmbeddingRecord {
    std::string id;
    int label = -1;
    std::vector<double> h;
};

struct EmbeddingDump {
    std::size_t dim = 0;
    std::vector<EmbeddingRecord> records;
};

void write_embeddings(const EmbeddingDump& dump, const std::filesystem::path& path);
EmbeddingDump load_embeddings(const std::filesystem::path& path);

// Per-(ood set, scorer) evaluation results.
struct ScorerMetrics {
    double auroc = 0.0;
    double far95 = 0.0;
};

struct EvalReport {
    std::string id_dataset;
    // ood set name -> scorer name -> metrics
    std::map<std::string, std::map<std::string, ScorerMetrics>> ood_sets;
    double id_accuracy = 0.0;
    std::uint64_t seed = 0;
    std::string config_json = "{}";  // pre-serialized JSON object
    std::size_t detector_bank_size = 0;
    std::size_t detector_dim = 0;
};

void write_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);
std::string report_to_json(const EvalReport& report);

}  // namespace srlood::data
