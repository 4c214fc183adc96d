#include "srlood/data.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "srlood/rng.hpp"

namespace srlood::data {

namespace {

using nlohmann::json;

constexpr const char* kEmbFormat = "SRLOOD-EMB-v1";

const std::vector<std::string> kFillers = {"the", "a", "very", "quite", "so",
                                           "rather", "just", "still", "then", "also"};
const std::vector<std::string> kPuncts = {".", "!", "?"};

std::string agent_word(std::size_t c, std::size_t k) { return "agent" + std::to_string(c) + "_" + std::to_string(k); }
std::string verb_word(std::size_t c, std::size_t k) { return "verb" + std::to_string(c) + "_" + std::to_string(k); }
std::string patient_word(std::size_t c, std::size_t k) { return "object" + std::to_string(c) + "_" + std::to_string(k); }
std::string novel_agent(std::size_t k) { return "novel_agent_" + std::to_string(k); }
std::string novel_verb(std::size_t k) { return "novel_verb_" + std::to_string(k); }
std::string novel_patient(std::size_t k) { return "novel_object_" + std::to_string(k); }

std::string filler_word(std::size_t k) {
    if (k < kFillers.size()) {
        return kFillers[k];
    }
    return "filler_" + std::to_string(k);
}

struct Generator {
    const CorpusSpec& spec;
    Rng rng;
    std::set<std::vector<std::string>> seen;  // global sentence uniqueness

    explicit Generator(const CorpusSpec& s) : spec(s), rng(Rng(s.seed).fork("corpus")) {}

    std::size_t pick(std::size_t n) { return rng.uniform_int(n); }

    void push_fillers(std::vector<std::string>& toks, bool slot_active) {
        if (!slot_active) {
            return;
        }
        for (std::size_t k = 0; k < spec.max_fillers_per_slot; ++k) {
            if (!rng.bernoulli(spec.filler_rate)) {
                break;
            }
            toks.push_back(filler_word(pick(spec.filler_vocab)));
        }
    }

    // Template variants toggle which of the four filler slots may fire.
    std::array<bool, 4> slots_for(std::size_t variant) const {
        switch (variant % std::max<std::size_t>(spec.template_variants, 1)) {
            case 1: return {false, true, true, false};   // fillers only between roles
            case 2: return {true, false, false, true};   // leading and trailing only
            default: return {true, true, true, true};
        }
    }

    // Builds one sentence from the three content words (or none for
    // filler-only), records gold spans.
    Example realize(const std::string& id, int label,
                    const std::string& a0, const std::string& v, const std::string& a1) {
        Example ex;
        ex.id = id;
        ex.label = label;
        const auto slots = slots_for(pick(16));
        ex.tokens.push_back("[CLS]");
        push_fillers(ex.tokens, slots[0]);
        if (!a0.empty()) {
            ex.spans.a0.push_back(ex.tokens.size());
            ex.tokens.push_back(a0);
        }
        push_fillers(ex.tokens, slots[1]);
        if (!v.empty()) {
            ex.spans.v.push_back(ex.tokens.size());
            ex.tokens.push_back(v);
        }
        push_fillers(ex.tokens, slots[2]);
        if (!a1.empty()) {
            ex.spans.a1.push_back(ex.tokens.size());
            ex.tokens.push_back(a1);
        }
        push_fillers(ex.tokens, slots[3]);
        ex.tokens.push_back(kPuncts[pick(kPuncts.size())]);
        return ex;
    }

    Example gen_id_example(const std::string& id, std::size_t cls) {
        const std::size_t w = spec.words_per_role_per_class;
        return realize(id, static_cast<int>(cls), agent_word(cls, pick(w)), verb_word(cls, pick(w)),
                       patient_word(cls, pick(w)));
    }

    Example gen_ood_example(const std::string& id) {
        const std::size_t w = spec.words_per_role_per_class;
        switch (spec.ood_kind) {
            case OodKind::kDisjointLexicon:
                return realize(id, -1, novel_agent(pick(w)), novel_verb(pick(w)), novel_patient(pick(w)));
            case OodKind::kRoleSwap: {
                const std::size_t c = pick(spec.num_classes);
                std::size_t other = pick(spec.num_classes - 1);
                if (other >= c) {
                    ++other;
                }
                return realize(id, -1, agent_word(c, pick(w)), verb_word(other, pick(w)),
                               patient_word(other, pick(w)));
            }
            case OodKind::kFillerOnly: {
                // filler-only sentences need at least one filler to be non-degenerate
                Example ex;
                ex.id = id;
                ex.label = -1;
                ex.tokens.push_back("[CLS]");
                ex.tokens.push_back(filler_word(pick(spec.filler_vocab)));
                for (std::size_t k = 1; k < 2 * spec.max_fillers_per_slot; ++k) {
                    if (!rng.bernoulli(spec.filler_rate)) {
                        break;
                    }
                    ex.tokens.push_back(filler_word(pick(spec.filler_vocab)));
                }
                ex.tokens.push_back(kPuncts[pick(kPuncts.size())]);
                return ex;
            }
        }
        throw ValidationError("bad-config", "unknown ood kind");
    }

    template <class F>
    std::vector<Example> unique_batch(std::size_t count, const std::string& prefix, F&& make) {
        std::vector<Example> out;
        out.reserve(count);
        std::size_t attempts = 0;
        const std::size_t max_attempts = 200 * std::max<std::size_t>(count, 1);
        while (out.size() < count) {
            if (++attempts > max_attempts) {
                throw ValidationError("lexicon-exhausted",
                                      "cannot generate " + std::to_string(count) +
                                          " unique sentences; enlarge lexicons or filler vocabulary");
            }
            Example ex = make(prefix + "-" + std::to_string(out.size()));
            if (!seen.insert(ex.tokens).second) {
                continue;
            }
            out.push_back(std::move(ex));
        }
        return out;
    }
};

void to_json_line(std::ostream& os, const Example& ex) {
    json j;
    j["id"] = ex.id;
    j["tokens"] = ex.tokens;
    j["label"] = ex.label;
    j["srl"] = {{"A0", ex.spans.a0}, {"V", ex.spans.v}, {"A1", ex.spans.a1}};
    os << j.dump() << '\n';
}

}  // namespace

const char* ood_kind_name(OodKind k) {
    switch (k) {
        case OodKind::kDisjointLexicon: return "disjoint-lexicon";
        case OodKind::kRoleSwap: return "role-swap";
        case OodKind::kFillerOnly: return "filler-only";
    }
    return "?";
}

OodKind ood_kind_from_name(const std::string& name) {
    if (name == "disjoint-lexicon") return OodKind::kDisjointLexicon;
    if (name == "role-swap") return OodKind::kRoleSwap;
    if (name == "filler-only") return OodKind::kFillerOnly;
    throw ValidationError("bad-config", "unknown ood kind: " + name);
}

void CorpusSpec::validate() const {
    if (num_classes < 2) {
        throw ValidationError("bad-config", "corpus needs at least 2 classes");
    }
    if (train_count == 0 || val_count == 0) {
        throw ValidationError("bad-config", "train and val splits must be non-empty");
    }
    if (words_per_role_per_class == 0 || filler_vocab == 0) {
        throw ValidationError("bad-config", "lexicon and filler sizes must be positive");
    }
    if (!(filler_rate >= 0.0 && filler_rate <= 1.0)) {
        throw ValidationError("bad-config", "filler_rate must lie in [0, 1]");
    }
}

Corpus gen_corpus(const CorpusSpec& spec) {
    spec.validate();
    Generator gen(spec);

    auto id_split = [&](const std::string& prefix, std::size_t count) {
        std::size_t next_class = 0;  // round-robin keeps classes balanced
        return gen.unique_batch(count, prefix, [&](const std::string& id) {
            Example ex = gen.gen_id_example(id, next_class);
            next_class = (next_class + 1) % spec.num_classes;
            return ex;
        });
    };

    Corpus corpus;
    // ID splits are generated before OOD, so two specs differing only in
    // ood_kind share identical ID splits for the same seed.
    corpus.train = id_split("train", spec.train_count);
    corpus.val = id_split("val", spec.val_count);
    corpus.test_id = id_split("test-id", spec.test_id_count);
    const std::string ood_prefix = std::string("ood-") + ood_kind_name(spec.ood_kind);
    corpus.test_ood = gen.unique_batch(spec.test_ood_count, ood_prefix,
                                       [&](const std::string& id) { return gen.gen_ood_example(id); });
    return corpus;
}

srl::RoleLexicon lexicon_for(const CorpusSpec& spec) {
    srl::RoleLexicon lex;
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
        for (std::size_t k = 0; k < spec.words_per_role_per_class; ++k) {
            lex.agents.insert(agent_word(c, k));
            lex.verbs.insert(verb_word(c, k));
            lex.patients.insert(patient_word(c, k));
        }
    }
    for (std::size_t k = 0; k < spec.words_per_role_per_class; ++k) {
        lex.agents.insert(novel_agent(k));
        lex.verbs.insert(novel_verb(k));
        lex.patients.insert(novel_patient(k));
    }
    lex.validate();
    return lex;
}

std::string corpus_to_jsonl(const std::vector<Example>& examples) {
    std::ostringstream os;
    for (const Example& ex : examples) {
        to_json_line(os, ex);
    }
    return os.str();
}

void write_corpus(const std::vector<Example>& examples, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("io-error", "cannot write corpus file: " + path.string());
    }
    out << corpus_to_jsonl(examples);
}

std::vector<Example> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("io-error", "cannot open corpus file: " + path.string());
    }
    std::vector<Example> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError("malformed-json", "corpus line " + std::to_string(lineno) + ": " + e.what());
        }
        for (const char* key : {"id", "tokens", "label", "srl"}) {
            if (!j.contains(key)) {
                throw ValidationError("missing-field",
                                      "corpus line " + std::to_string(lineno) + " lacks \"" + key + "\"");
            }
        }
        Example ex;
        ex.id = j.at("id").get<std::string>();
        ex.tokens = j.at("tokens").get<std::vector<std::string>>();
        ex.label = j.at("label").get<int>();
        const json& srl_obj = j.at("srl");
        for (const char* key : {"A0", "V", "A1"}) {
            if (!srl_obj.contains(key)) {
                throw ValidationError("missing-field",
                                      "corpus line " + std::to_string(lineno) + " lacks srl." + key);
            }
        }
        ex.spans.a0 = srl_obj.at("A0").get<std::vector<std::size_t>>();
        ex.spans.v = srl_obj.at("V").get<std::vector<std::size_t>>();
        ex.spans.a1 = srl_obj.at("A1").get<std::vector<std::size_t>>();
        if (ex.tokens.empty() || ex.tokens[0] != "[CLS]") {
            throw ValidationError("bad-example", "example \"" + ex.id + "\": position 0 must be [CLS]");
        }
        try {
            ex.spans.validate(ex.tokens.size());
        } catch (const ValidationError& e) {
            throw ValidationError(e.code(), "example \"" + ex.id + "\": " + e.what());
        }
        out.push_back(std::move(ex));
    }
    return out;
}

std::size_t Vocab::id_of(const std::string& token) const {
    auto it = ids.find(token);
    if (it == ids.end()) {
        throw ValidationError("unknown-token", "token not in vocabulary: " + token);
    }
    return it->second;
}

std::vector<std::size_t> Vocab::encode(const std::vector<std::string>& toks) const {
    std::vector<std::size_t> out;
    out.reserve(toks.size());
    for (const std::string& t : toks) {
        out.push_back(id_of(t));
    }
    return out;
}

Vocab Vocab::build(const std::vector<const std::vector<Example>*>& splits) {
    std::set<std::string> uniq;
    for (const auto* split : splits) {
        for (const Example& ex : *split) {
            uniq.insert(ex.tokens.begin(), ex.tokens.end());
        }
    }
    uniq.erase("[CLS]");
    Vocab v;
    v.tokens.push_back("[CLS]");
    v.tokens.insert(v.tokens.end(), uniq.begin(), uniq.end());
    for (std::size_t i = 0; i < v.tokens.size(); ++i) {
        v.ids[v.tokens[i]] = i;
    }
    return v;
}

void save_vocab(const Vocab& v, const std::filesystem::path& path) {
    json j;
    j["tokens"] = v.tokens;
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("io-error", "cannot write vocab file: " + path.string());
    }
    out << j.dump() << '\n';
}

Vocab load_vocab(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("io-error", "cannot open vocab file: " + path.string());
    }
    json j;
    in >> j;
    Vocab v;
    v.tokens = j.at("tokens").get<std::vector<std::string>>();
    if (v.tokens.empty() || v.tokens[0] != "[CLS]") {
        throw ValidationError("bad-format", "vocabulary must start with [CLS]");
    }
    for (std::size_t i = 0; i < v.tokens.size(); ++i) {
        v.ids[v.tokens[i]] = i;
    }
    return v;
}

void write_embeddings(const EmbeddingDump& dump, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("io-error", "cannot write embedding dump: " + path.string());
    }
    json header;
    header["format"] = kEmbFormat;
    header["d"] = dump.dim;
    out << header.dump() << '\n';
    for (const EmbeddingRecord& rec : dump.records) {
        if (rec.h.size() != dump.dim) {
            throw ValidationError("shape-mismatch",
                                  "embedding record \"" + rec.id + "\" has dimension " +
                                      std::to_string(rec.h.size()) + ", header says " + std::to_string(dump.dim));
        }
        json j;
        j["id"] = rec.id;
        j["label"] = rec.label;
        j["h"] = rec.h;
        out << j.dump() << '\n';
    }
}

EmbeddingDump load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("io-error", "cannot open embedding dump: " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("bad-format", "embedding dump is empty");
    }
    json header;
    try {
        header = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed-json", std::string("embedding header: ") + e.what());
    }
    if (!header.contains("format") || header.at("format") != kEmbFormat) {
        throw ValidationError("bad-format", "embedding dump is not " + std::string(kEmbFormat));
    }
    EmbeddingDump dump;
    dump.dim = header.at("d").get<std::size_t>();
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError("malformed-json",
                                  "embedding dump line " + std::to_string(lineno) + ": " + e.what());
        }
        EmbeddingRecord rec;
        rec.id = j.at("id").get<std::string>();
        rec.label = j.at("label").get<int>();
        rec.h = j.at("h").get<std::vector<double>>();
        if (rec.h.size() != dump.dim) {
            throw ValidationError("shape-mismatch",
                                  "embedding dump line " + std::to_string(lineno) +
                                      ": dimension differs from header");
        }
        dump.records.push_back(std::move(rec));
    }
    return dump;
}

std::string report_to_json(const EvalReport& report) {
    json j;
    j["id_dataset"] = report.id_dataset;
    json sets = json::object();
    for (const auto& [name, per_scorer] : report.ood_sets) {
        json s = json::object();
        for (const auto& [scorer, m] : per_scorer) {
            s[scorer] = {{"auroc", m.auroc}, {"far95", m.far95}};
        }
        sets[name] = std::move(s);
    }
    j["ood_sets"] = std::move(sets);
    j["id_accuracy"] = report.id_accuracy;
    j["seed"] = report.seed;
    j["config"] = json::parse(report.config_json);
    j["detector"] = {{"bank_size", report.detector_bank_size}, {"dim", report.detector_dim}};
    return j.dump(2);
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("io-error", "cannot write report: " + path.string());
    }
    out << report_to_json(report) << '\n';
}

EvalReport load_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("io-error", "cannot open report: " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed-json", std::string("report: ") + e.what());
    }
    EvalReport report;
    report.id_dataset = j.at("id_dataset").get<std::string>();
    for (const auto& [name, per_scorer] : j.at("ood_sets").items()) {
        for (const auto& [scorer, m] : per_scorer.items()) {
            ScorerMetrics sm;
            sm.auroc = m.at("auroc").get<double>();
            sm.far95 = m.at("far95").get<double>();
            report.ood_sets[name][scorer] = sm;
        }
    }
    report.id_accuracy = j.at("id_accuracy").get<double>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.config_json = j.at("config").dump();
    if (j.contains("detector")) {
        report.detector_bank_size = j.at("detector").value("bank_size", std::size_t{0});
        report.detector_dim = j.at("detector").value("dim", std::size_t{0});
    }
    return report;
}

}  // namespace srlood::data
