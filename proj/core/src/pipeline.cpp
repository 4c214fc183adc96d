#include "srlood/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "srlood/fdcheck.hpp"
#include "srlood/metrics.hpp"
#include "srlood/rng.hpp"

namespace srlood::pipeline {

namespace {

using nlohmann::json;

constexpr const char* kCkptFormat = "SRLOOD-CKPT-v1";

json tensor_to_json(const Tensor& t) {
    json j;
    j["shape"] = t.shape();
    j["data"] = std::vector<double>(t.values().begin(), t.values().end());
    return j;
}

Tensor tensor_from_json(const json& j) {
    return Tensor(j.at("shape").get<std::vector<std::size_t>>(), j.at("data").get<std::vector<double>>());
}

json encoder_config_to_json(const encoder::EncoderConfig& cfg) {
    json j;
    j["vocab_size"] = cfg.vocab_size;
    j["d_model"] = cfg.d_model;
    j["backbone_layers"] = cfg.backbone_layers;
    j["head_layers"] = cfg.head_layers;
    j["heads"] = cfg.heads;
    j["ffn_mult"] = cfg.ffn_mult;
    j["max_seq_len"] = cfg.max_seq_len;
    j["num_classes"] = cfg.num_classes;
    j["pooling"] = cfg.pooling == encoder::Pooling::kFull ? "full" : "cls-only";
    j["seed"] = cfg.seed;
    return j;
}

encoder::EncoderConfig encoder_config_from_json(const json& j) {
    encoder::EncoderConfig cfg;
    cfg.vocab_size = j.value("vocab_size", cfg.vocab_size);
    cfg.d_model = j.value("d_model", cfg.d_model);
    cfg.backbone_layers = j.value("backbone_layers", cfg.backbone_layers);
    cfg.head_layers = j.value("head_layers", cfg.head_layers);
    cfg.heads = j.value("heads", cfg.heads);
    cfg.ffn_mult = j.value("ffn_mult", cfg.ffn_mult);
    cfg.max_seq_len = j.value("max_seq_len", cfg.max_seq_len);
    cfg.num_classes = j.value("num_classes", cfg.num_classes);
    const std::string pooling = j.value("pooling", std::string("full"));
    if (pooling == "full") {
        cfg.pooling = encoder::Pooling::kFull;
    } else if (pooling == "cls-only") {
        cfg.pooling = encoder::Pooling::kClsOnly;
    } else {
        throw ValidationError("bad-config", "pooling must be \"full\" or \"cls-only\"");
    }
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

// Per-(step, batch position) mask stream: reproducible and independent of
// whether other streams consumed draws.
Rng mask_rng(std::uint64_t seed, std::size_t step, std::size_t position) {
    return Rng(seed).fork("mask").fork(step).fork(position);
}

double accuracy_of(const Features& f) {
    std::size_t total = 0, correct = 0;
    for (std::size_t i = 0; i < f.labels.size(); ++i) {
        if (f.labels[i] < 0) {
            continue;
        }
        ++total;
        const Tensor& z = f.logits[i];
        std::size_t best = 0;
        for (std::size_t j = 1; j < z.size(); ++j) {
            if (z[j] > z[best]) {
                best = j;
            }
        }
        if (best == static_cast<std::size_t>(f.labels[i])) {
            ++correct;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

void TrainConfig::validate() const {
    weights.validate();
    if (!(p_mask >= 0.0 && p_mask <= 1.0)) {
        throw ValidationError("bad-config", "p_mask must lie in [0, 1]");
    }
    if (!(lr > 0.0)) {
        throw ValidationError("bad-config", "learning rate must be positive");
    }
    if (!(warmup_ratio >= 0.0 && warmup_ratio < 1.0)) {
        throw ValidationError("bad-config", "warm-up ratio must lie in [0, 1)");
    }
    if (batch_size < 2) {
        throw ValidationError("bad-config", "batch size must be at least 2 (margin loss needs pairs)");
    }
    if (epochs == 0 || eval_steps == 0) {
        throw ValidationError("bad-config", "epochs and eval_steps must be positive");
    }
}

std::string TrainConfig::to_json() const {
    json j;
    j["encoder"] = encoder_config_to_json(enc);
    json loss;
    loss["alpha1"] = weights.alpha1;
    loss["alpha2"] = weights.alpha2;
    loss["alpha3"] = weights.alpha3;
    if (weights.xi) {
        loss["xi"] = *weights.xi;
    }
    j["loss"] = std::move(loss);
    j["p_mask"] = p_mask;
    j["lr"] = lr;
    j["adamw"] = {{"beta1", adamw.beta1},
                  {"beta2", adamw.beta2},
                  {"eps", adamw.eps},
                  {"weight_decay", adamw.weight_decay}};
    j["warmup_ratio"] = warmup_ratio;
    j["batch_size"] = batch_size;
    j["epochs"] = epochs;
    j["eval_steps"] = eval_steps;
    j["seed"] = seed;
    j["selection"] = selection == Selection::kValAccuracy ? "val-accuracy" : "dev-ood-maha-auroc";
    j["fit_detector_on_train_too"] = fit_detector_on_train_too;
    return j.dump(2);
}

TrainConfig TrainConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed-json", std::string("train config: ") + e.what());
    }
    TrainConfig cfg;
    if (j.contains("encoder")) {
        cfg.enc = encoder_config_from_json(j.at("encoder"));
    }
    if (j.contains("loss")) {
        const json& loss = j.at("loss");
        cfg.weights.alpha1 = loss.value("alpha1", cfg.weights.alpha1);
        cfg.weights.alpha2 = loss.value("alpha2", cfg.weights.alpha2);
        cfg.weights.alpha3 = loss.value("alpha3", cfg.weights.alpha3);
        if (loss.contains("xi")) {
            cfg.weights.xi = loss.at("xi").get<double>();
        }
    }
    cfg.p_mask = j.value("p_mask", cfg.p_mask);
    cfg.lr = j.value("lr", cfg.lr);
    if (j.contains("adamw")) {
        const json& a = j.at("adamw");
        cfg.adamw.beta1 = a.value("beta1", cfg.adamw.beta1);
        cfg.adamw.beta2 = a.value("beta2", cfg.adamw.beta2);
        cfg.adamw.eps = a.value("eps", cfg.adamw.eps);
        cfg.adamw.weight_decay = a.value("weight_decay", cfg.adamw.weight_decay);
    }
    cfg.warmup_ratio = j.value("warmup_ratio", cfg.warmup_ratio);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.eval_steps = j.value("eval_steps", cfg.eval_steps);
    cfg.seed = j.value("seed", cfg.seed);
    const std::string sel = j.value("selection", std::string("val-accuracy"));
    if (sel == "val-accuracy") {
        cfg.selection = Selection::kValAccuracy;
    } else if (sel == "dev-ood-maha-auroc") {
        cfg.selection = Selection::kDevOodMahaAuroc;
    } else {
        throw ValidationError("bad-config", "unknown selection metric: " + sel);
    }
    cfg.fit_detector_on_train_too = j.value("fit_detector_on_train_too", false);
    return cfg;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    json j;
    j["format"] = kCkptFormat;
    j["config"] = encoder_config_to_json(ckpt.config);
    j["step"] = ckpt.step;
    j["vocab"] = ckpt.vocab.tokens;
    json params = json::object();
    for (const auto& [name, t] : ckpt.params) {
        params[name] = tensor_to_json(t);
    }
    j["params"] = std::move(params);
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("io-error", "cannot write checkpoint: " + path.string());
    }
    out << j.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("io-error", "cannot open checkpoint: " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed-json", std::string("checkpoint: ") + e.what());
    }
    if (!j.contains("format") || j.at("format") != kCkptFormat) {
        throw ValidationError("bad-format", "checkpoint file is not " + std::string(kCkptFormat));
    }
    Checkpoint ckpt;
    ckpt.config = encoder_config_from_json(j.at("config"));
    ckpt.step = j.at("step").get<std::size_t>();
    ckpt.vocab.tokens = j.at("vocab").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < ckpt.vocab.tokens.size(); ++i) {
        ckpt.vocab.ids[ckpt.vocab.tokens[i]] = i;
    }
    for (const auto& [name, tj] : j.at("params").items()) {
        ckpt.params.emplace(name, tensor_from_json(tj));
    }
    // every expected parameter must be present with the right shape
    encoder::ParamStore reference = encoder::init_params(ckpt.config);
    for (const auto& [name, t] : reference) {
        auto it = ckpt.params.find(name);
        if (it == ckpt.params.end() || !it->second.same_shape(t)) {
            throw ValidationError("bad-format", "checkpoint parameter missing or misshaped: " + name);
        }
    }
    return ckpt;
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, std::size_t epoch, std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = Rng(seed).fork("shuffle").fork(epoch);
    rng.shuffle(order);
    return order;
}

std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t n, std::size_t batch_size) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t s = 0;
    while (s < n) {
        std::size_t e = std::min(n, s + batch_size);
        if (n - e == 1) {
            e = n;  // absorb a trailing singleton into the last batch
        }
        out.emplace_back(s, e);
        s = e;
    }
    return out;
}

namespace {

struct EvalContext {
    const TrainConfig& cfg;
    const data::Corpus& corpus;
    const std::vector<data::Example>* dev_ood;
};

// Fits the detector on the validation split (optionally train too) and
// computes the selection metric for the current parameters.
EvalLog run_eval(const EvalContext& ctx, const Checkpoint& snapshot, std::size_t step,
                 detector::Detector& det_out) {
    Features val = extract_features(snapshot, ctx.corpus.val);
    std::vector<Tensor> fit_h = val.h;
    std::vector<int> fit_labels = val.labels;
    if (ctx.cfg.fit_detector_on_train_too) {
        Features tr = extract_features(snapshot, ctx.corpus.train);
        fit_h.insert(fit_h.end(), tr.h.begin(), tr.h.end());
        fit_labels.insert(fit_labels.end(), tr.labels.begin(), tr.labels.end());
    }
    det_out = detector::fit(fit_h, fit_labels, snapshot.config.num_classes,
                            snapshot.params.at("cls_w"));

    EvalLog log;
    log.step = step;
    log.val_accuracy = accuracy_of(val);
    if (ctx.dev_ood && !ctx.dev_ood->empty()) {
        Features ood = extract_features(snapshot, *ctx.dev_ood);
        metrics::ScoreSample sample;
        for (const Tensor& h : val.h) {
            sample.id_scores.push_back(detector::score_maha(det_out, h).value);
        }
        for (const Tensor& h : ood.h) {
            sample.ood_scores.push_back(detector::score_maha(det_out, h).value);
        }
        log.dev_ood_maha_auroc = metrics::auroc(sample);
    }
    return log;
}

}  // namespace

TrainResult train(const TrainConfig& cfg_in, const data::Corpus& corpus,
                  const std::vector<data::Example>* dev_ood) {
    TrainConfig cfg = cfg_in;
    cfg.validate();
    if (corpus.train.size() < 2) {
        throw ValidationError("bad-config", "training split needs at least 2 examples");
    }
    if (corpus.val.empty()) {
        throw ValidationError("empty-val", "validation split is empty");
    }
    if (cfg.selection == Selection::kDevOodMahaAuroc && (dev_ood == nullptr || dev_ood->empty())) {
        throw ValidationError("bad-config", "dev-ood selection requires a dev OOD set");
    }

    // Vocabulary over every split so evaluation-time tokens are embeddable.
    std::vector<const std::vector<data::Example>*> splits = {&corpus.train, &corpus.val,
                                                             &corpus.test_id, &corpus.test_ood};
    if (dev_ood) {
        splits.push_back(dev_ood);
    }
    data::Vocab vocab = data::Vocab::build(splits);

    int max_label = -1;
    for (const data::Example& ex : corpus.train) {
        if (ex.label < 0) {
            throw ValidationError("bad-label", "training example \"" + ex.id + "\" has an OOD label");
        }
        max_label = std::max(max_label, ex.label);
    }
    encoder::EncoderConfig enc = cfg.enc;
    enc.vocab_size = vocab.size();
    enc.num_classes = static_cast<std::size_t>(max_label) + 1;
    enc.seed = cfg.seed;
    enc.validate();
    // the detector is refitted on val during training, so both splits must
    // cover every class
    for (const auto* split : {&corpus.train, &corpus.val}) {
        std::vector<bool> seen(enc.num_classes, false);
        for (const data::Example& ex : *split) {
            if (ex.label >= 0 && static_cast<std::size_t>(ex.label) < enc.num_classes) {
                seen[static_cast<std::size_t>(ex.label)] = true;
            }
        }
        for (std::size_t c = 0; c < enc.num_classes; ++c) {
            if (!seen[c]) {
                throw ValidationError("empty-class",
                                      "class " + std::to_string(c) + " missing from a split");
            }
        }
    }
    for (const auto* split : splits) {
        for (const data::Example& ex : *split) {
            if (ex.tokens.size() > enc.max_seq_len) {
                throw ValidationError("sequence-too-long",
                                      "example \"" + ex.id + "\" exceeds max_seq_len");
            }
        }
    }

    encoder::ParamStore params = encoder::init_params(enc);
    const double xi = cfg.weights.resolve_xi(enc.feature_dim());
    optimizer::AdamW opt(cfg.adamw);

    const auto ranges = batch_ranges(corpus.train.size(), cfg.batch_size);
    const std::size_t total_steps = ranges.size() * cfg.epochs;

    TrainResult result;
    result.best_metric = -std::numeric_limits<double>::infinity();
    EvalContext ctx{cfg, corpus, dev_ood};

    auto maybe_keep_best = [&](const EvalLog& log, const Checkpoint& snapshot,
                               detector::Detector& det) {
        const double metric = cfg.selection == Selection::kValAccuracy
                                  ? log.val_accuracy
                                  : log.dev_ood_maha_auroc.value_or(0.0);
        // ties go to the later snapshot: the margin objective keeps tightening
        // clusters after accuracy saturates
        if (metric >= result.best_metric) {
            result.best_metric = metric;
            result.best_step = log.step;
            result.best = snapshot;
            result.best_detector = std::move(det);
        }
    };

    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> order = epoch_order(cfg.seed, epoch, corpus.train.size());
        for (const auto& [begin, end] : ranges) {
            ++step;
            const double lr = optimizer::lr_at(step, total_steps, cfg.lr, cfg.warmup_ratio);

            Graph g;
            encoder::Bound bound = encoder::bind_params(g, enc, params, true);

            std::vector<Value> feats, ce_terms;
            std::vector<int> labels;
            std::vector<Value> ssl_terms;
            for (std::size_t bi = begin; bi < end; ++bi) {
                const data::Example& ex = corpus.train[order[bi]];
                const std::vector<std::size_t> ids = vocab.encode(ex.tokens);
                encoder::Encoded enc_out = encoder::encode(g, bound, ids);
                encoder::Representation rep = encoder::pool_and_concat(g, bound, enc_out, ex.spans);
                Value feat = encoder::feature(bound, rep);
                feats.push_back(feat);
                labels.push_back(ex.label);
                ce_terms.push_back(g.cross_entropy(encoder::id_logits(g, bound, feat),
                                                   static_cast<std::size_t>(ex.label)));

                if (cfg.weights.alpha3 != 0.0 && cfg.p_mask > 0.0) {
                    Rng mrng = mask_rng(cfg.seed, step, bi - begin);
                    const srl::MaskSpec mask = srl::sample_mask(ex.spans, cfg.p_mask, mrng);
                    if (!mask.empty()) {
                        encoder::Encoded masked = encoder::encode(g, bound, ids, mask);
                        for (std::size_t r = 0; r < mask.masked_roles.size(); ++r) {
                            const auto& span = ex.spans.span(mask.masked_roles[r]);
                            Value mm = g.mean_over_indices(masked.hidden, span);
                            Value logits = encoder::ssl_logits(g, bound, mm);
                            ssl_terms.push_back(
                                g.cross_entropy(logits, static_cast<std::size_t>(mask.targets[r])));
                        }
                    }
                }
            }

            auto mean_of = [&](const std::vector<Value>& terms) {
                Value acc = terms[0];
                for (std::size_t i = 1; i < terms.size(); ++i) {
                    acc = g.add(acc, terms[i]);
                }
                return g.scale(acc, 1.0 / static_cast<double>(terms.size()));
            };

            Value l_id = mean_of(ce_terms);
            Value l_margin, l_ssl;
            if (cfg.weights.alpha2 != 0.0) {
                l_margin = losses::margin_loss(g, feats, labels, xi);
            }
            if (!ssl_terms.empty()) {
                l_ssl = mean_of(ssl_terms);
            }

            // Weighted total; zero-weight terms are skipped entirely so an
            // alpha2 = alpha3 = 0 run is bit-identical to plain CE training.
            Value total;
            auto add_weighted = [&](Value v, double w) {
                if (!v.valid() || w == 0.0) {
                    return;
                }
                Value scaled = g.scale(v, w);
                total = total.valid() ? g.add(total, scaled) : scaled;
            };
            add_weighted(l_id, cfg.weights.alpha1);
            add_weighted(l_margin, cfg.weights.alpha2);
            add_weighted(l_ssl, cfg.weights.alpha3);
            if (!total.valid()) {
                total = g.constant(Tensor::scalar(0.0));
            }

            StepLog log;
            log.step = step;
            log.lr = lr;
            log.loss_id = g.value(l_id).item();
            log.loss_margin = l_margin.valid() ? g.value(l_margin).item() : 0.0;
            log.loss_ssl = l_ssl.valid() ? g.value(l_ssl).item() : 0.0;
            log.loss_total = g.value(total).item();
            if (!std::isfinite(log.loss_total)) {
                throw NumericError("non-finite-loss", "training loss diverged at step " + std::to_string(step));
            }
            result.steps.push_back(log);

            const std::map<std::string, Tensor> grads = g.grad_of(total);
            opt.step(params, grads, lr);

            if (step % cfg.eval_steps == 0 || step == total_steps) {
                Checkpoint snapshot{enc, params, step, vocab};
                detector::Detector det;
                EvalLog elog = run_eval(ctx, snapshot, step, det);
                result.evals.push_back(elog);
                maybe_keep_best(elog, snapshot, det);
            }
        }
    }
    return result;
}

Features extract_features(const Checkpoint& ckpt, const std::vector<data::Example>& examples) {
    Features out;
    out.ids.reserve(examples.size());
    for (const data::Example& ex : examples) {
        Graph g;
        encoder::Bound bound = encoder::bind_params(g, ckpt.config, ckpt.params, false);
        const std::vector<std::size_t> ids = ckpt.vocab.encode(ex.tokens);
        encoder::Encoded enc_out = encoder::encode(g, bound, ids);
        encoder::Representation rep = encoder::pool_and_concat(g, bound, enc_out, ex.spans);
        Value feat = encoder::feature(bound, rep);
        Value logits = encoder::id_logits(g, bound, feat);
        out.ids.push_back(ex.id);
        out.labels.push_back(ex.label);
        out.h.push_back(g.value(feat));
        out.logits.push_back(g.value(logits));
    }
    return out;
}

detector::Detector fit_detector(const Checkpoint& ckpt, const std::vector<data::Example>& fit_set) {
    Features f = extract_features(ckpt, fit_set);
    for (int y : f.labels) {
        if (y < 0) {
            throw ValidationError("bad-label", "detector fitting set must contain only ID examples");
        }
    }
    return detector::fit(f.h, f.labels, ckpt.config.num_classes, ckpt.params.at("cls_w"));
}

std::map<std::string, double> score_embedding(const detector::Detector& det, const Tensor& h) {
    if (det.classifier.empty()) {
        throw ValidationError("missing-classifier", "detector carries no classifier weights");
    }
    Tensor logits({det.num_classes});
    for (std::size_t i = 0; i < det.num_classes; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < det.dim; ++j) {
            acc += det.classifier.at(i, j) * h[j];
        }
        logits[i] = acc;
    }
    return {{"maha", detector::score_maha(det, h).value},
            {"cosine", detector::score_cosine(det, h).value},
            {"msp", detector::score_msp(logits).value},
            {"energy", detector::score_energy(logits).value}};
}

data::EvalReport evaluate(const Checkpoint& ckpt, const detector::Detector& det,
                          const std::string& id_dataset_name,
                          const std::vector<data::Example>& id_test,
                          const std::map<std::string, std::vector<data::Example>>& ood_sets,
                          std::uint64_t seed, const std::string& config_json) {
    if (det.dim != ckpt.config.feature_dim()) {
        throw ValidationError("shape-mismatch", "detector dimension differs from checkpoint feature length");
    }
    Features id_f = extract_features(ckpt, id_test);

    auto scores_for = [&](const Features& f) {
        std::map<std::string, std::vector<double>> s;
        for (std::size_t i = 0; i < f.h.size(); ++i) {
            s["maha"].push_back(detector::score_maha(det, f.h[i]).value);
            s["cosine"].push_back(detector::score_cosine(det, f.h[i]).value);
            s["msp"].push_back(detector::score_msp(f.logits[i]).value);
            s["energy"].push_back(detector::score_energy(f.logits[i]).value);
        }
        return s;
    };
    const auto id_scores = scores_for(id_f);

    data::EvalReport report;
    report.id_dataset = id_dataset_name;
    report.id_accuracy = accuracy_of(id_f);
    report.seed = seed;
    report.config_json = config_json;
    report.detector_bank_size = det.bank.size();
    report.detector_dim = det.dim;

    for (const auto& [name, examples] : ood_sets) {
        Features ood_f = extract_features(ckpt, examples);
        const auto ood_scores = scores_for(ood_f);
        for (const auto& [scorer, id_list] : id_scores) {
            metrics::ScoreSample sample{id_list, ood_scores.at(scorer)};
            data::ScorerMetrics m;
            m.auroc = metrics::auroc(sample);
            m.far95 = metrics::far95(sample).value;
            report.ood_sets[name][scorer] = m;
        }
    }
    return report;
}

data::EmbeddingDump export_embeddings(const Checkpoint& ckpt, const std::vector<data::Example>& examples) {
    Features f = extract_features(ckpt, examples);
    data::EmbeddingDump dump;
    dump.dim = ckpt.config.feature_dim();
    for (std::size_t i = 0; i < f.h.size(); ++i) {
        data::EmbeddingRecord rec;
        rec.id = f.ids[i];
        rec.label = f.labels[i];
        rec.h.assign(f.h[i].values().begin(), f.h[i].values().end());
        dump.records.push_back(std::move(rec));
    }
    return dump;
}

std::vector<SweepRow> sweep_mask(const TrainConfig& cfg, const data::Corpus& corpus,
                                 const std::vector<double>& probabilities) {
    if (probabilities.size() < 2) {
        throw ValidationError("bad-config", "masking sweep needs at least 2 probabilities");
    }
    if (corpus.test_id.empty() || corpus.test_ood.empty()) {
        throw ValidationError("bad-config", "masking sweep needs test_id and test_ood splits");
    }
    std::vector<SweepRow> rows;
    for (double p : probabilities) {
        TrainConfig run_cfg = cfg;
        run_cfg.p_mask = p;
        TrainResult result = train(run_cfg, corpus);
        data::EvalReport report = evaluate(result.best, result.best_detector, "test_id",
                                           corpus.test_id, {{"test_ood", corpus.test_ood}},
                                           run_cfg.seed, run_cfg.to_json());
        SweepRow row;
        row.p_mask = p;
        const auto& per_scorer = report.ood_sets.at("test_ood");
        for (const auto& [scorer, m] : per_scorer) {
            row.mean_auroc += m.auroc;
            row.mean_far95 += m.far95;
        }
        row.mean_auroc /= static_cast<double>(per_scorer.size());
        row.mean_far95 /= static_cast<double>(per_scorer.size());
        double ssl_sum = 0.0;
        for (const StepLog& s : result.steps) {
            ssl_sum += s.loss_ssl;
        }
        row.mean_ssl_loss = result.steps.empty() ? 0.0 : ssl_sum / static_cast<double>(result.steps.size());
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "p_mask,mean_auroc,mean_far95,mean_ssl_loss\n";
    os << std::setprecision(17);
    for (const SweepRow& r : rows) {
        os << r.p_mask << ',' << r.mean_auroc << ',' << r.mean_far95 << ',' << r.mean_ssl_loss << '\n';
    }
    return os.str();
}

}  // namespace srlood::pipeline
