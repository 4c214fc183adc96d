// Command-line surface: corpus generation, training, evaluation, standalone
// scoring of embedding dumps, the masking-probability sweep, and embedding
// export. Exit codes: 0 success, 1 validation error, 2 numeric failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "srlood/data.hpp"
#include "srlood/detector.hpp"
#include "srlood/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace srlood;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("io-error", "cannot open file: " + path.string());
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

data::CorpusSpec corpus_spec_from_json(const json& j) {
    data::CorpusSpec spec;
    spec.num_classes = j.value("num_classes", spec.num_classes);
    spec.train_count = j.value("train", spec.train_count);
    spec.val_count = j.value("val", spec.val_count);
    spec.test_id_count = j.value("test_id", spec.test_id_count);
    spec.test_ood_count = j.value("test_ood", spec.test_ood_count);
    spec.words_per_role_per_class = j.value("words_per_role_per_class", spec.words_per_role_per_class);
    spec.filler_vocab = j.value("filler_vocab", spec.filler_vocab);
    spec.filler_rate = j.value("filler_rate", spec.filler_rate);
    spec.max_fillers_per_slot = j.value("max_fillers_per_slot", spec.max_fillers_per_slot);
    spec.template_variants = j.value("template_variants", spec.template_variants);
    spec.seed = j.value("seed", spec.seed);
    return spec;
}

struct OodSetArg {
    std::string name;
    fs::path path;
};

OodSetArg parse_ood_arg(const std::string& arg) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
        throw ValidationError("bad-argument", "--ood expects name=path, got: " + arg);
    }
    return OodSetArg{arg.substr(0, eq), arg.substr(eq + 1)};
}

// Loads the splits a training run needs. Test files are optional but, when
// present, are folded in so the vocabulary covers them.
data::Corpus load_corpus_dir(const fs::path& dir) {
    data::Corpus corpus;
    corpus.train = data::load_corpus(dir / "train.jsonl");
    corpus.val = data::load_corpus(dir / "val.jsonl");
    if (fs::exists(dir / "test_id.jsonl")) {
        corpus.test_id = data::load_corpus(dir / "test_id.jsonl");
    }
    std::vector<fs::path> ood_files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("test_ood", 0) == 0 && entry.path().extension() == ".jsonl") {
            ood_files.push_back(entry.path());
        }
    }
    std::sort(ood_files.begin(), ood_files.end());
    for (const fs::path& p : ood_files) {
        auto extra = data::load_corpus(p);
        corpus.test_ood.insert(corpus.test_ood.end(), extra.begin(), extra.end());
    }
    return corpus;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("io-error", "cannot write file: " + path.string());
    }
    out << text;
}

std::string train_log_csv(const pipeline::TrainResult& result) {
    std::ostringstream os;
    os.precision(17);
    os << "step,lr,loss_total,loss_id,loss_margin,loss_ssl\n";
    for (const auto& s : result.steps) {
        os << s.step << ',' << s.lr << ',' << s.loss_total << ',' << s.loss_id << ',' << s.loss_margin
           << ',' << s.loss_ssl << '\n';
    }
    return os.str();
}

std::string eval_log_csv(const pipeline::TrainResult& result) {
    std::ostringstream os;
    os.precision(17);
    os << "step,val_accuracy,dev_ood_maha_auroc\n";
    for (const auto& e : result.evals) {
        os << e.step << ',' << e.val_accuracy << ',';
        if (e.dev_ood_maha_auroc) {
            os << *e.dev_ood_maha_auroc;
        }
        os << '\n';
    }
    return os.str();
}

int cmd_gen_data(const fs::path& spec_path, const fs::path& out_dir, std::optional<std::uint64_t> seed) {
    json spec_json;
    try {
        spec_json = json::parse(read_file(spec_path));
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed-json", std::string("corpus spec: ") + e.what());
    }
    data::CorpusSpec spec = corpus_spec_from_json(spec_json);
    if (seed) {
        spec.seed = *seed;
    }

    std::vector<std::string> kinds;
    if (spec_json.contains("ood_kinds")) {
        kinds = spec_json.at("ood_kinds").get<std::vector<std::string>>();
    } else {
        kinds.push_back(spec_json.value("ood_kind", std::string("disjoint-lexicon")));
    }
    if (kinds.empty()) {
        throw ValidationError("bad-config", "at least one ood kind is required");
    }

    fs::create_directories(out_dir);
    data::Corpus first;
    std::vector<data::Example> all_ood;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        data::CorpusSpec run = spec;
        run.ood_kind = data::ood_kind_from_name(kinds[i]);
        data::Corpus corpus = data::gen_corpus(run);
        data::write_corpus(corpus.test_ood, out_dir / ("test_ood_" + kinds[i] + ".jsonl"));
        all_ood.insert(all_ood.end(), corpus.test_ood.begin(), corpus.test_ood.end());
        if (i == 0) {
            // identical seed keeps the ID splits identical across kinds
            data::write_corpus(corpus.train, out_dir / "train.jsonl");
            data::write_corpus(corpus.val, out_dir / "val.jsonl");
            data::write_corpus(corpus.test_id, out_dir / "test_id.jsonl");
            first = std::move(corpus);
        }
    }
    const data::Vocab vocab = data::Vocab::build({&first.train, &first.val, &first.test_id, &all_ood});
    data::save_vocab(vocab, out_dir / "vocab.json");
    std::cout << "wrote corpus (" << first.train.size() << " train / " << first.val.size() << " val / "
              << first.test_id.size() << " test) and " << kinds.size() << " ood set(s) to " << out_dir
              << "\n";
    return 0;
}

int cmd_train(const fs::path& config_path, const fs::path& data_dir, const fs::path& out_dir,
              std::optional<std::uint64_t> seed) {
    const std::string config_text = config_path.empty() ? std::string("{}") : read_file(config_path);
    pipeline::TrainConfig cfg = pipeline::TrainConfig::from_json(config_text);
    if (seed) {
        cfg.seed = *seed;
    }

    data::Corpus corpus = load_corpus_dir(data_dir);

    std::optional<std::vector<data::Example>> dev_ood;
    const json raw = json::parse(config_text);
    if (raw.contains("dev_ood")) {
        dev_ood = data::load_corpus(data_dir / raw.at("dev_ood").get<std::string>());
    }

    const pipeline::TrainResult result = pipeline::train(cfg, corpus, dev_ood ? &*dev_ood : nullptr);

    fs::create_directories(out_dir);
    pipeline::save_checkpoint(result.best, out_dir / "checkpoint.json");
    detector::save(result.best_detector, out_dir / "detector.json");
    write_text(out_dir / "train_log.csv", train_log_csv(result));
    write_text(out_dir / "evals.csv", eval_log_csv(result));
    write_text(out_dir / "config.json", cfg.to_json() + "\n");

    std::cout << "best step " << result.best_step << " (selection metric " << result.best_metric
              << "), checkpoint written to " << out_dir << "\n";
    return 0;
}

int cmd_eval(const fs::path& ckpt_dir, const fs::path& id_path, const std::vector<std::string>& ood_args,
             const fs::path& report_path, const fs::path& val_path, std::uint64_t seed) {
    const pipeline::Checkpoint ckpt = pipeline::load_checkpoint(ckpt_dir / "checkpoint.json");

    detector::Detector det;
    if (!val_path.empty()) {
        det = pipeline::fit_detector(ckpt, data::load_corpus(val_path));
    } else {
        det = detector::load(ckpt_dir / "detector.json");
    }

    const std::vector<data::Example> id_test = data::load_corpus(id_path);
    std::map<std::string, std::vector<data::Example>> ood_sets;
    for (const std::string& arg : ood_args) {
        const OodSetArg parsed = parse_ood_arg(arg);
        ood_sets[parsed.name] = data::load_corpus(parsed.path);
    }

    std::string config_json = "{}";
    if (fs::exists(ckpt_dir / "config.json")) {
        config_json = read_file(ckpt_dir / "config.json");
    }
    const data::EvalReport report =
        pipeline::evaluate(ckpt, det, id_path.stem().string(), id_test, ood_sets, seed, config_json);
    data::write_report(report, report_path);

    std::cout << "id accuracy " << report.id_accuracy << "\n";
    for (const auto& [name, per_scorer] : report.ood_sets) {
        for (const auto& [scorer, m] : per_scorer) {
            std::cout << name << " " << scorer << " auroc " << m.auroc << " far95 " << m.far95 << "\n";
        }
    }
    std::cout << "report written to " << report_path << "\n";
    return 0;
}

int cmd_score(const fs::path& detector_path, const fs::path& dump_path, const fs::path& out_path) {
    const detector::Detector det = detector::load(detector_path);
    const data::EmbeddingDump dump = data::load_embeddings(dump_path);
    if (dump.dim != det.dim) {
        throw ValidationError("shape-mismatch", "embedding dump dimension " + std::to_string(dump.dim) +
                                                    " differs from detector dimension " +
                                                    std::to_string(det.dim));
    }
    std::ostringstream os;
    os.precision(17);
    os << "id,label,maha,cosine,msp,energy\n";
    for (const auto& rec : dump.records) {
        const Tensor h({rec.h.size()}, rec.h);
        const auto scores = pipeline::score_embedding(det, h);
        os << rec.id << ',' << rec.label << ',' << scores.at("maha") << ',' << scores.at("cosine") << ','
           << scores.at("msp") << ',' << scores.at("energy") << '\n';
    }
    write_text(out_path, os.str());
    std::cout << "scored " << dump.records.size() << " embeddings into " << out_path << "\n";
    return 0;
}

int cmd_sweep(const fs::path& config_path, const fs::path& data_dir, const std::string& ps_arg,
              const fs::path& out_path, std::optional<std::uint64_t> seed) {
    pipeline::TrainConfig cfg =
        pipeline::TrainConfig::from_json(config_path.empty() ? "{}" : read_file(config_path));
    if (seed) {
        cfg.seed = *seed;
    }
    std::vector<double> ps;
    std::stringstream ss(ps_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            ps.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ValidationError("bad-argument", "--ps expects comma-separated probabilities, got: " + item);
        }
    }
    const data::Corpus corpus = load_corpus_dir(data_dir);
    const auto rows = pipeline::sweep_mask(cfg, corpus, ps);
    write_text(out_path, pipeline::sweep_to_csv(rows));
    std::cout << "sweep over " << ps.size() << " probabilities written to " << out_path << "\n";
    return 0;
}

int cmd_export(const fs::path& ckpt_dir, const fs::path& data_path, const fs::path& out_path) {
    const pipeline::Checkpoint ckpt = pipeline::load_checkpoint(ckpt_dir / "checkpoint.json");
    const std::vector<data::Example> examples = data::load_corpus(data_path);
    const data::EmbeddingDump dump = pipeline::export_embeddings(ckpt, examples);
    data::write_embeddings(dump, out_path);
    std::cout << "exported " << dump.records.size() << " embeddings (d=" << dump.dim << ") to " << out_path
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SRL-guided out-of-distribution detection for text classification"};
    app.require_subcommand(1);
    app.fallthrough();  // lets --seed appear after the subcommand name

    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed, "Override the seed from config/spec files");

    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic corpus with gold role spans");
    fs::path gen_spec, gen_out;
    gen->add_option("--spec", gen_spec, "Corpus spec JSON")->required();
    gen->add_option("--out", gen_out, "Output directory")->required();

    auto* train = app.add_subcommand("train", "Train a model and fit the OOD detector");
    fs::path train_config, train_data, train_out;
    train->add_option("--config", train_config, "Train config JSON (defaults apply when omitted)");
    train->add_option("--data", train_data, "Corpus directory from gen-data")->required();
    train->add_option("--out", train_out, "Checkpoint output directory")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint against OOD sets");
    fs::path eval_ckpt, eval_id, eval_report, eval_val;
    std::vector<std::string> eval_ood;
    eval->add_option("--ckpt", eval_ckpt, "Checkpoint directory")->required();
    eval->add_option("--id", eval_id, "ID test corpus (JSONL)")->required();
    eval->add_option("--ood", eval_ood, "OOD set as name=path (repeatable)");
    eval->add_option("--report", eval_report, "Report JSON output path")->required();
    eval->add_option("--val", eval_val, "Refit the detector on this corpus instead of the saved one");

    auto* score = app.add_subcommand("score", "Score an embedding dump with a saved detector");
    fs::path score_det, score_emb, score_out;
    score->add_option("--detector", score_det, "Detector JSON")->required();
    score->add_option("--embeddings", score_emb, "Embedding dump (JSONL)")->required();
    score->add_option("--out", score_out, "Scores CSV output path")->required();

    auto* sweep = app.add_subcommand("sweep-mask", "Train and evaluate across masking probabilities");
    fs::path sweep_config, sweep_data, sweep_out;
    std::string sweep_ps = "0.3,0.5,0.7";
    sweep->add_option("--config", sweep_config, "Train config JSON");
    sweep->add_option("--data", sweep_data, "Corpus directory")->required();
    sweep->add_option("--ps", sweep_ps, "Comma-separated masking probabilities")->capture_default_str();
    sweep->add_option("--out", sweep_out, "Sweep CSV output path")->required();

    auto* exp = app.add_subcommand("export-emb", "Export representations for a corpus");
    fs::path exp_ckpt, exp_data, exp_out;
    exp->add_option("--ckpt", exp_ckpt, "Checkpoint directory")->required();
    exp->add_option("--data", exp_data, "Corpus file (JSONL)")->required();
    exp->add_option("--out", exp_out, "Embedding dump output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            return cmd_gen_data(gen_spec, gen_out, seed);
        }
        if (train->parsed()) {
            return cmd_train(train_config, train_data, train_out, seed);
        }
        if (eval->parsed()) {
            return cmd_eval(eval_ckpt, eval_id, eval_ood, eval_report, eval_val, seed.value_or(0));
        }
        if (score->parsed()) {
            return cmd_score(score_det, score_emb, score_out);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sweep_config, sweep_data, sweep_ps, sweep_out, seed);
        }
        if (exp->parsed()) {
            return cmd_export(exp_ckpt, exp_data, exp_out);
        }
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
