#include "srlood/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

namespace srlood::detector {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "SRLOOD-DET-v1";

json tensor_to_json(const Tensor& t) {
    json j;
    j["shape"] = t.shape();
    j["data"] = std::vector<double>(t.values().begin(), t.values().end());
    return j;
}

Tensor tensor_from_json(const json& j) {
    return Tensor(j.at("shape").get<std::vector<std::size_t>>(), j.at("data").get<std::vector<double>>());
}

}  // namespace

Detector fit(const std::vector<Tensor>& features, const std::vector<int>& labels,
             std::size_t num_classes, Tensor classifier) {
    if (features.empty() || features.size() != labels.size()) {
        throw ValidationError("bad-fit-input", "fit needs a non-empty feature list with one label each");
    }
    if (num_classes < 1) {
        throw ValidationError("bad-fit-input", "fit needs at least one class");
    }
    const std::size_t d = features[0].size();
    for (const Tensor& f : features) {
        if (f.rank() != 1 || f.size() != d) {
            throw ValidationError("shape-mismatch", "fit: all features must be vectors of one length");
        }
    }
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
            throw ValidationError("bad-label", "fit: label out of range: " + std::to_string(y));
        }
    }

    Detector det;
    det.num_classes = num_classes;
    det.dim = d;

    // Canonical order (label, then lexicographic feature) makes the fit
    // independent of presentation order down to the last bit.
    std::vector<std::size_t> order(features.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (labels[a] != labels[b]) {
            return labels[a] < labels[b];
        }
        const auto va = features[a].values();
        const auto vb = features[b].values();
        return std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end());
    });
    det.bank.reserve(features.size());
    det.bank_labels.reserve(features.size());
    for (std::size_t i : order) {
        det.bank.push_back(features[i]);
        det.bank_labels.push_back(labels[i]);
    }

    // Class means.
    std::vector<std::size_t> counts(num_classes, 0);
    det.class_means.assign(num_classes, Tensor({d}));
    for (std::size_t i = 0; i < det.bank.size(); ++i) {
        const std::size_t c = static_cast<std::size_t>(det.bank_labels[i]);
        ++counts[c];
        for (std::size_t j = 0; j < d; ++j) {
            det.class_means[c][j] += det.bank[i][j];
        }
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (counts[c] == 0) {
            throw ValidationError("empty-class", "fit: class " + std::to_string(c) + " has no examples");
        }
        for (std::size_t j = 0; j < d; ++j) {
            det.class_means[c][j] /= static_cast<double>(counts[c]);
        }
    }

    // Shared covariance, expectation (1/N) normalization.
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    Eigen::VectorXd centered(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < det.bank.size(); ++i) {
        const Tensor& mu = det.class_means[static_cast<std::size_t>(det.bank_labels[i])];
        for (std::size_t j = 0; j < d; ++j) {
            centered[static_cast<Eigen::Index>(j)] = det.bank[i][j] - mu[j];
        }
        sigma.noalias() += centered * centered.transpose();
    }
    sigma /= static_cast<double>(det.bank.size());

    // Spectral pseudo-inverse: negative round-off eigenvalues clamp to zero,
    // eigenvalues below rtol * lambda_max are dropped.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    if (eig.info() != Eigen::Success) {
        throw NumericError("eig-failed", "fit: eigendecomposition of the covariance failed");
    }
    Eigen::VectorXd lambda = eig.eigenvalues().cwiseMax(0.0);
    const double lambda_max = lambda.maxCoeff();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
    if (lambda_max > 0.0) {
        for (Eigen::Index i = 0; i < lambda.size(); ++i) {
            if (lambda[i] > kEigCutoffRtol * lambda_max) {
                inv[i] = 1.0 / lambda[i];
            }
        }
    }
    Eigen::MatrixXd pinv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
    pinv = (0.5 * (pinv + pinv.transpose())).eval();  // exact symmetry

    det.cov_pinv = Tensor({d, d});
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            det.cov_pinv.at(i, j) = pinv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
    }

    if (!classifier.empty()) {
        if (classifier.rank() != 2 || classifier.rows() != num_classes || classifier.cols() != d) {
            throw ValidationError("shape-mismatch", "fit: classifier must be [num_classes, dim]");
        }
        det.classifier = std::move(classifier);
    }
    return det;
}

Score score_maha(const Detector& det, const Tensor& h) {
    if (h.rank() != 1 || h.size() != det.dim) {
        throw ValidationError("shape-mismatch", "score_maha: feature length differs from detector dim");
    }
    const std::size_t d = det.dim;
    std::vector<double> diff(d);
    double best = 0.0;
    bool first = true;
    for (const Tensor& mu : det.class_means) {
        for (std::size_t j = 0; j < d; ++j) {
            diff[j] = h[j] - mu[j];
        }
        double dist = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                acc += det.cov_pinv.at(i, j) * diff[j];
            }
            dist += diff[i] * acc;
        }
        if (first || dist < best) {
            best = dist;
            first = false;
        }
    }
    return Score{std::max(best, 0.0), Scorer::kMaha};
}

Score score_cosine(const Detector& det, const Tensor& h) {
    if (h.rank() != 1 || h.size() != det.dim) {
        throw ValidationError("shape-mismatch", "score_cosine: feature length differs from detector dim");
    }
    if (det.bank.empty()) {
        throw ValidationError("empty-bank", "score_cosine: detector bank is empty");
    }
    double h_norm = 0.0;
    for (std::size_t j = 0; j < det.dim; ++j) {
        h_norm += h[j] * h[j];
    }
    h_norm = std::sqrt(h_norm);
    if (h_norm == 0.0) {
        throw ValidationError("zero-vector", "score_cosine: probe has zero norm");
    }
    double best = -1.0;
    bool first = true;
    for (const Tensor& b : det.bank) {
        double dot = 0.0, b_norm = 0.0;
        for (std::size_t j = 0; j < det.dim; ++j) {
            dot += h[j] * b[j];
            b_norm += b[j] * b[j];
        }
        b_norm = std::sqrt(b_norm);
        if (b_norm == 0.0) {
            throw ValidationError("zero-vector", "score_cosine: bank vector has zero norm");
        }
        const double c = dot / (h_norm * b_norm);
        if (first || c > best) {
            best = c;
            first = false;
        }
    }
    return Score{-best, Scorer::kCosine};
}

Score score_msp(const Tensor& logits) {
    if (logits.rank() != 1 || logits.size() < 2) {
        throw ValidationError("shape-mismatch", "score_msp: at least two logits required");
    }
    double mx = logits[0];
    for (std::size_t j = 1; j < logits.size(); ++j) {
        mx = std::max(mx, logits[j]);
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        denom += std::exp(logits[j] - mx);
    }
    const double top = 1.0 / denom;  // exp(mx - mx) / denom
    return Score{1.0 - top, Scorer::kMsp};
}

Score score_energy(const Tensor& logits) {
    if (logits.rank() != 1 || logits.size() < 2) {
        throw ValidationError("shape-mismatch", "score_energy: at least two logits required");
    }
    double mx = logits[0];
    for (std::size_t j = 1; j < logits.size(); ++j) {
        mx = std::max(mx, logits[j]);
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < logits.size(); ++j) {
        acc += std::exp(logits[j] - mx);
    }
    return Score{-(mx + std::log(acc)), Scorer::kEnergy};
}

void save(const Detector& det, const std::filesystem::path& path) {
    json j;
    j["format"] = kFormat;
    j["num_classes"] = det.num_classes;
    j["dim"] = det.dim;
    json means = json::array();
    for (const Tensor& m : det.class_means) {
        means.push_back(std::vector<double>(m.values().begin(), m.values().end()));
    }
    j["means"] = std::move(means);
    j["cov_pinv"] = tensor_to_json(det.cov_pinv);
    json bank = json::array();
    for (std::size_t i = 0; i < det.bank.size(); ++i) {
        json rec;
        rec["label"] = det.bank_labels[i];
        rec["h"] = std::vector<double>(det.bank[i].values().begin(), det.bank[i].values().end());
        bank.push_back(std::move(rec));
    }
    j["bank"] = std::move(bank);
    // msp and energy need the classifier snapshot; maha and cosine do not
    j["scorers"] = {"maha", "cosine", "msp", "energy"};
    if (!det.classifier.empty()) {
        j["classifier"] = tensor_to_json(det.classifier);
    }
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("io-error", "cannot write detector file: " + path.string());
    }
    out << j.dump() << '\n';
}

Detector load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("io-error", "cannot open detector file: " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("malformed-json", std::string("detector file: ") + e.what());
    }
    if (!j.contains("format") || j.at("format") != kFormat) {
        throw ValidationError("bad-format", "detector file is not " + std::string(kFormat));
    }
    Detector det;
    det.num_classes = j.at("num_classes").get<std::size_t>();
    det.dim = j.at("dim").get<std::size_t>();
    for (const auto& m : j.at("means")) {
        det.class_means.push_back(Tensor({det.dim}, m.get<std::vector<double>>()));
    }
    det.cov_pinv = tensor_from_json(j.at("cov_pinv"));
    for (const auto& rec : j.at("bank")) {
        det.bank_labels.push_back(rec.at("label").get<int>());
        det.bank.push_back(Tensor({det.dim}, rec.at("h").get<std::vector<double>>()));
    }
    if (j.contains("classifier")) {
        det.classifier = tensor_from_json(j.at("classifier"));
    }
    if (j.contains("scorers")) {
        for (const auto& s : j.at("scorers")) {
            const std::string name = s.get<std::string>();
            if (name != "maha" && name != "cosine" && name != "msp" && name != "energy") {
                throw ValidationError("bad-format", "unknown scorer in detector file: " + name);
            }
        }
    }
    if (det.class_means.size() != det.num_classes || det.bank.empty()) {
        throw ValidationError("bad-format", "detector file is inconsistent");
    }
    return det;
}

}  // namespace srlood::detector
