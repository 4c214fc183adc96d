#include "srlood/srl.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

namespace srlood::srl {

namespace {

using nlohmann::json;

void check_sorted_unique(const std::vector<std::size_t>& v, const char* what) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] <= v[i - 1]) {
            throw ValidationError("bad-span", std::string(what) + " span is not strictly increasing");
        }
    }
}

bool intersects(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    // both sorted
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return true;
        if (a[i] < b[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return false;
}

std::vector<std::size_t> parse_span(const json& rec, const char* key, int line) {
    std::vector<std::size_t> out;
    if (!rec.contains(key)) {
        throw ValidationError("missing-field",
                              "span record on line " + std::to_string(line) + " lacks \"" + key + "\"");
    }
    for (const auto& v : rec.at(key)) {
        if (!v.is_number_integer() || v.get<long long>() < 0) {
            throw ValidationError("bad-span", "non-negative integer index expected on line " + std::to_string(line));
        }
        out.push_back(v.get<std::size_t>());
    }
    return out;
}

}  // namespace

void RoleSpans::validate(std::optional<std::size_t> seq_len) const {
    check_sorted_unique(a0, "A0");
    check_sorted_unique(v, "V");
    check_sorted_unique(a1, "A1");
    if (intersects(a0, v) || intersects(a0, a1) || intersects(v, a1)) {
        throw ValidationError("overlapping-roles", "role spans are not pairwise disjoint");
    }
    for (const auto* s : {&a0, &v, &a1}) {
        if (!s->empty() && s->front() == 0) {
            throw ValidationError("bad-span", "[CLS] index 0 may not belong to a role");
        }
        if (seq_len && !s->empty() && s->back() >= *seq_len) {
            throw ValidationError("index-out-of-range", "span index exceeds sequence length");
        }
    }
}

void RoleLexicon::validate() const {
    for (const auto& t : agents) {
        if (verbs.contains(t) || patients.contains(t)) {
            throw ValidationError("ambiguous-lexicon", "token in two partitions: " + t);
        }
    }
    for (const auto& t : verbs) {
        if (patients.contains(t)) {
            throw ValidationError("ambiguous-lexicon", "token in two partitions: " + t);
        }
    }
}

std::optional<Role> RoleLexicon::lookup(const std::string& token) const {
    if (agents.contains(token)) return Role::kA0;
    if (verbs.contains(token)) return Role::kV;
    if (patients.contains(token)) return Role::kA1;
    return std::nullopt;
}

RoleSpans tag_rules(const std::vector<std::string>& tokens, const RoleLexicon& lexicon) {
    lexicon.validate();
    RoleSpans spans;
    for (std::size_t i = 1; i < tokens.size(); ++i) {  // index 0 is [CLS]
        if (auto r = lexicon.lookup(tokens[i])) {
            spans.span(*r).push_back(i);
        }
    }
    return spans;
}

MaskSpec sample_mask(const RoleSpans& spans, double p_mask, Rng& rng) {
    if (!(p_mask >= 0.0 && p_mask <= 1.0)) {
        throw ValidationError("bad-probability", "p_mask must lie in [0, 1]");
    }
    MaskSpec spec;
    for (Role r : {Role::kA0, Role::kV, Role::kA1}) {
        if (!spans.present(r)) {
            continue;
        }
        if (rng.bernoulli(p_mask)) {
            spec.masked_roles.push_back(r);
            spec.targets.push_back(static_cast<int>(r));
            const auto& s = spans.span(r);
            spec.positions.insert(spec.positions.end(), s.begin(), s.end());
        }
    }
    std::sort(spec.positions.begin(), spec.positions.end());
    return spec;
}

std::map<std::string, RoleSpans> load_spans(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("io-error", "cannot open span file: " + path.string());
    }
    std::map<std::string, RoleSpans> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            continue;
        }
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError("malformed-json",
                                  "span file line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!rec.contains("id") || !rec.at("id").is_string()) {
            throw ValidationError("missing-field", "span record on line " + std::to_string(lineno) + " lacks \"id\"");
        }
        const std::string id = rec.at("id").get<std::string>();
        RoleSpans spans;
        spans.a0 = parse_span(rec, "A0", lineno);
        spans.v = parse_span(rec, "V", lineno);
        spans.a1 = parse_span(rec, "A1", lineno);
        try {
            spans.validate();
        } catch (const ValidationError& e) {
            throw ValidationError(e.code(), std::string("example \"") + id + "\": " + e.what());
        }
        if (!out.emplace(id, std::move(spans)).second) {
            throw ValidationError("duplicate-id", "duplicate example id in span file: " + id);
        }
    }
    return out;
}

void save_spans(const std::map<std::string, RoleSpans>& spans, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("io-error", "cannot write span file: " + path.string());
    }
    for (const auto& [id, s] : spans) {
        json rec;
        rec["id"] = id;
        rec["A0"] = s.a0;
        rec["V"] = s.v;
        rec["A1"] = s.a1;
        out << rec.dump() << '\n';
    }
}

}  // namespace srlood::srl
