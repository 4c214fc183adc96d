#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "srlood/errors.hpp"
#include "srlood/rng.hpp"

namespace srlood::srl {

enum class Role : int { kA0 = 0, kV = 1, kA1 = 2 };

inline const char* role_name(Role r) {
    switch (r) {
        case Role::kA0: return "A0";
        case Role::kV: return "V";
        case Role::kA1: return "A1";
    }
    return "?";
}

// Token index sets for proto-agent, predicate, proto-patient. Sets are kept
// sorted; index 0 is the [CLS] position and never belongs to a role.
struct RoleSpans {
    std::vector<std::size_t> a0, v, a1;

    const std::vector<std::size_t>& span(Role r) const {
        switch (r) {
            case Role::kA0: return a0;
            case Role::kV: return v;
            case Role::kA1: return a1;
        }
        return a0;
    }
    std::vector<std::size_t>& span(Role r) {
        return const_cast<std::vector<std::size_t>&>(static_cast<const RoleSpans*>(this)->span(r));
    }

    bool present(Role r) const { return !span(r).empty(); }
    bool all_empty() const { return a0.empty() && v.empty() && a1.empty(); }

    // Checks sortedness, pairwise disjointness, the no-[CLS] rule, and
    // optionally that all indices fall inside a sequence of length seq_len.
    void validate(std::optional<std::size_t> seq_len = std::nullopt) const;

    bool operator==(const RoleSpans& o) const = default;
};

// Which roles of a sequence are perturbed for the self-supervised task.
// `positions` is the union of the masked roles' spans; `targets` holds the
// 3-way label (the role's own index) for each masked role in A0, V, A1 order.
struct MaskSpec {
    std::vector<Role> masked_roles;
    std::vector<std::size_t> positions;
    std::vector<int> targets;

    bool empty() const { return masked_roles.empty(); }
};

// Disjoint token partition driving the rule-based tagger. Filler and
// punctuation tokens belong to no set.
struct RoleLexicon {
    std::set<std::string> agents;
    std::set<std::string> verbs;
    std::set<std::string> patients;

    // Errors with "ambiguous-lexicon" if any token sits in two partitions.
    void validate() const;

    std::optional<Role> lookup(const std::string& token) const;
};

// Assigns every lexicon token of the sentence to its role set; everything
// else (fillers, punctuation, [CLS] at index 0) stays unassigned.
RoleSpans tag_rules(const std::vector<std::string>& tokens, const RoleLexicon& lexicon);

// Independently masks each present role with probability p_mask. A selected
// role contributes all its positions and one target label.
MaskSpec sample_mask(const RoleSpans& spans, double p_mask, Rng& rng);

// Span file ingestion: JSONL lines {"id": str, "A0": [...], "V": [...], "A1": [...]}.
std::map<std::string, RoleSpans> load_spans(const std::filesystem::path& path);
void save_spans(const std::map<std::string, RoleSpans>& spans, const std::filesystem::path& path);

}  // namespace srlood::srl
