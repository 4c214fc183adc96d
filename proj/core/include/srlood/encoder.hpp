#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srlood/graph.hpp"
#include "srlood/srl.hpp"

namespace srlood::encoder {

// Which feature vector represents a sequence: the full [CLS ; A0 ; V ; A1]
// concatenation or the global [CLS] block alone (ablation).
enum class Pooling { kFull, kClsOnly };

struct EncoderConfig {
    std::size_t vocab_size = 0;
    std::size_t d_model = 96;
    std::size_t backbone_layers = 2;
    std::size_t head_layers = 3;
    std::size_t heads = 16;
    std::size_t ffn_mult = 4;
    std::size_t max_seq_len = 32;
    std::size_t num_classes = 2;
    Pooling pooling = Pooling::kFull;
    std::uint64_t seed = 0;

    // Length of the representation fed to the classifier and the detector.
    std::size_t feature_dim() const {
        return pooling == Pooling::kFull ? 4 * d_model : d_model;
    }

    void validate() const;
};

using ParamStore = std::map<std::string, Tensor>;

// Deterministic initialization: embeddings and weights from uniform
// (-1/sqrt(d_model), 1/sqrt(d_model)), layer-norm gains 1 and biases 0, the
// MASK vector drawn like an embedding row.
ParamStore init_params(const EncoderConfig& cfg);

// Names of every parameter the config implies, in initialization order.
std::vector<std::string> param_names(const EncoderConfig& cfg);

// Parameter store bound onto a graph. With trainable=false the leaves are
// constants and backward never visits them.
struct Bound {
    EncoderConfig cfg;
    std::map<std::string, Value> values;

    Value at(const std::string& name) const;
};

Bound bind_params(Graph& g, const EncoderConfig& cfg, const ParamStore& params, bool trainable);

struct Encoded {
    Value hidden;  // [T, d_model] head output
    Value h_cls;   // row 0
};

// Embeds tokens, runs the backbone, optionally replaces masked rows with the
// learned MASK vector, then runs the head. Position 0 must hold [CLS].
Encoded encode(Graph& g, const Bound& p, const std::vector<std::size_t>& token_ids,
               const std::optional<srl::MaskSpec>& mask = std::nullopt);

struct Representation {
    Value h_cls;
    Value mu_a0, mu_v, mu_a1;  // zero blocks when the role is absent
    Value h;                   // [h_cls ; mu_a0 ; mu_v ; mu_a1]
};

Representation pool_and_concat(Graph& g, const Bound& p, const Encoded& enc, const srl::RoleSpans& spans);

// The vector the classifier and detector consume under the configured pooling.
Value feature(const Bound& p, const Representation& rep);

// Bias-free class logits: logits[j] = w_j . h.
Value id_logits(Graph& g, const Bound& p, Value h);

// 3-way role logits from the mean of head outputs at one masked role.
Value ssl_logits(Graph& g, const Bound& p, Value masked_mean);

}  // namespace srlood::encoder
