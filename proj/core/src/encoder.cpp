#include "srlood/encoder.hpp"

#include <cmath>
#include <numeric>

#include "srlood/rng.hpp"

namespace srlood::encoder {

namespace {

std::string layer_prefix(std::size_t backbone_layers, std::size_t index) {
    if (index < backbone_layers) {
        return "backbone." + std::to_string(index) + ".";
    }
    return "head." + std::to_string(index - backbone_layers) + ".";
}

}  // namespace

void EncoderConfig::validate() const {
    if (vocab_size == 0) {
        throw ValidationError("bad-config", "vocab_size must be positive");
    }
    if (d_model == 0 || heads == 0 || heads > d_model || d_model % heads != 0) {
        throw ValidationError("bad-config", "heads must divide d_model");
    }
    if (head_layers < 1) {
        throw ValidationError("bad-config", "head_layers must be at least 1");
    }
    if (ffn_mult == 0 || max_seq_len == 0) {
        throw ValidationError("bad-config", "ffn_mult and max_seq_len must be positive");
    }
    if (num_classes < 2) {
        throw ValidationError("bad-config", "num_classes must be at least 2");
    }
}

std::vector<std::string> param_names(const EncoderConfig& cfg) {
    std::vector<std::string> names;
    names.push_back("tok_emb");
    names.push_back("pos_emb");
    names.push_back("mask_vec");
    const std::size_t layers = cfg.backbone_layers + cfg.head_layers;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::string p = layer_prefix(cfg.backbone_layers, l);
        for (const char* w : {"ln1.g", "ln1.b", "attn.wq", "attn.wk", "attn.wv", "attn.wo",
                              "ln2.g", "ln2.b", "ffn.w1", "ffn.w2"}) {
            names.push_back(p + w);
        }
    }
    names.push_back("ln_f.g");
    names.push_back("ln_f.b");
    names.push_back("cls_w");
    names.push_back("ssl_w");
    return names;
}

ParamStore init_params(const EncoderConfig& cfg) {
    cfg.validate();
    const std::size_t d = cfg.d_model;
    const std::size_t f = cfg.ffn_mult * d;
    const double bound = 1.0 / std::sqrt(static_cast<double>(d));
    Rng rng = Rng(cfg.seed).fork("init");

    auto uniform = [&](std::vector<std::size_t> shape) {
        Tensor t(std::move(shape));
        for (double& v : t.values()) {
            v = rng.uniform(-bound, bound);
        }
        return t;
    };
    auto ones = [](std::size_t n) {
        Tensor t({n});
        for (double& v : t.values()) v = 1.0;
        return t;
    };

    ParamStore params;
    // Draw in the fixed param_names order so identical seeds give identical stores.
    for (const std::string& name : param_names(cfg)) {
        Tensor t;
        if (name == "tok_emb") {
            t = uniform({cfg.vocab_size, d});
        } else if (name == "pos_emb") {
            t = uniform({cfg.max_seq_len, d});
        } else if (name == "mask_vec") {
            t = uniform({d});
        } else if (name == "cls_w") {
            t = uniform({cfg.num_classes, cfg.feature_dim()});
        } else if (name == "ssl_w") {
            t = uniform({3, d});
        } else if (name.ends_with("ln1.g") || name.ends_with("ln2.g") || name == "ln_f.g") {
            t = ones(d);
        } else if (name.ends_with("ln1.b") || name.ends_with("ln2.b") || name == "ln_f.b") {
            t = Tensor({d});
        } else if (name.ends_with("ffn.w1")) {
            t = uniform({d, f});
        } else if (name.ends_with("ffn.w2")) {
            t = uniform({f, d});
        } else {  // attention projections
            t = uniform({d, d});
        }
        params.emplace(name, std::move(t));
    }
    return params;
}

Value Bound::at(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) {
        throw ValidationError("missing-param", "parameter not bound: " + name);
    }
    return it->second;
}

Bound bind_params(Graph& g, const EncoderConfig& cfg, const ParamStore& params, bool trainable) {
    cfg.validate();
    Bound b;
    b.cfg = cfg;
    for (const std::string& name : param_names(cfg)) {
        auto it = params.find(name);
        if (it == params.end()) {
            throw ValidationError("missing-param", "parameter store lacks: " + name);
        }
        b.values[name] = trainable ? g.param(name, it->second) : g.constant(it->second);
    }
    return b;
}

namespace {

// Pre-norm transformer block: x += MHA(LN(x)); x += FFN(LN(x)).
Value block(Graph& g, const Bound& p, const std::string& prefix, Value x) {
    const std::size_t d = p.cfg.d_model;
    const std::size_t heads = p.cfg.heads;
    const std::size_t dh = d / heads;
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Value a = g.layer_norm(x, p.at(prefix + "ln1.g"), p.at(prefix + "ln1.b"));
    Value q = g.matmul(a, p.at(prefix + "attn.wq"));
    Value k = g.matmul(a, p.at(prefix + "attn.wk"));
    Value v = g.matmul(a, p.at(prefix + "attn.wv"));

    std::vector<Value> head_out;
    head_out.reserve(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t c0 = h * dh, c1 = (h + 1) * dh;
        Value qh = g.slice_cols(q, c0, c1);
        Value kh = g.slice_cols(k, c0, c1);
        Value vh = g.slice_cols(v, c0, c1);
        Value scores = g.scale(g.matmul(qh, g.transpose(kh)), att_scale);
        Value att = g.softmax_rows(scores);
        head_out.push_back(g.matmul(att, vh));
    }
    Value o = g.concat_cols(head_out);
    x = g.add(x, g.matmul(o, p.at(prefix + "attn.wo")));

    Value f = g.layer_norm(x, p.at(prefix + "ln2.g"), p.at(prefix + "ln2.b"));
    Value hidden = g.gelu(g.matmul(f, p.at(prefix + "ffn.w1")));
    return g.add(x, g.matmul(hidden, p.at(prefix + "ffn.w2")));
}

}  // namespace

Encoded encode(Graph& g, const Bound& p, const std::vector<std::size_t>& token_ids,
               const std::optional<srl::MaskSpec>& mask) {
    const EncoderConfig& cfg = p.cfg;
    if (token_ids.empty()) {
        throw ValidationError("empty-sequence", "encode: no tokens");
    }
    if (token_ids.size() > cfg.max_seq_len) {
        throw ValidationError("sequence-too-long",
                              "encode: sequence length " + std::to_string(token_ids.size()) +
                                  " exceeds max_seq_len " + std::to_string(cfg.max_seq_len));
    }
    for (std::size_t id : token_ids) {
        if (id >= cfg.vocab_size) {
            throw ValidationError("unknown-token", "encode: token id " + std::to_string(id) + " out of vocabulary");
        }
    }
    const std::size_t T = token_ids.size();

    std::vector<std::size_t> positions(T);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    Value x = g.add(g.gather_rows(p.at("tok_emb"), token_ids),
                    g.gather_rows(p.at("pos_emb"), positions));

    for (std::size_t l = 0; l < cfg.backbone_layers; ++l) {
        x = block(g, p, "backbone." + std::to_string(l) + ".", x);
    }

    if (mask && !mask->positions.empty()) {
        for (std::size_t pos : mask->positions) {
            if (pos >= T) {
                throw ValidationError("index-out-of-range", "encode: mask position exceeds sequence length");
            }
        }
        x = g.mask_rows(x, mask->positions, p.at("mask_vec"));
    }

    for (std::size_t l = 0; l < cfg.head_layers; ++l) {
        x = block(g, p, "head." + std::to_string(l) + ".", x);
    }
    Value hidden = g.layer_norm(x, p.at("ln_f.g"), p.at("ln_f.b"));
    Value h_cls = g.mean_over_indices(hidden, {0});
    return Encoded{hidden, h_cls};
}

Representation pool_and_concat(Graph& g, const Bound& p, const Encoded& enc, const srl::RoleSpans& spans) {
    const std::size_t d = p.cfg.d_model;
    auto pooled = [&](const std::vector<std::size_t>& span) {
        if (span.empty()) {
            return g.constant(Tensor({d}));  // absent role contributes a zero block
        }
        return g.mean_over_indices(enc.hidden, span);
    };
    Representation rep;
    rep.h_cls = enc.h_cls;
    rep.mu_a0 = pooled(spans.a0);
    rep.mu_v = pooled(spans.v);
    rep.mu_a1 = pooled(spans.a1);
    const Value parts[] = {rep.h_cls, rep.mu_a0, rep.mu_v, rep.mu_a1};
    rep.h = g.concat(parts);
    return rep;
}

Value feature(const Bound& p, const Representation& rep) {
    return p.cfg.pooling == Pooling::kFull ? rep.h : rep.h_cls;
}

Value id_logits(Graph& g, const Bound& p, Value h) {
    return g.matvec(p.at("cls_w"), h);
}

Value ssl_logits(Graph& g, const Bound& p, Value masked_mean) {
    return g.matvec(p.at("ssl_w"), masked_mean);
}

}  // namespace srlood::encoder
