#include "srlood/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace srlood {

namespace {

void require(bool cond, const char* code, const std::string& msg) {
    if (!cond) {
        throw ValidationError(code, msg);
    }
}

bool sorted_unique(const std::vector<std::size_t>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] <= v[i - 1]) {
            return false;
        }
    }
    return true;
}

}  // namespace

// ---- plumbing --------------------------------------------------------------

Value Graph::make(Tensor value, bool requires_grad, BackwardFn backward) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    if (requires_grad) {
        n.backward = std::move(backward);
    }
    nodes_.push_back(std::move(n));
    return Value{nodes_.size() - 1};
}

void Graph::check_exists(Value v) const {
    require(v.valid() && v.id < nodes_.size(), "bad-value", "value handle does not belong to this graph");
}

const Graph::Node& Graph::node(Value v) const {
    check_exists(v);
    return nodes_[v.id];
}

Graph::Node& Graph::node(Value v) {
    check_exists(v);
    return nodes_[v.id];
}

Tensor& Graph::grad_buf(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) {
        n.grad = Tensor::zeros_like(n.value);
    }
    return n.grad;
}

void Graph::accumulate(Value v, const Tensor& g) {
    Tensor& buf = grad_buf(v.id);
    auto dst = buf.values();
    auto src = g.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] += src[i];
    }
}

Value Graph::param(const std::string& name, const Tensor& init) {
    require(!params_.contains(name), "duplicate-param", "parameter already registered: " + name);
    Value v = make(init, true, {});
    params_[name] = v.id;
    return v;
}

Value Graph::constant(Tensor v) {
    return make(std::move(v), false, {});
}

Value Graph::input(Tensor v, bool requires_grad) {
    return make(std::move(v), requires_grad, {});
}

const Tensor& Graph::value(Value v) const {
    return node(v).value;
}

Tensor Graph::grad(Value v) const {
    const Node& n = node(v);
    if (n.grad.empty()) {
        return Tensor::zeros_like(n.value);
    }
    return n.grad;
}

bool Graph::requires_grad(Value v) const {
    return node(v).requires_grad;
}

void Graph::backward(Value loss) {
    const Node& ln = node(loss);
    if (ln.value.rank() != 0) {
        throw ValidationError("non-scalar-loss", "backward requires a scalar node");
    }
    require(!backward_done_, "backward-twice", "backward already ran on this graph");
    backward_done_ = true;
    grad_buf(loss.id)[0] = 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.requires_grad || n.grad.empty() || !n.backward) {
            continue;  // leaf, unreached, or gradient-free
        }
        n.backward(*this, i);
    }
}

std::map<std::string, Tensor> Graph::grad_of(Value loss) {
    backward(loss);
    std::map<std::string, Tensor> out;
    for (const auto& [name, id] : params_) {
        const Node& n = nodes_[id];
        out[name] = n.grad.empty() ? Tensor::zeros_like(n.value) : n.grad;
    }
    return out;
}

// ---- elementwise ------------------------------------------------------------

Value Graph::add(Value a, Value b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require(ta.same_shape(tb), "shape-mismatch", "add: operand shapes differ");
    Tensor out = ta;
    auto ov = out.values();
    auto bv = tb.values();
    for (std::size_t i = 0; i < ov.size(); ++i) {
        ov[i] += bv[i];
    }
    bool rg = requires_grad(a) || requires_grad(b);
    return make(std::move(out), rg, [a, b](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        if (g.requires_grad(a)) g.accumulate(a, go);
        if (g.requires_grad(b)) g.accumulate(b, go);
    });
}

Value Graph::sub(Value a, Value b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require(ta.same_shape(tb), "shape-mismatch", "sub: operand shapes differ");
    Tensor out = ta;
    auto ov = out.values();
    auto bv = tb.values();
    for (std::size_t i = 0; i < ov.size(); ++i) {
        ov[i] -= bv[i];
    }
    bool rg = requires_grad(a) || requires_grad(b);
    return make(std::move(out), rg, [a, b](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        if (g.requires_grad(a)) g.accumulate(a, go);
        if (g.requires_grad(b)) {
            Tensor neg = go;
            for (double& x : neg.values()) x = -x;
            g.accumulate(b, neg);
        }
    });
}

Value Graph::scale(Value a, double c) {
    Tensor out = value(a);
    for (double& x : out.values()) x *= c;
    return make(std::move(out), requires_grad(a), [a, c](Graph& g, std::size_t out_id) {
        Tensor gs = g.nodes_[out_id].grad;
        for (double& x : gs.values()) x *= c;
        g.accumulate(a, gs);
    });
}

Value Graph::relu(Value a) {
    Tensor out = value(a);
    for (double& x : out.values()) x = x > 0.0 ? x : 0.0;
    return make(std::move(out), requires_grad(a), [a](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        const Tensor& in = g.value(a);
        Tensor gi = Tensor::zeros_like(in);
        for (std::size_t i = 0; i < gi.size(); ++i) {
            gi[i] = in.values()[i] > 0.0 ? go.values()[i] : 0.0;
        }
        g.accumulate(a, gi);
    });
}

Value Graph::gelu(Value a) {
    const Tensor& in = value(a);
    Tensor out = in;
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    for (double& x : out.values()) {
        x = 0.5 * x * (1.0 + std::erf(x * inv_sqrt2));
    }
    return make(std::move(out), requires_grad(a), [a](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        const Tensor& in = g.value(a);
        constexpr double inv_sqrt2 = 0.7071067811865475244;
        const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
        Tensor gi = Tensor::zeros_like(in);
        for (std::size_t i = 0; i < gi.size(); ++i) {
            const double x = in.values()[i];
            const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
            const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
            gi[i] = go.values()[i] * (cdf + x * pdf);
        }
        g.accumulate(a, gi);
    });
}

// ---- linear algebra ----------------------------------------------------------

Value Graph::matmul(Value a, Value b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require(ta.rank() == 2 && tb.rank() == 2, "shape-mismatch", "matmul: rank-2 operands required");
    require(ta.cols() == tb.rows(), "shape-mismatch", "matmul: inner extents differ");
    const std::size_t m = ta.rows(), k = ta.cols(), n = tb.cols();
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ta.at(i, p);
            for (std::size_t j = 0; j < n; ++j) {
                out.at(i, j) += av * tb.at(p, j);
            }
        }
    }
    bool rg = requires_grad(a) || requires_grad(b);
    return make(std::move(out), rg, [a, b, m, k, n](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        const Tensor& ta = g.value(a);
        const Tensor& tb = g.value(b);
        if (g.requires_grad(a)) {  // dA = G * B^T
            Tensor ga({m, k});
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    const double gv = go.at(i, j);
                    for (std::size_t p = 0; p < k; ++p) {
                        ga.at(i, p) += gv * tb.at(p, j);
                    }
                }
            }
            g.accumulate(a, ga);
        }
        if (g.requires_grad(b)) {  // dB = A^T * G
            Tensor gb({k, n});
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t p = 0; p < k; ++p) {
                    const double av = ta.at(i, p);
                    for (std::size_t j = 0; j < n; ++j) {
                        gb.at(p, j) += av * go.at(i, j);
                    }
                }
            }
            g.accumulate(b, gb);
        }
    });
}

Value Graph::matvec(Value m, Value x) {
    const Tensor& tm = value(m);
    const Tensor& tx = value(x);
    require(tm.rank() == 2 && tx.rank() == 1, "shape-mismatch", "matvec: matrix and vector required");
    require(tm.cols() == tx.extent(0), "shape-mismatch", "matvec: inner extents differ");
    const std::size_t rows = tm.rows(), cols = tm.cols();
    Tensor out({rows});
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            acc += tm.at(i, j) * tx[j];
        }
        out[i] = acc;
    }
    bool rg = requires_grad(m) || requires_grad(x);
    return make(std::move(out), rg, [m, x, rows, cols](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        const Tensor& tm = g.value(m);
        const Tensor& tx = g.value(x);
        if (g.requires_grad(m)) {  // dM = g ⊗ x
            Tensor gm({rows, cols});
            for (std::size_t i = 0; i < rows; ++i) {
                for (std::size_t j = 0; j < cols; ++j) {
                    gm.at(i, j) = go[i] * tx[j];
                }
            }
            g.accumulate(m, gm);
        }
        if (g.requires_grad(x)) {  // dx = M^T g
            Tensor gx({cols});
            for (std::size_t i = 0; i < rows; ++i) {
                for (std::size_t j = 0; j < cols; ++j) {
                    gx[j] += tm.at(i, j) * go[i];
                }
            }
            g.accumulate(x, gx);
        }
    });
}

Value Graph::transpose(Value a) {
    const Tensor& ta = value(a);
    require(ta.rank() == 2, "shape-mismatch", "transpose: rank-2 operand required");
    const std::size_t m = ta.rows(), n = ta.cols();
    Tensor out({n, m});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out.at(j, i) = ta.at(i, j);
        }
    }
    return make(std::move(out), requires_grad(a), [a, m, n](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        Tensor ga({m, n});
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                ga.at(i, j) = go.at(j, i);
            }
        }
        g.accumulate(a, ga);
    });
}

// ---- normalization -----------------------------------------------------------

Value Graph::softmax_rows(Value a) {
    const Tensor& ta = value(a);
    require(ta.rank() == 2, "shape-mismatch", "softmax_rows: rank-2 operand required");
    const std::size_t m = ta.rows(), n = ta.cols();
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        double mx = ta.at(i, 0);
        for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, ta.at(i, j));
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double e = std::exp(ta.at(i, j) - mx);
            out.at(i, j) = e;
            denom += e;
        }
        for (std::size_t j = 0; j < n; ++j) out.at(i, j) /= denom;
    }
    return make(std::move(out), requires_grad(a), [a, m, n](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        const Tensor& y = g.nodes_[out_id].value;
        Tensor ga({m, n});
        for (std::size_t i = 0; i < m; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += go.at(i, j) * y.at(i, j);
            for (std::size_t j = 0; j < n; ++j) {
                ga.at(i, j) = y.at(i, j) * (go.at(i, j) - dot);
            }
        }
        g.accumulate(a, ga);
    });
}

Value Graph::layer_norm(Value x, Value gain, Value bias) {
    const Tensor& tx = value(x);
    const Tensor& tg = value(gain);
    const Tensor& tb = value(bias);
    require(tx.rank() == 2, "shape-mismatch", "layer_norm: rank-2 input required");
    require(tg.rank() == 1 && tb.rank() == 1, "shape-mismatch", "layer_norm: rank-1 gain/bias required");
    const std::size_t m = tx.rows(), n = tx.cols();
    require(tg.extent(0) == n && tb.extent(0) == n, "shape-mismatch", "layer_norm: gain/bias length must equal columns");
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j) mean += tx.at(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = tx.at(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(n);
        const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
        for (std::size_t j = 0; j < n; ++j) {
            out.at(i, j) = tg[j] * (tx.at(i, j) - mean) * inv_std + tb[j];
        }
    }
    bool rg = requires_grad(x) || requires_grad(gain) || requires_grad(bias);
    return make(std::move(out), rg, [x, gain, bias, m, n](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        const Tensor& tx = g.value(x);
        const Tensor& tg = g.value(gain);
        Tensor gx({m, n});
        Tensor ggain({n});
        Tensor gbias({n});
        for (std::size_t i = 0; i < m; ++i) {
            double mean = 0.0;
            for (std::size_t j = 0; j < n; ++j) mean += tx.at(i, j);
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double d = tx.at(i, j) - mean;
                var += d * d;
            }
            var /= static_cast<double>(n);
            const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);
            // xhat row plus the two row means the input gradient needs
            double mean_gy = 0.0, mean_gy_xhat = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double xhat = (tx.at(i, j) - mean) * inv_std;
                const double gy = go.at(i, j) * tg[j];
                mean_gy += gy;
                mean_gy_xhat += gy * xhat;
                ggain[j] += go.at(i, j) * xhat;
                gbias[j] += go.at(i, j);
            }
            mean_gy /= static_cast<double>(n);
            mean_gy_xhat /= static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) {
                const double xhat = (tx.at(i, j) - mean) * inv_std;
                const double gy = go.at(i, j) * tg[j];
                gx.at(i, j) = (gy - mean_gy - xhat * mean_gy_xhat) * inv_std;
            }
        }
        if (g.requires_grad(x)) g.accumulate(x, gx);
        if (g.requires_grad(gain)) g.accumulate(gain, ggain);
        if (g.requires_grad(bias)) g.accumulate(bias, gbias);
    });
}

// ---- structure ----------------------------------------------------------------

Value Graph::concat(std::span<const Value> parts) {
    require(!parts.empty(), "empty-concat", "concat of zero vectors");
    std::size_t total = 0;
    bool rg = false;
    for (Value p : parts) {
        const Tensor& t = value(p);
        require(t.rank() == 1, "shape-mismatch", "concat: rank-1 parts required");
        total += t.extent(0);
        rg = rg || requires_grad(p);
    }
    Tensor out({total});
    std::size_t off = 0;
    for (Value p : parts) {
        const Tensor& t = value(p);
        for (std::size_t i = 0; i < t.size(); ++i) out[off + i] = t[i];
        off += t.size();
    }
    std::vector<Value> owned(parts.begin(), parts.end());
    return make(std::move(out), rg, [owned](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        std::size_t off = 0;
        for (Value p : owned) {
            const std::size_t len = g.value(p).size();
            if (g.requires_grad(p)) {
                Tensor gp({len});
                for (std::size_t i = 0; i < len; ++i) gp[i] = go[off + i];
                g.accumulate(p, gp);
            }
            off += len;
        }
    });
}

Value Graph::concat_cols(std::span<const Value> parts) {
    require(!parts.empty(), "empty-concat", "concat_cols of zero matrices");
    const std::size_t m = value(parts[0]).rows();
    std::size_t total = 0;
    bool rg = false;
    for (Value p : parts) {
        const Tensor& t = value(p);
        require(t.rank() == 2, "shape-mismatch", "concat_cols: rank-2 parts required");
        require(t.rows() == m, "shape-mismatch", "concat_cols: row counts differ");
        total += t.cols();
        rg = rg || requires_grad(p);
    }
    Tensor out({m, total});
    std::size_t off = 0;
    for (Value p : parts) {
        const Tensor& t = value(p);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < t.cols(); ++j) {
                out.at(i, off + j) = t.at(i, j);
            }
        }
        off += t.cols();
    }
    std::vector<Value> owned(parts.begin(), parts.end());
    return make(std::move(out), rg, [owned, m](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        std::size_t off = 0;
        for (Value p : owned) {
            const std::size_t c = g.value(p).cols();
            if (g.requires_grad(p)) {
                Tensor gp({m, c});
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < c; ++j) {
                        gp.at(i, j) = go.at(i, off + j);
                    }
                }
                g.accumulate(p, gp);
            }
            off += c;
        }
    });
}

Value Graph::slice_cols(Value a, std::size_t begin, std::size_t end) {
    const Tensor& ta = value(a);
    require(ta.rank() == 2, "shape-mismatch", "slice_cols: rank-2 operand required");
    require(begin < end && end <= ta.cols(), "bad-slice", "slice_cols: range out of bounds");
    const std::size_t m = ta.rows(), w = end - begin;
    Tensor out({m, w});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < w; ++j) {
            out.at(i, j) = ta.at(i, begin + j);
        }
    }
    return make(std::move(out), requires_grad(a), [a, begin, m, w](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        Tensor ga = Tensor::zeros_like(g.value(a));
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < w; ++j) {
                ga.at(i, begin + j) = go.at(i, j);
            }
        }
        g.accumulate(a, ga);
    });
}

Value Graph::mean_over_indices(Value m, const std::vector<std::size_t>& idx) {
    const Tensor& tm = value(m);
    require(tm.rank() == 2, "shape-mismatch", "mean_over_indices: rank-2 operand required");
    if (idx.empty()) {
        throw ValidationError("empty-index-set", "mean_over_indices: index set is empty");
    }
    require(sorted_unique(idx), "bad-index-set", "mean_over_indices: indices must be strictly increasing");
    require(idx.back() < tm.rows(), "index-out-of-range", "mean_over_indices: index exceeds row count");
    const std::size_t d = tm.cols();
    const double w = 1.0 / static_cast<double>(idx.size());
    Tensor out({d});
    for (std::size_t r : idx) {
        for (std::size_t j = 0; j < d; ++j) {
            out[j] += tm.at(r, j);
        }
    }
    for (std::size_t j = 0; j < d; ++j) out[j] *= w;
    return make(std::move(out), requires_grad(m), [m, idx, w, d](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        Tensor gm = Tensor::zeros_like(g.value(m));
        for (std::size_t r : idx) {
            for (std::size_t j = 0; j < d; ++j) {
                gm.at(r, j) = go[j] * w;
            }
        }
        g.accumulate(m, gm);
    });
}

Value Graph::gather_rows(Value table, const std::vector<std::size_t>& rows) {
    const Tensor& tt = value(table);
    require(tt.rank() == 2, "shape-mismatch", "gather_rows: rank-2 table required");
    require(!rows.empty(), "empty-index-set", "gather_rows: no rows requested");
    for (std::size_t r : rows) {
        require(r < tt.rows(), "index-out-of-range", "gather_rows: row index exceeds table");
    }
    const std::size_t d = tt.cols();
    Tensor out({rows.size(), d});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            out.at(i, j) = tt.at(rows[i], j);
        }
    }
    return make(std::move(out), requires_grad(table), [table, rows, d](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        Tensor gt = Tensor::zeros_like(g.value(table));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                gt.at(rows[i], j) += go.at(i, j);  // repeated rows accumulate
            }
        }
        g.accumulate(table, gt);
    });
}

Value Graph::mask_rows(Value m, const std::vector<std::size_t>& positions, Value fill) {
    const Tensor& tm = value(m);
    const Tensor& tf = value(fill);
    require(tm.rank() == 2, "shape-mismatch", "mask_rows: rank-2 operand required");
    require(tf.rank() == 1 && tf.extent(0) == tm.cols(), "shape-mismatch", "mask_rows: fill length must equal columns");
    require(sorted_unique(positions), "bad-index-set", "mask_rows: positions must be strictly increasing");
    if (!positions.empty() && positions.back() >= tm.rows()) {
        throw ValidationError("index-out-of-range", "mask_rows: position exceeds row count");
    }
    Tensor out = tm;
    for (std::size_t r : positions) {
        for (std::size_t j = 0; j < tm.cols(); ++j) {
            out.at(r, j) = tf[j];
        }
    }
    bool rg = requires_grad(m) || requires_grad(fill);
    return make(std::move(out), rg, [m, positions, fill](Graph& g, std::size_t out_id) {
        const Tensor& go = g.nodes_[out_id].grad;
        const std::size_t d = go.cols();
        if (g.requires_grad(m)) {
            Tensor gm = go;
            for (std::size_t r : positions) {
                for (std::size_t j = 0; j < d; ++j) {
                    gm.at(r, j) = 0.0;
                }
            }
            g.accumulate(m, gm);
        }
        if (g.requires_grad(fill)) {
            Tensor gf({d});
            for (std::size_t r : positions) {
                for (std::size_t j = 0; j < d; ++j) {
                    gf[j] += go.at(r, j);
                }
            }
            g.accumulate(fill, gf);
        }
    });
}

// ---- reductions -----------------------------------------------------------------

Value Graph::squared_l2_distance(Value a, Value b) {
    const Tensor& ta = value(a);
    const Tensor& tb = value(b);
    require(ta.same_shape(tb), "shape-mismatch", "squared_l2_distance: operand shapes differ");
    double acc = 0.0;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        const double d = ta.values()[i] - tb.values()[i];
        acc += d * d;
    }
    bool rg = requires_grad(a) || requires_grad(b);
    return make(Tensor::scalar(acc), rg, [a, b](Graph& g, std::size_t out_id) {
        const double go = g.nodes_[out_id].grad[0];
        const Tensor& ta = g.value(a);
        const Tensor& tb = g.value(b);
        if (g.requires_grad(a)) {
            Tensor ga = Tensor::zeros_like(ta);
            for (std::size_t i = 0; i < ga.size(); ++i) {
                ga[i] = 2.0 * go * (ta.values()[i] - tb.values()[i]);
            }
            g.accumulate(a, ga);
        }
        if (g.requires_grad(b)) {
            Tensor gb = Tensor::zeros_like(tb);
            for (std::size_t i = 0; i < gb.size(); ++i) {
                gb[i] = -2.0 * go * (ta.values()[i] - tb.values()[i]);
            }
            g.accumulate(b, gb);
        }
    });
}

namespace {

// Shift-stable log-sum-exp of a flat span.
double lse(std::span<const double> z) {
    double mx = z[0];
    for (double v : z) mx = std::max(mx, v);
    double acc = 0.0;
    for (double v : z) acc += std::exp(v - mx);
    return mx + std::log(acc);
}

}  // namespace

Value Graph::log_sum_exp(Value z) {
    const Tensor& tz = value(z);
    require(tz.rank() == 1, "shape-mismatch", "log_sum_exp: rank-1 operand required");
    const double out = lse(tz.values());
    return make(Tensor::scalar(out), requires_grad(z), [z](Graph& g, std::size_t out_id) {
        const double go = g.nodes_[out_id].grad[0];
        const Tensor& tz = g.value(z);
        const double l = lse(tz.values());
        Tensor gz = Tensor::zeros_like(tz);
        for (std::size_t i = 0; i < gz.size(); ++i) {
            gz[i] = go * std::exp(tz[i] - l);
        }
        g.accumulate(z, gz);
    });
}

Value Graph::cross_entropy(Value logits, std::size_t target) {
    const Tensor& tz = value(logits);
    require(tz.rank() == 1, "shape-mismatch", "cross_entropy: rank-1 logits required");
    require(target < tz.extent(0), "index-out-of-range", "cross_entropy: target exceeds logit count");
    const double out = lse(tz.values()) - tz[target];
    return make(Tensor::scalar(out), requires_grad(logits), [logits, target](Graph& g, std::size_t out_id) {
        const double go = g.nodes_[out_id].grad[0];
        const Tensor& tz = g.value(logits);
        const double l = lse(tz.values());
        Tensor gz = Tensor::zeros_like(tz);
        for (std::size_t i = 0; i < gz.size(); ++i) {
            double p = std::exp(tz[i] - l);
            if (i == target) p -= 1.0;
            gz[i] = go * p;
        }
        g.accumulate(logits, gz);
    });
}

Value Graph::sum(Value a) {
    const Tensor& ta = value(a);
    double acc = 0.0;
    for (double v : ta.values()) acc += v;
    return make(Tensor::scalar(acc), requires_grad(a), [a](Graph& g, std::size_t out_id) {
        const double go = g.nodes_[out_id].grad[0];
        Tensor ga = Tensor::zeros_like(g.value(a));
        for (double& v : ga.values()) v = go;
        g.accumulate(a, ga);
    });
}

}  // namespace srlood
