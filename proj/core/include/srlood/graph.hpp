#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "srlood/tensor.hpp"

namespace srlood {

// Handle to a node on a Graph's tape.
struct Value {
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t id = npos;
    bool valid() const { return id != npos; }
};

// Single-use reverse-mode tape over dense double tensors.
//
// Usage: register parameter leaves, build the forward computation through the
// op methods, then call backward() (or grad_of()) on a scalar node and read
// gradients. Node creation order is already a topological order, so the
// backward sweep is one reverse pass that visits each node exactly once.
// Gradient accumulation is additive; a Graph is built and differentiated once,
// then discarded.
//
// The primitive set is closed: shapes must match exactly, there is no
// broadcasting beyond what individual ops define (layer_norm's per-row
// gain/bias, mask_rows' fill vector).
class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    // Trainable leaf registered under `name`. grad_of() reports a gradient
    // for every registered parameter, zero if the loss never touches it.
    Value param(const std::string& name, const Tensor& init);

    // Leaf that never receives a gradient.
    Value constant(Tensor v);

    // Anonymous leaf; set requires_grad to differentiate w.r.t. it.
    Value input(Tensor v, bool requires_grad = false);

    const Tensor& value(Value v) const;
    // Gradient accumulated so far; zeros if backward never reached the node.
    Tensor grad(Value v) const;
    bool requires_grad(Value v) const;

    // Reverse sweep from a scalar loss. May be called once per graph.
    void backward(Value loss);

    // backward() plus collection of per-parameter gradients.
    std::map<std::string, Tensor> grad_of(Value loss);

    std::size_t node_count() const { return nodes_.size(); }

    // ---- primitives -------------------------------------------------------
    Value add(Value a, Value b);
    Value sub(Value a, Value b);
    Value scale(Value a, double c);
    Value matmul(Value a, Value b);                  // [m,k] x [k,n] -> [m,n]
    Value matvec(Value m, Value x);                  // [m,n] x [n] -> [m]
    Value transpose(Value a);                        // [m,n] -> [n,m]
    Value relu(Value a);
    Value gelu(Value a);                             // exact erf form
    Value softmax_rows(Value a);                     // row-wise, shift-stable
    Value layer_norm(Value x, Value gain, Value bias);
    Value concat(std::span<const Value> parts);      // vectors -> one vector
    Value concat_cols(std::span<const Value> parts); // same-row matrices, side by side
    Value slice_cols(Value a, std::size_t begin, std::size_t end);
    Value mean_over_indices(Value m, const std::vector<std::size_t>& idx);
    Value gather_rows(Value table, const std::vector<std::size_t>& rows);
    Value mask_rows(Value m, const std::vector<std::size_t>& positions, Value fill);
    Value squared_l2_distance(Value a, Value b);
    Value log_sum_exp(Value z);                      // vector -> scalar, shift-stable
    Value cross_entropy(Value logits, std::size_t target);
    Value sum(Value a);

    static constexpr double kLayerNormEps = 1e-5;

private:
    using BackwardFn = std::function<void(Graph&, std::size_t out_id)>;

    struct Node {
        Tensor value;
        Tensor grad;  // allocated lazily during backward
        bool requires_grad = false;
        BackwardFn backward;
    };

    Value make(Tensor value, bool requires_grad, BackwardFn backward);
    const Node& node(Value v) const;
    Node& node(Value v);
    // Gradient buffer of a node, allocated on first touch.
    Tensor& grad_buf(std::size_t id);
    void accumulate(Value v, const Tensor& g);
    void check_exists(Value v) const;

    std::vector<Node> nodes_;
    std::map<std::string, std::size_t> params_;
    bool backward_done_ = false;
};

}  // namespace srlood
