#pragma once

#include <functional>
#include <vector>

#include "bvq/tensor.hpp"

namespace bvq::ad {

struct Var {
    int32_t id = -1;
    bool valid() const { return id >= 0; }
};

// Define-by-run reverse-mode tape. A graph is built per forward pass and
// discarded afterwards; insertion order is a topological order, so the
// backward sweep is a single reverse iteration over the node list.
//
// All values are f32. Nodes reachable only from non-differentiable leaves
// carry no gradient buffers, which makes a gradient-free graph a cheap way
// to run inference through the exact same code path as training.
class Graph {
  public:
    struct Node {
        Tensor value;
        Tensor grad;  // allocated iff requires_grad
        bool requires_grad = false;
        std::function<void(Graph&, const Node&)> backward;  // null for leaves
        const char* op = "leaf";
    };

    Var leaf(Tensor v, bool requires_grad = false);
    Var constant(Tensor v) { return leaf(std::move(v), false); }

    const Tensor& value(Var v) const { return node(v).value; }
    const Tensor& grad(Var v) const;
    float scalar(Var v) const;
    size_t size() const { return nodes_.size(); }

    // Forward ops. Each records a node whose backward accumulates into the
    // parents' gradient buffers.
    Var matmul(Var a, Var b);                 // (m,k)x(k,n) -> (m,n)
    Var conv2d(Var x, Var w, int stride, int pad);  // (Ci,H,W), (Co,Ci,kh,kw)
    Var bias_chw(Var x, Var b);               // (C,H,W) + (C,)
    Var bias_cols(Var x, Var b);              // (r,c) + (c,)
    Var upsample2x(Var x);                    // nearest, (C,H,W) -> (C,2H,2W)
    Var relu(Var x);
    Var sigmoid(Var x);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);                    // elementwise
    Var scale(Var x, float c);
    Var mse_reduce(Var pred, Var target);     // scalar mean squared error
    Var sum_squares(Var x);                   // scalar sum of squares
    Var stop_gradient(Var x);                 // identity value, zero gradient edge
    Var straight_through(Var z, Var q);       // value = q, gradient passes to z only
    Var gather_rows(Var table, std::vector<uint32_t> idx);  // (L,D) -> (l,D)
    Var reshape(Var x, Shape s);
    Var tokens_to_grid(Var x, uint32_t h, uint32_t w);  // (h*w, D) -> (D,h,w)
    Var grid_to_tokens(Var x);                          // (D,h,w) -> (h*w, D)
    Var slice0(Var x, uint32_t start, uint32_t len);    // along dim 0
    Var concat0(Var a, Var b);                          // along dim 0

    // Reverse sweep from a scalar loss. Errors on non-scalar losses.
    void backward(Var loss);

  private:
    friend struct GraphOps;
    Node& node(Var v) { return nodes_[static_cast<size_t>(v.id)]; }
    const Node& node(Var v) const { return nodes_[static_cast<size_t>(v.id)]; }
    Var push(Node n);

    std::vector<Node> nodes_;
};

}  // namespace bvq::ad
