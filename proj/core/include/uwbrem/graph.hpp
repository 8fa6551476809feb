#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uwbrem/param_store.hpp"
#include "uwbrem/tensor.hpp"

namespace uwbrem::nn {

using NodeId = int;

enum class OpKind : uint8_t {
    kConstant,
    kVariable,
    kParam,
    kAdd,
    kMul,
    kScale,
    kMatMul,
    kConv1d,
    kRelu,
    kSoftmax,
    kLog,
    kReshape,
    kSliceCols,
    kConcatCols,
    kSliceLen,
    kUpsample1d,
    kSum,
    kMse,
};

const char* op_name(OpKind op);

// Eager tape: every op computes its output immediately and records itself,
// so node creation order is a topological order and backward() is a single
// reverse sweep. One graph instance serves one forward/backward pass and is
// single-threaded; distinct instances are independent.
//
// Every op checks its output for non-finite values and throws
// std::runtime_error on violation.
class Graph {
public:
    explicit Graph(ParamStore* params = nullptr) : cparams_(params), params_(params) {}
    // Read-only binding: param() works, backward() leaves the store alone.
    explicit Graph(const ParamStore& params) : cparams_(&params), params_(nullptr) {}

    // Leaves. Constants and inputs are not differentiated; variables expose
    // their gradient via grad(); params are read from the bound store and
    // their gradients are accumulated back into it by backward().
    NodeId constant(Tensor v);
    NodeId variable(Tensor v);
    NodeId param(const std::string& name);

    // a + b. b may either match a's shape, be a row bias [F] against
    // [B,F], or a channel bias [C] against [B,C,L].
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);  // elementwise, same shape
    NodeId scale(NodeId a, double c);
    NodeId matmul(NodeId a, NodeId b);  // [M,K] x [K,N]
    // input [B,Cin,L], kernel [Cout,Cin,K], valid padding:
    // Lout = (L - K)/stride + 1.
    NodeId conv1d(NodeId input, NodeId kernel, int stride = 1);
    NodeId relu(NodeId a);
    NodeId softmax(NodeId a);  // per row of [B,K]
    NodeId log(NodeId a);
    NodeId reshape(NodeId a, std::vector<int> shape);
    NodeId flatten(NodeId a);  // [B,...] -> [B,rest]
    NodeId slice_cols(NodeId a, int c0, int c1);    // [B,F] -> [B,c1-c0]
    NodeId concat_cols(NodeId a, NodeId b);         // [B,F1],[B,F2] -> [B,F1+F2]
    NodeId slice_len(NodeId a, int l0, int l1);     // [B,C,L] -> [B,C,l1-l0]
    NodeId upsample1d(NodeId a, int factor);        // nearest repeat on L
    NodeId sum(NodeId a);                           // all elements -> [1]
    NodeId mse(NodeId a, NodeId b);                 // mean squared error -> [1]

    // Reverse sweep from a scalar loss. Parameter gradients in the bound
    // store are zeroed first, then reachable ones are accumulated, so
    // unreachable parameters end up with zero gradient. One call per graph.
    void backward(NodeId loss);

    const Tensor& value(NodeId id) const { return node(id).value; }
    // Gradient computed by backward() for a variable/param node (or any
    // intermediate that required grad).
    const Tensor& grad(NodeId id) const;

    size_t size() const { return nodes_.size(); }

private:
    struct Node {
        OpKind op;
        int in0 = -1, in1 = -1;
        Tensor value;
        Tensor grad;
        bool needs_grad = false;
        // op attributes
        int stride = 1;
        int i0 = 0, i1 = 0;
        double scalar = 0.0;
        std::string param_name;
    };

    const Node& node(NodeId id) const;
    Node& node(NodeId id);
    NodeId push(Node n);
    void check_finite(const Node& n) const;
    void backward_into(Node& n);

    std::vector<Node> nodes_;
    const ParamStore* cparams_ = nullptr;
    ParamStore* params_ = nullptr;
    bool backward_done_ = false;
};

}  // namespace uwbrem::nn
