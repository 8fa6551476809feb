#include "uwbrem/graph.hpp"

#include <cmath>
#include <stdexcept>

namespace uwbrem::nn {

const char* op_name(OpKind op) {
    switch (op) {
        case OpKind::kConstant: return "constant";
        case OpKind::kVariable: return "variable";
        case OpKind::kParam: return "param";
        case OpKind::kAdd: return "add";
        case OpKind::kMul: return "mul";
        case OpKind::kScale: return "scale";
        case OpKind::kMatMul: return "matmul";
        case OpKind::kConv1d: return "conv1d";
        case OpKind::kRelu: return "relu";
        case OpKind::kSoftmax: return "softmax";
        case OpKind::kLog: return "log";
        case OpKind::kReshape: return "reshape";
        case OpKind::kSliceCols: return "slice_cols";
        case OpKind::kConcatCols: return "concat_cols";
        case OpKind::kSliceLen: return "slice_len";
        case OpKind::kUpsample1d: return "upsample1d";
        case OpKind::kSum: return "sum";
        case OpKind::kMse: return "mse";
    }
    return "?";
}

const Graph::Node& Graph::node(NodeId id) const {
    if (id < 0 || id >= static_cast<NodeId>(nodes_.size()))
        throw std::out_of_range("graph: bad node id " + std::to_string(id));
    return nodes_[static_cast<size_t>(id)];
}

Graph::Node& Graph::node(NodeId id) {
    return const_cast<Node&>(static_cast<const Graph*>(this)->node(id));
}

void Graph::check_finite(const Node& n) const {
    if (!n.value.all_finite())
        throw std::runtime_error(std::string("non-finite value produced by op '") + op_name(n.op) + "'");
}

NodeId Graph::push(Node n) {
    check_finite(n);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Graph::constant(Tensor v) {
    Node n;
    n.op = OpKind::kConstant;
    n.value = std::move(v);
    return push(std::move(n));
}

NodeId Graph::variable(Tensor v) {
    Node n;
    n.op = OpKind::kVariable;
    n.value = std::move(v);
    n.needs_grad = true;
    return push(std::move(n));
}

NodeId Graph::param(const std::string& name) {
    if (!cparams_) throw std::logic_error("graph has no bound parameter store");
    Node n;
    n.op = OpKind::kParam;
    n.value = cparams_->value(name);
    n.param_name = name;
    n.needs_grad = true;
    return push(std::move(n));
}

namespace {

enum class AddMode { SameShape, RowBias, ChannelBias };

AddMode add_mode(const Tensor& a, const Tensor& b) {
    if (a.same_shape(b)) return AddMode::SameShape;
    if (a.rank() == 2 && b.rank() == 1 && b.dim(0) == a.dim(1)) return AddMode::RowBias;
    if (a.rank() == 3 && b.rank() == 1 && b.dim(0) == a.dim(1)) return AddMode::ChannelBias;
    throw std::invalid_argument("add: incompatible shapes " + Tensor::shape_str(a.shape()) + " and " +
                                Tensor::shape_str(b.shape()));
}

}  // namespace

NodeId Graph::add(NodeId a, NodeId b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    Node n;
    n.op = OpKind::kAdd;
    n.in0 = a;
    n.in1 = b;
    n.needs_grad = node(a).needs_grad || node(b).needs_grad;
    switch (add_mode(ta, tb)) {
        case AddMode::SameShape: {
            Tensor out(ta.shape());
            for (int64_t i = 0; i < ta.numel(); ++i) out[i] = ta[i] + tb[i];
            n.value = std::move(out);
            break;
        }
        case AddMode::RowBias: {
            Tensor out(ta.shape());
            const int rows = ta.dim(0), cols = ta.dim(1);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) out.at2(r, c) = ta.at2(r, c) + tb[c];
            n.value = std::move(out);
            break;
        }
        case AddMode::ChannelBias: {
            Tensor out(ta.shape());
            const int bsz = ta.dim(0), ch = ta.dim(1), len = ta.dim(2);
            for (int i = 0; i < bsz; ++i)
                for (int c = 0; c < ch; ++c)
                    for (int l = 0; l < len; ++l) out.at3(i, c, l) = ta.at3(i, c, l) + tb[c];
            n.value = std::move(out);
            break;
        }
    }
    return push(std::move(n));
}

NodeId Graph::sub(NodeId a, NodeId b) { return add(a, scale(b, -1.0)); }

NodeId Graph::mul(NodeId a, NodeId b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (!ta.same_shape(tb))
        throw std::invalid_argument("mul: shape mismatch " + Tensor::shape_str(ta.shape()) + " vs " +
                                    Tensor::shape_str(tb.shape()));
    Node n;
    n.op = OpKind::kMul;
    n.in0 = a;
    n.in1 = b;
    n.needs_grad = node(a).needs_grad || node(b).needs_grad;
    Tensor out(ta.shape());
    for (int64_t i = 0; i < ta.numel(); ++i) out[i] = ta[i] * tb[i];
    n.value = std::move(out);
    return push(std::move(n));
}

NodeId Graph::scale(NodeId a, double c) {
    const Tensor& ta = node(a).value;
    Node n;
    n.op = OpKind::kScale;
    n.in0 = a;
    n.scalar = c;
    n.needs_grad = node(a).needs_grad;
    Tensor out(ta.shape());
    for (int64_t i = 0; i < ta.numel(); ++i) out[i] = c * ta[i];
    n.value = std::move(out);
    return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (ta.rank() != 2 || tb.rank() != 2 || ta.dim(1) != tb.dim(0))
        throw std::invalid_argument("matmul: incompatible shapes " + Tensor::shape_str(ta.shape()) + " x " +
                                    Tensor::shape_str(tb.shape()));
    const int m = ta.dim(0), k = ta.dim(1), p = tb.dim(1);
    Node n;
    n.op = OpKind::kMatMul;
    n.in0 = a;
    n.in1 = b;
    n.needs_grad = node(a).needs_grad || node(b).needs_grad;
    Tensor out({m, p});
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < k; ++j) {
            const double aij = ta.at2(i, j);
            if (aij == 0.0) continue;
            const double* brow = tb.data() + static_cast<size_t>(j) * p;
            double* orow = out.data() + static_cast<size_t>(i) * p;
            for (int c = 0; c < p; ++c) orow[c] += aij * brow[c];
        }
    }
    n.value = std::move(out);
    return push(std::move(n));
}

NodeId Graph::conv1d(NodeId input, NodeId kernel, int stride) {
    const Tensor& ti = node(input).value;
    const Tensor& tk = node(kernel).value;
    if (ti.rank() != 3 || tk.rank() != 3)
        throw std::invalid_argument("conv1d: expected input [B,Cin,L] and kernel [Cout,Cin,K]");
    if (ti.dim(1) != tk.dim(1))
        throw std::invalid_argument("conv1d: channel mismatch " + Tensor::shape_str(ti.shape()) + " vs " +
                                    Tensor::shape_str(tk.shape()));
    if (stride < 1) throw std::invalid_argument("conv1d: stride must be >= 1");
    const int bsz = ti.dim(0), cin = ti.dim(1), lin = ti.dim(2);
    const int cout = tk.dim(0), klen = tk.dim(2);
    if (lin < klen) throw std::invalid_argument("conv1d: input length shorter than kernel");
    const int lout = (lin - klen) / stride + 1;
    Node n;
    n.op = OpKind::kConv1d;
    n.in0 = input;
    n.in1 = kernel;
    n.stride = stride;
    n.needs_grad = node(input).needs_grad || node(kernel).needs_grad;
    Tensor out({bsz, cout, lout});
    for (int b = 0; b < bsz; ++b) {
        for (int co = 0; co < cout; ++co) {
            for (int i = 0; i < lout; ++i) {
                double acc = 0.0;
                const int base = i * stride;
                for (int ci = 0; ci < cin; ++ci) {
                    const double* irow = ti.data() + (static_cast<size_t>(b) * cin + ci) * lin + base;
                    const double* krow = tk.data() + (static_cast<size_t>(co) * cin + ci) * klen;
                    for (int k = 0; k < klen; ++k) acc += irow[k] * krow[k];
                }
                out.at3(b, co, i) = acc;
            }
        }
    }
    n.value = std::move(out);
    return push(std::move(n));
}

NodeId Graph::relu(NodeId a) {
    const Tensor& ta = node(a).value;
    Node n;
    n.op = OpKind::kRelu;
    n.in0 = a;
    n.needs_grad = node(a).needs_grad;
    Tensor out(ta.shape());
    for (int64_t i = 0; i < ta.numel(); ++i) out[i] = ta[i] > 0.0 ? ta[i] : 0.0;
    n.value = std::move(out);
    return push(std::move(n));
}

NodeId Graph::softmax(NodeId a) {
    const Tensor& ta = node(a).value;
    if (ta.rank() != 2) throw std::invalid_argument("softmax: expected [B,K]");
    const int rows = ta.dim(0), cols = ta.dim(1);
    Node n;
    n.op = OpKind::kSoftmax;
    n.in0 = a;
    n.needs_grad = node(a).needs_grad;
    Tensor out(ta.shape());
    for (int r = 0; r < rows; ++r) {
        double mx = ta.at2(r, 0);
        for (int c = 1; c < cols; ++c) mx = std::max(mx, ta.at2(r, c));
        double denom = 0.0;
        for (int c = 0; c < cols; ++c) {
            const double e = std::exp(ta.at2(r, c) - mx);
            out.at2(r, c) = e;
            denom += e;
        }
        for (int c = 0; c < cols; ++c) out.at2(r, c) /= denom;
    }
    n.value = std::move(out);
    return push(std::move(n));
}

NodeId Graph::log(NodeId a) {
    const Tensor& ta = node(a).value;
    Node n;
    n.op = OpKind::kLog;
    n.in0 = a;
    n.needs_grad = node(a).needs_grad;
    Tensor out(ta.shape());
    for (int64_t i = 0; i < ta.numel(); ++i) out[i] = std::log(ta[i]);
    n.value = std::move(out);
    return push(std::move(n));
}

NodeId Graph::reshape(NodeId a, std::vector<int> shape) {
    const Tensor& ta = node(a).value;
    if (Tensor::shape_numel(shape) != ta.numel())
        throw std::invalid_argument("reshape: element count mismatch " + Tensor::shape_str(ta.shape()) +
                                    " -> " + Tensor::shape_str(shape));
    Node n;
    n.op = OpKind::kReshape;
    n.in0 = a;
    n.needs_grad = node(a).needs_grad;
    n.value = Tensor(std::move(shape), std::vector<double>(ta.values().begin(), ta.values().end()));
    return push(std::move(n));
}

NodeId Graph::flatten(NodeId a) {
    const Tensor& ta = node(a).value;
    if (ta.rank() < 2) throw std::invalid_argument("flatten: expected rank >= 2");
    const int b = ta.dim(0);
    return reshape(a, {b, static_cast<int>(ta.numel() / b)});
}

NodeId Graph::slice_cols(NodeId a, int c0, int c1) {
    const Tensor& ta = node(a).value;
    if (ta.rank() != 2) throw std::invalid_argument("slice_cols: expected [B,F]");
    if (c0 < 0 || c1 > ta.dim(1) || c0 >= c1)
        throw std::invalid_argument("slice_cols: bad range [" + std::to_string(c0) + "," + std::to_string(c1) + ")");
    Node n;
    n.op = OpKind::kSliceCols;
    n.in0 = a;
    n.i0 = c0;
    n.i1 = c1;
    n.needs_grad = node(a).needs_grad;
    const int rows = ta.dim(0);
    Tensor out({rows, c1 - c0});
    for (int r = 0; r < rows; ++r)
        for (int c = c0; c < c1; ++c) out.at2(r, c - c0) = ta.at2(r, c);
    n.value = std::move(out);
    return push(std::move(n));
}

NodeId Graph::concat_cols(NodeId a, NodeId b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (ta.rank() != 2 || tb.rank() != 2 || ta.dim(0) != tb.dim(0))
        throw std::invalid_argument("concat_cols: expected [B,F1],[B,F2] with equal B");
    Node n;
    n.op = OpKind::kConcatCols;
    n.in0 = a;
    n.in1 = b;
    n.i0 = ta.dim(1);  // split point for backward
    n.needs_grad = node(a).needs_grad || node(b).needs_grad;
    const int rows = ta.dim(0), fa = ta.dim(1), fb = tb.dim(1);
    Tensor out({rows, fa + fb});
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < fa; ++c) out.at2(r, c) = ta.at2(r, c);
        for (int c = 0; c < fb; ++c) out.at2(r, fa + c) = tb.at2(r, c);
    }
    n.value = std::move(out);
    return push(std::move(n));
}

NodeId Graph::slice_len(NodeId a, int l0, int l1) {
    const Tensor& ta = node(a).value;
    if (ta.rank() != 3) throw std::invalid_argument("slice_len: expected [B,C,L]");
    if (l0 < 0 || l1 > ta.dim(2) || l0 >= l1)
        throw std::invalid_argument("slice_len: bad range [" + std::to_string(l0) + "," + std::to_string(l1) + ")");
    Node n;
    n.op = OpKind::kSliceLen;
    n.in0 = a;
    n.i0 = l0;
    n.i1 = l1;
    n.needs_grad = node(a).needs_grad;
    const int bsz = ta.dim(0), ch = ta.dim(1);
    Tensor out({bsz, ch, l1 - l0});
    for (int b = 0; b < bsz; ++b)
        for (int c = 0; c < ch; ++c)
            for (int l = l0; l < l1; ++l) out.at3(b, c, l - l0) = ta.at3(b, c, l);
    n.value = std::move(out);
    return push(std::move(n));
}

NodeId Graph::upsample1d(NodeId a, int factor) {
    const Tensor& ta = node(a).value;
    if (ta.rank() != 3) throw std::invalid_argument("upsample1d: expected [B,C,L]");
    if (factor < 1) throw std::invalid_argument("upsample1d: factor must be >= 1");
    Node n;
    n.op = OpKind::kUpsample1d;
    n.in0 = a;
    n.i0 = factor;
    n.needs_grad = node(a).needs_grad;
    const int bsz = ta.dim(0), ch = ta.dim(1), len = ta.dim(2);
    Tensor out({bsz, ch, len * factor});
    for (int b = 0; b < bsz; ++b)
        for (int c = 0; c < ch; ++c)
            for (int l = 0; l < len; ++l) {
                const double v = ta.at3(b, c, l);
                for (int r = 0; r < factor; ++r) out.at3(b, c, l * factor + r) = v;
            }
    n.value = std::move(out);
    return push(std::move(n));
}

NodeId Graph::sum(NodeId a) {
    const Tensor& ta = node(a).value;
    Node n;
    n.op = OpKind::kSum;
    n.in0 = a;
    n.needs_grad = node(a).needs_grad;
    double acc = 0.0;
    for (int64_t i = 0; i < ta.numel(); ++i) acc += ta[i];
    n.value = Tensor::scalar(acc);
    return push(std::move(n));
}

NodeId Graph::mse(NodeId a, NodeId b) {
    const Tensor& ta = node(a).value;
    const Tensor& tb = node(b).value;
    if (!ta.same_shape(tb))
        throw std::invalid_argument("mse: shape mismatch " + Tensor::shape_str(ta.shape()) + " vs " +
                                    Tensor::shape_str(tb.shape()));
    Node n;
    n.op = OpKind::kMse;
    n.in0 = a;
    n.in1 = b;
    n.needs_grad = node(a).needs_grad || node(b).needs_grad;
    double acc = 0.0;
    for (int64_t i = 0; i < ta.numel(); ++i) {
        const double d = ta[i] - tb[i];
        acc += d * d;
    }
    n.value = Tensor::scalar(acc / static_cast<double>(ta.numel()));
    return push(std::move(n));
}

const Tensor& Graph::grad(NodeId id) const {
    const Node& n = node(id);
    if (n.grad.empty()) throw std::logic_error("gradient not computed for this node");
    return n.grad;
}

void Graph::backward(NodeId loss) {
    if (backward_done_) throw std::logic_error("backward already ran on this graph");
    backward_done_ = true;
    Node& ln = node(loss);
    if (ln.value.numel() != 1) throw std::invalid_argument("backward: loss must be scalar");

    if (params_) params_->zero_grad();
    if (!ln.needs_grad) return;  // nothing differentiable upstream

    // Mark nodes that both feed the loss and require grad.
    std::vector<char> needed(nodes_.size(), 0);
    std::vector<NodeId> stack{loss};
    needed[static_cast<size_t>(loss)] = 1;
    while (!stack.empty()) {
        const Node& n = nodes_[static_cast<size_t>(stack.back())];
        stack.pop_back();
        for (int in : {n.in0, n.in1}) {
            if (in < 0) continue;
            Node& src = nodes_[static_cast<size_t>(in)];
            if (src.needs_grad && !needed[static_cast<size_t>(in)]) {
                needed[static_cast<size_t>(in)] = 1;
                stack.push_back(in);
            }
        }
    }

    for (size_t i = 0; i < nodes_.size(); ++i)
        if (needed[i]) nodes_[i].grad = Tensor(nodes_[i].value.shape());
    ln.grad[0] = 1.0;

    for (NodeId id = loss; id >= 0; --id) {
        if (!needed[static_cast<size_t>(id)]) continue;
        backward_into(nodes_[static_cast<size_t>(id)]);
    }

    if (params_) {
        for (const Node& n : nodes_) {
            if (n.op != OpKind::kParam || n.grad.empty()) continue;
            Tensor& pg = params_->grad(n.param_name);
            for (int64_t i = 0; i < pg.numel(); ++i) pg[i] += n.grad[i];
        }
    }
}

void Graph::backward_into(Node& n) {
    auto want = [&](int id) { return id >= 0 && !nodes_[static_cast<size_t>(id)].grad.empty(); };
    const Tensor& g = n.grad;
    switch (n.op) {
        case OpKind::kConstant:
        case OpKind::kVariable:
        case OpKind::kParam:
            return;
        case OpKind::kAdd: {
            const Tensor& ta = nodes_[static_cast<size_t>(n.in0)].value;
            const Tensor& tb = nodes_[static_cast<size_t>(n.in1)].value;
            if (want(n.in0)) {
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
            }
            if (want(n.in1)) {
                Tensor& gb = nodes_[static_cast<size_t>(n.in1)].grad;
                switch (add_mode(ta, tb)) {
                    case AddMode::SameShape:
                        for (int64_t i = 0; i < g.numel(); ++i) gb[i] += g[i];
                        break;
                    case AddMode::RowBias: {
                        const int rows = ta.dim(0), cols = ta.dim(1);
                        for (int r = 0; r < rows; ++r)
                            for (int c = 0; c < cols; ++c) gb[c] += g.at2(r, c);
                        break;
                    }
                    case AddMode::ChannelBias: {
                        const int bsz = ta.dim(0), ch = ta.dim(1), len = ta.dim(2);
                        for (int b = 0; b < bsz; ++b)
                            for (int c = 0; c < ch; ++c)
                                for (int l = 0; l < len; ++l) gb[c] += g.at3(b, c, l);
                        break;
                    }
                }
            }
            return;
        }
        case OpKind::kMul: {
            const Tensor& ta = nodes_[static_cast<size_t>(n.in0)].value;
            const Tensor& tb = nodes_[static_cast<size_t>(n.in1)].value;
            if (want(n.in0)) {
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] * tb[i];
            }
            if (want(n.in1)) {
                Tensor& gb = nodes_[static_cast<size_t>(n.in1)].grad;
                for (int64_t i = 0; i < g.numel(); ++i) gb[i] += g[i] * ta[i];
            }
            return;
        }
        case OpKind::kScale: {
            if (want(n.in0)) {
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                for (int64_t i = 0; i < g.numel(); ++i) ga[i] += n.scalar * g[i];
            }
            return;
        }
        case OpKind::kMatMul: {
            const Tensor& ta = nodes_[static_cast<size_t>(n.in0)].value;
            const Tensor& tb = nodes_[static_cast<size_t>(n.in1)].value;
            const int m = ta.dim(0), k = ta.dim(1), p = tb.dim(1);
            if (want(n.in0)) {  // dA = G * B^T
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < k; ++j) {
                        const double* grow = g.data() + static_cast<size_t>(i) * p;
                        const double* brow = tb.data() + static_cast<size_t>(j) * p;
                        double acc = 0.0;
                        for (int c = 0; c < p; ++c) acc += grow[c] * brow[c];
                        ga.at2(i, j) += acc;
                    }
            }
            if (want(n.in1)) {  // dB = A^T * G
                Tensor& gb = nodes_[static_cast<size_t>(n.in1)].grad;
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < k; ++j) {
                        const double aij = ta.at2(i, j);
                        if (aij == 0.0) continue;
                        const double* grow = g.data() + static_cast<size_t>(i) * p;
                        double* brow = gb.data() + static_cast<size_t>(j) * p;
                        for (int c = 0; c < p; ++c) brow[c] += aij * grow[c];
                    }
            }
            return;
        }
        case OpKind::kConv1d: {
            const Tensor& ti = nodes_[static_cast<size_t>(n.in0)].value;
            const Tensor& tk = nodes_[static_cast<size_t>(n.in1)].value;
            const int bsz = ti.dim(0), cin = ti.dim(1), lin = ti.dim(2);
            const int cout = tk.dim(0), klen = tk.dim(2);
            const int lout = n.value.dim(2);
            const int stride = n.stride;
            if (want(n.in0)) {
                Tensor& gi = nodes_[static_cast<size_t>(n.in0)].grad;
                for (int b = 0; b < bsz; ++b)
                    for (int co = 0; co < cout; ++co)
                        for (int i = 0; i < lout; ++i) {
                            const double go = g.at3(b, co, i);
                            if (go == 0.0) continue;
                            const int base = i * stride;
                            for (int ci = 0; ci < cin; ++ci) {
                                double* irow = gi.data() + (static_cast<size_t>(b) * cin + ci) * lin + base;
                                const double* krow = tk.data() + (static_cast<size_t>(co) * cin + ci) * klen;
                                for (int k = 0; k < klen; ++k) irow[k] += go * krow[k];
                            }
                        }
            }
            if (want(n.in1)) {
                Tensor& gk = nodes_[static_cast<size_t>(n.in1)].grad;
                for (int b = 0; b < bsz; ++b)
                    for (int co = 0; co < cout; ++co)
                        for (int i = 0; i < lout; ++i) {
                            const double go = g.at3(b, co, i);
                            if (go == 0.0) continue;
                            const int base = i * stride;
                            for (int ci = 0; ci < cin; ++ci) {
                                const double* irow = ti.data() + (static_cast<size_t>(b) * cin + ci) * lin + base;
                                double* krow = gk.data() + (static_cast<size_t>(co) * cin + ci) * klen;
                                for (int k = 0; k < klen; ++k) krow[k] += go * irow[k];
                            }
                        }
            }
            return;
        }
        case OpKind::kRelu: {
            if (want(n.in0)) {
                const Tensor& ta = nodes_[static_cast<size_t>(n.in0)].value;
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                for (int64_t i = 0; i < g.numel(); ++i)
                    if (ta[i] > 0.0) ga[i] += g[i];
            }
            return;
        }
        case OpKind::kSoftmax: {
            if (want(n.in0)) {
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                const Tensor& s = n.value;
                const int rows = s.dim(0), cols = s.dim(1);
                for (int r = 0; r < rows; ++r) {
                    double dot = 0.0;
                    for (int c = 0; c < cols; ++c) dot += g.at2(r, c) * s.at2(r, c);
                    for (int c = 0; c < cols; ++c) ga.at2(r, c) += s.at2(r, c) * (g.at2(r, c) - dot);
                }
            }
            return;
        }
        case OpKind::kLog: {
            if (want(n.in0)) {
                const Tensor& ta = nodes_[static_cast<size_t>(n.in0)].value;
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i] / ta[i];
            }
            return;
        }
        case OpKind::kReshape: {
            if (want(n.in0)) {
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                for (int64_t i = 0; i < g.numel(); ++i) ga[i] += g[i];
            }
            return;
        }
        case OpKind::kSliceCols: {
            if (want(n.in0)) {
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                const int rows = n.value.dim(0), cols = n.value.dim(1);
                for (int r = 0; r < rows; ++r)
                    for (int c = 0; c < cols; ++c) ga.at2(r, n.i0 + c) += g.at2(r, c);
            }
            return;
        }
        case OpKind::kConcatCols: {
            const int rows = n.value.dim(0);
            const int fa = n.i0;
            const int ftot = n.value.dim(1);
            if (want(n.in0)) {
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                for (int r = 0; r < rows; ++r)
                    for (int c = 0; c < fa; ++c) ga.at2(r, c) += g.at2(r, c);
            }
            if (want(n.in1)) {
                Tensor& gb = nodes_[static_cast<size_t>(n.in1)].grad;
                for (int r = 0; r < rows; ++r)
                    for (int c = fa; c < ftot; ++c) gb.at2(r, c - fa) += g.at2(r, c);
            }
            return;
        }
        case OpKind::kSliceLen: {
            if (want(n.in0)) {
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                const int bsz = n.value.dim(0), ch = n.value.dim(1), len = n.value.dim(2);
                for (int b = 0; b < bsz; ++b)
                    for (int c = 0; c < ch; ++c)
                        for (int l = 0; l < len; ++l) ga.at3(b, c, n.i0 + l) += g.at3(b, c, l);
            }
            return;
        }
        case OpKind::kUpsample1d: {
            if (want(n.in0)) {
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                const int bsz = ga.dim(0), ch = ga.dim(1), len = ga.dim(2);
                const int f = n.i0;
                for (int b = 0; b < bsz; ++b)
                    for (int c = 0; c < ch; ++c)
                        for (int l = 0; l < len; ++l) {
                            double acc = 0.0;
                            for (int r = 0; r < f; ++r) acc += g.at3(b, c, l * f + r);
                            ga.at3(b, c, l) += acc;
                        }
            }
            return;
        }
        case OpKind::kSum: {
            if (want(n.in0)) {
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                const double go = g[0];
                for (int64_t i = 0; i < ga.numel(); ++i) ga[i] += go;
            }
            return;
        }
        case OpKind::kMse: {
            const Tensor& ta = nodes_[static_cast<size_t>(n.in0)].value;
            const Tensor& tb = nodes_[static_cast<size_t>(n.in1)].value;
            const double go = g[0];
            const double inv = 2.0 / static_cast<double>(ta.numel());
            if (want(n.in0)) {
                Tensor& ga = nodes_[static_cast<size_t>(n.in0)].grad;
                for (int64_t i = 0; i < ta.numel(); ++i) ga[i] += go * inv * (ta[i] - tb[i]);
            }
            if (want(n.in1)) {
                Tensor& gb = nodes_[static_cast<size_t>(n.in1)].grad;
                for (int64_t i = 0; i < ta.numel(); ++i) gb[i] -= go * inv * (ta[i] - tb[i]);
            }
            return;
        }
    }
}

}  // namespace uwbrem::nn
