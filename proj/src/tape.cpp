#include "taycast/tape.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "taycast/errors.hpp"

namespace taycast {

NodeId Tape::push(Node n) {
    n.val_off = values_.size();
    values_.resize(values_.size() + std::size_t(n.rows) * n.cols, 0.0);
    nodes_.push_back(n);
    return static_cast<NodeId>(nodes_.size() - 1);
}

const Tape::Node& Tape::at(NodeId id) const {
    if (id >= nodes_.size()) throw ShapeError("tape: node id out of range");
    return nodes_[id];
}

void Tape::check_same_shape(const Node& a, const Node& b, const char* op) const {
    if (a.rows != b.rows || a.cols != b.cols) {
        throw ShapeError(std::string(op) + ": operand shapes differ (" +
                         std::to_string(a.rows) + "x" + std::to_string(a.cols) + " vs " +
                         std::to_string(b.rows) + "x" + std::to_string(b.cols) + ")");
    }
}

NodeId Tape::constant(std::span<const double> v) {
    Node n{Op::Constant};
    n.rows = static_cast<std::uint32_t>(v.size());
    NodeId id = push(n);
    std::memcpy(values_.data() + nodes_[id].val_off, v.data(), v.size() * sizeof(double));
    return id;
}

NodeId Tape::constant(double v) { return constant(std::span<const double>(&v, 1)); }

NodeId Tape::parameter(std::span<const double> v) {
    Node n{Op::Parameter};
    n.rows = static_cast<std::uint32_t>(v.size());
    NodeId id = push(n);
    std::memcpy(values_.data() + nodes_[id].val_off, v.data(), v.size() * sizeof(double));
    return id;
}

NodeId Tape::parameter(const Matrix& m) {
    Node n{Op::Parameter};
    n.rows = static_cast<std::uint32_t>(m.rows);
    n.cols = static_cast<std::uint32_t>(m.cols);
    NodeId id = push(n);
    std::memcpy(values_.data() + nodes_[id].val_off, m.data.data(), m.size() * sizeof(double));
    return id;
}

NodeId Tape::matvec(NodeId w, NodeId x) {
    const Node wn = at(w);
    const Node xn = at(x);
    if (xn.cols != 1) throw ShapeError("matvec: right operand must be a vector");
    if (wn.cols != xn.rows) {
        throw ShapeError("matvec: " + std::to_string(wn.rows) + "x" + std::to_string(wn.cols) +
                         " times vector of length " + std::to_string(xn.rows));
    }
    Node n{Op::MatVec};
    n.a = w;
    n.b = x;
    n.rows = wn.rows;
    NodeId id = push(n);
    kernel::matvec({values_.data() + wn.val_off, std::size_t(wn.rows) * wn.cols},
                   wn.rows, wn.cols,
                   {values_.data() + xn.val_off, xn.rows},
                   {values_.data() + nodes_[id].val_off, wn.rows});
    return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
    const Node an = at(a);
    const Node bn = at(b);
    check_same_shape(an, bn, "add");
    Node n{Op::Add};
    n.a = a;
    n.b = b;
    n.rows = an.rows;
    n.cols = an.cols;
    NodeId id = push(n);
    const std::size_t len = std::size_t(an.rows) * an.cols;
    kernel::add({values_.data() + an.val_off, len}, {values_.data() + bn.val_off, len},
                {values_.data() + nodes_[id].val_off, len});
    return id;
}

NodeId Tape::sigmoid(NodeId a) {
    const Node an = at(a);
    Node n{Op::Sigmoid};
    n.a = a;
    n.rows = an.rows;
    n.cols = an.cols;
    NodeId id = push(n);
    const std::size_t len = std::size_t(an.rows) * an.cols;
    kernel::sigmoid({values_.data() + an.val_off, len}, {values_.data() + nodes_[id].val_off, len});
    return id;
}

NodeId Tape::tanh(NodeId a) {
    const Node an = at(a);
    Node n{Op::Tanh};
    n.a = a;
    n.rows = an.rows;
    n.cols = an.cols;
    NodeId id = push(n);
    const std::size_t len = std::size_t(an.rows) * an.cols;
    kernel::tanh({values_.data() + an.val_off, len}, {values_.data() + nodes_[id].val_off, len});
    return id;
}

NodeId Tape::mul(NodeId a, NodeId b) {
    const Node an = at(a);
    const Node bn = at(b);
    check_same_shape(an, bn, "mul");
    Node n{Op::Mul};
    n.a = a;
    n.b = b;
    n.rows = an.rows;
    n.cols = an.cols;
    NodeId id = push(n);
    const std::size_t len = std::size_t(an.rows) * an.cols;
    const double* va = values_.data() + an.val_off;
    const double* vb = values_.data() + bn.val_off;
    double* out = values_.data() + nodes_[id].val_off;
    for (std::size_t i = 0; i < len; ++i) out[i] = va[i] * vb[i];
    return id;
}

NodeId Tape::scale(NodeId a, double factor) {
    const Node an = at(a);
    Node n{Op::Scale};
    n.a = a;
    n.coef = factor;
    n.rows = an.rows;
    n.cols = an.cols;
    NodeId id = push(n);
    const std::size_t len = std::size_t(an.rows) * an.cols;
    const double* va = values_.data() + an.val_off;
    double* out = values_.data() + nodes_[id].val_off;
    for (std::size_t i = 0; i < len; ++i) out[i] = factor * va[i];
    return id;
}

NodeId Tape::slice(NodeId a, std::size_t offset, std::size_t len) {
    const Node an = at(a);
    if (an.cols != 1) throw ShapeError("slice: operand must be a vector");
    if (offset + len > an.rows) {
        throw ShapeError("slice: range [" + std::to_string(offset) + ", " +
                         std::to_string(offset + len) + ") exceeds length " +
                         std::to_string(an.rows));
    }
    Node n{Op::Slice};
    n.a = a;
    n.src_off = static_cast<std::uint32_t>(offset);
    n.rows = static_cast<std::uint32_t>(len);
    NodeId id = push(n);
    std::memcpy(values_.data() + nodes_[id].val_off, values_.data() + an.val_off + offset,
                len * sizeof(double));
    return id;
}

NodeId Tape::concat(std::span<const NodeId> parts) {
    if (parts.empty()) throw ShapeError("concat: no operands");
    std::size_t total = 0;
    for (NodeId p : parts) {
        const Node& pn = at(p);
        if (pn.cols != 1) throw ShapeError("concat: operands must be vectors");
        total += pn.rows;
    }
    Node n{Op::Concat};
    n.arg_off = static_cast<std::uint32_t>(args_.size());
    n.arg_count = static_cast<std::uint32_t>(parts.size());
    n.rows = static_cast<std::uint32_t>(total);
    args_.insert(args_.end(), parts.begin(), parts.end());
    NodeId id = push(n);
    double* out = values_.data() + nodes_[id].val_off;
    for (NodeId p : parts) {
        const Node& pn = nodes_[p];
        std::memcpy(out, values_.data() + pn.val_off, pn.rows * sizeof(double));
        out += pn.rows;
    }
    return id;
}

NodeId Tape::squared_error(NodeId pred, NodeId target) {
    const Node pn = at(pred);
    const Node tn = at(target);
    check_same_shape(pn, tn, "squared_error");
    Node n{Op::SquaredError};
    n.a = pred;
    n.b = target;
    n.rows = 1;
    NodeId id = push(n);
    const std::size_t len = std::size_t(pn.rows) * pn.cols;
    const double* vp = values_.data() + pn.val_off;
    const double* vt = values_.data() + tn.val_off;
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double d = vp[i] - vt[i];
        acc += d * d;
    }
    values_[nodes_[id].val_off] = acc;
    return id;
}

std::span<const double> Tape::value(NodeId id) const {
    const Node& n = at(id);
    return {values_.data() + n.val_off, std::size_t(n.rows) * n.cols};
}

double Tape::scalar(NodeId id) const {
    const Node& n = at(id);
    if (std::size_t(n.rows) * n.cols != 1) throw ShapeError("scalar: node is not scalar");
    return values_[n.val_off];
}

std::size_t Tape::size(NodeId id) const {
    const Node& n = at(id);
    return std::size_t(n.rows) * n.cols;
}

std::span<const double> Tape::adjoint(NodeId id) const {
    if (!has_adjoints_) throw ShapeError("adjoint: backward() has not run");
    const Node& n = at(id);
    return {adjoints_.data() + n.val_off, std::size_t(n.rows) * n.cols};
}

void Tape::backward(NodeId loss) {
    const Node& ln = at(loss);
    if (std::size_t(ln.rows) * ln.cols != 1) {
        throw ShapeError("backward: loss node must be scalar");
    }
    adjoints_.assign(values_.size(), 0.0);
    adjoints_[ln.val_off] = 1.0;

    for (std::size_t i = nodes_.size(); i-- > 0;) {
        const Node& n = nodes_[i];
        const std::size_t len = std::size_t(n.rows) * n.cols;
        const double* g = adjoints_.data() + n.val_off;
        switch (n.op) {
        case Op::Constant:
        case Op::Parameter:
            break;
        case Op::MatVec: {
            const Node& wn = nodes_[n.a];
            const Node& xn = nodes_[n.b];
            double* gw = adjoints_.data() + wn.val_off;
            double* gx = adjoints_.data() + xn.val_off;
            const double* w = values_.data() + wn.val_off;
            const double* x = values_.data() + xn.val_off;
            for (std::uint32_t r = 0; r < wn.rows; ++r) {
                const double gr = g[r];
                if (gr == 0.0) continue;
                const double* wrow = w + std::size_t(r) * wn.cols;
                double* gwrow = gw + std::size_t(r) * wn.cols;
                for (std::uint32_t c = 0; c < wn.cols; ++c) {
                    gwrow[c] += gr * x[c];
                    gx[c] += gr * wrow[c];
                }
            }
            break;
        }
        case Op::Add: {
            double* ga = adjoints_.data() + nodes_[n.a].val_off;
            double* gb = adjoints_.data() + nodes_[n.b].val_off;
            for (std::size_t k = 0; k < len; ++k) {
                ga[k] += g[k];
                gb[k] += g[k];
            }
            break;
        }
        case Op::Sigmoid: {
            double* ga = adjoints_.data() + nodes_[n.a].val_off;
            const double* y = values_.data() + n.val_off;
            for (std::size_t k = 0; k < len; ++k) ga[k] += g[k] * y[k] * (1.0 - y[k]);
            break;
        }
        case Op::Tanh: {
            double* ga = adjoints_.data() + nodes_[n.a].val_off;
            const double* y = values_.data() + n.val_off;
            for (std::size_t k = 0; k < len; ++k) ga[k] += g[k] * (1.0 - y[k] * y[k]);
            break;
        }
        case Op::Mul: {
            double* ga = adjoints_.data() + nodes_[n.a].val_off;
            double* gb = adjoints_.data() + nodes_[n.b].val_off;
            const double* va = values_.data() + nodes_[n.a].val_off;
            const double* vb = values_.data() + nodes_[n.b].val_off;
            for (std::size_t k = 0; k < len; ++k) {
                ga[k] += g[k] * vb[k];
                gb[k] += g[k] * va[k];
            }
            break;
        }
        case Op::Scale: {
            double* ga = adjoints_.data() + nodes_[n.a].val_off;
            for (std::size_t k = 0; k < len; ++k) ga[k] += n.coef * g[k];
            break;
        }
        case Op::Slice: {
            double* ga = adjoints_.data() + nodes_[n.a].val_off + n.src_off;
            for (std::size_t k = 0; k < len; ++k) ga[k] += g[k];
            break;
        }
        case Op::Concat: {
            const double* gsrc = g;
            for (std::uint32_t p = 0; p < n.arg_count; ++p) {
                const Node& pn = nodes_[args_[n.arg_off + p]];
                double* gp = adjoints_.data() + pn.val_off;
                for (std::uint32_t k = 0; k < pn.rows; ++k) gp[k] += gsrc[k];
                gsrc += pn.rows;
            }
            break;
        }
        case Op::SquaredError: {
            const Node& pn = nodes_[n.a];
            const Node& tn = nodes_[n.b];
            const double gs = g[0];
            double* gp = adjoints_.data() + pn.val_off;
            double* gt = adjoints_.data() + tn.val_off;
            const double* vp = values_.data() + pn.val_off;
            const double* vt = values_.data() + tn.val_off;
            const std::size_t plen = std::size_t(pn.rows) * pn.cols;
            for (std::size_t k = 0; k < plen; ++k) {
                const double d = 2.0 * (vp[k] - vt[k]) * gs;
                gp[k] += d;
                gt[k] -= d;
            }
            break;
        }
        }
    }
    has_adjoints_ = true;
}

void Tape::reset() {
    nodes_.clear();
    values_.clear();
    adjoints_.clear();
    args_.clear();
    has_adjoints_ = false;
}

} // namespace taycast
