#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "taycast/linalg.hpp"

namespace taycast {

using NodeId = std::uint32_t;

// Reverse-mode automatic differentiation over a flat tape.
//
// Nodes are appended in evaluation order with forward values computed
// eagerly, so the tape is topologically ordered by construction.
// backward() runs one reverse sweep and accumulates an adjoint for every
// node, including parameter leaves. Values and adjoints live in two flat
// arenas; reset() drops all nodes but keeps the arena capacity, which lets
// a training loop reuse one tape across mini-batches without reallocating.
//
// Shapes: scalars and vectors are (n x 1); only parameter leaves may be
// matrices, which appear solely as the left operand of matvec().
class Tape {
public:
    NodeId constant(std::span<const double> v);
    NodeId constant(double v);
    NodeId parameter(std::span<const double> v);
    NodeId parameter(const Matrix& m);

    NodeId matvec(NodeId w, NodeId x);
    NodeId add(NodeId a, NodeId b);
    NodeId sigmoid(NodeId a);
    NodeId tanh(NodeId a);
    NodeId mul(NodeId a, NodeId b); // elementwise
    NodeId scale(NodeId a, double factor);
    NodeId slice(NodeId a, std::size_t offset, std::size_t len);
    NodeId concat(std::span<const NodeId> parts);
    NodeId squared_error(NodeId pred, NodeId target); // sum((pred-target)^2), scalar

    std::span<const double> value(NodeId id) const;
    double scalar(NodeId id) const;
    std::size_t size(NodeId id) const;
    std::size_t node_count() const { return nodes_.size(); }

    // Seeds the scalar loss node with 1 and sweeps the tape in reverse.
    // Throws ShapeError if the loss node is not scalar. May be called
    // again after more nodes are appended; adjoints are recomputed.
    void backward(NodeId loss);

    // Adjoint of a node; only valid after backward().
    std::span<const double> adjoint(NodeId id) const;

    void reset();

private:
    enum class Op : std::uint8_t {
        Constant,
        Parameter,
        MatVec,
        Add,
        Sigmoid,
        Tanh,
        Mul,
        Scale,
        Slice,
        Concat,
        SquaredError,
    };

    struct Node {
        Op op;
        NodeId a = 0;
        NodeId b = 0;
        std::uint32_t arg_off = 0;   // Concat operand list in args_
        std::uint32_t arg_count = 0;
        std::uint32_t src_off = 0;   // Slice source offset
        double coef = 0.0;           // Scale factor
        std::uint32_t rows = 0;
        std::uint32_t cols = 1;
        std::size_t val_off = 0;
    };

    NodeId push(Node n);
    const Node& at(NodeId id) const;
    void check_same_shape(const Node& a, const Node& b, const char* op) const;

    std::vector<Node> nodes_;
    std::vector<double> values_;
    std::vector<double> adjoints_;
    std::vector<NodeId> args_;
    bool has_adjoints_ = false;
};

} // namespace taycast
