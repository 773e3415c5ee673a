#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "taycast/errors.hpp"
#include "taycast/rng.hpp"
#include "taycast/tape.hpp"

using namespace taycast;

namespace {

// Finite-difference adjoint of one input entry of a scalar-valued graph.
template <class BuildFn>
double fd_input_grad(BuildFn&& build, Vector input, std::size_t index, double h = 1e-6) {
    input[index] += h;
    const double up = build(input);
    input[index] -= 2.0 * h;
    const double down = build(input);
    return (up - down) / (2.0 * h);
}

} // namespace

TEST_CASE("forward values of the primitives") {
    Tape tape;
    Matrix w(2, 3);
    w.data = {1, 2, 3, 4, 5, 6};
    NodeId wn = tape.parameter(w);
    NodeId x = tape.constant(Vector{1, 0, -1});
    NodeId y = tape.matvec(wn, x);
    CHECK(tape.value(y)[0] == doctest::Approx(-2.0));
    CHECK(tape.value(y)[1] == doctest::Approx(-2.0));

    NodeId b = tape.constant(Vector{10, 20});
    NodeId s = tape.add(y, b);
    CHECK(tape.value(s)[0] == doctest::Approx(8.0));
    CHECK(tape.value(s)[1] == doctest::Approx(18.0));

    NodeId sig = tape.sigmoid(tape.constant(0.0));
    CHECK(tape.scalar(sig) == doctest::Approx(0.5));

    NodeId th = tape.tanh(tape.constant(0.0));
    CHECK(tape.scalar(th) == doctest::Approx(0.0));

    NodeId prod = tape.mul(tape.constant(Vector{2, 3}), tape.constant(Vector{4, 5}));
    CHECK(tape.value(prod)[0] == doctest::Approx(8.0));
    CHECK(tape.value(prod)[1] == doctest::Approx(15.0));

    NodeId sc = tape.scale(tape.constant(Vector{1, -2}), -3.0);
    CHECK(tape.value(sc)[0] == doctest::Approx(-3.0));
    CHECK(tape.value(sc)[1] == doctest::Approx(6.0));

    NodeId sl = tape.slice(tape.constant(Vector{7, 8, 9}), 1, 2);
    CHECK(tape.value(sl)[0] == doctest::Approx(8.0));

    const NodeId parts[] = {sl, sc};
    NodeId cat = tape.concat(parts);
    CHECK(tape.size(cat) == 4);
    CHECK(tape.value(cat)[3] == doctest::Approx(6.0));

    NodeId se = tape.squared_error(tape.constant(Vector{1, 2}), tape.constant(Vector{0, 4}));
    CHECK(tape.scalar(se) == doctest::Approx(5.0));
}

TEST_CASE("shape violations throw") {
    Tape tape;
    NodeId a = tape.constant(Vector{1, 2, 3});
    NodeId b = tape.constant(Vector{1, 2});
    CHECK_THROWS_AS(tape.add(a, b), ShapeError);
    CHECK_THROWS_AS(tape.mul(a, b), ShapeError);
    CHECK_THROWS_AS(tape.squared_error(a, b), ShapeError);
    CHECK_THROWS_AS(tape.slice(a, 2, 2), ShapeError);

    Matrix w(2, 2, 1.0);
    NodeId wn = tape.parameter(w);
    CHECK_THROWS_AS(tape.matvec(wn, a), ShapeError);

    CHECK_THROWS_AS(tape.backward(a), ShapeError); // loss must be scalar
}

TEST_CASE("zero network with zero target has zero gradients") {
    Tape tape;
    Matrix w(2, 3, 0.0);
    NodeId wn = tape.parameter(w);
    NodeId x = tape.constant(Vector{1, 2, 3});
    NodeId pred = tape.matvec(wn, x);
    NodeId loss = tape.squared_error(pred, tape.constant(Vector{0, 0}));
    tape.backward(loss);
    for (double g : tape.adjoint(wn)) CHECK(g == 0.0);
}

TEST_CASE("scaling the loss scales every gradient") {
    auto build = [](Tape& tape, NodeId& wn, double factor) {
        Matrix w(1, 2);
        w.data = {0.3, -0.8};
        wn = tape.parameter(w);
        NodeId x = tape.constant(Vector{1.5, 2.5});
        NodeId pred = tape.sigmoid(tape.matvec(wn, x));
        NodeId loss = tape.squared_error(pred, tape.constant(Vector{1.0}));
        return tape.scale(loss, factor);
    };
    Tape t1, t2;
    NodeId w1, w2;
    NodeId l1 = build(t1, w1, 1.0);
    NodeId l2 = build(t2, w2, 2.0);
    t1.backward(l1);
    t2.backward(l2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(t2.adjoint(w2)[i] == doctest::Approx(2.0 * t1.adjoint(w1)[i]).epsilon(1e-12));
    }
}

TEST_CASE("every primitive matches finite differences through a composite graph") {
    // One graph exercising matvec, add, sigmoid, tanh, mul, scale, slice,
    // concat, and squared_error, differentiated with respect to the input.
    auto value = [](const Vector& input) {
        Tape tape;
        NodeId x = tape.parameter(input);
        Matrix w(3, 4);
        double v = -0.6;
        for (double& e : w.data) {
            e = v;
            v += 0.13;
        }
        NodeId wx = tape.matvec(tape.parameter(w), x);
        NodeId sig = tape.sigmoid(tape.slice(wx, 0, 2));
        NodeId th = tape.tanh(tape.slice(wx, 1, 2));
        NodeId prod = tape.mul(sig, th);
        NodeId scaled = tape.scale(tape.add(prod, sig), 1.7);
        const NodeId parts[] = {scaled, prod};
        NodeId cat = tape.concat(parts);
        NodeId loss = tape.squared_error(cat, tape.constant(Vector{0.1, -0.2, 0.3, 0.4}));
        return std::pair<Tape, NodeId>(std::move(tape), loss);
    };

    const Vector input = {0.4, -0.9, 1.2, 0.05};
    auto [tape, loss] = value(input);
    NodeId x_node = 0; // the first pushed node is the input parameter
    tape.backward(loss);
    auto grads = tape.adjoint(x_node);

    auto scalar_of = [&value](const Vector& in) {
        auto [t, l] = value(in);
        return t.scalar(l);
    };
    for (std::size_t i = 0; i < input.size(); ++i) {
        const double fd = fd_input_grad(scalar_of, input, i);
        CHECK(grads[i] == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("reset clears nodes and allows reuse") {
    Tape tape;
    NodeId a = tape.constant(Vector{1, 2});
    NodeId loss = tape.squared_error(a, tape.constant(Vector{0, 0}));
    tape.backward(loss);
    CHECK(tape.node_count() == 3);
    tape.reset();
    CHECK(tape.node_count() == 0);
    NodeId b = tape.constant(5.0);
    CHECK(tape.scalar(b) == doctest::Approx(5.0));
    CHECK_THROWS_AS(tape.adjoint(b), ShapeError); // adjoints gone after reset
}
