#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "taycast/linalg.hpp"
#include "taycast/tape.hpp"

namespace taycast {

// Weights of the shared one-hidden-layer backbone:
//   out = w2 * sigmoid(w1 * in + b1) + b2
// Prediction heads are rows of the output layer.
struct MlpParams {
    Matrix w1; // hidden x input
    Vector b1; // hidden
    Matrix w2; // output x hidden
    Vector b2; // output

    std::size_t input_len() const { return w1.cols; }
    std::size_t hidden_size() const { return w1.rows; }
    std::size_t output_len() const { return w2.rows; }

    // Parameter blocks in a fixed order (w1, b1, w2, b2); gradients and
    // optimizer state follow the same order.
    std::vector<std::span<double>> spans();
    std::vector<std::span<const double>> spans() const;
};

// Uniform Glorot-style initialization: each layer's weights are drawn
// uniformly in +-sqrt(6 / (fan_in + fan_out)); biases start at zero.
// Draw order is w1 row-major then w2 row-major, from Rng(seed).
MlpParams init_mlp(std::uint64_t seed, std::size_t input_len, std::size_t hidden_size,
                   std::size_t output_len);

// Plain forward pass. Throws ShapeError on a length mismatch and
// InputError if the input contains non-finite values.
Vector mlp_forward(const MlpParams& params, std::span<const double> input);

// Node ids of the parameters registered on a tape.
struct MlpLeaves {
    NodeId w1, b1, w2, b2;
};

MlpLeaves tape_mlp(Tape& tape, const MlpParams& params);

// Forward pass recorded on the tape; same arithmetic as the plain version.
NodeId mlp_forward(Tape& tape, const MlpLeaves& leaves, NodeId input);

// Zeroes the output layer (w2, b2) so every head outputs exactly 0.
void zero_heads(MlpParams& params);

} // namespace taycast
