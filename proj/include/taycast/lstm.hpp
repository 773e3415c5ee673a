#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "taycast/linalg.hpp"
#include "taycast/tape.hpp"

namespace taycast {

// One LSTM gate: contribution = wx * x_t + wh * h + b.
struct LstmGate {
    Matrix wx; // hidden x 1
    Matrix wh; // hidden x hidden
    Vector b;  // hidden
};

// Single-layer LSTM over a scalar sequence with a linear readout of the
// final hidden state. Hidden and cell states start at zero. Parameter
// block order in spans(): input, forget, cell(candidate), output gates
// (wx, wh, b each), then the readout (w_out, b_out).
struct LstmParams {
    LstmGate input, forget, cell, output;
    Matrix w_out; // 1 x hidden
    Vector b_out; // 1

    std::size_t hidden_size() const { return input.wx.rows; }

    std::vector<std::span<double>> spans();
    std::vector<std::span<const double>> spans() const;
};

// Glorot-style uniform init per weight matrix, zero biases; draw order
// matches spans().
LstmParams init_lstm(std::uint64_t seed, std::size_t hidden_size);

// Plain forward pass over the window. Throws InputError on non-finite
// input and ShapeError on an empty window.
double lstm_forward(const LstmParams& params, std::span<const double> window);

struct LstmLeaves {
    NodeId wx_i, wh_i, b_i;
    NodeId wx_f, wh_f, b_f;
    NodeId wx_c, wh_c, b_c;
    NodeId wx_o, wh_o, b_o;
    NodeId w_out, b_out;
};

LstmLeaves tape_lstm(Tape& tape, const LstmParams& params);

// Taped forward pass; window elements enter as constants.
NodeId lstm_forward(Tape& tape, const LstmLeaves& leaves, std::span<const double> window);

} // namespace taycast
