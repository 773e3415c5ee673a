#include "taycast/lstm.hpp"

#include <cmath>

#include "taycast/errors.hpp"
#include "taycast/rng.hpp"

namespace taycast {

std::vector<std::span<double>> LstmParams::spans() {
    std::vector<std::span<double>> out;
    for (LstmGate* g : {&input, &forget, &cell, &output}) {
        out.emplace_back(g->wx.data);
        out.emplace_back(g->wh.data);
        out.emplace_back(g->b);
    }
    out.emplace_back(w_out.data);
    out.emplace_back(b_out);
    return out;
}

std::vector<std::span<const double>> LstmParams::spans() const {
    std::vector<std::span<const double>> out;
    for (const LstmGate* g : {&input, &forget, &cell, &output}) {
        out.emplace_back(g->wx.data);
        out.emplace_back(g->wh.data);
        out.emplace_back(g->b);
    }
    out.emplace_back(w_out.data);
    out.emplace_back(b_out);
    return out;
}

LstmParams init_lstm(std::uint64_t seed, std::size_t hidden_size) {
    if (hidden_size < 1) throw ConfigError("init_lstm: hidden size must be >= 1");
    LstmParams p;
    Rng rng(seed);
    const double bx = std::sqrt(6.0 / double(1 + hidden_size));
    const double bh = std::sqrt(6.0 / double(2 * hidden_size));
    for (LstmGate* g : {&p.input, &p.forget, &p.cell, &p.output}) {
        g->wx = Matrix(hidden_size, 1);
        g->wh = Matrix(hidden_size, hidden_size);
        g->b = Vector(hidden_size, 0.0);
        for (double& w : g->wx.data) w = rng.uniform(-bx, bx);
        for (double& w : g->wh.data) w = rng.uniform(-bh, bh);
    }
    p.w_out = Matrix(1, hidden_size);
    p.b_out = Vector(1, 0.0);
    const double bo = std::sqrt(6.0 / double(hidden_size + 1));
    for (double& w : p.w_out.data) w = rng.uniform(-bo, bo);
    return p;
}

namespace {

// gate = act(wx * x + wh * h + b), written into out.
void gate_forward(const LstmGate& g, double x, std::span<const double> h, bool use_tanh,
                  std::span<double> out) {
    const std::size_t n = g.b.size();
    Vector acc(n);
    kernel::matvec(g.wx.data, g.wx.rows, g.wx.cols, std::span<const double>(&x, 1), acc);
    Vector hterm(n);
    kernel::matvec(g.wh.data, g.wh.rows, g.wh.cols, h, hterm);
    kernel::add(acc, hterm, acc);
    kernel::add(acc, g.b, acc);
    if (use_tanh) {
        kernel::tanh(acc, out);
    } else {
        kernel::sigmoid(acc, out);
    }
}

} // namespace

double lstm_forward(const LstmParams& params, std::span<const double> window) {
    if (window.empty()) throw ShapeError("lstm_forward: empty window");
    if (!all_finite(window)) throw InputError("lstm_forward: non-finite input");

    const std::size_t n = params.hidden_size();
    Vector h(n, 0.0), c(n, 0.0);
    Vector ig(n), fg(n), cand(n), og(n), ctanh(n);
    for (double x : window) {
        gate_forward(params.input, x, h, false, ig);
        gate_forward(params.forget, x, h, false, fg);
        gate_forward(params.cell, x, h, true, cand);
        gate_forward(params.output, x, h, false, og);
        for (std::size_t i = 0; i < n; ++i) c[i] = fg[i] * c[i] + ig[i] * cand[i];
        kernel::tanh(c, ctanh);
        for (std::size_t i = 0; i < n; ++i) h[i] = og[i] * ctanh[i];
    }
    Vector out(1);
    kernel::matvec(params.w_out.data, 1, n, h, out);
    return out[0] + params.b_out[0];
}

LstmLeaves tape_lstm(Tape& tape, const LstmParams& params) {
    LstmLeaves l;
    l.wx_i = tape.parameter(params.input.wx);
    l.wh_i = tape.parameter(params.input.wh);
    l.b_i = tape.parameter(params.input.b);
    l.wx_f = tape.parameter(params.forget.wx);
    l.wh_f = tape.parameter(params.forget.wh);
    l.b_f = tape.parameter(params.forget.b);
    l.wx_c = tape.parameter(params.cell.wx);
    l.wh_c = tape.parameter(params.cell.wh);
    l.b_c = tape.parameter(params.cell.b);
    l.wx_o = tape.parameter(params.output.wx);
    l.wh_o = tape.parameter(params.output.wh);
    l.b_o = tape.parameter(params.output.b);
    l.w_out = tape.parameter(params.w_out);
    l.b_out = tape.parameter(params.b_out);
    return l;
}

NodeId lstm_forward(Tape& tape, const LstmLeaves& leaves, std::span<const double> window) {
    if (window.empty()) throw ShapeError("lstm_forward: empty window");
    if (!all_finite(window)) throw InputError("lstm_forward: non-finite input");

    const std::size_t n = tape.size(leaves.b_i);
    NodeId h = tape.constant(Vector(n, 0.0));
    NodeId c = tape.constant(Vector(n, 0.0));

    auto gate = [&](NodeId wx, NodeId wh, NodeId b, NodeId xt, NodeId hprev) {
        NodeId acc = tape.add(tape.matvec(wx, xt), tape.matvec(wh, hprev));
        return tape.add(acc, b);
    };

    for (double x : window) {
        NodeId xt = tape.constant(x);
        NodeId ig = tape.sigmoid(gate(leaves.wx_i, leaves.wh_i, leaves.b_i, xt, h));
        NodeId fg = tape.sigmoid(gate(leaves.wx_f, leaves.wh_f, leaves.b_f, xt, h));
        NodeId cand = tape.tanh(gate(leaves.wx_c, leaves.wh_c, leaves.b_c, xt, h));
        NodeId og = tape.sigmoid(gate(leaves.wx_o, leaves.wh_o, leaves.b_o, xt, h));
        c = tape.add(tape.mul(fg, c), tape.mul(ig, cand));
        h = tape.mul(og, tape.tanh(c));
    }
    return tape.add(tape.matvec(leaves.w_out, h), leaves.b_out);
}

} // namespace taycast
