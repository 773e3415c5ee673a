#pragma once

// Central finite differences over every parameter entry: the independent
// oracle that reverse-mode gradients are checked against.

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "taycast/model.hpp"
#include "taycast/rng.hpp"
#include "taycast/train.hpp"

namespace taycast::testutil {

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::size_t checked = 0;
};

// Relative error with the denominator floored at 1e-3, so near-zero
// gradients are compared absolutely well above finite-difference noise.
template <class LossFn>
GradCheckResult finite_difference_check(Params& params, const Gradients& grads, LossFn&& loss,
                                        double h = 1e-5) {
    auto spans = param_spans(params);
    GradCheckResult result;
    for (std::size_t b = 0; b < spans.size(); ++b) {
        for (std::size_t i = 0; i < spans[b].size(); ++i) {
            const double orig = spans[b][i];
            spans[b][i] = orig + h;
            const double lp = loss(params);
            spans[b][i] = orig - h;
            const double lm = loss(params);
            spans[b][i] = orig;
            const double fd = (lp - lm) / (2.0 * h);
            const double ad = grads[b][i];
            const double denom = std::max({1e-3, std::abs(fd), std::abs(ad)});
            result.max_rel_err = std::max(result.max_rel_err, std::abs(fd - ad) / denom);
            ++result.checked;
        }
    }
    return result;
}

// Mean squared error over the window set via the plain predictors.
inline double mse_loss(const Params& params, const ModelSpec& spec, const WindowSet& ws) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ws.count(); ++i) {
        const double d = predict(params, spec, ws.window(i)) - ws.targets[i];
        acc += d * d;
    }
    return acc / double(ws.count());
}

// The same loss built on a tape, differentiated in reverse.
inline Gradients mse_gradients(const Params& params, const ModelSpec& spec, const WindowSet& ws,
                               double* loss_out = nullptr) {
    Tape tape;
    TapedModel model = tape_model(tape, params);
    std::vector<NodeId> preds;
    preds.reserve(ws.count());
    for (std::size_t i = 0; i < ws.count(); ++i) {
        preds.push_back(predict_node(tape, model, spec, ws.window(i)));
    }
    NodeId loss = tape.scale(tape.squared_error(tape.concat(preds), tape.constant(ws.targets)),
                             1.0 / double(ws.count()));
    if (loss_out != nullptr) *loss_out = tape.scalar(loss);
    tape.backward(loss);
    return collect_gradients(tape, model);
}

inline WindowSet random_windows(Rng& rng, std::size_t count, std::size_t input_len) {
    WindowSet ws;
    ws.input_len = input_len;
    ws.inputs = Matrix(count, input_len);
    ws.targets.resize(count);
    for (double& v : ws.inputs.data) v = rng.uniform(0.0, 1.0);
    for (double& v : ws.targets) v = rng.uniform(0.0, 1.0);
    return ws;
}

inline void randomize_params(Params& params, Rng& rng, double bound = 0.7) {
    for (auto span : param_spans(params)) {
        for (double& v : span) v = rng.uniform(-bound, bound);
    }
}

} // namespace taycast::testutil
