#include "taycast/model.hpp"

#include <cmath>
#include <string>

#include "taycast/errors.hpp"

namespace taycast {

bool is_recursive(ModelKind kind) {
    switch (kind) {
    case ModelKind::RecursiveResidual:
    case ModelKind::RecursiveTaylor2:
    case ModelKind::RecursiveTaylor3:
        return true;
    default:
        return false;
    }
}

int taylor_order(ModelKind kind) {
    switch (kind) {
    case ModelKind::Direct:
    case ModelKind::Lstm:
        return 0;
    case ModelKind::Residual:
    case ModelKind::Taylor1:
    case ModelKind::RecursiveResidual:
        return 1;
    case ModelKind::Taylor2:
    case ModelKind::RecursiveTaylor2:
        return 2;
    case ModelKind::Taylor3:
    case ModelKind::RecursiveTaylor3:
        return 3;
    }
    return 0;
}

const char* to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::Direct: return "direct";
    case ModelKind::Residual: return "residual";
    case ModelKind::Taylor1: return "taylor1";
    case ModelKind::Taylor2: return "taylor2";
    case ModelKind::Taylor3: return "taylor3";
    case ModelKind::RecursiveResidual: return "recursive_residual";
    case ModelKind::RecursiveTaylor2: return "recursive_taylor2";
    case ModelKind::RecursiveTaylor3: return "recursive_taylor3";
    case ModelKind::Lstm: return "lstm";
    }
    return "unknown";
}

std::optional<ModelKind> model_kind_from_string(std::string_view name) {
    for (ModelKind k : kAllModelKinds) {
        if (name == to_string(k)) return k;
    }
    return std::nullopt;
}

std::size_t ModelSpec::output_len() const {
    if (kind == ModelKind::Lstm) return 1;
    const int order = taylor_order(kind);
    const std::size_t heads = order == 0 ? 1 : std::size_t(order);
    return is_recursive(kind) ? heads * input_len : heads;
}

void ModelSpec::validate() const {
    if (input_len < 1) throw ConfigError("model spec: input_len must be >= 1");
    if (hidden_size < 1) throw ConfigError("model spec: hidden_size must be >= 1");
    if (!(delta_t > 0.0) || !std::isfinite(delta_t)) {
        throw ConfigError("model spec: delta_t must be finite and positive");
    }
    if (is_recursive(kind)) {
        if (substeps < 2) throw ConfigError("model spec: recursive kinds need substeps >= 2");
    } else if (substeps != 1) {
        throw ConfigError("model spec: non-recursive kinds fix substeps = 1");
    }
}

Params init_params(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    if (spec.kind == ModelKind::Lstm) return init_lstm(seed, spec.hidden_size);
    return init_mlp(seed, spec.input_len, spec.hidden_size, spec.output_len());
}

std::vector<std::span<double>> param_spans(Params& params) {
    return std::visit([](auto& p) { return p.spans(); }, params);
}

std::vector<std::span<const double>> param_spans(const Params& params) {
    return std::visit([](const auto& p) { return p.spans(); }, params);
}

void zero_heads(Params& params) {
    if (auto* mlp = std::get_if<MlpParams>(&params)) {
        zero_heads(*mlp);
        return;
    }
    throw InputError("zero_heads: only MLP-backed model kinds have heads");
}

namespace {

const MlpParams& as_mlp(const Params& params) {
    if (const auto* mlp = std::get_if<MlpParams>(&params)) return *mlp;
    throw ShapeError("predict: parameters are not MLP weights");
}

void check_window(const MlpParams& params, std::span<const double> window) {
    if (window.size() != params.input_len()) {
        throw ShapeError("predict: window length " + std::to_string(window.size()) +
                         " does not match input length " + std::to_string(params.input_len()));
    }
}

// dt, dt^2/2, dt^3/6
void taylor_coefs(double step, double out[3]) {
    out[0] = step;
    out[1] = step * step / 2.0;
    out[2] = step * step * step / 6.0;
}

} // namespace

double predict_direct(const MlpParams& params, std::span<const double> window) {
    check_window(params, window);
    if (params.output_len() != 1) throw ShapeError("predict_direct: expected a single head");
    return mlp_forward(params, window)[0];
}

double predict_residual(const MlpParams& params, std::span<const double> window) {
    check_window(params, window);
    if (params.output_len() != 1) throw ShapeError("predict_residual: expected a single head");
    return window.back() + mlp_forward(params, window)[0];
}

double predict_taylor(const MlpParams& params, std::span<const double> window, double delta_t,
                      int order) {
    check_window(params, window);
    if (order < 1 || order > 3) throw ConfigError("predict_taylor: order must be 1, 2, or 3");
    if (!(delta_t > 0.0) || !std::isfinite(delta_t)) {
        throw ConfigError("predict_taylor: delta_t must be finite and positive");
    }
    if (params.output_len() != std::size_t(order)) {
        throw ShapeError("predict_taylor: network has " + std::to_string(params.output_len()) +
                         " heads for order " + std::to_string(order));
    }
    const Vector heads = mlp_forward(params, window);
    double coef[3];
    taylor_coefs(delta_t, coef);
    double pred = window.back();
    for (int o = 0; o < order; ++o) pred += coef[o] * heads[o];
    return pred;
}

Vector recursive_rollout(const DerivativeField& field, std::span<const double> window,
                         double delta_t, int substeps, int order) {
    if (substeps < 1) throw ConfigError("recursive_rollout: substeps must be >= 1");
    if (order < 1 || order > 3) throw ConfigError("recursive_rollout: order must be 1, 2, or 3");
    Vector state(window.begin(), window.end());
    double coef[3];
    taylor_coefs(delta_t / double(substeps), coef);
    for (int k = 0; k < substeps; ++k) {
        const std::vector<Vector> derivs = field(state);
        if (derivs.size() < std::size_t(order)) {
            throw ShapeError("recursive_rollout: field provides " +
                             std::to_string(derivs.size()) + " orders, need " +
                             std::to_string(order));
        }
        for (int o = 0; o < order; ++o) {
            if (derivs[o].size() != state.size()) {
                throw ShapeError("recursive_rollout: field output length " +
                                 std::to_string(derivs[o].size()) + " for state length " +
                                 std::to_string(state.size()));
            }
            for (std::size_t i = 0; i < state.size(); ++i) {
                state[i] = state[i] + coef[o] * derivs[o][i];
            }
        }
        if (!all_finite(state)) {
            throw DivergenceError("recursive_rollout: non-finite state at substep " +
                                  std::to_string(k + 1) + " of " + std::to_string(substeps));
        }
    }
    return state;
}

DerivativeField make_network_field(const MlpParams& params, const ModelSpec& spec) {
    const int order = std::max(1, taylor_order(spec.kind));
    const std::size_t d = spec.input_len;
    return [params, order, d](std::span<const double> state) {
        const Vector out = mlp_forward(params, state);
        std::vector<Vector> derivs(order);
        for (int o = 0; o < order; ++o) {
            derivs[o].assign(out.begin() + o * d, out.begin() + (o + 1) * d);
        }
        return derivs;
    };
}

double predict_recursive(const MlpParams& params, const ModelSpec& spec,
                         std::span<const double> window) {
    if (!is_recursive(spec.kind)) {
        throw ConfigError("predict_recursive: model kind is not recursive");
    }
    check_window(params, window);
    const int order = taylor_order(spec.kind);
    if (params.output_len() != spec.output_len()) {
        throw ShapeError("predict_recursive: network has " + std::to_string(params.output_len()) +
                         " outputs, spec needs " + std::to_string(spec.output_len()));
    }
    const std::size_t d = spec.input_len;
    // Same reshape as make_network_field without copying the weights.
    DerivativeField field = [&params, order, d](std::span<const double> state) {
        const Vector out = mlp_forward(params, state);
        std::vector<Vector> derivs(order);
        for (int o = 0; o < order; ++o) {
            derivs[o].assign(out.begin() + o * d, out.begin() + (o + 1) * d);
        }
        return derivs;
    };
    const Vector final_state = recursive_rollout(field, window, spec.delta_t, spec.substeps, order);
    return final_state.back();
}

double predict(const Params& params, const ModelSpec& spec, std::span<const double> window) {
    switch (spec.kind) {
    case ModelKind::Direct:
        return predict_direct(as_mlp(params), window);
    case ModelKind::Residual:
        return predict_residual(as_mlp(params), window);
    case ModelKind::Taylor1:
    case ModelKind::Taylor2:
    case ModelKind::Taylor3:
        return predict_taylor(as_mlp(params), window, spec.delta_t, taylor_order(spec.kind));
    case ModelKind::RecursiveResidual:
    case ModelKind::RecursiveTaylor2:
    case ModelKind::RecursiveTaylor3:
        return predict_recursive(as_mlp(params), spec, window);
    case ModelKind::Lstm:
        if (const auto* lstm = std::get_if<LstmParams>(&params)) {
            return lstm_forward(*lstm, window);
        }
        throw ShapeError("predict: parameters are not LSTM weights");
    }
    throw ConfigError("predict: unknown model kind");
}

TapedModel tape_model(Tape& tape, const Params& params) {
    if (const auto* mlp = std::get_if<MlpParams>(&params)) return tape_mlp(tape, *mlp);
    return tape_lstm(tape, std::get<LstmParams>(params));
}

namespace {

NodeId taylor_node(Tape& tape, const MlpLeaves& leaves, std::span<const double> window,
                   double delta_t, int order) {
    NodeId wnode = tape.constant(window);
    NodeId heads = mlp_forward(tape, leaves, wnode);
    if (tape.size(heads) != std::size_t(order)) {
        throw ShapeError("predict_node: network has " + std::to_string(tape.size(heads)) +
                         " heads for order " + std::to_string(order));
    }
    double coef[3];
    taylor_coefs(delta_t, coef);
    NodeId pred = tape.slice(wnode, window.size() - 1, 1);
    for (int o = 0; o < order; ++o) {
        pred = tape.add(pred, tape.scale(tape.slice(heads, o, 1), coef[o]));
    }
    return pred;
}

NodeId recursive_node(Tape& tape, const MlpLeaves& leaves, const ModelSpec& spec,
                      std::span<const double> window) {
    const int order = taylor_order(spec.kind);
    const std::size_t d = spec.input_len;
    double coef[3];
    taylor_coefs(spec.delta_t / double(spec.substeps), coef);
    NodeId state = tape.constant(window);
    for (int k = 0; k < spec.substeps; ++k) {
        NodeId out = mlp_forward(tape, leaves, state);
        if (tape.size(out) != spec.output_len()) {
            throw ShapeError("predict_node: network has " + std::to_string(tape.size(out)) +
                             " outputs, spec needs " + std::to_string(spec.output_len()));
        }
        for (int o = 0; o < order; ++o) {
            state = tape.add(state, tape.scale(tape.slice(out, o * d, d), coef[o]));
        }
    }
    return tape.slice(state, d - 1, 1);
}

} // namespace

NodeId predict_node(Tape& tape, const TapedModel& model, const ModelSpec& spec,
                    std::span<const double> window) {
    if (window.size() != spec.input_len) {
        throw ShapeError("predict_node: window length " + std::to_string(window.size()) +
                         " does not match input length " + std::to_string(spec.input_len));
    }
    if (spec.kind == ModelKind::Lstm) {
        if (const auto* leaves = std::get_if<LstmLeaves>(&model)) {
            return lstm_forward(tape, *leaves, window);
        }
        throw ShapeError("predict_node: taped parameters are not LSTM weights");
    }
    const auto* leaves = std::get_if<MlpLeaves>(&model);
    if (leaves == nullptr) throw ShapeError("predict_node: taped parameters are not MLP weights");

    switch (spec.kind) {
    case ModelKind::Direct: {
        NodeId out = mlp_forward(tape, *leaves, tape.constant(window));
        if (tape.size(out) != 1) throw ShapeError("predict_node: direct kind expects one head");
        return out;
    }
    case ModelKind::Residual: {
        NodeId wnode = tape.constant(window);
        NodeId out = mlp_forward(tape, *leaves, wnode);
        return tape.add(tape.slice(wnode, window.size() - 1, 1), out);
    }
    case ModelKind::Taylor1:
    case ModelKind::Taylor2:
    case ModelKind::Taylor3:
        return taylor_node(tape, *leaves, window, spec.delta_t, taylor_order(spec.kind));
    default:
        return recursive_node(tape, *leaves, spec, window);
    }
}

Gradients collect_gradients(const Tape& tape, const TapedModel& model) {
    Gradients grads;
    auto take = [&](NodeId id) {
        auto adj = tape.adjoint(id);
        grads.emplace_back(adj.begin(), adj.end());
    };
    if (const auto* mlp = std::get_if<MlpLeaves>(&model)) {
        take(mlp->w1);
        take(mlp->b1);
        take(mlp->w2);
        take(mlp->b2);
    } else {
        const auto& l = std::get<LstmLeaves>(model);
        for (NodeId id : {l.wx_i, l.wh_i, l.b_i, l.wx_f, l.wh_f, l.b_f, l.wx_c, l.wh_c, l.b_c,
                          l.wx_o, l.wh_o, l.b_o, l.w_out, l.b_out}) {
            take(id);
        }
    }
    return grads;
}

} // namespace taycast
