#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "taycast/adam.hpp"
#include "taycast/lstm.hpp"
#include "taycast/mlp.hpp"
#include "taycast/tape.hpp"

namespace taycast {

enum class ModelKind {
    Direct,            // next value straight from the network
    Residual,          // last value + network output
    Taylor1,           // last value + dt * h1
    Taylor2,           // ... + dt^2/2 * h2
    Taylor3,           // ... + dt^3/6 * h3
    RecursiveResidual, // first-order substep rollout
    RecursiveTaylor2,
    RecursiveTaylor3,
    Lstm,
};

constexpr ModelKind kAllModelKinds[] = {
    ModelKind::Direct,           ModelKind::Residual,         ModelKind::Taylor1,
    ModelKind::Taylor2,          ModelKind::Taylor3,          ModelKind::RecursiveResidual,
    ModelKind::RecursiveTaylor2, ModelKind::RecursiveTaylor3, ModelKind::Lstm,
};

bool is_recursive(ModelKind kind);
// Highest derivative order the model's heads estimate (0 for Direct/Lstm,
// which have no derivative interpretation).
int taylor_order(ModelKind kind);
const char* to_string(ModelKind kind);
std::optional<ModelKind> model_kind_from_string(std::string_view name);

// Everything needed to build and evaluate one predictor.
struct ModelSpec {
    ModelKind kind = ModelKind::Residual;
    std::size_t input_len = 5; // window length fed to the network
    std::size_t hidden_size = 128;
    double delta_t = 1.0; // sampling interval covered by one prediction
    int substeps = 1;     // m; >= 2 for recursive kinds, exactly 1 otherwise

    // Output units of the backbone: one per head for non-recursive kinds,
    // one per head per window element for recursive kinds.
    std::size_t output_len() const;
    void validate() const; // throws ConfigError
};

using Params = std::variant<MlpParams, LstmParams>;

Params init_params(const ModelSpec& spec, std::uint64_t seed);
std::vector<std::span<double>> param_spans(Params& params);
std::vector<std::span<const double>> param_spans(const Params& params);
// Zero the network's output layer so every head is exactly 0 (MLP kinds).
void zero_heads(Params& params);

// --- plain predictors ---

double predict_direct(const MlpParams& params, std::span<const double> window);
double predict_residual(const MlpParams& params, std::span<const double> window);
double predict_taylor(const MlpParams& params, std::span<const double> window, double delta_t,
                      int order);

// Maps a window state to derivative estimates for orders 1..k, each the
// length of the state. Instantiable analytically for tests or from a
// network via make_network_field.
using DerivativeField = std::function<std::vector<Vector>(std::span<const double>)>;

// Explicit Taylor substep integration: m substeps of size delta_t/m, each
//   s += (dt/m) f1(s) + (dt/m)^2/2 f2(s) + (dt/m)^3/6 f3(s)
// up to `order`. Returns the final state. Throws DivergenceError naming
// the substep if the state goes non-finite.
Vector recursive_rollout(const DerivativeField& field, std::span<const double> window,
                         double delta_t, int substeps, int order);

// Reshapes the network's heads into per-order vectors over the state.
DerivativeField make_network_field(const MlpParams& params, const ModelSpec& spec);

double predict_recursive(const MlpParams& params, const ModelSpec& spec,
                         std::span<const double> window);

// Dispatch over every model kind.
double predict(const Params& params, const ModelSpec& spec, std::span<const double> window);

// --- taped predictors (for training) ---

using TapedModel = std::variant<MlpLeaves, LstmLeaves>;

TapedModel tape_model(Tape& tape, const Params& params);
NodeId predict_node(Tape& tape, const TapedModel& model, const ModelSpec& spec,
                    std::span<const double> window);
// Adjoints of the parameter leaves, in param_spans() order.
Gradients collect_gradients(const Tape& tape, const TapedModel& model);

} // namespace taycast
