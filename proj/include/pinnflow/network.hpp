#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pinnflow {

enum class ActivationKind { HyperbolicTangent, Sigmoid, Linear };

/// Activation output with its first and second derivative at one pre-activation.
struct ActivationEval {
    double value;
    double first;
    double second;
};

ActivationEval evaluate_activation(ActivationKind kind, double s);

/// Layer widths and activations of a fully connected network.
struct NetworkSpec {
    int input_dim = 2;
    std::vector<int> hidden_layer_sizes;
    int output_dim = 1;
    ActivationKind hidden_activation = ActivationKind::HyperbolicTangent;
    ActivationKind output_activation = ActivationKind::Linear;

    /// Number of weight layers (hidden layers plus the output layer).
    int layer_count() const { return static_cast<int>(hidden_layer_sizes.size()) + 1; }
    int layer_input_size(int layer) const;
    int layer_output_size(int layer) const;
    ActivationKind layer_activation(int layer) const;
    std::size_t parameter_count() const;
    bool valid() const;
    bool operator==(const NetworkSpec&) const = default;
};

/// Weights and biases matching a NetworkSpec.
///
/// Storage is one flat array, per layer: row-major weight matrix
/// [out x in], then the bias vector. flatten/unflatten are plain copies of
/// that array, so the round trip is exact.
class NetworkParams {
public:
    NetworkParams() = default;
    explicit NetworkParams(NetworkSpec spec);

    const NetworkSpec& spec() const { return spec_; }
    std::size_t parameter_count() const { return theta_.size(); }

    std::span<double> flat() { return theta_; }
    std::span<const double> flat() const { return theta_; }
    void set_flat(std::span<const double> values);

    double* weights(int layer) { return theta_.data() + weight_offset_[layer]; }
    const double* weights(int layer) const { return theta_.data() + weight_offset_[layer]; }
    double* biases(int layer) { return theta_.data() + bias_offset_[layer]; }
    const double* biases(int layer) const { return theta_.data() + bias_offset_[layer]; }

    /// Row-major index of weight (out_index, in_index) within the flat array.
    std::size_t weight_index(int layer, int out_index, int in_index) const;
    std::size_t bias_index(int layer, int out_index) const;

    bool all_finite() const;

private:
    NetworkSpec spec_;
    std::vector<double> theta_;
    std::vector<std::size_t> weight_offset_;
    std::vector<std::size_t> bias_offset_;
};

/// Field value and its first derivatives at one space-time point.
struct FieldSample {
    double value = 0.0;
    double d_dx = 0.0;
    double d_dt = 0.0;
};

/// Partial derivatives of a scalar objective w.r.t. one output's
/// value, d_dx and d_dt; the seed for reverse accumulation.
struct SampleAdjoint {
    double value = 0.0;
    double d_dx = 0.0;
    double d_dt = 0.0;
};

/// Scratch buffers for one network evaluation, reusable across calls.
/// Holds the forward state that backprop consumes, so backprop must run
/// against the same workspace as the preceding forward call.
class Workspace {
public:
    Workspace() = default;
    explicit Workspace(const NetworkSpec& spec) { resize(spec); }
    void resize(const NetworkSpec& spec);

private:
    friend void forward(const NetworkParams&, double, double, std::span<double>, Workspace&);
    friend void forward_with_input_derivatives(const NetworkParams&, double, double,
                                               std::span<FieldSample>, Workspace&);
    friend void backprop(const NetworkParams&, Workspace&, std::span<const SampleAdjoint>,
                         std::span<double>);

    NetworkSpec spec_;
    bool has_tangents_ = false;
    // Per layer boundary (0 = input): value z, x-tangent u, t-tangent w.
    std::vector<std::vector<double>> z_, u_, w_;
    // Per layer: pre-activation tangents and activation derivatives.
    std::vector<std::vector<double>> alpha_, beta_, sp_, spp_;
    // Reverse-pass cotangents (two ping-pong buffers per quantity).
    std::vector<double> zbar_[2], ubar_[2], wbar_[2];
};

/// Deterministic fan-scaled zero-mean initialization; biases are zero.
NetworkParams init_network(const NetworkSpec& spec, std::uint64_t seed);

/// Plain forward pass; writes one value per output.
void forward(const NetworkParams& params, double x, double t, std::span<double> out, Workspace& ws);
double forward_scalar(const NetworkParams& params, double x, double t, Workspace& ws);

/// Forward pass carrying exact d/dx and d/dt tangents through every layer.
/// The value entry matches forward() bit for bit (same arithmetic path).
void forward_with_input_derivatives(const NetworkParams& params, double x, double t,
                                    std::span<FieldSample> out, Workspace& ws);
FieldSample sample_scalar(const NetworkParams& params, double x, double t, Workspace& ws);

/// Reverse accumulation for the evaluation currently held in `ws`.
///
/// Adds to `grad` the gradient w.r.t. every parameter of
///   sum_k  adj[k].value * value_k + adj[k].d_dx * dx_k + adj[k].d_dt * dt_k.
/// Seeding d_dx/d_dt requires the tangent-carrying forward pass; after a
/// plain forward only value seeds are valid.
void backprop(const NetworkParams& params, Workspace& ws, std::span<const SampleAdjoint> adj,
              std::span<double> grad);

using Point2 = std::array<double, 2>;

/// One term of a pointwise objective: receives the sample at points[i],
/// returns the term's value and fills `adj` with its partials w.r.t. the
/// sample components.
using PointTerm = std::function<double(std::size_t i, const FieldSample& sample, SampleAdjoint& adj)>;

/// Value and exact parameter gradient of sum_i term(i, sample(points[i]))
/// for a single-output network. `grad` is overwritten and must have length
/// parameter_count(). Throws NumericalError if the objective is non-finite.
double objective_gradient(const NetworkParams& params, std::span<const Point2> points,
                          const PointTerm& term, std::span<double> grad);

} // namespace pinnflow
