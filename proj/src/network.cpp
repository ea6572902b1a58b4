#include "pinnflow/network.hpp"

#include "pinnflow/util.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace pinnflow {

ActivationEval evaluate_activation(ActivationKind kind, double s) {
    switch (kind) {
    case ActivationKind::HyperbolicTangent: {
        double z = std::tanh(s);
        double d = 1.0 - z * z;
        return {z, d, -2.0 * z * d};
    }
    case ActivationKind::Sigmoid: {
        double z = 1.0 / (1.0 + std::exp(-s));
        double d = z * (1.0 - z);
        return {z, d, d * (1.0 - 2.0 * z)};
    }
    case ActivationKind::Linear:
    default:
        return {s, 1.0, 0.0};
    }
}

int NetworkSpec::layer_input_size(int layer) const {
    return layer == 0 ? input_dim : hidden_layer_sizes[layer - 1];
}

int NetworkSpec::layer_output_size(int layer) const {
    return layer == static_cast<int>(hidden_layer_sizes.size()) ? output_dim
                                                                : hidden_layer_sizes[layer];
}

ActivationKind NetworkSpec::layer_activation(int layer) const {
    return layer == static_cast<int>(hidden_layer_sizes.size()) ? output_activation
                                                                : hidden_activation;
}

std::size_t NetworkSpec::parameter_count() const {
    std::size_t total = 0;
    for (int l = 0; l < layer_count(); ++l) {
        total += static_cast<std::size_t>(layer_output_size(l)) * layer_input_size(l);
        total += layer_output_size(l);
    }
    return total;
}

bool NetworkSpec::valid() const {
    if (input_dim < 1 || output_dim < 1) {
        return false;
    }
    for (int n : hidden_layer_sizes) {
        if (n < 1) {
            return false;
        }
    }
    return true;
}

NetworkParams::NetworkParams(NetworkSpec spec) : spec_(std::move(spec)) {
    if (!spec_.valid()) {
        throw ConfigError("NetworkParams: invalid network spec (all dimensions must be >= 1)");
    }
    weight_offset_.resize(spec_.layer_count());
    bias_offset_.resize(spec_.layer_count());
    std::size_t offset = 0;
    for (int l = 0; l < spec_.layer_count(); ++l) {
        weight_offset_[l] = offset;
        offset += static_cast<std::size_t>(spec_.layer_output_size(l)) * spec_.layer_input_size(l);
        bias_offset_[l] = offset;
        offset += spec_.layer_output_size(l);
    }
    theta_.assign(offset, 0.0);
}

void NetworkParams::set_flat(std::span<const double> values) {
    if (values.size() != theta_.size()) {
        throw ConfigError("NetworkParams::set_flat: length mismatch");
    }
    std::copy(values.begin(), values.end(), theta_.begin());
}

std::size_t NetworkParams::weight_index(int layer, int out_index, int in_index) const {
    return weight_offset_[layer] +
           static_cast<std::size_t>(out_index) * spec_.layer_input_size(layer) + in_index;
}

std::size_t NetworkParams::bias_index(int layer, int out_index) const {
    return bias_offset_[layer] + out_index;
}

bool NetworkParams::all_finite() const {
    for (double v : theta_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

NetworkParams init_network(const NetworkSpec& spec, std::uint64_t seed) {
    NetworkParams params(spec);
    std::mt19937_64 rng(derive_seed(seed, 0x11u));
    for (int l = 0; l < spec.layer_count(); ++l) {
        const int fan_in = spec.layer_input_size(l);
        const int fan_out = spec.layer_output_size(l);
        const double stddev = std::sqrt(2.0 / (fan_in + fan_out));
        std::normal_distribution<double> normal(0.0, stddev);
        double* w = params.weights(l);
        for (int i = 0; i < fan_out * fan_in; ++i) {
            w[i] = normal(rng);
        }
        // biases stay zero
    }
    return params;
}

void Workspace::resize(const NetworkSpec& spec) {
    if (spec_ == spec && !z_.empty()) {
        return;
    }
    spec_ = spec;
    const int layers = spec.layer_count();
    z_.assign(layers + 1, {});
    u_.assign(layers + 1, {});
    w_.assign(layers + 1, {});
    alpha_.assign(layers, {});
    beta_.assign(layers, {});
    sp_.assign(layers, {});
    spp_.assign(layers, {});
    z_[0].resize(spec.input_dim);
    u_[0].resize(spec.input_dim);
    w_[0].resize(spec.input_dim);
    int max_width = spec.input_dim;
    for (int l = 0; l < layers; ++l) {
        const int n = spec.layer_output_size(l);
        z_[l + 1].resize(n);
        u_[l + 1].resize(n);
        w_[l + 1].resize(n);
        alpha_[l].resize(n);
        beta_[l].resize(n);
        sp_[l].resize(n);
        spp_[l].resize(n);
        max_width = std::max(max_width, n);
    }
    for (int side = 0; side < 2; ++side) {
        zbar_[side].resize(max_width);
        ubar_[side].resize(max_width);
        wbar_[side].resize(max_width);
    }
}

namespace {

void forward_impl(const NetworkParams& params, double x, double t, bool tangents,
                  std::vector<std::vector<double>>& z, std::vector<std::vector<double>>& u,
                  std::vector<std::vector<double>>& w, std::vector<std::vector<double>>& alpha,
                  std::vector<std::vector<double>>& beta, std::vector<std::vector<double>>& sp,
                  std::vector<std::vector<double>>& spp) {
    const NetworkSpec& spec = params.spec();
    z[0][0] = x;
    if (spec.input_dim > 1) {
        z[0][1] = t;
    }
    if (tangents) {
        std::fill(u[0].begin(), u[0].end(), 0.0);
        std::fill(w[0].begin(), w[0].end(), 0.0);
        u[0][0] = 1.0;
        if (spec.input_dim > 1) {
            w[0][1] = 1.0;
        }
    }

    for (int l = 0; l < spec.layer_count(); ++l) {
        const int n_in = spec.layer_input_size(l);
        const int n_out = spec.layer_output_size(l);
        const ActivationKind act = spec.layer_activation(l);
        const double* weights = params.weights(l);
        const double* biases = params.biases(l);
        const double* zp = z[l].data();
        const double* up = u[l].data();
        const double* wp = w[l].data();

        for (int j = 0; j < n_out; ++j) {
            const double* row = weights + static_cast<std::size_t>(j) * n_in;
            double s = biases[j];
            if (tangents) {
                double a = 0.0;
                double b = 0.0;
                for (int k = 0; k < n_in; ++k) {
                    s += row[k] * zp[k];
                    a += row[k] * up[k];
                    b += row[k] * wp[k];
                }
                const ActivationEval e = evaluate_activation(act, s);
                z[l + 1][j] = e.value;
                alpha[l][j] = a;
                beta[l][j] = b;
                sp[l][j] = e.first;
                spp[l][j] = e.second;
                u[l + 1][j] = e.first * a;
                w[l + 1][j] = e.first * b;
            } else {
                for (int k = 0; k < n_in; ++k) {
                    s += row[k] * zp[k];
                }
                const ActivationEval e = evaluate_activation(act, s);
                z[l + 1][j] = e.value;
                sp[l][j] = e.first;
            }
        }
    }
}

} // namespace

void forward(const NetworkParams& params, double x, double t, std::span<double> out,
             Workspace& ws) {
    ws.resize(params.spec());
    ws.has_tangents_ = false;
    forward_impl(params, x, t, false, ws.z_, ws.u_, ws.w_, ws.alpha_, ws.beta_, ws.sp_,
                 ws.spp_);
    const std::vector<double>& top = ws.z_.back();
    for (std::size_t i = 0; i < out.size() && i < top.size(); ++i) {
        out[i] = top[i];
    }
}

double forward_scalar(const NetworkParams& params, double x, double t, Workspace& ws) {
    double out;
    forward(params, x, t, {&out, 1}, ws);
    return out;
}

void forward_with_input_derivatives(const NetworkParams& params, double x, double t,
                                    std::span<FieldSample> out, Workspace& ws) {
    ws.resize(params.spec());
    ws.has_tangents_ = true;
    forward_impl(params, x, t, true, ws.z_, ws.u_, ws.w_, ws.alpha_, ws.beta_, ws.sp_,
                 ws.spp_);
    const std::vector<double>& top_z = ws.z_.back();
    const std::vector<double>& top_u = ws.u_.back();
    const std::vector<double>& top_w = ws.w_.back();
    for (std::size_t i = 0; i < out.size() && i < top_z.size(); ++i) {
        out[i] = {top_z[i], top_u[i], top_w[i]};
    }
}

FieldSample sample_scalar(const NetworkParams& params, double x, double t, Workspace& ws) {
    FieldSample s;
    forward_with_input_derivatives(params, x, t, {&s, 1}, ws);
    return s;
}

void backprop(const NetworkParams& params, Workspace& ws, std::span<const SampleAdjoint> adj,
              std::span<double> grad) {
    const NetworkSpec& spec = params.spec();
    const int layers = spec.layer_count();
    const bool tangents = ws.has_tangents_;

    int cur = 0;
    {
        const int n_out = spec.layer_output_size(layers - 1);
        for (int j = 0; j < n_out; ++j) {
            const bool have = j < static_cast<int>(adj.size());
            ws.zbar_[cur][j] = have ? adj[j].value : 0.0;
            ws.ubar_[cur][j] = have ? adj[j].d_dx : 0.0;
            ws.wbar_[cur][j] = have ? adj[j].d_dt : 0.0;
        }
    }

    for (int l = layers - 1; l >= 0; --l) {
        const int n_in = spec.layer_input_size(l);
        const int n_out = spec.layer_output_size(l);
        const double* weights = params.weights(l);
        const double* zp = ws.z_[l].data();
        const double* up = tangents ? ws.u_[l].data() : nullptr;
        const double* wp = tangents ? ws.w_[l].data() : nullptr;
        const int nxt = 1 - cur;

        double* zbar_prev = ws.zbar_[nxt].data();
        double* ubar_prev = ws.ubar_[nxt].data();
        double* wbar_prev = ws.wbar_[nxt].data();
        std::fill(zbar_prev, zbar_prev + n_in, 0.0);
        if (tangents) {
            std::fill(ubar_prev, ubar_prev + n_in, 0.0);
            std::fill(wbar_prev, wbar_prev + n_in, 0.0);
        }

        double* gw = grad.data() + (params.weights(l) - params.flat().data());
        double* gb = grad.data() + (params.biases(l) - params.flat().data());

        for (int j = 0; j < n_out; ++j) {
            const double sp = ws.sp_[l][j];
            const double* row = weights + static_cast<std::size_t>(j) * n_in;
            double* grow = gw + static_cast<std::size_t>(j) * n_in;
            if (tangents) {
                const double spp = ws.spp_[l][j];
                const double abar = ws.zbar_[cur][j] * sp +
                                    (ws.ubar_[cur][j] * ws.alpha_[l][j] +
                                     ws.wbar_[cur][j] * ws.beta_[l][j]) *
                                        spp;
                const double albar = ws.ubar_[cur][j] * sp;
                const double bebar = ws.wbar_[cur][j] * sp;
                gb[j] += abar;
                for (int k = 0; k < n_in; ++k) {
                    grow[k] += abar * zp[k] + albar * up[k] + bebar * wp[k];
                    zbar_prev[k] += row[k] * abar;
                    ubar_prev[k] += row[k] * albar;
                    wbar_prev[k] += row[k] * bebar;
                }
            } else {
                const double abar = ws.zbar_[cur][j] * sp;
                gb[j] += abar;
                for (int k = 0; k < n_in; ++k) {
                    grow[k] += abar * zp[k];
                    zbar_prev[k] += row[k] * abar;
                }
            }
        }
        cur = nxt;
    }
}

double objective_gradient(const NetworkParams& params, std::span<const Point2> points,
                          const PointTerm& term, std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    Workspace ws;
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const FieldSample sample = sample_scalar(params, points[i][0], points[i][1], ws);
        SampleAdjoint adj;
        const double value = term(i, sample, adj);
        if (!std::isfinite(value)) {
            std::ostringstream msg;
            msg << "objective_gradient: non-finite term " << value << " at point " << i << " (x="
                << points[i][0] << ", t=" << points[i][1] << ")";
            throw NumericalError(msg.str());
        }
        total += value;
        backprop(params, ws, {&adj, 1}, grad);
    }
    if (!std::isfinite(total)) {
        throw NumericalError("objective_gradient: non-finite objective total");
    }
    return total;
}

} // namespace pinnflow
