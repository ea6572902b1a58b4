#include "pinnflow/physics.hpp"

#include "pinnflow/util.hpp"

#include <cmath>
#include <sstream>

namespace pinnflow {

std::size_t FieldTriple::parameter_count() const {
    return v.parameter_count() + p.parameter_count() + c.parameter_count();
}

void FieldTriple::to_flat(std::span<double> out) const {
    auto fv = v.flat();
    auto fp = p.flat();
    auto fc = c.flat();
    std::copy(fv.begin(), fv.end(), out.begin());
    std::copy(fp.begin(), fp.end(), out.begin() + fv.size());
    std::copy(fc.begin(), fc.end(), out.begin() + fv.size() + fp.size());
}

void FieldTriple::from_flat(std::span<const double> in) {
    const std::size_t nv = v.parameter_count();
    const std::size_t np = p.parameter_count();
    const std::size_t nc = c.parameter_count();
    v.set_flat(in.subspan(0, nv));
    p.set_flat(in.subspan(nv, np));
    c.set_flat(in.subspan(nv + np, nc));
}

bool FieldTriple::output_activations_valid() const {
    return v.spec().output_activation == ActivationKind::Linear &&
           p.spec().output_activation == ActivationKind::Sigmoid &&
           c.spec().output_activation == ActivationKind::Sigmoid;
}

FieldTriple make_field_triple(int hidden_layers, int hidden_width, std::uint64_t seed) {
    NetworkSpec spec;
    spec.input_dim = 2;
    spec.hidden_layer_sizes.assign(hidden_layers, hidden_width);
    spec.output_dim = 1;
    spec.hidden_activation = ActivationKind::HyperbolicTangent;

    FieldTriple triple;
    spec.output_activation = ActivationKind::Linear;
    triple.v = init_network(spec, derive_seed(seed, 0xAu));
    spec.output_activation = ActivationKind::Sigmoid;
    triple.p = init_network(spec, derive_seed(seed, 0xBu));
    triple.c = init_network(spec, derive_seed(seed, 0xCu));
    return triple;
}

bool PointSets::in_domain(const ProblemConfig& cfg) const {
    const auto ok = [&](double x, double t) {
        return x >= 0.0 && x <= cfg.l && t >= 0.0 && t <= cfg.T;
    };
    for (const auto& q : f1_points) {
        if (!ok(q[0], q[1])) return false;
    }
    for (const auto& q : f2_points) {
        if (!ok(q[0], q[1])) return false;
    }
    for (const auto& q : f3_points) {
        if (!ok(q[0], q[1])) return false;
    }
    for (const auto& q : c_bc_points) {
        if (!ok(q.x, q.t)) return false;
    }
    for (const auto& q : p_bc_points) {
        if (!ok(q.x, q.t)) return false;
    }
    for (const auto& q : v_bc_points) {
        if (!ok(q.x, q.t)) return false;
    }
    return true;
}

std::vector<Point2> uniform_grid_points(const ProblemConfig& cfg, int n_x, int n_t) {
    std::vector<Point2> points;
    points.reserve(static_cast<std::size_t>(n_x) * n_t);
    for (int i = 0; i < n_x; ++i) {
        const double x = n_x == 1 ? 0.0 : cfg.l * i / (n_x - 1);
        for (int j = 0; j < n_t; ++j) {
            const double t = n_t == 1 ? 0.0 : cfg.T * j / (n_t - 1);
            points.push_back({x, t});
        }
    }
    return points;
}

std::vector<BcPoint> fraction_condition_points(const ProblemConfig& cfg, int n_per_edge) {
    std::vector<BcPoint> points;
    points.reserve(2 * static_cast<std::size_t>(n_per_edge));
    for (int j = 0; j < n_per_edge; ++j) {
        const double t = n_per_edge == 1 ? 0.0 : cfg.T * j / (n_per_edge - 1);
        points.push_back({0.0, t, 1.0}); // inlet: c = 1
    }
    // The inlet owns the corner (0,0); sampling the initial line there too
    // would prescribe both c = 1 and c = 0 at one point.
    for (int i = 1; i <= n_per_edge; ++i) {
        const double x = cfg.l * i / n_per_edge;
        points.push_back({x, 0.0, 0.0}); // initial: c = 0
    }
    return points;
}

std::vector<BcPoint> pressure_condition_points(const ProblemConfig& cfg, int n_per_edge) {
    std::vector<BcPoint> points;
    points.reserve(2 * static_cast<std::size_t>(n_per_edge));
    for (int j = 0; j < n_per_edge; ++j) {
        const double t = n_per_edge == 1 ? 0.0 : cfg.T * j / (n_per_edge - 1);
        points.push_back({0.0, t, cfg.p_in});
        points.push_back({cfg.l, t, cfg.p_out});
    }
    return points;
}

double mixed_viscosity(double c, const ProblemConfig& cfg) {
    return c * cfg.mu2 + (1.0 - c) * cfg.mu1;
}

PdeResidualValues pde_residuals(const FieldSample& v, const FieldSample& p, const FieldSample& c,
                                const ProblemConfig& cfg) {
    PdeResidualValues r;
    r.f1 = c.d_dt + v.value * c.d_dx;
    r.f2 = v.value + cfg.k / mixed_viscosity(c.value, cfg) * p.d_dx;
    r.f3 = v.d_dx;
    return r;
}

BoundaryResidualValues boundary_residuals(const FieldTriple& triple, const PointSets& sets,
                                          const ProblemConfig& /*cfg*/) {
    BoundaryResidualValues out;
    Workspace ws;
    out.r_c.reserve(sets.c_bc_points.size());
    for (const auto& q : sets.c_bc_points) {
        out.r_c.push_back(forward_scalar(triple.c, q.x, q.t, ws) - q.target);
    }
    out.r_p.reserve(sets.p_bc_points.size());
    for (const auto& q : sets.p_bc_points) {
        out.r_p.push_back(forward_scalar(triple.p, q.x, q.t, ws) - q.target);
    }
    out.r_v.reserve(sets.v_bc_points.size());
    for (const auto& q : sets.v_bc_points) {
        out.r_v.push_back(forward_scalar(triple.v, q.x, q.t, ws) * q.normal);
    }
    return out;
}

namespace {

struct GradOffsets {
    std::size_t v = 0;
    std::size_t p = 0;
    std::size_t c = 0;
};

// Per-slice scratch: one workspace per network plus the slice's partial sum.
struct SliceScratch {
    Workspace v;
    Workspace p;
    Workspace c;
};

void check_finite(double value, const char* set_name, std::size_t index, double x, double t) {
    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "cost assembly: non-finite " << set_name << " residual at point " << index
            << " (x=" << x << ", t=" << t << ")";
        throw NumericalError(msg.str());
    }
}

// Mean of squared PDE residuals over one collocation set, optionally with the
// gradient of (mean / count scaling folded in) accumulated per network.
//
// which: 1 -> f1 (advection), 2 -> f2 (Darcy), 3 -> f3 (incompressibility)
double pde_set_cost(const FieldTriple& triple, std::span<const Point2> points, int which,
                    const ProblemConfig& cfg, double grad_scale, std::span<double> grad,
                    const GradOffsets& off, TaskPool* pool) {
    if (points.empty()) {
        return 0.0;
    }
    const bool with_grad = !grad.empty();
    const int slices = slice_count(points.size());
    std::vector<double> slice_sum(slices, 0.0);
    std::vector<std::vector<double>> slice_grad;
    if (with_grad) {
        slice_grad.assign(slices, std::vector<double>(grad.size(), 0.0));
    }

    const auto run_slice = [&](int s) {
        SliceScratch scratch;
        const std::size_t begin = static_cast<std::size_t>(s) * kBatchSliceSize;
        const std::size_t end = std::min(points.size(), begin + kBatchSliceSize);
        double sum = 0.0;
        std::span<double> g = with_grad ? std::span<double>(slice_grad[s]) : std::span<double>();
        for (std::size_t i = begin; i < end; ++i) {
            const double x = points[i][0];
            const double t = points[i][1];
            double r = 0.0;
            if (which == 1) {
                const FieldSample c = sample_scalar(triple.c, x, t, scratch.c);
                const double v = forward_scalar(triple.v, x, t, scratch.v);
                r = c.d_dt + v * c.d_dx;
                check_finite(r, "f1", i, x, t);
                sum += r * r;
                if (with_grad) {
                    const double w = 2.0 * grad_scale * r;
                    SampleAdjoint adj_c{0.0, w * v, w};
                    backprop(triple.c, scratch.c, {&adj_c, 1}, g.subspan(off.c));
                    SampleAdjoint adj_v{w * c.d_dx, 0.0, 0.0};
                    backprop(triple.v, scratch.v, {&adj_v, 1}, g.subspan(off.v));
                }
            } else if (which == 2) {
                const double v = forward_scalar(triple.v, x, t, scratch.v);
                const FieldSample p = sample_scalar(triple.p, x, t, scratch.p);
                const double c = forward_scalar(triple.c, x, t, scratch.c);
                const double mu = mixed_viscosity(c, cfg);
                r = v + cfg.k / mu * p.d_dx;
                check_finite(r, "f2", i, x, t);
                sum += r * r;
                if (with_grad) {
                    const double w = 2.0 * grad_scale * r;
                    SampleAdjoint adj_v{w, 0.0, 0.0};
                    backprop(triple.v, scratch.v, {&adj_v, 1}, g.subspan(off.v));
                    SampleAdjoint adj_p{0.0, w * cfg.k / mu, 0.0};
                    backprop(triple.p, scratch.p, {&adj_p, 1}, g.subspan(off.p));
                    // d/dc of k/mu(c) = -k (mu2 - mu1) / mu^2
                    SampleAdjoint adj_c{-w * cfg.k * (cfg.mu2 - cfg.mu1) * p.d_dx / (mu * mu),
                                        0.0, 0.0};
                    backprop(triple.c, scratch.c, {&adj_c, 1}, g.subspan(off.c));
                }
            } else {
                const FieldSample v = sample_scalar(triple.v, x, t, scratch.v);
                r = v.d_dx;
                check_finite(r, "f3", i, x, t);
                sum += r * r;
                if (with_grad) {
                    SampleAdjoint adj_v{0.0, 2.0 * grad_scale * r, 0.0};
                    backprop(triple.v, scratch.v, {&adj_v, 1}, g.subspan(off.v));
                }
            }
        }
        slice_sum[s] = sum;
    };

    if (pool != nullptr) {
        pool->run(slices, run_slice);
    } else {
        for (int s = 0; s < slices; ++s) {
            run_slice(s);
        }
    }

    double total = 0.0;
    for (int s = 0; s < slices; ++s) {
        total += slice_sum[s];
        if (with_grad) {
            const std::vector<double>& g = slice_grad[s];
            for (std::size_t i = 0; i < grad.size(); ++i) {
                grad[i] += g[i];
            }
        }
    }
    return total / static_cast<double>(points.size());
}

// Mean squared condition residual for one field network.
double bc_set_cost(const NetworkParams& net, std::span<const BcPoint> points,
                   const char* set_name, double grad_scale, std::span<double> grad,
                   std::size_t offset, TaskPool* pool) {
    if (points.empty()) {
        return 0.0;
    }
    const bool with_grad = !grad.empty();
    const int slices = slice_count(points.size());
    std::vector<double> slice_sum(slices, 0.0);
    std::vector<std::vector<double>> slice_grad;
    if (with_grad) {
        slice_grad.assign(slices, std::vector<double>(net.parameter_count(), 0.0));
    }

    const auto run_slice = [&](int s) {
        Workspace ws;
        const std::size_t begin = static_cast<std::size_t>(s) * kBatchSliceSize;
        const std::size_t end = std::min(points.size(), begin + kBatchSliceSize);
        double sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double r = forward_scalar(net, points[i].x, points[i].t, ws) - points[i].target;
            check_finite(r, set_name, i, points[i].x, points[i].t);
            sum += r * r;
            if (with_grad) {
                SampleAdjoint adj{2.0 * grad_scale * r, 0.0, 0.0};
                backprop(net, ws, {&adj, 1}, slice_grad[s]);
            }
        }
        slice_sum[s] = sum;
    };

    if (pool != nullptr) {
        pool->run(slices, run_slice);
    } else {
        for (int s = 0; s < slices; ++s) {
            run_slice(s);
        }
    }

    double total = 0.0;
    for (int s = 0; s < slices; ++s) {
        total += slice_sum[s];
        if (with_grad) {
            const std::vector<double>& g = slice_grad[s];
            for (std::size_t i = 0; i < g.size(); ++i) {
                grad[offset + i] += g[i];
            }
        }
    }
    return total / static_cast<double>(points.size());
}

// Wall term: mean squared v.n over the wall set; 0 over an empty set.
double wall_set_cost(const NetworkParams& net, std::span<const WallPoint> points,
                     double grad_scale, std::span<double> grad, std::size_t offset) {
    if (points.empty()) {
        return 0.0;
    }
    Workspace ws;
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double r = forward_scalar(net, points[i].x, points[i].t, ws) * points[i].normal;
        check_finite(r, "v_bc", i, points[i].x, points[i].t);
        sum += r * r;
        if (!grad.empty()) {
            SampleAdjoint adj{2.0 * grad_scale * r * points[i].normal, 0.0, 0.0};
            backprop(net, ws, {&adj, 1}, grad.subspan(offset));
        }
    }
    return sum / static_cast<double>(points.size());
}

CostBreakdown assemble_impl(const FieldTriple& triple, const PointSets& sets,
                            const CostWeights& weights, const ProblemConfig& cfg,
                            std::span<double> grad, TaskPool* pool) {
    if (!weights.valid()) {
        throw ConfigError("assemble_cost: cost weights must be non-negative");
    }
    const auto require_nonempty = [&](bool empty, double lambda, const char* name) {
        if (empty && lambda != 0.0) {
            std::ostringstream msg;
            msg << "assemble_cost: point set " << name << " is empty but its weight is nonzero";
            throw ConfigError(msg.str());
        }
    };
    require_nonempty(sets.f1_points.empty(), weights.lambda_1, "f1");
    require_nonempty(sets.f2_points.empty(), weights.lambda_2, "f2");
    require_nonempty(sets.f3_points.empty(), weights.lambda_3, "f3");
    require_nonempty(sets.c_bc_points.empty(), weights.lambda_c, "c_bc");
    require_nonempty(sets.p_bc_points.empty(), weights.lambda_p, "p_bc");

    const bool with_grad = !grad.empty();
    if (with_grad) {
        std::fill(grad.begin(), grad.end(), 0.0);
    }
    GradOffsets off;
    off.v = 0;
    off.p = triple.v.parameter_count();
    off.c = off.p + triple.p.parameter_count();

    CostBreakdown out;
    const auto scale = [](double lambda, std::size_t n) {
        return n == 0 ? 0.0 : lambda / static_cast<double>(n);
    };

    // Gradient contributions carry lambda/N; component values stay unweighted.
    out.cost_f1 = pde_set_cost(triple, sets.f1_points, 1, cfg,
                               scale(weights.lambda_1, sets.f1_points.size()),
                               weights.lambda_1 != 0.0 && with_grad ? grad : std::span<double>(),
                               off, pool);
    out.cost_f2 = pde_set_cost(triple, sets.f2_points, 2, cfg,
                               scale(weights.lambda_2, sets.f2_points.size()),
                               weights.lambda_2 != 0.0 && with_grad ? grad : std::span<double>(),
                               off, pool);
    out.cost_f3 = pde_set_cost(triple, sets.f3_points, 3, cfg,
                               scale(weights.lambda_3, sets.f3_points.size()),
                               weights.lambda_3 != 0.0 && with_grad ? grad : std::span<double>(),
                               off, pool);
    out.cost_c = bc_set_cost(triple.c, sets.c_bc_points, "c_bc",
                             scale(weights.lambda_c, sets.c_bc_points.size()),
                             weights.lambda_c != 0.0 && with_grad ? grad : std::span<double>(),
                             off.c, pool);
    out.cost_p = bc_set_cost(triple.p, sets.p_bc_points, "p_bc",
                             scale(weights.lambda_p, sets.p_bc_points.size()),
                             weights.lambda_p != 0.0 && with_grad ? grad : std::span<double>(),
                             off.p, pool);
    out.cost_v = wall_set_cost(triple.v, sets.v_bc_points,
                               scale(weights.lambda_v, sets.v_bc_points.size()),
                               weights.lambda_v != 0.0 && with_grad ? grad : std::span<double>(),
                               off.v);

    out.total = weights.lambda_v * out.cost_v + weights.lambda_c * out.cost_c +
                weights.lambda_p * out.cost_p + weights.lambda_1 * out.cost_f1 +
                weights.lambda_2 * out.cost_f2 + weights.lambda_3 * out.cost_f3;
    return out;
}

} // namespace

CostBreakdown assemble_cost(const FieldTriple& triple, const PointSets& sets,
                            const CostWeights& weights, const ProblemConfig& cfg,
                            TaskPool* pool) {
    return assemble_impl(triple, sets, weights, cfg, {}, pool);
}

CostBreakdown assemble_cost_gradient(const FieldTriple& triple, const PointSets& sets,
                                     const CostWeights& weights, const ProblemConfig& cfg,
                                     std::span<double> grad, TaskPool* pool) {
    if (grad.size() != triple.parameter_count()) {
        throw ConfigError("assemble_cost_gradient: gradient length mismatch");
    }
    return assemble_impl(triple, sets, weights, cfg, grad, pool);
}

} // namespace pinnflow
