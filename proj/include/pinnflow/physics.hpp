#pragma once

#include "pinnflow/network.hpp"
#include "pinnflow/parallel.hpp"

#include <span>
#include <vector>

namespace pinnflow {

/// Physical parameters of the 1D two-phase filling problem.
/// Fluid 1 (viscosity mu1) initially fills the domain; fluid 2 (mu2) is
/// injected at x=0 under the pressure difference p_in - p_out.
struct ProblemConfig {
    double l = 1.0;
    double T = 0.5;
    double k = 1.0;
    double mu1 = 1e-5;
    double mu2 = 1.0;
    double p_in = 1.0;
    double p_out = 0.0;

    bool valid() const {
        return l > 0 && T > 0 && k > 0 && mu1 > 0 && mu2 > 0 && p_in > p_out;
    }
};

/// The three solution networks. p and c use sigmoid outputs (fields live in
/// [0,1]); v uses a linear output.
struct FieldTriple {
    NetworkParams v;
    NetworkParams p;
    NetworkParams c;

    std::size_t parameter_count() const;
    void to_flat(std::span<double> out) const;
    void from_flat(std::span<const double> in);
    bool output_activations_valid() const;
};

/// Builds the solver triple: shared hidden stack (tanh), linear output
/// for v, sigmoid outputs for p and c. Seeds the three networks independently.
FieldTriple make_field_triple(int hidden_layers, int hidden_width, std::uint64_t seed);

/// Weights of the six cost terms.
struct CostWeights {
    double lambda_v = 1.0;
    double lambda_c = 1.0;
    double lambda_p = 1.0;
    double lambda_1 = 1.0;
    double lambda_2 = 1.0;
    double lambda_3 = 1.0;

    bool valid() const {
        return lambda_v >= 0 && lambda_c >= 0 && lambda_p >= 0 && lambda_1 >= 0 &&
               lambda_2 >= 0 && lambda_3 >= 0;
    }
};

/// A boundary/initial condition sample: prescribed field value at (x, t).
struct BcPoint {
    double x = 0.0;
    double t = 0.0;
    double target = 0.0;
};

/// An impermeable-wall sample (empty in 1D; kept so the cost keeps its
/// velocity term for higher-dimensional domains).
struct WallPoint {
    double x = 0.0;
    double t = 0.0;
    double normal = 1.0;
};

/// Collocation and condition point sets defining the cost function.
struct PointSets {
    std::vector<Point2> f1_points;
    std::vector<Point2> f2_points;
    std::vector<Point2> f3_points;
    std::vector<BcPoint> c_bc_points;
    std::vector<BcPoint> p_bc_points;
    std::vector<WallPoint> v_bc_points;

    bool in_domain(const ProblemConfig& cfg) const;
};

/// Uniform n-by-n space-time grid (endpoints included) as collocation points.
std::vector<Point2> uniform_grid_points(const ProblemConfig& cfg, int n_x, int n_t);

/// Inlet (c=1) plus initial (c=0) condition points, n per edge.
std::vector<BcPoint> fraction_condition_points(const ProblemConfig& cfg, int n_per_edge);

/// Inlet (p_in) plus outlet (p_out) condition points, n per edge.
std::vector<BcPoint> pressure_condition_points(const ProblemConfig& cfg, int n_per_edge);

double mixed_viscosity(double c, const ProblemConfig& cfg);

struct PdeResidualValues {
    double f1 = 0.0;
    double f2 = 0.0;
    double f3 = 0.0;
};

/// Strong-form residuals of the coupled system at one point, from the
/// field samples: f1 = c_t + v c_x, f2 = v + (k/mu) p_x, f3 = v_x.
PdeResidualValues pde_residuals(const FieldSample& v, const FieldSample& p, const FieldSample& c,
                                const ProblemConfig& cfg);

struct BoundaryResidualValues {
    std::vector<double> r_c;
    std::vector<double> r_p;
    std::vector<double> r_v;
};

BoundaryResidualValues boundary_residuals(const FieldTriple& triple, const PointSets& sets,
                                          const ProblemConfig& cfg);

/// Per-term mean squared residuals (unweighted) and the weighted total.
struct CostBreakdown {
    double total = 0.0;
    double cost_v = 0.0;
    double cost_c = 0.0;
    double cost_p = 0.0;
    double cost_f1 = 0.0;
    double cost_f2 = 0.0;
    double cost_f3 = 0.0;
};

/// Weighted cost over the point sets. Throws ConfigError when a set with a
/// nonzero weight is empty (the wall set may always be empty).
CostBreakdown assemble_cost(const FieldTriple& triple, const PointSets& sets,
                            const CostWeights& weights, const ProblemConfig& cfg,
                            TaskPool* pool = nullptr);

/// Cost plus its exact gradient w.r.t. the concatenated parameters of
/// (v, p, c). `grad` is overwritten and must have length
/// triple.parameter_count(). Throws NumericalError on non-finite values.
CostBreakdown assemble_cost_gradient(const FieldTriple& triple, const PointSets& sets,
                                     const CostWeights& weights, const ProblemConfig& cfg,
                                     std::span<double> grad, TaskPool* pool = nullptr);

} // namespace pinnflow
