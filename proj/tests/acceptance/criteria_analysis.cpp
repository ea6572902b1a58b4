#include "acceptance_harness.hpp"

#include "pinnflow/adaptivity.hpp"
#include "pinnflow/analytic.hpp"
#include "pinnflow/optimizers.hpp"
#include "pinnflow/physics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

using namespace pinnflow;

namespace acceptance {

namespace {

std::string format_qoi(const char* label, double value, const char* threshold) {
    std::ostringstream ss;
    ss << "(" << label << "=" << value << ", threshold " << threshold << ")";
    return ss.str();
}

// --------------------------------------------------------------------------
// Criterion 1: parameter gradients vs central finite differences for every
// cost component shape on small random networks.
// --------------------------------------------------------------------------
void criterion_gradients(Harness& harness) {
    const ProblemConfig cfg;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ux(0.0, cfg.l);
    std::uniform_real_distribution<double> ut(0.0, cfg.T);

    const CostWeights shape_weights[4] = {
        {1.0, 1.0, 1.0, 0.0, 0.0, 0.0}, // boundary terms
        {0.0, 0.0, 0.0, 1.0, 0.0, 0.0}, // f1
        {0.0, 0.0, 0.0, 0.0, 1.0, 0.0}, // f2
        {0.0, 0.0, 0.0, 0.0, 0.0, 1.0}, // f3
    };

    double worst = 0.0;
    const double step = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        FieldTriple triple = make_field_triple(2, 8, 5000 + trial);
        PointSets sets;
        for (int i = 0; i < 5; ++i) {
            sets.f1_points.push_back({ux(rng), ut(rng)});
            sets.f2_points.push_back({ux(rng), ut(rng)});
            sets.f3_points.push_back({ux(rng), ut(rng)});
        }
        sets.c_bc_points = fraction_condition_points(cfg, 3);
        sets.p_bc_points = pressure_condition_points(cfg, 3);

        std::vector<double> theta(triple.parameter_count());
        triple.to_flat(theta);

        for (const CostWeights& weights : shape_weights) {
            std::vector<double> grad(theta.size());
            triple.from_flat(theta);
            assemble_cost_gradient(triple, sets, weights, cfg, grad);

            FieldTriple probe = triple;
            std::vector<double> point = theta;
            for (std::size_t i = 0; i < point.size(); ++i) {
                const double original = point[i];
                point[i] = original + step;
                probe.from_flat(point);
                const double f_plus = assemble_cost(probe, sets, weights, cfg).total;
                point[i] = original - step;
                probe.from_flat(point);
                const double f_minus = assemble_cost(probe, sets, weights, cfg).total;
                point[i] = original;
                const double fd = (f_plus - f_minus) / (2.0 * step);
                const double denom = std::max({1.0, std::abs(fd), std::abs(grad[i])});
                worst = std::max(worst, std::abs(fd - grad[i]) / denom);
            }
        }
    }
    harness.record(1, "gradient correctness", worst < 1e-5,
                   format_qoi("max_rel_error", worst, "1e-5"));
}

// --------------------------------------------------------------------------
// Criterion 2: closed-form identities of the analytic solution.
// --------------------------------------------------------------------------
void criterion_oracle(Harness& harness) {
    const ProblemConfig cfg;
    bool ok = true;
    std::ostringstream detail;

    const double at_zero = front_position(0.0, cfg);
    ok = ok && at_zero == 0.0;
    detail << "(x_f(0)=" << at_zero;

    // branch continuity at the front
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ut(0.005, cfg.T);
    double worst_jump = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double t = ut(rng);
        const double xf = front_position(t, cfg);
        const double denom = (cfg.mu2 - cfg.mu1) * xf + cfg.mu1 * cfg.l;
        const double dp = cfg.p_in - cfg.p_out;
        const double filled = -cfg.mu2 * dp / denom * xf + cfg.p_in;
        const double empty =
            -cfg.mu1 * dp / denom * xf + cfg.mu1 * dp / denom * cfg.l + cfg.p_out;
        worst_jump = std::max(worst_jump, std::abs(filled - empty));
    }
    ok = ok && worst_jump < 1e-12;
    detail << ", max_branch_jump=" << worst_jump;

    // the exact fields satisfy the Darcy and incompressibility residuals:
    // recover each branch's pressure slope from wide difference quotients of
    // pressure_exact and push it through f2 with the matching fraction value
    double worst_f2 = 0.0;
    double worst_f3 = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double t = ut(rng);
        const double xf = front_position(t, cfg);
        const double v = front_velocity(t, cfg);

        const auto branch_slope = [&](double x1, double x2) {
            return (pressure_exact(x2, t, cfg) - pressure_exact(x1, t, cfg)) / (x2 - x1);
        };
        if (xf > 0.02 * cfg.l) {
            const double px = branch_slope(0.1 * xf, 0.9 * xf);
            const double mu = mixed_viscosity(1.0, cfg); // filled side: c = 1
            const FieldSample vs{v, 0.0, 0.0};
            const FieldSample ps{0.0, px, 0.0};
            const FieldSample cs{1.0, 0.0, 0.0};
            worst_f2 = std::max(worst_f2, std::abs(pde_residuals(vs, ps, cs, cfg).f2));
            (void)mu;
        }
        if (xf < 0.98 * cfg.l) {
            const double x1 = xf + 0.1 * (cfg.l - xf);
            const double x2 = xf + 0.9 * (cfg.l - xf);
            const double px = branch_slope(x1, x2);
            const FieldSample vs{v, 0.0, 0.0};
            const FieldSample ps{0.0, px, 0.0};
            const FieldSample cs{0.0, 0.0, 0.0}; // ahead of the front: c = 0
            worst_f2 = std::max(worst_f2, std::abs(pde_residuals(vs, ps, cs, cfg).f2));

            // incompressibility: the Darcy velocity recovered on either
            // branch is one constant, so its x-variation vanishes
            const double v_filled =
                xf > 0.02 * cfg.l
                    ? -cfg.k / mixed_viscosity(1.0, cfg) * branch_slope(0.1 * xf, 0.9 * xf)
                    : v;
            const double v_empty = -cfg.k / mixed_viscosity(0.0, cfg) * px;
            worst_f3 = std::max(worst_f3, std::abs(v_filled - v_empty));
        }
    }
    ok = ok && worst_f2 < 1e-10 && worst_f3 < 1e-10;
    detail << ", max_f2=" << worst_f2 << ", max_f3=" << worst_f3;

    // front speed equals the Darcy velocity of the exact solution
    double worst_rel = 0.0;
    const double h = 1e-7;
    for (double t : {0.05, 0.125, 0.25, 0.375, 0.45}) {
        const double fd = (front_position(t + h, cfg) - front_position(t - h, cfg)) / (2.0 * h);
        const double v = front_velocity(t, cfg);
        worst_rel = std::max(worst_rel, std::abs(fd - v) / std::abs(v));
    }
    ok = ok && worst_rel < 1e-6;
    detail << ", max_dfront_rel=" << worst_rel << ")";

    harness.record(2, "oracle identities", ok, detail.str());
}

// --------------------------------------------------------------------------
// Criterion 3: density normalization, exact filtering, draw frequencies.
// --------------------------------------------------------------------------
void criterion_density(Harness& harness) {
    bool ok = true;
    std::ostringstream detail;

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_sum = 0.0;
    bool filter_exact = true;
    for (int trial = 0; trial < 200; ++trial) {
        const double eps = std::pow(10.0, -1.0 - 3.0 * unit(rng));
        std::vector<double> residuals(257);
        for (double& r : residuals) {
            r = (unit(rng) - 0.5) * 2.0;
        }
        residuals[0] = 10.0 * eps;
        const DensityTable table = build_density(residuals, eps);
        double sum = 0.0;
        for (std::size_t i = 0; i < table.probabilities.size(); ++i) {
            sum += table.probabilities[i];
            if (std::abs(residuals[i]) <= eps && table.probabilities[i] != 0.0) {
                filter_exact = false;
            }
        }
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    }
    ok = ok && worst_sum < 1e-12 && filter_exact;
    detail << "(max_norm_defect=" << worst_sum << ", filter_exact=" << filter_exact;

    // frequency test against a known non-uniform 100-point density
    const double eps = 1e-4;
    std::vector<double> residuals(100);
    std::vector<double> expected(100);
    double total_mass = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double mass = 1.0 + i % 5;
        residuals[i] = eps * std::exp(mass);
        expected[i] = mass;
        total_mass += mass;
    }
    for (double& p : expected) {
        p /= total_mass;
    }
    const DensityTable table = build_density(residuals, eps);
    std::mt19937_64 draw_rng(13);
    std::vector<int> counts(100, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        ++counts[draw_indices(table, 1, draw_rng)[0]];
    }
    double worst_freq = 0.0;
    for (int i = 0; i < 100; ++i) {
        worst_freq =
            std::max(worst_freq, std::abs(counts[i] / static_cast<double>(draws) - expected[i]));
    }
    ok = ok && worst_freq < 0.01;
    detail << ", max_freq_error=" << worst_freq << ")";

    harness.record(3, "density contract", ok, detail.str());
}

// --------------------------------------------------------------------------
// Criterion 4: optimizer sanity on standard problems.
// --------------------------------------------------------------------------
void criterion_optimizers(Harness& harness) {
    const Objective rosenbrock = [](std::span<const double> x, std::span<double> grad) {
        const double a = x[0];
        const double b = x[1];
        grad[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
        grad[1] = 200.0 * (b - a * a);
        return (1.0 - a) * (1.0 - a) + 100.0 * (b - a * a) * (b - a * a);
    };
    QuasiNewtonOptions options;
    options.max_iterations = 500;
    const std::vector<double> x0 = {-1.2, 1.0};
    const QuasiNewtonResult result = quasi_newton_minimize(rosenbrock, x0, options);
    const bool rosen_ok = result.f < 1e-8;

    // Adam on a convex quadratic: monotone after burn-in
    AdamConfig adam;
    adam.learning_rate = 0.01;
    const std::vector<double> curvature = {1.0, 3.0, 0.5};
    std::vector<double> x = {2.0, -1.0, 1.5};
    std::vector<double> grad(3);
    AdamState state(3);
    bool monotone = true;
    double prev = 1e300;
    for (int it = 0; it < 400; ++it) {
        double f = 0.0;
        for (int i = 0; i < 3; ++i) {
            grad[i] = curvature[i] * x[i];
            f += 0.5 * curvature[i] * x[i] * x[i];
        }
        if (it >= 50 && f > prev + 1e-12) {
            monotone = false;
        }
        prev = f;
        adam_step(x, grad, state, adam);
    }

    std::ostringstream detail;
    detail << "(rosenbrock_final=" << result.f << ", adam_monotone=" << monotone << ")";
    harness.record(4, "optimizer sanity", rosen_ok && monotone, detail.str());
}

} // namespace

void run_analysis_criteria(Harness& harness) {
    criterion_gradients(harness);
    criterion_oracle(harness);
    criterion_density(harness);
    criterion_optimizers(harness);
}

} // namespace acceptance
