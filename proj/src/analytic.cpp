#include "pinnflow/analytic.hpp"

#include "pinnflow/util.hpp"

#include <cmath>
#include <sstream>

namespace pinnflow {

namespace {

// (mu2 - mu1) * x_f + mu1 * l, the viscosity-weighted column length that
// divides every slope in the exact solution. Equals the square root term of
// the front formula.
double filled_column(double t, const ProblemConfig& cfg) {
    const double mu_a = cfg.mu1;
    const double mu_r = cfg.mu2;
    const double dp = cfg.p_in - cfg.p_out;
    return std::sqrt(mu_a * mu_a * cfg.l * cfg.l + 2.0 * (mu_r - mu_a) * cfg.k * dp * t);
}

} // namespace

double front_position(double t, const ProblemConfig& cfg) {
    if (t < 0.0) {
        std::ostringstream msg;
        msg << "front_position: t must be >= 0, got " << t;
        throw ConfigError(msg.str());
    }
    const double mu_a = cfg.mu1;
    const double mu_r = cfg.mu2;
    const double dp = cfg.p_in - cfg.p_out;
    if (std::abs(mu_r - mu_a) < 1e-12 * std::max(mu_r, mu_a)) {
        // equal-viscosity limit of the closed form
        return cfg.k * dp * t / (mu_a * cfg.l);
    }
    // Algebraically identical to (-mu_a l + sqrt(...)) / (mu_r - mu_a) but
    // free of cancellation near t = 0 (and exact at t = 0).
    const double s = filled_column(t, cfg);
    return 2.0 * cfg.k * dp * t / (s + mu_a * cfg.l);
}

double front_velocity(double t, const ProblemConfig& cfg) {
    const double dp = cfg.p_in - cfg.p_out;
    const double xf = front_position(t, cfg);
    return cfg.k * dp / (cfg.mu2 * xf + cfg.mu1 * (cfg.l - xf));
}

double pressure_exact(double x, double t, const ProblemConfig& cfg) {
    if (x < 0.0 || x > cfg.l || t < 0.0 || t > cfg.T) {
        std::ostringstream msg;
        msg << "pressure_exact: point (" << x << ", " << t << ") outside [0," << cfg.l
            << "]x[0," << cfg.T << "]";
        throw ConfigError(msg.str());
    }
    const double mu_a = cfg.mu1;
    const double mu_r = cfg.mu2;
    const double dp = cfg.p_in - cfg.p_out;
    const double xf = front_position(t, cfg);
    const double denom = (mu_r - mu_a) * xf + mu_a * cfg.l;
    if (x < xf) {
        return -mu_r * dp / denom * x + cfg.p_in;
    }
    return -mu_a * dp / denom * x + mu_a * dp / denom * cfg.l + cfg.p_out;
}

double fraction_exact(double x, double t, const ProblemConfig& cfg) {
    return x < front_position(t, cfg) ? 1.0 : 0.0;
}

FrontTrajectory front_trajectory(const ProblemConfig& cfg, int n_samples) {
    FrontTrajectory traj;
    traj.times.reserve(n_samples);
    traj.positions.reserve(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        const double t = cfg.T * i / (n_samples - 1);
        traj.times.push_back(t);
        traj.positions.push_back(front_position(t, cfg));
    }
    return traj;
}

std::optional<double> front_from_model(const NetworkParams& c_net, double t,
                                       const ProblemConfig& cfg, int grid_points,
                                       double tolerance) {
    Workspace ws;
    const auto level = [&](double x) { return forward_scalar(c_net, x, t, ws) - 0.5; };

    double x_prev = 0.0;
    double f_prev = level(x_prev);
    if (f_prev == 0.0) {
        return 0.0;
    }
    for (int i = 1; i < grid_points; ++i) {
        const double x = cfg.l * i / (grid_points - 1);
        const double f = level(x);
        if (f == 0.0) {
            return x;
        }
        if ((f_prev > 0.0) != (f > 0.0)) {
            // bisect the bracketing cell
            double lo = x_prev;
            double hi = x;
            double f_lo = f_prev;
            while (hi - lo > tolerance) {
                const double mid = 0.5 * (lo + hi);
                const double f_mid = level(mid);
                if (f_mid == 0.0) {
                    return mid;
                }
                if ((f_lo > 0.0) != (f_mid > 0.0)) {
                    hi = mid;
                } else {
                    lo = mid;
                    f_lo = f_mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        x_prev = x;
        f_prev = f;
    }
    return std::nullopt;
}

} // namespace pinnflow
