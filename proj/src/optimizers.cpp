#include "pinnflow/optimizers.hpp"

#include "pinnflow/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pinnflow {

void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               const AdamConfig& cfg) {
    if (params.size() != grad.size() || params.size() != state.m_.size()) {
        throw ConfigError("adam_step: parameter/gradient/state length mismatch");
    }
    for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!std::isfinite(grad[i])) {
            std::ostringstream msg;
            msg << "adam_step: non-finite gradient component " << grad[i] << " at index " << i
                << " (step " << state.step_ + 1 << ")";
            throw NumericalError(msg.str());
        }
    }
    ++state.step_;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m_[i] = cfg.beta1 * state.m_[i] + (1.0 - cfg.beta1) * grad[i];
        state.v_[i] = cfg.beta2 * state.v_[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double m_hat = state.m_[i] / bc1;
        const double v_hat = state.v_[i] / bc2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double inf_norm(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

struct CurvaturePair {
    std::vector<double> s;
    std::vector<double> y;
    double sy = 0.0;
};

// Two-loop recursion: d = -H g with H from the stored pairs.
void lbfgs_direction(const std::deque<CurvaturePair>& pairs, std::span<const double> g,
                     std::vector<double>& d) {
    d.assign(g.begin(), g.end());
    std::vector<double> alpha(pairs.size());
    for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
        alpha[i] = dot(pairs[i].s, d) / pairs[i].sy;
        for (std::size_t j = 0; j < d.size(); ++j) {
            d[j] -= alpha[i] * pairs[i].y[j];
        }
    }
    if (!pairs.empty()) {
        const double gamma = pairs.back().sy / dot(pairs.back().y, pairs.back().y);
        for (double& v : d) {
            v *= gamma;
        }
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double beta = dot(pairs[i].y, d) / pairs[i].sy;
        for (std::size_t j = 0; j < d.size(); ++j) {
            d[j] += (alpha[i] - beta) * pairs[i].s[j];
        }
    }
    for (double& v : d) {
        v = -v;
    }
}

// Cubic minimizer of the interpolant through (a, fa, ga) and (b, fb, gb),
// clipped inside the interval with a safeguard margin.
double cubic_step(double a, double fa, double ga, double b, double fb, double gb) {
    const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - ga * gb;
    const double lo = std::min(a, b);
    const double hi = std::max(a, b);
    double candidate;
    if (disc >= 0.0) {
        const double d2 = std::copysign(std::sqrt(disc), b - a);
        candidate = b - (b - a) * ((gb + d2 - d1) / (gb - ga + 2.0 * d2));
    } else {
        candidate = 0.5 * (a + b);
    }
    const double margin = 0.1 * (hi - lo);
    if (!std::isfinite(candidate) || candidate < lo + margin || candidate > hi - margin) {
        candidate = 0.5 * (a + b);
    }
    return candidate;
}

class LineSearch {
public:
    LineSearch(const Objective& objective, std::span<const double> x0, std::span<const double> d,
               double f0, double dphi0, std::vector<double>& x_buf, std::vector<double>& g_buf)
        : objective_(objective), x0_(x0), d_(d), f0_(f0), dphi0_(dphi0), x_(x_buf), g_(g_buf) {}

    int evaluations = 0;

    // phi(alpha) and phi'(alpha); leaves x_ and g_ at the trial point.
    double eval(double alpha, double& dphi) {
        for (std::size_t i = 0; i < x0_.size(); ++i) {
            x_[i] = x0_[i] + alpha * d_[i];
        }
        const double f = objective_(x_, g_);
        ++evaluations;
        dphi = dot(g_, d_);
        return f;
    }

    // Strong-Wolfe search; returns the accepted step or 0 on failure.
    double search(double alpha_init, double c1, double c2, int max_steps, double& f_out) {
        double alpha_prev = 0.0;
        double f_prev = f0_;
        double dphi_prev = dphi0_;
        double alpha = alpha_init;
        const double alpha_max = 1e10;

        for (int it = 0; it < max_steps; ++it) {
            double dphi;
            const double f = eval(alpha, dphi);
            if (!std::isfinite(f) || f > f0_ + c1 * alpha * dphi0_ || (it > 0 && f >= f_prev)) {
                return zoom(alpha_prev, f_prev, dphi_prev, alpha, f, dphi, c1, c2, max_steps,
                            f_out);
            }
            if (std::abs(dphi) <= -c2 * dphi0_) {
                f_out = f;
                return alpha;
            }
            if (dphi >= 0.0) {
                return zoom(alpha, f, dphi, alpha_prev, f_prev, dphi_prev, c1, c2, max_steps,
                            f_out);
            }
            alpha_prev = alpha;
            f_prev = f;
            dphi_prev = dphi;
            alpha = std::min(2.0 * alpha, alpha_max);
        }
        return 0.0;
    }

private:
    double zoom(double lo, double f_lo, double dphi_lo, double hi, double f_hi, double dphi_hi,
                double c1, double c2, int max_steps, double& f_out) {
        for (int it = 0; it < max_steps; ++it) {
            if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) {
                break;
            }
            double alpha;
            if (std::isfinite(f_hi) && std::isfinite(dphi_hi)) {
                alpha = cubic_step(lo, f_lo, dphi_lo, hi, f_hi, dphi_hi);
            } else {
                alpha = lo + 0.5 * (hi - lo);
            }
            double dphi;
            const double f = eval(alpha, dphi);
            if (!std::isfinite(f) || f > f0_ + c1 * alpha * dphi0_ || f >= f_lo) {
                hi = alpha;
                f_hi = f;
                dphi_hi = dphi;
            } else {
                if (std::abs(dphi) <= -c2 * dphi0_) {
                    f_out = f;
                    return alpha;
                }
                if (dphi * (hi - lo) >= 0.0) {
                    hi = lo;
                    f_hi = f_lo;
                    dphi_hi = dphi_lo;
                }
                lo = alpha;
                f_lo = f;
                dphi_lo = dphi;
            }
        }
        // Bracket exhausted without meeting the curvature condition; accept
        // the best point that still satisfies sufficient decrease, if any.
        if (std::isfinite(f_lo) && lo > 0.0 && f_lo <= f0_ + c1 * lo * dphi0_) {
            double dphi;
            f_out = eval(lo, dphi);
            return lo;
        }
        return 0.0;
    }

    const Objective& objective_;
    std::span<const double> x0_;
    std::span<const double> d_;
    double f0_;
    double dphi0_;
    std::vector<double>& x_;
    std::vector<double>& g_;
};

} // namespace

QuasiNewtonResult quasi_newton_minimize(const Objective& objective, std::span<const double> x0,
                                        const QuasiNewtonOptions& options,
                                        const IterationCallback& callback) {
    const std::size_t n = x0.size();
    QuasiNewtonResult result;
    result.x.assign(x0.begin(), x0.end());
    result.min_curvature = std::numeric_limits<double>::infinity();

    std::vector<double> g(n, 0.0);
    result.f = objective(result.x, g);
    ++result.function_evaluations;
    if (!std::isfinite(result.f)) {
        throw NumericalError("quasi_newton_minimize: objective non-finite at start");
    }

    std::deque<CurvaturePair> pairs;
    std::vector<double> d(n), x_trial(n), g_trial(n), x_prev(n), g_prev(n);

    const auto fire_callback = [&](int iter) -> CallbackAction {
        if (!callback) {
            return CallbackAction::Continue;
        }
        const CallbackAction action = callback(iter, result.f, result.x);
        if (action == CallbackAction::ObjectiveChanged) {
            pairs.clear();
            result.f = objective(result.x, g);
            ++result.function_evaluations;
        }
        return action;
    };

    if (fire_callback(0) == CallbackAction::Stop) {
        result.status = QuasiNewtonStatus::CallbackStopped;
        return result;
    }

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        if (inf_norm(g) <= options.gradient_tolerance) {
            result.status = QuasiNewtonStatus::GradientConverged;
            return result;
        }

        lbfgs_direction(pairs, g, d);
        double dphi0 = dot(g, d);
        if (dphi0 >= 0.0) {
            // Stale curvature made d non-descent; restart from steepest descent.
            pairs.clear();
            for (std::size_t i = 0; i < n; ++i) {
                d[i] = -g[i];
            }
            dphi0 = dot(g, d);
            if (dphi0 >= 0.0) {
                result.status = QuasiNewtonStatus::GradientConverged;
                return result;
            }
        }

        const double d_norm = std::sqrt(dot(d, d));
        const double alpha0 = pairs.empty() ? std::min(1.0, 1.0 / std::max(d_norm, 1e-30)) : 1.0;

        x_prev = result.x;
        g_prev = g;
        LineSearch search(objective, x_prev, d, result.f, dphi0, x_trial, g_trial);
        double f_new = result.f;
        const double alpha =
            search.search(alpha0, options.c1, options.c2, options.max_line_search_steps, f_new);
        result.function_evaluations += search.evaluations;
        if (alpha <= 0.0) {
            result.status = QuasiNewtonStatus::LineSearchFailed;
            return result;
        }

        result.x = x_trial;
        g = g_trial;
        result.f = f_new;
        result.iterations = iter + 1;

        CurvaturePair pair;
        pair.s.resize(n);
        pair.y.resize(n);
        double sy = 0.0;
        double ss = 0.0;
        double yy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            pair.s[i] = result.x[i] - x_prev[i];
            pair.y[i] = g[i] - g_prev[i];
            sy += pair.s[i] * pair.y[i];
            ss += pair.s[i] * pair.s[i];
            yy += pair.y[i] * pair.y[i];
        }
        pair.sy = sy;
        if (sy > 1e-10 * std::sqrt(ss) * std::sqrt(yy) && sy > 0.0) {
            result.min_curvature = std::min(result.min_curvature, sy);
            pairs.push_back(std::move(pair));
            if (static_cast<int>(pairs.size()) > options.memory) {
                pairs.pop_front();
            }
        }

        const CallbackAction action = fire_callback(iter + 1);
        if (action == CallbackAction::Stop) {
            result.status = QuasiNewtonStatus::CallbackStopped;
            return result;
        }
    }
    result.status = QuasiNewtonStatus::IterationLimit;
    return result;
}

} // namespace pinnflow
