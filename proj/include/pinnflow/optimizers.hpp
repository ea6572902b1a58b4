#pragma once

#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace pinnflow {

struct AdamConfig {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int iterations = 5000;

    bool valid() const {
        return learning_rate > 0 && beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 &&
               epsilon > 0 && iterations >= 0;
    }
};

/// First/second moment estimates for Adam; one instance per parameter vector.
class AdamState {
public:
    explicit AdamState(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}
    long step_count() const { return step_; }

private:
    friend void adam_step(std::span<double>, std::span<const double>, AdamState&,
                          const AdamConfig&);
    std::vector<double> m_;
    std::vector<double> v_;
    long step_ = 0;
};

/// One bias-corrected Adam update in place. Throws NumericalError on a
/// non-finite gradient.
void adam_step(std::span<double> params, std::span<const double> grad, AdamState& state,
               const AdamConfig& cfg);

/// Objective callable: fills `grad` (same length as x) and returns the value.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

enum class QuasiNewtonStatus { GradientConverged, IterationLimit, LineSearchFailed, CallbackStopped };

/// What the per-iteration callback tells the optimizer.
enum class CallbackAction {
    Continue,
    ObjectiveChanged, ///< the callback mutated the objective: re-evaluate, drop curvature memory
    Stop,
};

/// Called once before the first step (iter = 0) and after every accepted
/// step. May mutate the objective's underlying data if it reports so.
using IterationCallback =
    std::function<CallbackAction(int iter, double f, std::span<const double> x)>;

struct QuasiNewtonOptions {
    int max_iterations = 1000;
    int memory = 50;
    double c1 = 1e-4; ///< sufficient-decrease constant
    double c2 = 0.9;  ///< curvature constant
    double gradient_tolerance = 1e-10;
    int max_line_search_steps = 60;
};

struct QuasiNewtonResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    QuasiNewtonStatus status = QuasiNewtonStatus::IterationLimit;
    /// Smallest s.y among stored curvature pairs (positive by construction);
    /// +inf when no pair was ever stored.
    double min_curvature = 0.0;
    int function_evaluations = 0;
};

/// Limited-memory BFGS with a strong-Wolfe line search. Accepted iterates
/// have non-increasing objective values; on line-search failure the best
/// iterate seen so far is returned with the corresponding status.
QuasiNewtonResult quasi_newton_minimize(const Objective& objective, std::span<const double> x0,
                                        const QuasiNewtonOptions& options = {},
                                        const IterationCallback& callback = {});

} // namespace pinnflow
