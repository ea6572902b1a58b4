#pragma once

#include "pinnflow/network.hpp"
#include "pinnflow/physics.hpp"

#include <optional>
#include <vector>

namespace pinnflow {

/// Front positions sampled over time; positions are non-decreasing and
/// start at 0.
struct FrontTrajectory {
    std::vector<double> times;
    std::vector<double> positions;
};

/// Closed-form position of the fluid interface at time t for the 1D
/// constant-pressure filling problem. The displaced fluid carries mu1, the
/// injected fluid mu2. Valid while the front is inside the domain.
double front_position(double t, const ProblemConfig& cfg);

/// Closed-form pressure: piecewise linear in x with the kink at the front.
double pressure_exact(double x, double t, const ProblemConfig& cfg);

/// Indicator of the injected fluid: 1 behind the front, 0 ahead of it.
double fraction_exact(double x, double t, const ProblemConfig& cfg);

/// Darcy velocity of the exact solution (uniform in x at fixed t).
double front_velocity(double t, const ProblemConfig& cfg);

FrontTrajectory front_trajectory(const ProblemConfig& cfg, int n_samples);

/// Smallest x where the model's fraction field crosses 0.5 at time t,
/// located by a uniform scan plus bisection. Empty when the field stays on
/// one side of 0.5 over the whole grid.
std::optional<double> front_from_model(const NetworkParams& c_net, double t,
                                       const ProblemConfig& cfg, int grid_points = 1001,
                                       double tolerance = 1e-8);

} // namespace pinnflow
