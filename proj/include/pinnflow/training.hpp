#pragma once

#include "pinnflow/adaptivity.hpp"
#include "pinnflow/optimizers.hpp"
#include "pinnflow/physics.hpp"

#include <functional>
#include <string>
#include <vector>

namespace pinnflow {

/// Network size, grid sizes and phase budgets shared by both experiments.
struct TrainingSchedule {
    int hidden_layers = 5;
    int hidden_width = 20;
    int fixed_grid_n = 50;    ///< fixed mode: n x n collocation grid
    int adaptive_grid_n = 40; ///< adaptive mode: starting n x n grid
    int bc_points_per_edge = 0; ///< 0 means match the active grid size
    int bfgs_max_iterations = 3000;
    int bfgs_memory = 50;
    int adam_log_every = 10;
    int test_interior_points = 1000;
    int test_bc_points_per_edge = 100;
    double bfgs_gradient_tolerance = 1e-10;

    bool valid() const {
        return hidden_layers >= 1 && hidden_width >= 1 && fixed_grid_n >= 2 &&
               adaptive_grid_n >= 2 && bc_points_per_edge >= 0 && bfgs_max_iterations >= 0 &&
               bfgs_memory >= 1 && adam_log_every >= 1 && test_interior_points >= 1 &&
               test_bc_points_per_edge >= 1 && bfgs_gradient_tolerance > 0;
    }
};

enum class TrainPhase { Adam, QuasiNewton };

/// One logged training step.
struct TrainRecord {
    int iteration = 0; ///< per-phase iteration index
    TrainPhase phase = TrainPhase::Adam;
    double train_cost = 0.0;
    double test_cost = 0.0;
    CostBreakdown components;
    double wall_seconds = 0.0;
    int n_f1 = 0;
    int n_f2 = 0;
    int n_f3 = 0;
};

enum class TrainStatus { Completed, Diverged };

struct TrainResult {
    FieldTriple triple;
    std::vector<TrainRecord> records;
    TrainStatus status = TrainStatus::Completed;
    PointSets final_sets;
    double wall_seconds = 0.0;
    std::string detail; ///< stop reason / divergence diagnostic
};

/// Notified after each enrichment event with the grown sets and the added
/// points (fires even when nothing could be added).
using EnrichmentObserver = std::function<void(int event_index, int bfgs_iteration,
                                              const PointSets& sets, const EnrichmentLog& log)>;

struct TrainOptions {
    int threads = 1;
    EnrichmentObserver on_enrichment;
};

/// Held-out evaluation sets: random interior points shared by the three PDE
/// residuals plus random condition points, all from the given seed.
PointSets make_test_sets(const ProblemConfig& cfg, int interior_points, int bc_points_per_edge,
                         std::uint64_t seed);

/// Classical schedule: one n x n grid for all three PDE residuals, Adam then
/// quasi-Newton, collocation sets never change.
TrainResult train_fixed(const ProblemConfig& cfg, const CostWeights& weights,
                        const AdamConfig& adam, const TrainingSchedule& schedule,
                        std::uint64_t seed, const TrainOptions& options = {});

/// Residual-based adaptive schedule: Adam on the starting grid, then
/// quasi-Newton with an enrichment event every `iterations_per_step`
/// iterations, stopping on the step budget or the residual-mean tolerances.
TrainResult train_adaptive(const ProblemConfig& cfg, const CostWeights& weights,
                           const AdamConfig& adam, const AdaptivityConfig& acfg,
                           const TrainingSchedule& schedule, std::uint64_t seed,
                           const TrainOptions& options = {});

} // namespace pinnflow
