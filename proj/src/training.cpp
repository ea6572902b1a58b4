#include "pinnflow/training.hpp"

#include "pinnflow/util.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <random>
#include <sstream>

namespace pinnflow {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Flat-parameter view of the weighted cost over mutable point sets.
struct TripleObjective {
    FieldTriple& triple;
    PointSets& sets;
    const CostWeights& weights;
    const ProblemConfig& cfg;
    TaskPool* pool;
    CostBreakdown last_breakdown;

    double operator()(std::span<const double> x, std::span<double> grad) {
        triple.from_flat(x);
        last_breakdown = assemble_cost_gradient(triple, sets, weights, cfg, grad, pool);
        return last_breakdown.total;
    }
};

struct Runner {
    const ProblemConfig& cfg;
    const CostWeights& weights;
    const AdamConfig& adam;
    const TrainingSchedule& schedule;
    const TrainOptions& options;
    std::uint64_t seed;

    TrainResult result = {};
    PointSets sets = {};
    PointSets test_sets = {};
    std::unique_ptr<TaskPool> pool = {};
    Clock::time_point start = Clock::now();

    void init(int grid_n) {
        if (!cfg.valid()) {
            throw ConfigError("train: invalid problem configuration");
        }
        if (!weights.valid()) {
            throw ConfigError("train: invalid cost weights");
        }
        if (!adam.valid()) {
            throw ConfigError("train: invalid Adam configuration");
        }
        if (!schedule.valid()) {
            throw ConfigError("train: invalid training schedule");
        }
        pool = std::make_unique<TaskPool>(std::max(options.threads, 1));
        result.triple =
            make_field_triple(schedule.hidden_layers, schedule.hidden_width, derive_seed(seed, 1));

        const int bc_n = schedule.bc_points_per_edge > 0 ? schedule.bc_points_per_edge : grid_n;
        sets.f1_points = uniform_grid_points(cfg, grid_n, grid_n);
        sets.f2_points = sets.f1_points;
        sets.f3_points = sets.f1_points;
        sets.c_bc_points = fraction_condition_points(cfg, bc_n);
        sets.p_bc_points = pressure_condition_points(cfg, bc_n);

        test_sets = make_test_sets(cfg, schedule.test_interior_points,
                                   schedule.test_bc_points_per_edge, derive_seed(seed, 2));
    }

    double test_cost() {
        return assemble_cost(result.triple, test_sets, weights, cfg, pool.get()).total;
    }

    void record(int iteration, TrainPhase phase, const CostBreakdown& train) {
        TrainRecord rec;
        rec.iteration = iteration;
        rec.phase = phase;
        rec.train_cost = train.total;
        rec.components = train;
        rec.test_cost = test_cost();
        rec.wall_seconds = seconds_since(start);
        rec.n_f1 = static_cast<int>(sets.f1_points.size());
        rec.n_f2 = static_cast<int>(sets.f2_points.size());
        rec.n_f3 = static_cast<int>(sets.f3_points.size());
        result.records.push_back(rec);
    }

    void adam_phase(TripleObjective& objective, std::vector<double>& theta) {
        AdamState state(theta.size());
        std::vector<double> grad(theta.size(), 0.0);
        for (int it = 0; it < adam.iterations; ++it) {
            const double f = objective(theta, grad);
            if (!std::isfinite(f)) {
                throw NumericalError("adam phase: non-finite cost");
            }
            if (it % schedule.adam_log_every == 0) {
                record(it, TrainPhase::Adam, objective.last_breakdown);
            }
            adam_step(theta, grad, state, adam);
        }
    }

};

} // namespace

PointSets make_test_sets(const ProblemConfig& cfg, int interior_points, int bc_points_per_edge,
                         std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, cfg.l);
    std::uniform_real_distribution<double> ut(0.0, cfg.T);

    PointSets sets;
    sets.f1_points.reserve(interior_points);
    for (int i = 0; i < interior_points; ++i) {
        const double x = ux(rng);
        const double t = ut(rng);
        sets.f1_points.push_back({x, t});
    }
    sets.f2_points = sets.f1_points;
    sets.f3_points = sets.f1_points;

    sets.c_bc_points.reserve(2 * bc_points_per_edge);
    for (int i = 0; i < bc_points_per_edge; ++i) {
        sets.c_bc_points.push_back({0.0, ut(rng), 1.0});
    }
    for (int i = 0; i < bc_points_per_edge; ++i) {
        sets.c_bc_points.push_back({ux(rng), 0.0, 0.0});
    }
    sets.p_bc_points.reserve(2 * bc_points_per_edge);
    for (int i = 0; i < bc_points_per_edge; ++i) {
        sets.p_bc_points.push_back({0.0, ut(rng), cfg.p_in});
        sets.p_bc_points.push_back({cfg.l, ut(rng), cfg.p_out});
    }
    return sets;
}

TrainResult train_fixed(const ProblemConfig& cfg, const CostWeights& weights,
                        const AdamConfig& adam, const TrainingSchedule& schedule,
                        std::uint64_t seed, const TrainOptions& options) {
    Runner run{cfg, weights, adam, schedule, options, seed};
    run.init(schedule.fixed_grid_n);

    std::vector<double> theta(run.result.triple.parameter_count());
    run.result.triple.to_flat(theta);
    TripleObjective objective{run.result.triple, run.sets, weights, cfg, run.pool.get(), {}};

    try {
        run.adam_phase(objective, theta);

        QuasiNewtonOptions qn;
        qn.max_iterations = schedule.bfgs_max_iterations;
        qn.memory = schedule.bfgs_memory;
        qn.gradient_tolerance = schedule.bfgs_gradient_tolerance;

        const auto callback = [&](int iter, double /*f*/, std::span<const double> x)
            -> CallbackAction {
            run.result.triple.from_flat(x);
            run.record(iter, TrainPhase::QuasiNewton, objective.last_breakdown);
            return CallbackAction::Continue;
        };

        const Objective bound = [&](std::span<const double> x, std::span<double> g) {
            return objective(x, g);
        };
        const QuasiNewtonResult qn_result = quasi_newton_minimize(bound, theta, qn, callback);
        run.result.triple.from_flat(qn_result.x);
        std::ostringstream detail;
        detail << "quasi-newton stop: " << static_cast<int>(qn_result.status) << " after "
               << qn_result.iterations << " iterations";
        run.result.detail = detail.str();
        run.result.status = TrainStatus::Completed;
    } catch (const NumericalError& err) {
        run.result.status = TrainStatus::Diverged;
        run.result.detail = err.what();
    }
    run.result.final_sets = run.sets;
    run.result.wall_seconds = seconds_since(run.start);
    return run.result;
}

TrainResult train_adaptive(const ProblemConfig& cfg, const CostWeights& weights,
                           const AdamConfig& adam, const AdaptivityConfig& acfg,
                           const TrainingSchedule& schedule, std::uint64_t seed,
                           const TrainOptions& options) {
    if (!acfg.valid()) {
        throw ConfigError("train_adaptive: invalid adaptivity configuration");
    }
    Runner run{cfg, weights, adam, schedule, options, seed};
    run.init(schedule.adaptive_grid_n);

    const DenseSets dense = make_dense_sets(cfg, acfg.dense_n_x, acfg.dense_n_t);
    std::mt19937_64 enrich_rng(derive_seed(seed, 3));
    DrawnIndexState drawn;

    std::vector<double> theta(run.result.triple.parameter_count());
    run.result.triple.to_flat(theta);
    TripleObjective objective{run.result.triple, run.sets, weights, cfg, run.pool.get(), {}};

    try {
        run.adam_phase(objective, theta);

        QuasiNewtonOptions qn;
        qn.max_iterations =
            std::min(schedule.bfgs_max_iterations, acfg.max_steps * acfg.iterations_per_step);
        qn.memory = schedule.bfgs_memory;
        qn.gradient_tolerance = schedule.bfgs_gradient_tolerance;

        int event_index = 0;
        bool stop_requested = false;
        std::string stop_reason;

        const auto callback = [&](int iter, double /*f*/, std::span<const double> x)
            -> CallbackAction {
            run.result.triple.from_flat(x);
            CallbackAction action = CallbackAction::Continue;

            if (iter % acfg.iterations_per_step == 0) {
                const int step = iter / acfg.iterations_per_step;
                const ResidualMeans means =
                    residual_means(run.result.triple, dense, cfg, run.pool.get());
                if (should_stop(means, step, acfg)) {
                    std::ostringstream reason;
                    reason << "adaptivity stop at step " << step << " (iteration " << iter << ")";
                    stop_reason = reason.str();
                    stop_requested = true;
                    run.record(iter, TrainPhase::QuasiNewton, objective.last_breakdown);
                    return CallbackAction::Stop;
                }
                const EnrichmentLog log = enrichment_step(run.sets, run.result.triple, dense, cfg,
                                                          acfg, enrich_rng, drawn,
                                                          run.pool.get());
                if (run.options.on_enrichment) {
                    run.options.on_enrichment(event_index, iter, run.sets, log);
                }
                ++event_index;
                if (log.total_added() > 0) {
                    // The cost landscape changed; cached curvature is stale.
                    std::vector<double> grad_scratch(theta.size());
                    objective(x, grad_scratch);
                    action = CallbackAction::ObjectiveChanged;
                }
            }

            run.record(iter, TrainPhase::QuasiNewton, objective.last_breakdown);
            return action;
        };

        const Objective bound = [&](std::span<const double> x, std::span<double> g) {
            return objective(x, g);
        };
        const QuasiNewtonResult qn_result = quasi_newton_minimize(bound, theta, qn, callback);
        run.result.triple.from_flat(qn_result.x);
        if (stop_requested) {
            run.result.detail = stop_reason;
        } else {
            std::ostringstream detail;
            detail << "quasi-newton stop: " << static_cast<int>(qn_result.status) << " after "
                   << qn_result.iterations << " iterations";
            run.result.detail = detail.str();
        }
        run.result.status = TrainStatus::Completed;
    } catch (const NumericalError& err) {
        run.result.status = TrainStatus::Diverged;
        run.result.detail = err.what();
    }
    run.result.final_sets = run.sets;
    run.result.wall_seconds = seconds_since(run.start);
    return run.result;
}

} // namespace pinnflow
