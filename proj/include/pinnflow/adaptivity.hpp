#pragma once

#include "pinnflow/physics.hpp"

#include <cstdint>
#include <random>
#include <unordered_set>
#include <vector>

namespace pinnflow {

/// Fine uniform candidate grid over the space-time domain.
struct DenseSet {
    std::vector<Point2> points;
    int n_x = 0;
    int n_t = 0;

    static DenseSet uniform_grid(const ProblemConfig& cfg, int n_x, int n_t);
};

/// Dense candidate sets for every residual: the interior grid shared by the
/// three PDE residuals plus condition-point lines for c and p. The wall set
/// stays empty in 1D.
struct DenseSets {
    DenseSet interior;
    std::vector<BcPoint> c_boundary;
    std::vector<BcPoint> p_boundary;
    std::vector<WallPoint> v_boundary;
};

DenseSets make_dense_sets(const ProblemConfig& cfg, int n_x, int n_t);

/// Discrete sampling distribution over a dense set. When every residual is
/// at or below the filter threshold there is no distribution and
/// all_below_threshold is set instead.
struct DensityTable {
    std::vector<double> probabilities;
    double filter_epsilon = 0.0;
    bool all_below_threshold = false;
};

/// Unnormalized mass max(log(|r|/eps), 0) per point, normalized over the set.
DensityTable build_density(std::span<const double> residuals, double filter_epsilon);

/// Same, with excluded points forced to zero mass before normalization
/// (used to keep already-drawn candidates out of the pool).
DensityTable build_density(std::span<const double> residuals, double filter_epsilon,
                           const std::unordered_set<int>& excluded);

/// Draws distinct indices without replacement, probability proportional to
/// the table. Returns fewer than `count` when the positive support is
/// smaller; `short_draw` (if given) reports how many were unavailable.
std::vector<int> draw_indices(const DensityTable& density, int count, std::mt19937_64& rng,
                              int* short_draw = nullptr);

std::vector<Point2> draw_points(const DensityTable& density, const DenseSet& dense, int count,
                                std::mt19937_64& rng, int* short_draw = nullptr);

struct AdaptivityConfig {
    int max_steps = 60;           ///< M: adaptivity steps
    int iterations_per_step = 50; ///< n: optimizer iterations between enrichments
    double eps_f1 = 1e-3;
    double eps_f2 = 1e-3;
    double eps_f3 = 1e-3;
    double eps_v = 1e-3;
    double eps_c = 1e-3;
    double eps_p = 1e-3;
    double filter_epsilon = 1e-4;
    int points_per_step = 100;
    int max_points_per_set = 2500;
    int dense_n_x = 200;
    int dense_n_t = 200;

    bool valid() const {
        return max_steps >= 1 && iterations_per_step >= 1 && eps_f1 > 0 && eps_f2 > 0 &&
               eps_f3 > 0 && eps_v > 0 && eps_c > 0 && eps_p > 0 && filter_epsilon > 0 &&
               points_per_step >= 0 && max_points_per_set >= 0 && dense_n_x >= 2 &&
               dense_n_t >= 2;
    }
};

/// Residual magnitudes of the current fields over the dense sets.
struct DenseResiduals {
    std::vector<double> f1;
    std::vector<double> f2;
    std::vector<double> f3;
    std::vector<double> r_c;
    std::vector<double> r_p;
    std::vector<double> r_v;
};

DenseResiduals evaluate_dense_residuals(const FieldTriple& triple, const DenseSets& dense,
                                        const ProblemConfig& cfg, TaskPool* pool = nullptr);

/// Mean absolute residuals over the dense sets; the stopping quantities.
struct ResidualMeans {
    double mu_f1 = 0.0;
    double mu_f2 = 0.0;
    double mu_f3 = 0.0;
    double mu_v = 0.0;
    double mu_c = 0.0;
    double mu_p = 0.0;
};

ResidualMeans residual_means(const FieldTriple& triple, const DenseSets& dense,
                             const ProblemConfig& cfg, TaskPool* pool = nullptr);

ResidualMeans residual_means(const DenseResiduals& residuals);

/// True when the adaptivity loop should stop: the step budget is spent or
/// every mean is at or below its tolerance.
bool should_stop(const ResidualMeans& means, int step, const AdaptivityConfig& acfg);

/// Dense-set indices already drawn into each training set; keeps repeat
/// enrichments from re-adding the same candidates.
struct DrawnIndexState {
    std::unordered_set<int> f1;
    std::unordered_set<int> f2;
    std::unordered_set<int> f3;
    std::unordered_set<int> c_bc;
    std::unordered_set<int> p_bc;
};

/// Points added to each set by one enrichment event.
struct EnrichmentLog {
    std::vector<Point2> added_f1;
    std::vector<Point2> added_f2;
    std::vector<Point2> added_f3;
    std::vector<BcPoint> added_c;
    std::vector<BcPoint> added_p;
    int short_draws = 0; ///< points requested but unavailable across all sets

    int total_added() const {
        return static_cast<int>(added_f1.size() + added_f2.size() + added_f3.size() +
                                added_c.size() + added_p.size());
    }
};

/// One Algorithm-style enrichment: builds each residual's density over its
/// dense set and grows the matching training set in place. Sets never
/// shrink; a set whose residuals are all below the filter threshold is left
/// unchanged. Growth per set is capped at acfg.max_points_per_set.
EnrichmentLog enrichment_step(PointSets& sets, const FieldTriple& triple, const DenseSets& dense,
                              const ProblemConfig& cfg, const AdaptivityConfig& acfg,
                              std::mt19937_64& rng, DrawnIndexState& drawn,
                              TaskPool* pool = nullptr);

} // namespace pinnflow
