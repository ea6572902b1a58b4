#include "pinnflow/adaptivity.hpp"

#include "pinnflow/util.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace pinnflow {

DenseSet DenseSet::uniform_grid(const ProblemConfig& cfg, int n_x, int n_t) {
    DenseSet dense;
    dense.n_x = n_x;
    dense.n_t = n_t;
    dense.points = uniform_grid_points(cfg, n_x, n_t);
    return dense;
}

DenseSets make_dense_sets(const ProblemConfig& cfg, int n_x, int n_t) {
    DenseSets dense;
    dense.interior = DenseSet::uniform_grid(cfg, n_x, n_t);
    dense.c_boundary = fraction_condition_points(cfg, std::max(n_x, n_t));
    dense.p_boundary = pressure_condition_points(cfg, std::max(n_x, n_t));
    return dense;
}

DensityTable build_density(std::span<const double> residuals, double filter_epsilon) {
    static const std::unordered_set<int> no_exclusions;
    return build_density(residuals, filter_epsilon, no_exclusions);
}

DensityTable build_density(std::span<const double> residuals, double filter_epsilon,
                           const std::unordered_set<int>& excluded) {
    if (filter_epsilon <= 0.0) {
        throw ConfigError("build_density: filter_epsilon must be positive");
    }
    DensityTable table;
    table.filter_epsilon = filter_epsilon;
    table.probabilities.assign(residuals.size(), 0.0);

    double total = 0.0;
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        if (!std::isfinite(residuals[i])) {
            std::ostringstream msg;
            msg << "build_density: non-finite residual " << residuals[i] << " at index " << i;
            throw NumericalError(msg.str());
        }
        if (excluded.count(static_cast<int>(i)) != 0) {
            continue;
        }
        const double mass = std::max(std::log(std::abs(residuals[i]) / filter_epsilon), 0.0);
        table.probabilities[i] = mass;
        total += mass;
    }

    if (total <= 0.0) {
        table.all_below_threshold = true;
        table.probabilities.clear();
        return table;
    }
    for (double& p : table.probabilities) {
        p /= total;
    }
    return table;
}

std::vector<int> draw_indices(const DensityTable& density, int count, std::mt19937_64& rng,
                              int* short_draw) {
    if (short_draw != nullptr) {
        *short_draw = 0;
    }
    std::vector<int> out;
    if (count <= 0 || density.all_below_threshold) {
        if (short_draw != nullptr) {
            *short_draw = std::max(count, 0);
        }
        return out;
    }

    std::vector<double> mass(density.probabilities.begin(), density.probabilities.end());
    int support = 0;
    double total = 0.0;
    for (double m : mass) {
        if (m > 0.0) {
            ++support;
            total += m;
        }
    }
    const int n_draw = std::min(count, support);
    if (short_draw != nullptr) {
        *short_draw = count - n_draw;
    }
    out.reserve(n_draw);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int d = 0; d < n_draw; ++d) {
        const double target = unit(rng) * total;
        double acc = 0.0;
        int chosen = -1;
        for (std::size_t i = 0; i < mass.size(); ++i) {
            if (mass[i] <= 0.0) {
                continue;
            }
            acc += mass[i];
            if (target < acc) {
                chosen = static_cast<int>(i);
                break;
            }
        }
        if (chosen < 0) {
            // rounding pushed the target past the last positive mass
            for (int i = static_cast<int>(mass.size()) - 1; i >= 0; --i) {
                if (mass[i] > 0.0) {
                    chosen = i;
                    break;
                }
            }
        }
        out.push_back(chosen);
        total -= mass[chosen];
        mass[chosen] = 0.0;
    }
    return out;
}

std::vector<Point2> draw_points(const DensityTable& density, const DenseSet& dense, int count,
                                std::mt19937_64& rng, int* short_draw) {
    const std::vector<int> indices = draw_indices(density, count, rng, short_draw);
    std::vector<Point2> out;
    out.reserve(indices.size());
    for (int i : indices) {
        out.push_back(dense.points[i]);
    }
    return out;
}

DenseResiduals evaluate_dense_residuals(const FieldTriple& triple, const DenseSets& dense,
                                        const ProblemConfig& cfg, TaskPool* pool) {
    DenseResiduals out;
    const std::size_t n = dense.interior.points.size();
    out.f1.assign(n, 0.0);
    out.f2.assign(n, 0.0);
    out.f3.assign(n, 0.0);

    const int slices = slice_count(n);
    const auto run_slice = [&](int s) {
        Workspace ws_v, ws_p, ws_c;
        const std::size_t begin = static_cast<std::size_t>(s) * kBatchSliceSize;
        const std::size_t end = std::min(n, begin + kBatchSliceSize);
        for (std::size_t i = begin; i < end; ++i) {
            const double x = dense.interior.points[i][0];
            const double t = dense.interior.points[i][1];
            const FieldSample v = sample_scalar(triple.v, x, t, ws_v);
            const FieldSample p = sample_scalar(triple.p, x, t, ws_p);
            const FieldSample c = sample_scalar(triple.c, x, t, ws_c);
            const PdeResidualValues r = pde_residuals(v, p, c, cfg);
            out.f1[i] = r.f1;
            out.f2[i] = r.f2;
            out.f3[i] = r.f3;
        }
    };
    if (pool != nullptr) {
        pool->run(slices, run_slice);
    } else {
        for (int s = 0; s < slices; ++s) {
            run_slice(s);
        }
    }

    Workspace ws;
    out.r_c.reserve(dense.c_boundary.size());
    for (const auto& q : dense.c_boundary) {
        out.r_c.push_back(forward_scalar(triple.c, q.x, q.t, ws) - q.target);
    }
    out.r_p.reserve(dense.p_boundary.size());
    for (const auto& q : dense.p_boundary) {
        out.r_p.push_back(forward_scalar(triple.p, q.x, q.t, ws) - q.target);
    }
    out.r_v.reserve(dense.v_boundary.size());
    for (const auto& q : dense.v_boundary) {
        out.r_v.push_back(forward_scalar(triple.v, q.x, q.t, ws) * q.normal);
    }
    return out;
}

namespace {

double mean_abs(std::span<const double> values) {
    if (values.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (double v : values) {
        sum += std::abs(v);
    }
    return sum / static_cast<double>(values.size());
}

} // namespace

ResidualMeans residual_means(const DenseResiduals& residuals) {
    ResidualMeans means;
    means.mu_f1 = mean_abs(residuals.f1);
    means.mu_f2 = mean_abs(residuals.f2);
    means.mu_f3 = mean_abs(residuals.f3);
    means.mu_c = mean_abs(residuals.r_c);
    means.mu_p = mean_abs(residuals.r_p);
    means.mu_v = mean_abs(residuals.r_v);
    return means;
}

ResidualMeans residual_means(const FieldTriple& triple, const DenseSets& dense,
                             const ProblemConfig& cfg, TaskPool* pool) {
    if (dense.interior.points.empty()) {
        throw ConfigError("residual_means: dense interior set is empty");
    }
    return residual_means(evaluate_dense_residuals(triple, dense, cfg, pool));
}

bool should_stop(const ResidualMeans& means, int step, const AdaptivityConfig& acfg) {
    if (step >= acfg.max_steps) {
        return true;
    }
    const bool any_above = means.mu_f1 > acfg.eps_f1 || means.mu_f2 > acfg.eps_f2 ||
                           means.mu_f3 > acfg.eps_f3 || means.mu_v > acfg.eps_v ||
                           means.mu_c > acfg.eps_c || means.mu_p > acfg.eps_p;
    return !any_above;
}

namespace {

template <typename PointT, typename MakePoint>
void enrich_one_set(std::vector<PointT>& set, std::span<const double> residuals,
                    const AdaptivityConfig& acfg, std::mt19937_64& rng,
                    std::unordered_set<int>& drawn, std::vector<PointT>& added,
                    int& short_draws, const MakePoint& make_point) {
    const int room = acfg.max_points_per_set - static_cast<int>(set.size());
    const int request = std::min(acfg.points_per_step, std::max(room, 0));
    if (request <= 0) {
        return;
    }
    const DensityTable density = build_density(residuals, acfg.filter_epsilon, drawn);
    if (density.all_below_threshold) {
        return;
    }
    int short_draw = 0;
    const std::vector<int> indices = draw_indices(density, request, rng, &short_draw);
    short_draws += short_draw;
    for (int i : indices) {
        drawn.insert(i);
        added.push_back(make_point(i));
        set.push_back(added.back());
    }
}

} // namespace

EnrichmentLog enrichment_step(PointSets& sets, const FieldTriple& triple, const DenseSets& dense,
                              const ProblemConfig& cfg, const AdaptivityConfig& acfg,
                              std::mt19937_64& rng, DrawnIndexState& drawn, TaskPool* pool) {
    EnrichmentLog log;
    if (acfg.points_per_step <= 0) {
        return log;
    }
    const DenseResiduals residuals = evaluate_dense_residuals(triple, dense, cfg, pool);

    const auto interior_point = [&](int i) { return dense.interior.points[i]; };
    enrich_one_set(sets.f1_points, residuals.f1, acfg, rng, drawn.f1, log.added_f1,
                   log.short_draws, interior_point);
    enrich_one_set(sets.f2_points, residuals.f2, acfg, rng, drawn.f2, log.added_f2,
                   log.short_draws, interior_point);
    enrich_one_set(sets.f3_points, residuals.f3, acfg, rng, drawn.f3, log.added_f3,
                   log.short_draws, interior_point);
    enrich_one_set(sets.c_bc_points, residuals.r_c, acfg, rng, drawn.c_bc, log.added_c,
                   log.short_draws, [&](int i) { return dense.c_boundary[i]; });
    enrich_one_set(sets.p_bc_points, residuals.r_p, acfg, rng, drawn.p_bc, log.added_p,
                   log.short_draws, [&](int i) { return dense.p_boundary[i]; });
    return log;
}

} // namespace pinnflow
