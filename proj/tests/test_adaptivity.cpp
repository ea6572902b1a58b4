#include "pinnflow/adaptivity.hpp"
#include "pinnflow/util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace pinnflow;

namespace {

ProblemConfig reference_config() {
    return ProblemConfig{};
}

double probability_sum(const DensityTable& table) {
    double sum = 0.0;
    for (double p : table.probabilities) {
        sum += p;
    }
    return sum;
}

} // namespace

TEST_SUITE_BEGIN("adaptivity");

TEST_CASE("uniform residuals give the uniform density") {
    const double eps = 1e-4;
    const std::vector<double> residuals(50, std::exp(1.0) * eps);
    const DensityTable table = build_density(residuals, eps);
    REQUIRE_FALSE(table.all_below_threshold);
    for (double p : table.probabilities) {
        CHECK(p == doctest::Approx(1.0 / 50.0).epsilon(1e-14));
    }
}

TEST_CASE("two-point density puts all mass on the larger residual") {
    const double eps = 1e-3;
    const std::vector<double> residuals = {eps, std::exp(1.0) * eps};
    const DensityTable table = build_density(residuals, eps);
    REQUIRE_FALSE(table.all_below_threshold);
    CHECK(table.probabilities[0] == 0.0); // log(1) = 0 exactly
    CHECK(table.probabilities[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("all residuals at or below the filter raise the flag") {
    const double eps = 1e-4;
    const std::vector<double> residuals = {eps, 0.5 * eps, 0.0, -0.25 * eps};
    const DensityTable table = build_density(residuals, eps);
    CHECK(table.all_below_threshold);
    CHECK(table.probabilities.empty());
}

TEST_CASE("density normalizes to one and is zero under the filter") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double eps = 1e-2;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> residuals(400);
        for (double& r : residuals) {
            r = (unit(rng) - 0.5) * 0.2; // many below the filter
        }
        residuals[0] = 1.0; // guarantee positive mass
        const DensityTable table = build_density(residuals, eps);
        REQUIRE_FALSE(table.all_below_threshold);
        CHECK(std::abs(probability_sum(table) - 1.0) < 1e-12);
        for (std::size_t i = 0; i < residuals.size(); ++i) {
            CHECK(table.probabilities[i] >= 0.0);
            if (std::abs(residuals[i]) <= eps) {
                CHECK(table.probabilities[i] == 0.0);
            }
        }
    }
}

TEST_CASE("scaling residuals up strictly increases unnormalized mass above the filter") {
    const double eps = 1e-3;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double alpha = 3.0;
    for (int i = 0; i < 200; ++i) {
        const double r = unit(rng) * 0.5;
        const double mass = std::max(std::log(std::abs(r) / eps), 0.0);
        const double scaled = std::max(std::log(std::abs(alpha * r) / eps), 0.0);
        if (std::abs(r) > eps) {
            CHECK(scaled > mass);
        }
    }
}

TEST_CASE("non-finite residuals raise a numerical error") {
    const std::vector<double> residuals = {0.5, std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(build_density(residuals, 1e-4), NumericalError);
}

TEST_CASE("non-positive filter is a configuration error") {
    const std::vector<double> residuals = {0.5};
    CHECK_THROWS_AS(build_density(residuals, 0.0), ConfigError);
}

TEST_CASE("point-mass density always draws that point") {
    std::vector<double> residuals(10, 0.0);
    residuals[3] = 1.0;
    const DensityTable table = build_density(residuals, 1e-4);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 20; ++i) {
        const std::vector<int> drawn = draw_indices(table, 1, rng);
        REQUIRE(drawn.size() == 1);
        CHECK(drawn[0] == 3);
    }
}

TEST_CASE("zero-count draw is empty") {
    const std::vector<double> residuals = {1.0, 2.0};
    const DensityTable table = build_density(residuals, 1e-4);
    std::mt19937_64 rng(1);
    CHECK(draw_indices(table, 0, rng).empty());
}

TEST_CASE("draws are reproducible under a fixed seed and lie in the dense set") {
    const ProblemConfig cfg = reference_config();
    const DenseSet dense = DenseSet::uniform_grid(cfg, 20, 20);
    std::vector<double> residuals(dense.points.size());
    std::mt19937_64 noise(11);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& r : residuals) {
        r = unit(noise);
    }
    const DensityTable table = build_density(residuals, 1e-4);

    std::mt19937_64 rng_a(123);
    std::mt19937_64 rng_b(123);
    const std::vector<Point2> a = draw_points(table, dense, 25, rng_a);
    const std::vector<Point2> b = draw_points(table, dense, 25, rng_b);
    REQUIRE(a.size() == 25);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
        CHECK(a[i][0] >= 0.0);
        CHECK(a[i][0] <= cfg.l);
        CHECK(a[i][1] >= 0.0);
        CHECK(a[i][1] <= cfg.T);
    }
    // without replacement: all distinct
    std::set<std::pair<double, double>> unique;
    for (const auto& q : a) {
        unique.insert({q[0], q[1]});
    }
    CHECK(unique.size() == a.size());
}

TEST_CASE("oversized draw shrinks to the positive support with a warning count") {
    std::vector<double> residuals(6, 0.0);
    residuals[1] = 0.3;
    residuals[4] = 0.2;
    const DensityTable table = build_density(residuals, 1e-4);
    std::mt19937_64 rng(2);
    int short_draw = -1;
    const std::vector<int> drawn = draw_indices(table, 5, rng, &short_draw);
    CHECK(drawn.size() == 2);
    CHECK(short_draw == 3);
    CHECK(std::set<int>(drawn.begin(), drawn.end()) == std::set<int>({1, 4}));
}

TEST_CASE("draw frequencies follow the density") {
    // 100-point uniform density, 1e5 single draws: each frequency within 1%
    // absolute of 0.01.
    const int n = 100;
    const std::vector<double> residuals(n, std::exp(2.0) * 1e-4);
    const DensityTable table = build_density(residuals, 1e-4);
    std::mt19937_64 rng(31);
    std::vector<int> counts(n, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        ++counts[draw_indices(table, 1, rng)[0]];
    }
    for (int i = 0; i < n; ++i) {
        CHECK(std::abs(counts[i] / static_cast<double>(draws) - 0.01) < 0.01);
    }
}

TEST_CASE("residual means of an exact-zero field are zero") {
    DenseResiduals residuals;
    residuals.f1 = {0.0, 0.0};
    residuals.f2 = {0.0};
    residuals.f3 = {0.0, 0.0, 0.0};
    const ResidualMeans means = residual_means(residuals);
    CHECK(means.mu_f1 == 0.0);
    CHECK(means.mu_f2 == 0.0);
    CHECK(means.mu_f3 == 0.0);
    CHECK(means.mu_v == 0.0); // empty wall set
    CHECK(means.mu_c == 0.0);
    CHECK(means.mu_p == 0.0);
}

TEST_CASE("residual means take absolute values") {
    DenseResiduals residuals;
    residuals.f1 = {1.0, -1.0};
    residuals.f2 = {0.5, 0.5, -2.0};
    residuals.f3 = {0.0};
    const ResidualMeans means = residual_means(residuals);
    CHECK(means.mu_f1 == 1.0);
    CHECK(means.mu_f2 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(means.mu_f3 == 0.0);
}

TEST_CASE("dense residual evaluation matches the pointwise physics") {
    const ProblemConfig cfg = reference_config();
    const FieldTriple triple = make_field_triple(2, 6, 77);
    const DenseSets dense = make_dense_sets(cfg, 13, 9);
    const DenseResiduals residuals = evaluate_dense_residuals(triple, dense, cfg);
    REQUIRE(residuals.f1.size() == 13 * 9);

    Workspace ws_v, ws_p, ws_c;
    for (std::size_t i : {std::size_t(0), std::size_t(50), residuals.f1.size() - 1}) {
        const double x = dense.interior.points[i][0];
        const double t = dense.interior.points[i][1];
        const PdeResidualValues expect =
            pde_residuals(sample_scalar(triple.v, x, t, ws_v), sample_scalar(triple.p, x, t, ws_p),
                          sample_scalar(triple.c, x, t, ws_c), cfg);
        CHECK(residuals.f1[i] == expect.f1);
        CHECK(residuals.f2[i] == expect.f2);
        CHECK(residuals.f3[i] == expect.f3);
    }
    CHECK(residuals.r_v.empty());
    CHECK(residuals.r_c.size() == dense.c_boundary.size());
    CHECK(residuals.r_p.size() == dense.p_boundary.size());
}

TEST_CASE("should_stop honors the step budget and the tolerance conjunction") {
    AdaptivityConfig acfg;
    acfg.max_steps = 10;

    ResidualMeans high;
    high.mu_f1 = 1.0;
    CHECK(should_stop(high, 10, acfg));  // m = M stops regardless
    CHECK(should_stop(high, 11, acfg));

    ResidualMeans zero;
    CHECK(should_stop(zero, 3, acfg)); // all tolerances satisfied

    ResidualMeans one_bad;
    one_bad.mu_f1 = 2.0 * acfg.eps_f1;
    CHECK_FALSE(should_stop(one_bad, 3, acfg)); // one violation keeps going

    ResidualMeans bc_bad;
    bc_bad.mu_p = 2.0 * acfg.eps_p;
    CHECK_FALSE(should_stop(bc_bad, 3, acfg));
}

TEST_CASE("enrichment grows sets monotonically and respects the flag") {
    const ProblemConfig cfg = reference_config();
    const FieldTriple triple = make_field_triple(2, 8, 5);
    const DenseSets dense = make_dense_sets(cfg, 40, 40);

    PointSets sets;
    sets.f1_points = uniform_grid_points(cfg, 5, 5);
    sets.f2_points = sets.f1_points;
    sets.f3_points = sets.f1_points;
    sets.c_bc_points = fraction_condition_points(cfg, 5);
    sets.p_bc_points = pressure_condition_points(cfg, 5);
    const PointSets before = sets;

    AdaptivityConfig acfg;
    acfg.points_per_step = 30;
    acfg.max_points_per_set = 2500;

    std::mt19937_64 rng(17);
    DrawnIndexState drawn;
    const EnrichmentLog log = enrichment_step(sets, triple, dense, cfg, acfg, rng, drawn);

    // a fresh random triple has large residuals everywhere: all PDE sets grow
    CHECK(sets.f1_points.size() == before.f1_points.size() + 30);
    CHECK(sets.f2_points.size() == before.f2_points.size() + 30);
    CHECK(sets.f3_points.size() == before.f3_points.size() + 30);
    CHECK(log.added_f1.size() == 30);

    // pre-existing points are retained as a prefix
    for (std::size_t i = 0; i < before.f1_points.size(); ++i) {
        CHECK(sets.f1_points[i] == before.f1_points[i]);
    }
}

TEST_CASE("points_per_step zero leaves every set unchanged") {
    const ProblemConfig cfg = reference_config();
    const FieldTriple triple = make_field_triple(2, 8, 6);
    const DenseSets dense = make_dense_sets(cfg, 20, 20);

    PointSets sets;
    sets.f1_points = uniform_grid_points(cfg, 4, 4);
    sets.f2_points = sets.f1_points;
    sets.f3_points = sets.f1_points;
    const PointSets before = sets;

    AdaptivityConfig acfg;
    acfg.points_per_step = 0;

    std::mt19937_64 rng(18);
    DrawnIndexState drawn;
    const EnrichmentLog log = enrichment_step(sets, triple, dense, cfg, acfg, rng, drawn);
    CHECK(log.total_added() == 0);
    CHECK(sets.f1_points.size() == before.f1_points.size());
    CHECK(sets.f2_points.size() == before.f2_points.size());
    CHECK(sets.f3_points.size() == before.f3_points.size());
}

TEST_CASE("a below-threshold residual freezes only its own set") {
    const ProblemConfig cfg = reference_config();
    // v == 0 exactly: f3 = v_x = 0 everywhere (below any filter), while c
    // stays misfit so f1 keeps mass somewhere.
    FieldTriple triple = make_field_triple(2, 8, 7);
    NetworkSpec vspec = triple.v.spec();
    triple.v = NetworkParams(vspec); // all-zero weights, linear output -> v == 0

    const DenseSets dense = make_dense_sets(cfg, 30, 30);
    PointSets sets;
    sets.f1_points = uniform_grid_points(cfg, 4, 4);
    sets.f2_points = sets.f1_points;
    sets.f3_points = sets.f1_points;

    AdaptivityConfig acfg;
    acfg.points_per_step = 10;

    std::mt19937_64 rng(19);
    DrawnIndexState drawn;
    const std::size_t f3_before = sets.f3_points.size();
    const EnrichmentLog log = enrichment_step(sets, triple, dense, cfg, acfg, rng, drawn);
    CHECK(sets.f3_points.size() == f3_before); // f3 all below threshold
    CHECK(log.added_f3.empty());
    CHECK(sets.f1_points.size() > 16); // f1 residual is not flat zero
}

TEST_CASE("enrichment never re-adds an already drawn candidate") {
    const ProblemConfig cfg = reference_config();
    const FieldTriple triple = make_field_triple(2, 8, 8);
    const DenseSets dense = make_dense_sets(cfg, 12, 12);

    PointSets sets;
    sets.f1_points = {{0.5, 0.25}};
    sets.f2_points = sets.f1_points;
    sets.f3_points = sets.f1_points;

    AdaptivityConfig acfg;
    acfg.points_per_step = 60;

    std::mt19937_64 rng(20);
    DrawnIndexState drawn;
    for (int event = 0; event < 4; ++event) {
        enrichment_step(sets, triple, dense, cfg, acfg, rng, drawn);
    }
    std::set<std::pair<double, double>> unique;
    for (std::size_t i = 1; i < sets.f1_points.size(); ++i) { // skip the seed point
        const bool inserted =
            unique.insert({sets.f1_points[i][0], sets.f1_points[i][1]}).second;
        CHECK(inserted);
    }
}

TEST_CASE("growth stops at the per-set cap") {
    const ProblemConfig cfg = reference_config();
    const FieldTriple triple = make_field_triple(2, 8, 9);
    const DenseSets dense = make_dense_sets(cfg, 25, 25);

    PointSets sets;
    sets.f1_points = uniform_grid_points(cfg, 7, 7); // 49 points
    sets.f2_points = sets.f1_points;
    sets.f3_points = sets.f1_points;

    AdaptivityConfig acfg;
    acfg.points_per_step = 30;
    acfg.max_points_per_set = 60;

    std::mt19937_64 rng(21);
    DrawnIndexState drawn;
    enrichment_step(sets, triple, dense, cfg, acfg, rng, drawn);
    CHECK(sets.f1_points.size() == 60); // only 11 fit under the cap
    enrichment_step(sets, triple, dense, cfg, acfg, rng, drawn);
    CHECK(sets.f1_points.size() == 60); // capped: no further growth
}

TEST_SUITE_END();
