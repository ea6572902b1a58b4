#include "pinnflow/manifest.hpp"
#include "pinnflow/util.hpp"

#include <doctest.h>

#include <string>

using namespace pinnflow;

TEST_SUITE_BEGIN("manifest");

TEST_CASE("empty config yields the reference defaults") {
    const RunManifest m = parse_manifest("");
    CHECK(m.mode == RunMode::Fixed);
    CHECK(m.seed == 0);
    CHECK(m.problem.l == 1.0);
    CHECK(m.problem.T == 0.5);
    CHECK(m.problem.k == 1.0);
    CHECK(m.problem.mu1 == 1e-5);
    CHECK(m.problem.mu2 == 1.0);
    CHECK(m.problem.p_in == 1.0);
    CHECK(m.problem.p_out == 0.0);
    CHECK(m.weights.lambda_1 == 1.0);
    CHECK(m.adam.learning_rate == 0.001);
    CHECK(m.adam.iterations == 5000);
    CHECK(m.adaptivity.iterations_per_step == 50);
    CHECK(m.adaptivity.max_points_per_set == 2500);
    CHECK(m.schedule.fixed_grid_n == 50);
    CHECK(m.schedule.adaptive_grid_n == 40);
    CHECK(m.schedule.test_interior_points == 1000);
}

TEST_CASE("sections and comments parse") {
    const std::string text = R"(# experiment
mode = adaptive
seed = 17

[problem]
mu2 = 2.5   # heavier resin

[adam]
iterations = 100
)";
    const RunManifest m = parse_manifest(text);
    CHECK(m.mode == RunMode::Adaptive);
    CHECK(m.seed == 17);
    CHECK(m.problem.mu2 == 2.5);
    CHECK(m.problem.mu1 == 1e-5); // untouched default
    CHECK(m.adam.iterations == 100);
}

TEST_CASE("omitted beta1 keeps its documented default") {
    const RunManifest m = parse_manifest("[adam]\nlearning_rate = 0.01\n");
    CHECK(m.adam.beta1 == 0.9);
    CHECK(m.adam.beta2 == 0.999);
    CHECK(m.adam.epsilon == 1e-8);
}

TEST_CASE("invalid values raise errors naming the key") {
    CHECK_THROWS_WITH_AS(parse_manifest("[problem]\nmu1 = -1\n"),
                         doctest::Contains("problem.mu1"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_manifest("[problem]\nk = abc\n"),
                         doctest::Contains("problem.k"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_manifest("[adam]\nbeta1 = 1.5\n"),
                         doctest::Contains("adam.beta1"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_manifest("mode = sometimes\n"), doctest::Contains("mode"),
                         ConfigError);
}

TEST_CASE("unknown keys and malformed lines are rejected") {
    CHECK_THROWS_AS(parse_manifest("[problem]\nviscosity = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_manifest("[nonsense]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_manifest("just words\n"), ConfigError);
    CHECK_THROWS_AS(parse_manifest("= 3\n"), ConfigError);
}

TEST_CASE("pressure ordering is validated") {
    CHECK_THROWS_WITH_AS(parse_manifest("[problem]\np_in = 0\np_out = 1\n"),
                         doctest::Contains("p_in"), ConfigError);
}

TEST_CASE("manifest round-trips through its text form") {
    RunManifest m;
    m.mode = RunMode::Adaptive;
    m.seed = 99;
    m.problem.mu2 = 3.75;
    m.adam.learning_rate = 0.0025;
    m.adaptivity.points_per_step = 37;
    m.schedule.hidden_width = 13;

    const RunManifest parsed = parse_manifest(manifest_to_text(m));
    CHECK(parsed.mode == m.mode);
    CHECK(parsed.seed == m.seed);
    CHECK(parsed.problem.mu2 == m.problem.mu2);
    CHECK(parsed.adam.learning_rate == m.adam.learning_rate);
    CHECK(parsed.adaptivity.points_per_step == m.adaptivity.points_per_step);
    CHECK(parsed.schedule.hidden_width == m.schedule.hidden_width);
}

TEST_SUITE_END();
