#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "zerobias/bench.hpp"

using namespace zerobias;

TEST_CASE("coverage probability closed form") {
    CHECK(coverage_probability({0.5, 10}, 1) == 0.5);
    CHECK(coverage_probability({0.5, 10}, 2) == 0.75);
    CHECK(coverage_probability({1.0, 10}, 1) == 1.0);
    CHECK(coverage_probability({1.0, 10}, 5) == 1.0);
    CHECK(std::abs(coverage_probability({0.01, 100}, 100) - 0.63396765872677050) < 1e-12);
    CHECK(coverage_probability({0.25, 10}, 0) == 0.0);  // extended domain

    CHECK_THROWS_AS(coverage_probability({0.5, 10}, 11), InvalidRange);
    CHECK_THROWS_AS(coverage_probability({0.0, 10}, 1), InvalidRange);
    CHECK_THROWS_AS(coverage_probability({1.5, 10}, 1), InvalidRange);
    CHECK_THROWS_AS(coverage_probability({0.5, 0}, 0), InvalidRange);
}

TEST_CASE("coverage probability is monotone and saturating") {
    const CoverageModel m{0.05, 200};
    double prev = 0.0;
    for (std::uint64_t t = 1; t <= 200; ++t) {
        const double p = coverage_probability(m, t);
        CHECK(p >= prev);
        CHECK(p <= 1.0);
        prev = p;
    }
    CHECK(prev > 0.9999);  // 1 - 0.95^200

    // monotone in the ratio as well
    CHECK(coverage_probability({0.1, 10}, 5) > coverage_probability({0.05, 10}, 5));
}

TEST_CASE("coverage closed form matches a Bernoulli simulation") {
    const CoverageModel m{0.01, 100};
    const double expected = coverage_probability(m, 100);
    RandomStream stream(kDefaultSeed, 51);
    const std::size_t trials = 1'000'000;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        for (std::uint64_t t = 0; t < m.horizon; ++t) {
            if (stream.next_double() < m.va_over_vs) {
                ++hits;
                break;
            }
        }
    }
    const double observed = static_cast<double>(hits) / static_cast<double>(trials);
    const double sigma = std::sqrt(expected * (1.0 - expected) / static_cast<double>(trials));
    CHECK(std::abs(observed - expected) < 3.0 * sigma);
}

TEST_CASE("benchmark problems evaluate their shifted base functions") {
    auto origin = BenchmarkProblem::shifted_cube(BaseFunction::sphere, 1, -100, 100, 0.0);
    CHECK(origin.evaluate(AgentVector{0.0}) == 0.0);

    auto shifted = BenchmarkProblem::shifted_cube(BaseFunction::sphere, 1, -100, 100, 50.0);
    CHECK(shifted.evaluate(AgentVector{50.0}) == 0.0);
    CHECK(shifted.evaluate(AgentVector{0.0}) == 2500.0);

    CHECK_THROWS_AS(shifted.evaluate(AgentVector{0.0, 0.0}), DimensionMismatch);
    // shift must be strictly interior
    CHECK_THROWS_AS(BenchmarkProblem::shifted_cube(BaseFunction::sphere, 2, -100, 100, 100.0),
                    InvalidRange);
}

TEST_CASE("evaluate is translation-consistent") {
    auto p0 = BenchmarkProblem::shifted_cube(BaseFunction::rastrigin, 3, -100, 100, 0.0);
    auto ps = BenchmarkProblem::shifted_cube(BaseFunction::rastrigin, 3, -100, 100, 37.5);
    RandomStream stream(kDefaultSeed, 52);
    for (int i = 0; i < 1000; ++i) {
        AgentVector x = draw_uniform(stream, 3, -100.0, 100.0);
        AgentVector moved(3);
        for (std::size_t d = 0; d < 3; ++d) moved[d] = x[d] - 37.5;
        CHECK(ps.evaluate(x) == p0.evaluate(moved));
    }
}

TEST_CASE("all base functions vanish only at the optimum") {
    RandomStream stream(kDefaultSeed, 53);
    for (BaseFunction base :
         {BaseFunction::sphere, BaseFunction::rastrigin, BaseFunction::abs_sum}) {
        auto problem = BenchmarkProblem::shifted_cube(base, 4, -100, 100, 25.0);
        CHECK(problem.evaluate(problem.shift) == 0.0);
        for (int i = 0; i < 2000; ++i) {
            AgentVector x = draw_uniform(stream, 4, -100.0, 100.0);
            if (x == problem.shift) continue;
            CHECK(problem.evaluate(x) > 0.0);
        }
    }
}

TEST_CASE("mann-whitney p-value matches the frozen reference") {
    const std::vector<double> a{1.1, 2.3, 3.1, 4.2, 5.5, 6.1, 7.3, 8.0};
    const std::vector<double> b{2.0, 3.5, 4.0, 5.0, 6.6, 7.7, 9.1, 10.2};
    // scipy.stats.mannwhitneyu(a, b, method="asymptotic"), two-sided with
    // continuity correction
    CHECK(mann_whitney_p(a, b) == Catch::Approx(0.43089704373626736).epsilon(1e-12));

    const std::vector<double> low{1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
    const std::vector<double> high{101.0, 102.0, 103.0, 104.0, 105.0, 106.0, 107.0, 108.0};
    CHECK(mann_whitney_p(low, high) < 0.001);

    const std::vector<double> tied(12, 3.0);
    CHECK(mann_whitney_p(tied, tied) == 1.0);

    CHECK_THROWS_AS(mann_whitney_p({}, high), InvalidRange);
}

TEST_CASE("run_experiment is deterministic and validates inputs") {
    auto problem = BenchmarkProblem::shifted_cube(BaseFunction::sphere, 4, -100, 100, 0.0);
    EngineConfig config;
    config.population = 8;
    config.iterations = 30;
    config.dimension = 4;
    config.box = SearchBox::cube(4, -100.0, 100.0);
    config.boundary = BoundaryPolicy::clamp;

    const std::vector<std::uint64_t> seeds{11, 3, 27, 8};
    ExperimentResult a = run_experiment(EngineKind::tsa, problem, config, seeds);
    ExperimentResult b = run_experiment(EngineKind::tsa, problem, config, seeds);
    REQUIRE(a.outcomes.size() == 4);
    CHECK(a.outcomes[0].seed == 3);  // sorted by seed
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a.outcomes[i].seed == b.outcomes[i].seed);
        CHECK(a.outcomes[i].final_best_value == b.outcomes[i].final_best_value);
        CHECK(a.outcomes[i].distance_to_optimum == b.outcomes[i].distance_to_optimum);
    }
    CHECK(a.median_best == b.median_best);

    // thread count must not change the outcome
    ExperimentResult c = run_experiment(EngineKind::tsa, problem, config, seeds, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a.outcomes[i].final_best_value == c.outcomes[i].final_best_value);
    }

    config.dimension = 5;
    config.box = SearchBox::cube(5, -100.0, 100.0);
    CHECK_THROWS_AS(run_experiment(EngineKind::tsa, problem, config, seeds),
                    DimensionMismatch);
    config.dimension = 4;
    config.box = SearchBox::cube(4, -100.0, 100.0);
    CHECK_THROWS_AS(
        run_experiment(EngineKind::tsa, problem, config, std::vector<std::uint64_t>{}),
        InvalidRange);
}

TEST_CASE("experiment statistics recompute bit-exactly from stored outcomes") {
    auto problem = BenchmarkProblem::shifted_cube(BaseFunction::abs_sum, 3, -100, 100, 10.0);
    EngineConfig config;
    config.population = 6;
    config.iterations = 20;
    config.dimension = 3;
    config.box = SearchBox::cube(3, -100.0, 100.0);
    config.boundary = BoundaryPolicy::clamp;
    const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    ExperimentResult r = run_experiment(EngineKind::stoa, problem, config, seeds);

    ExperimentResult copy = r;
    copy.mean_best = copy.median_best = copy.stddev_best = copy.mean_distance = -1.0;
    copy.recompute_statistics();
    CHECK(copy.mean_best == r.mean_best);
    CHECK(copy.median_best == r.median_best);
    CHECK(copy.stddev_best == r.stddev_best);
    CHECK(copy.mean_distance == r.mean_distance);
}

TEST_CASE("verdict on identical result sets is inconclusive") {
    ExperimentResult r;
    r.engine = EngineKind::stoa;
    r.base = BaseFunction::sphere;
    for (std::uint64_t i = 0; i < 10; ++i) {
        r.outcomes.push_back({i, 1.0 + 0.1 * static_cast<double>(i), 0.0});
    }
    r.recompute_statistics();
    const VerdictRecord v = zero_bias_verdict(r, r);
    CHECK(v.verdict == Verdict::inconclusive);
    CHECK(v.degradation_factor == 1.0);
}

TEST_CASE("verdict flags an extreme degradation") {
    ExperimentResult origin, shifted;
    origin.engine = shifted.engine = EngineKind::tsa;
    origin.base = shifted.base = BaseFunction::sphere;
    for (std::uint64_t i = 0; i < 12; ++i) {
        origin.outcomes.push_back({i, 1e-8 * (1.0 + static_cast<double>(i)), 0.0});
        shifted.outcomes.push_back({i, 1e3 * (1.0 + static_cast<double>(i)), 0.0});
    }
    origin.recompute_statistics();
    shifted.recompute_statistics();
    const VerdictRecord v = zero_bias_verdict(origin, shifted);
    CHECK(v.verdict == Verdict::biased);
    CHECK(v.degradation_factor > 1e10);
    CHECK(v.p_value < 0.01);
}

TEST_CASE("verdict validates comparability") {
    ExperimentResult a, b;
    a.engine = EngineKind::stoa;
    b.engine = EngineKind::tsa;
    a.outcomes.push_back({0, 1.0, 0.0});
    b.outcomes.push_back({0, 1.0, 0.0});
    a.recompute_statistics();
    b.recompute_statistics();
    CHECK_THROWS_AS(zero_bias_verdict(a, b), InvalidRange);

    b.engine = EngineKind::stoa;
    b.base = BaseFunction::abs_sum;
    CHECK_THROWS_AS(zero_bias_verdict(a, b), InvalidRange);

    b.base = a.base;
    b.outcomes.push_back({1, 2.0, 0.0});
    b.recompute_statistics();
    CHECK_THROWS_AS(zero_bias_verdict(a, b), InvalidRange);
}

TEST_CASE("random search cannot tell origin from shifted problems") {
    EngineConfig config;
    config.population = 10;
    config.iterations = 60;
    config.dimension = 5;
    config.box = SearchBox::cube(5, -100.0, 100.0);
    config.boundary = BoundaryPolicy::clamp;
    std::vector<std::uint64_t> seeds(16);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = 1000 + i;

    auto origin = BenchmarkProblem::shifted_cube(BaseFunction::sphere, 5, -100, 100, 0.0);
    auto moved = BenchmarkProblem::shifted_cube(BaseFunction::sphere, 5, -100, 100, 50.0);
    ExperimentResult r0 = run_experiment(EngineKind::random_search, origin, config, seeds);
    ExperimentResult rs = run_experiment(EngineKind::random_search, moved, config, seeds);
    const VerdictRecord v = zero_bias_verdict(r0, rs);
    CHECK(v.verdict == Verdict::inconclusive);
    CHECK(v.degradation_factor < 10.0);
}

TEST_CASE("biased engines favor the origin even at small scale") {
    EngineConfig config;
    config.population = 20;
    config.iterations = 150;
    config.dimension = 6;
    config.box = SearchBox::cube(6, -100.0, 100.0);
    config.boundary = BoundaryPolicy::clamp;
    std::vector<std::uint64_t> seeds(12);
    for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = 7000 + i;

    auto origin = BenchmarkProblem::shifted_cube(BaseFunction::sphere, 6, -100, 100, 0.0);
    auto moved = BenchmarkProblem::shifted_cube(BaseFunction::sphere, 6, -100, 100, 50.0);
    for (EngineKind kind : {EngineKind::stoa, EngineKind::tsa}) {
        ExperimentResult r0 = run_experiment(kind, origin, config, seeds);
        ExperimentResult rs = run_experiment(kind, moved, config, seeds);
        CHECK(r0.median_best < rs.median_best);
    }
}
