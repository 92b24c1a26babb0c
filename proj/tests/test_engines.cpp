#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "zerobias/engine.hpp"
#include "zerobias/stages.hpp"
#include "zerobias/taps.hpp"

using namespace zerobias;

namespace {

// Brute-force quadrature oracle for P(r1 + r2 - 2 r3 < 0) with r1, r2, r3
// iid uniform: integrate P(r1 < 2 r3 - r2) = clamp(2 r3 - r2, 0, 1) over the
// unit square. Independent of the sampling implementation.
double negative_move_factor_probability() {
    constexpr int m = 4000;
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        const double r2 = (i + 0.5) / m;
        for (int j = 0; j < m; ++j) {
            const double r3 = (j + 0.5) / m;
            acc += std::clamp(2.0 * r3 - r2, 0.0, 1.0);
        }
    }
    return acc / (static_cast<double>(m) * m);
}

double sphere(const AgentVector& x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc;
}

}  // namespace

TEST_CASE("collision avoidance sweeps its factor from 2 to 0") {
    AgentVector x{3.0, -4.0};
    CHECK(stoa_collision_avoidance(x, 0, 100) == AgentVector{6.0, -8.0});
    CHECK(stoa_collision_avoidance(x, 100, 100) == AgentVector{0.0, -0.0});
    CHECK(stoa_collision_avoidance(AgentVector{10.0}, 50, 100) == AgentVector{10.0});
    CHECK_THROWS_AS(stoa_collision_avoidance(x, 0, 0), InvalidRange);
    CHECK_THROWS_AS(stoa_collision_avoidance(x, 101, 100), InvalidRange);
}

TEST_CASE("collision avoidance scales every coordinate by exactly |2 - 2t/T|") {
    RandomStream stream(5);
    for (std::uint64_t t = 0; t <= 40; ++t) {
        AgentVector x = draw_uniform(stream, 6, -100.0, 100.0);
        const double factor = 2.0 - 2.0 * static_cast<double>(t) / 40.0;
        AgentVector out = stoa_collision_avoidance(x, t, 40);
        double in_max = 0.0, out_max = 0.0;
        for (std::size_t d = 0; d < x.size(); ++d) {
            CHECK(out[d] == x[d] * factor);
            in_max = std::max(in_max, std::abs(x[d]));
            out_max = std::max(out_max, std::abs(out[d]));
        }
        CHECK(out_max == std::abs(factor) * in_max);
    }
}

TEST_CASE("convergence term vanishes at the best and stays in range") {
    RandomStream stream(8);
    AgentVector x{1.0, -2.0, 3.0};
    CHECK(stoa_convergence(x, x, stream) == AgentVector{0.0, 0.0, 0.0});

    for (int i = 0; i < 1000; ++i) {
        AgentVector out = stoa_convergence(AgentVector{0.0}, AgentVector{1.0}, stream);
        CHECK(out[0] >= 0.0);
        CHECK(out[0] <= 0.5);
    }
    CHECK_THROWS_AS(stoa_convergence(x, AgentVector{1.0}, stream), DimensionMismatch);
}

TEST_CASE("convergence term has mean 0.25 for a unit difference") {
    RandomStream stream(kDefaultSeed, 21);
    const std::size_t n = 1'000'000;
    double sum = 0.0;
    AgentVector zero{0.0};
    AgentVector one{1.0};
    for (std::size_t i = 0; i < n; ++i) sum += stoa_convergence(zero, one, stream)[0];
    CHECK(std::abs(sum / static_cast<double>(n) - 0.25) < 0.001);
}

TEST_CASE("step size is the elementwise sum") {
    CHECK(stoa_step(AgentVector{1.0}, AgentVector{2.0}) == AgentVector{3.0});
    AgentVector x{4.0, -5.0};
    CHECK(stoa_step(AgentVector{0.0, 0.0}, x) == x);
    CHECK(stoa_step(AgentVector{-1.0, 2.0}, AgentVector{1.0, -2.0}) == AgentVector{0.0, 0.0});
}

TEST_CASE("spiral draw endpoints") {
    const SpiralDraw at_zero = SpiralDraw::from_theta(0.0);
    CHECK(at_zero.rho == 1.0);
    CHECK(at_zero.alpha == 0.0);
    CHECK(at_zero.beta == 1.0);
    CHECK(at_zero.gamma == 0.0);

    const SpiralDraw at_limit = SpiralDraw::from_theta(2.0 * std::numbers::pi);
    CHECK(at_limit.rho == Catch::Approx(0.0019).margin(0.0001));

    // The uncorrected growing exponent would scale positions by ~535, far
    // outside any sensible box; documented here, never used by the engine.
    CHECK(std::abs(std::exp(2.0 * std::numbers::pi) - 535.49) < 0.01);
}

TEST_CASE("spiral draws respect the decaying-radius bounds") {
    RandomStream stream(kDefaultSeed, 22);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::size_t violations = 0;
    double rho_min = 1.0, rho_max = 0.0;
    for (int i = 0; i < 1'000'000; ++i) {
        const SpiralDraw s = stoa_spiral(stream);
        rho_min = std::min(rho_min, s.rho);
        rho_max = std::max(rho_max, s.rho);
        const bool ok = s.theta >= 0.0 && s.theta < two_pi && std::abs(s.alpha) <= s.rho &&
                        std::abs(s.beta) <= s.rho && s.gamma >= 0.0 &&
                        s.gamma <= two_pi * s.rho;
        if (!ok) ++violations;
    }
    CHECK(violations == 0);
    CHECK(rho_min >= 0.00186);
    CHECK(rho_max <= 1.0);
}

TEST_CASE("update stage multiplies best, step and the scalar spiral sum") {
    const SpiralDraw spiral = SpiralDraw::from_theta(1.3);
    AgentVector zeros{0.0, 0.0};
    CHECK(stoa_update(zeros, AgentVector{5.0, -2.0}, spiral) == zeros);

    const SpiralDraw at_zero = SpiralDraw::from_theta(0.0);
    CHECK(stoa_update(AgentVector{1.0}, AgentVector{1.0}, at_zero) == AgentVector{1.0});

    CHECK_THROWS_AS(stoa_update(AgentVector{1.0}, zeros, spiral), DimensionMismatch);
}

TEST_CASE("spiral sum obeys the rho(2 + 2pi) envelope") {
    // brute-force sweep of theta confirms the bound used in the update stage
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double worst = 0.0;
    for (int i = 0; i <= 1'000'000; ++i) {
        const double theta = two_pi * i / 1'000'000.0;
        const SpiralDraw s = SpiralDraw::from_theta(theta);
        worst = std::max(worst, std::abs(s.sum()) / (s.rho * (2.0 + two_pi)));
    }
    CHECK(worst <= 1.0);

    RandomStream stream(3);
    for (int i = 0; i < 1000; ++i) {
        AgentVector best = draw_uniform(stream, 4, -100.0, 100.0);
        AgentVector step = draw_uniform(stream, 4, -100.0, 100.0);
        const SpiralDraw s = stoa_spiral(stream);
        AgentVector out = stoa_update(best, step, s);
        for (std::size_t d = 0; d < 4; ++d) {
            CHECK(std::abs(out[d]) <=
                  std::abs(best[d]) * std::abs(step[d]) * (s.rho * (2.0 + two_pi)) + 1e-9);
        }
    }
}

TEST_CASE("move factor kernel hand evaluations") {
    CHECK(tsa_move_factor_value(0.5, 0.5, 0.5) == 0.0);
    CHECK(tsa_move_factor_value(1.0, 1.0, 0.5) == 0.5);
}

TEST_CASE("move factor sign split matches the quadrature oracle") {
    const double oracle = negative_move_factor_probability();
    CHECK(oracle == Catch::Approx(0.5).margin(1e-4));  // symmetric numerator

    RandomStream stream(kDefaultSeed, 23);
    const std::size_t n = 1'000'000;
    std::size_t negative = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (tsa_move_factor(stream, 1)[0] < 0.0) ++negative;
    }
    const double empirical = static_cast<double>(negative) / static_cast<double>(n);
    CHECK(std::abs(empirical - oracle) < 0.003);
}

TEST_CASE("tsa step size is non-negative") {
    RandomStream stream(17);
    CHECK(tsa_step(AgentVector{0.0, 0.0}, AgentVector{0.0, 0.0}, stream) ==
          AgentVector{0.0, 0.0});
    CHECK(tsa_step(AgentVector{1.0}, AgentVector{0.0}, stream) == AgentVector{1.0});
    std::size_t negatives = 0;
    for (int i = 0; i < 500'000; ++i) {
        AgentVector best = draw_uniform(stream, 2, -100.0, 100.0);
        AgentVector x = draw_uniform(stream, 2, -100.0, 100.0);
        AgentVector out = tsa_step(best, x, stream);
        if (out[0] < 0.0 || out[1] < 0.0) ++negatives;
    }
    CHECK(negatives == 0);
    CHECK_THROWS_AS(tsa_step(AgentVector{1.0}, AgentVector{1.0, 2.0}, stream),
                    DimensionMismatch);
}

TEST_CASE("vicinity update branches around the best") {
    RandomStream stream(19);
    AgentVector best{2.0, -1.0};
    CHECK(tsa_vicinity(best, AgentVector{0.0, 0.0}, AgentVector{9.0, 9.0}, stream) == best);

    for (int i = 0; i < 200; ++i) {
        AgentVector out =
            tsa_vicinity(AgentVector{0.0}, AgentVector{1.0}, AgentVector{1.0}, stream);
        CHECK((out[0] == 1.0 || out[0] == -1.0));
    }
}

TEST_CASE("vicinity update is centered on the best") {
    RandomStream stream(kDefaultSeed, 24);
    const std::size_t n = 1'000'000;
    AgentVector best{3.0};
    AgentVector a{0.8};
    AgentVector step{1.5};
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += tsa_vicinity(best, a, step, stream)[0];
    const double mean = sum / static_cast<double>(n);
    const double sigma = std::abs(a[0] * step[0]);  // out = best +/- a*step
    CHECK(std::abs(mean - best[0]) < 3.0 * sigma / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("swarm stage always contracts, never past half") {
    CHECK(tsa_swarm_value(0.0, 0.7) == 0.0);
    CHECK(tsa_swarm_value(2.0, 1.0) == 1.0);

    RandomStream stream(kDefaultSeed, 25);
    std::size_t violations = 0;
    for (int i = 0; i < 100'000; ++i) {
        const double x = stream.uniform(-100.0, 100.0);
        const double r3 = stream.next_double();
        const double out = tsa_swarm_value(x, r3);
        if (std::abs(out) > std::abs(x) || std::abs(out) < std::abs(x) / 2.0) ++violations;
    }
    CHECK(violations == 0);

    double sum = 0.0;
    const std::size_t n = 1'000'000;
    for (std::size_t i = 0; i < n; ++i) sum += 1.0 / (1.0 + stream.next_double());
    CHECK(std::abs(sum / static_cast<double>(n) - std::numbers::ln2) < 0.001);
}

TEST_CASE("stoa iterate advances the counter and rejects exhaustion") {
    EngineConfig config;
    config.population = 5;
    config.iterations = 3;
    config.dimension = 2;
    config.box = SearchBox::cube(2, -100.0, 100.0);
    config.seed = 1;
    StoaOptimizer opt(config);
    opt.step(sphere);
    CHECK(opt.iteration() == 1);
    opt.run(sphere);
    CHECK(opt.iteration() == 3);
    CHECK_THROWS_AS(opt.step(sphere), IterationExhausted);
}

TEST_CASE("best value is non-increasing for both engines") {
    EngineConfig config;
    config.population = 10;
    config.iterations = 50;
    config.dimension = 4;
    config.box = SearchBox::cube(4, -100.0, 100.0);
    config.seed = 77;

    for (EngineKind kind : {EngineKind::stoa, EngineKind::tsa, EngineKind::random_search}) {
        auto opt = make_optimizer(kind, config);
        double prev = std::numeric_limits<double>::infinity();
        for (int t = 0; t < 50; ++t) {
            opt->step(sphere);
            CHECK(opt->best_value() <= prev);
            prev = opt->best_value();
        }
    }
}

TEST_CASE("taps collect one sample per agent coordinate per iteration") {
    EngineConfig config;
    config.population = 7;
    config.iterations = 3;
    config.dimension = 5;
    config.box = SearchBox::cube(5, -100.0, 100.0);
    config.seed = 5;
    StoaOptimizer opt(config);
    TapSet taps = TapSet::all();
    opt.step(sphere, &taps);
    const std::size_t nd = config.population * config.dimension;
    CHECK(taps.tap(StageId::stoa_update).samples.size() +
              taps.tap(StageId::stoa_update).nonfinite ==
          nd);
    CHECK(taps.tap(StageId::stoa_ca).samples.size() == nd);
    CHECK(taps.tap(StageId::stoa_spiral_rho).samples.size() == config.population);
    opt.step(sphere, &taps);
    CHECK(taps.tap(StageId::stoa_ca).samples.size() == 2 * nd);
}

TEST_CASE("tsa swarm tap magnitudes never exceed vicinity tap magnitudes") {
    EngineConfig config;
    config.population = 6;
    config.iterations = 4;
    config.dimension = 3;
    config.box = SearchBox::cube(3, -100.0, 100.0);
    config.seed = 13;
    TsaOptimizer opt(config);
    TapSet taps({StageId::tsa_vicinity, StageId::tsa_swarm});
    opt.run(sphere, &taps);
    const auto& vicinity = taps.tap(StageId::tsa_vicinity).samples;
    const auto& swarm = taps.tap(StageId::tsa_swarm).samples;
    REQUIRE(vicinity.size() == swarm.size());
    for (std::size_t i = 0; i < swarm.size(); ++i) {
        CHECK(std::abs(swarm[i]) <= std::abs(vicinity[i]));
    }
}

TEST_CASE("identical seeds give bit-identical runs and traces") {
    EngineConfig config;
    config.population = 8;
    config.iterations = 20;
    config.dimension = 3;
    config.box = SearchBox::cube(3, -100.0, 100.0);
    config.seed = 31415;

    for (EngineKind kind : {EngineKind::stoa, EngineKind::tsa}) {
        auto a = make_optimizer(kind, config);
        auto b = make_optimizer(kind, config);
        TapSet ta = TapSet::all();
        TapSet tb = TapSet::all();
        a->run(sphere, &ta);
        b->run(sphere, &tb);
        CHECK(a->best_value() == b->best_value());
        CHECK(a->best_agent() == b->best_agent());
        REQUIRE(ta.rows().size() == tb.rows().size());
        for (std::size_t i = 0; i < ta.rows().size(); ++i) {
            CHECK(ta.rows()[i].value == tb.rows()[i].value);
        }
    }
}

TEST_CASE("record-only boundary counts excursions, clamp keeps agents inside") {
    EngineConfig config;
    config.population = 10;
    config.iterations = 10;
    config.dimension = 2;
    config.box = SearchBox::cube(2, -100.0, 100.0);
    config.seed = 99;
    config.boundary = BoundaryPolicy::record_only;

    StoaOptimizer loose(config);
    loose.run(sphere);
    CHECK(loose.out_of_bounds_events() > 0);  // the t=0 factor of 2 ejects agents

    config.boundary = BoundaryPolicy::clamp;
    StoaOptimizer clamped(config);
    clamped.run(sphere);
    for (const AgentVector& x : clamped.population()) {
        CHECK(config.box.contains(x));
    }
}

TEST_CASE("engine config validation") {
    EngineConfig config;
    config.population = 0;
    CHECK_THROWS_AS(config.validate(), InvalidRange);
    config.population = 5;
    config.dimension = 3;  // box still 10-dimensional
    CHECK_THROWS_AS(config.validate(), DimensionMismatch);
}
