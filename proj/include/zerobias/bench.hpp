#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "zerobias/core.hpp"
#include "zerobias/engine.hpp"

namespace zerobias {

// ---------------------------------------------------------------------------
// Test problems with translatable optima
// ---------------------------------------------------------------------------

enum class BaseFunction { sphere, rastrigin, abs_sum };

inline constexpr std::string_view base_function_name(BaseFunction f) {
    switch (f) {
        case BaseFunction::sphere: return "sphere";
        case BaseFunction::rastrigin: return "rastrigin";
        case BaseFunction::abs_sum: return "abs-sum";
    }
    return "unknown";
}

inline std::optional<BaseFunction> base_function_from_name(std::string_view name) {
    if (name == "sphere") return BaseFunction::sphere;
    if (name == "rastrigin") return BaseFunction::rastrigin;
    if (name == "abs-sum" || name == "abs_sum") return BaseFunction::abs_sum;
    return std::nullopt;
}

/// Separable test problem whose optimum sits at `shift` (value 0 there,
/// strictly positive everywhere else).
struct BenchmarkProblem {
    std::string name;
    BaseFunction base = BaseFunction::sphere;
    SearchBox box = SearchBox::cube(1, -100.0, 100.0);
    AgentVector shift;

    BenchmarkProblem(BaseFunction base_fn, SearchBox search_box, AgentVector optimum)
        : base(base_fn), box(std::move(search_box)), shift(std::move(optimum)) {
        box.require_dimension(shift);
        for (std::size_t d = 0; d < shift.size(); ++d) {
            if (!(shift[d] > box.lower[d] && shift[d] < box.upper[d])) {
                throw InvalidRange("optimum shift must lie strictly inside the box");
            }
        }
        name = std::string(base_function_name(base));
    }

    static BenchmarkProblem shifted_cube(BaseFunction base_fn, std::size_t dim,
                                         double box_lo, double box_hi,
                                         double shift_magnitude) {
        return BenchmarkProblem(base_fn, SearchBox::cube(dim, box_lo, box_hi),
                                AgentVector(dim, shift_magnitude));
    }

    std::size_t dimension() const { return box.dimension(); }

    double evaluate(const AgentVector& x) const {
        box.require_dimension(x);
        double acc = 0.0;
        for (std::size_t d = 0; d < x.size(); ++d) {
            const double z = x[d] - shift[d];
            switch (base) {
                case BaseFunction::sphere:
                    acc += z * z;
                    break;
                case BaseFunction::rastrigin:
                    acc += z * z - 10.0 * std::cos(2.0 * std::numbers::pi * z) + 10.0;
                    break;
                case BaseFunction::abs_sum:
                    acc += std::abs(z);
                    break;
            }
        }
        return acc;
    }

    Objective objective() const {
        return [this](const AgentVector& x) { return evaluate(x); };
    }
};

// ---------------------------------------------------------------------------
// Random-search coverage model
// ---------------------------------------------------------------------------

/// P(t) = 1 - (1 - Va/Vs)^t: probability that uniform deployment has hit the
/// optimum-containing region by iteration t.
struct CoverageModel {
    double va_over_vs = 0.01;
    std::uint64_t horizon = 100;

    void validate() const {
        if (!(va_over_vs > 0.0) || !(va_over_vs <= 1.0)) {
            throw InvalidRange("coverage ratio must lie in (0, 1]");
        }
        if (horizon == 0) throw InvalidRange("coverage horizon must be >= 1");
    }
};

/// Defined for 0 <= t <= horizon; t = 0 returns 0 (extended domain).
inline double coverage_probability(const CoverageModel& model, std::uint64_t t) {
    model.validate();
    if (t > model.horizon) throw InvalidRange("t exceeds the coverage horizon");
    if (t == 0) return 0.0;
    return 1.0 - std::pow(1.0 - model.va_over_vs, static_cast<double>(t));
}

// ---------------------------------------------------------------------------
// Rank test
// ---------------------------------------------------------------------------

/// Two-sided Mann-Whitney p-value, normal approximation with midranks, tie
/// correction and 0.5 continuity correction. Adequate for run counts ~30.
inline double mann_whitney_p(std::span<const double> a, std::span<const double> b) {
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    if (n1 == 0 || n2 == 0) throw InvalidRange("rank test requires non-empty samples");

    struct Tagged {
        double value;
        bool from_a;
    };
    std::vector<Tagged> all;
    all.reserve(n1 + n2);
    for (double v : a) all.push_back({v, true});
    for (double v : b) all.push_back({v, false});
    std::sort(all.begin(), all.end(),
              [](const Tagged& x, const Tagged& y) { return x.value < y.value; });

    const std::size_t n = n1 + n2;
    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && all[j].value == all[i].value) ++j;
        const double midrank = 0.5 * static_cast<double>(i + j + 1);  // 1-based
        const auto ties = static_cast<double>(j - i);
        tie_term += ties * ties * ties - ties;
        for (std::size_t k = i; k < j; ++k) {
            if (all[k].from_a) rank_sum_a += midrank;
        }
        i = j;
    }

    const double m = static_cast<double>(n1) * static_cast<double>(n2);
    const double u1 = rank_sum_a - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
    const double mean = 0.5 * m;
    const double nn = static_cast<double>(n);
    const double var =
        m / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if (var <= 0.0) return 1.0;  // all values tied
    const double z = std::max(0.0, std::abs(u1 - mean) - 0.5) / std::sqrt(var);
    return std::erfc(z / std::numbers::sqrt2);
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct RunOutcome {
    std::uint64_t seed = 0;
    double final_best_value = 0.0;
    double distance_to_optimum = 0.0;
};

struct ExperimentResult {
    EngineKind engine = EngineKind::stoa;
    BaseFunction base = BaseFunction::sphere;
    std::string problem_name;
    double shift_magnitude = 0.0;
    std::size_t runs = 0;
    std::vector<RunOutcome> outcomes;  // sorted by seed
    double mean_best = 0.0;
    double median_best = 0.0;
    double stddev_best = 0.0;
    double mean_distance = 0.0;

    void recompute_statistics() {
        runs = outcomes.size();
        std::vector<double> finals(runs);
        double sum = 0.0;
        double dist_sum = 0.0;
        for (std::size_t i = 0; i < runs; ++i) {
            finals[i] = outcomes[i].final_best_value;
            sum += finals[i];
            dist_sum += outcomes[i].distance_to_optimum;
        }
        mean_best = sum / static_cast<double>(runs);
        mean_distance = dist_sum / static_cast<double>(runs);
        std::sort(finals.begin(), finals.end());
        median_best = (runs % 2 == 1)
                          ? finals[runs / 2]
                          : 0.5 * (finals[runs / 2 - 1] + finals[runs / 2]);
        double sq = 0.0;
        for (double v : finals) sq += (v - mean_best) * (v - mean_best);
        stddev_best = (runs > 1) ? std::sqrt(sq / static_cast<double>(runs - 1)) : 0.0;
    }
};

/// Independent optimizations to the horizon, one per seed. Deterministic
/// given the seed list for any thread count (outcomes are ordered by seed).
inline ExperimentResult run_experiment(EngineKind engine, const BenchmarkProblem& problem,
                                       EngineConfig config,
                                       std::span<const std::uint64_t> seeds,
                                       unsigned threads = 1) {
    if (seeds.empty()) throw InvalidRange("experiment needs at least one seed");
    if (config.dimension != problem.dimension()) {
        throw DimensionMismatch("engine config dimension does not match problem");
    }
    config.validate();

    std::vector<RunOutcome> outcomes(seeds.size());
    auto run_one = [&](std::size_t i) {
        EngineConfig cfg = config;
        cfg.seed = seeds[i];
        auto opt = make_optimizer(engine, cfg);
        opt->run(problem.objective());
        RunOutcome out;
        out.seed = seeds[i];
        out.final_best_value = opt->best_value();
        double sq = 0.0;
        const AgentVector& best = opt->best_agent();
        for (std::size_t d = 0; d < best.size(); ++d) {
            const double diff = best[d] - problem.shift[d];
            sq += diff * diff;
        }
        out.distance_to_optimum = std::sqrt(sq);
        outcomes[i] = out;
    };

    if (threads <= 1 || seeds.size() == 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i) run_one(i);
    } else {
        const unsigned workers =
            std::min<std::size_t>(threads, seeds.size());
        std::vector<std::thread> pool;
        pool.reserve(workers);
        std::atomic<std::size_t> next{0};
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back([&]() {
                for (std::size_t i = next.fetch_add(1); i < seeds.size();
                     i = next.fetch_add(1)) {
                    run_one(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    std::sort(outcomes.begin(), outcomes.end(),
              [](const RunOutcome& x, const RunOutcome& y) { return x.seed < y.seed; });

    ExperimentResult result;
    result.engine = engine;
    result.base = problem.base;
    result.problem_name = problem.name;
    result.shift_magnitude = problem.shift.empty() ? 0.0 : problem.shift[0];
    result.outcomes = std::move(outcomes);
    result.recompute_statistics();
    return result;
}

// ---------------------------------------------------------------------------
// Verdict
// ---------------------------------------------------------------------------

enum class Verdict { biased, inconclusive };

inline constexpr std::string_view verdict_name(Verdict v) {
    return v == Verdict::biased ? "BIASED" : "INCONCLUSIVE";
}

struct VerdictRecord {
    Verdict verdict = Verdict::inconclusive;
    EngineKind engine = EngineKind::stoa;
    BaseFunction base = BaseFunction::sphere;
    std::size_t runs = 0;
    double median_origin = 0.0;
    double median_shifted = 0.0;
    double degradation_factor = 0.0;
    double p_value = 1.0;
    double threshold_factor = 10.0;
    double alpha = 0.01;
};

/// BIASED when the shifted-optimum medians degrade by more than the threshold
/// factor with rank-test significance; INCONCLUSIVE otherwise.
inline VerdictRecord zero_bias_verdict(const ExperimentResult& origin,
                                       const ExperimentResult& shifted,
                                       double threshold_factor = 10.0,
                                       double alpha = 0.01) {
    if (origin.engine != shifted.engine) throw InvalidRange("verdict requires one engine");
    if (origin.base != shifted.base) throw InvalidRange("verdict requires one base function");
    if (origin.runs != shifted.runs) throw InvalidRange("verdict requires equal run counts");
    if (origin.runs == 0) throw InvalidRange("verdict requires at least one run");

    std::vector<double> a(origin.runs);
    std::vector<double> b(shifted.runs);
    for (std::size_t i = 0; i < origin.runs; ++i) a[i] = origin.outcomes[i].final_best_value;
    for (std::size_t i = 0; i < shifted.runs; ++i) b[i] = shifted.outcomes[i].final_best_value;

    VerdictRecord rec;
    rec.engine = origin.engine;
    rec.base = origin.base;
    rec.runs = origin.runs;
    rec.median_origin = origin.median_best;
    rec.median_shifted = shifted.median_best;
    rec.threshold_factor = threshold_factor;
    rec.alpha = alpha;
    rec.p_value = mann_whitney_p(a, b);
    if (origin.median_best == 0.0) {
        rec.degradation_factor = (shifted.median_best == 0.0)
                                     ? 1.0
                                     : std::numeric_limits<double>::infinity();
    } else {
        rec.degradation_factor = shifted.median_best / origin.median_best;
    }
    rec.verdict = (rec.degradation_factor > threshold_factor && rec.p_value < alpha)
                      ? Verdict::biased
                      : Verdict::inconclusive;
    return rec;
}

}  // namespace zerobias
