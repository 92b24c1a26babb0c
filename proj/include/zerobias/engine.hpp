#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string_view>

#include "zerobias/core.hpp"
#include "zerobias/rng.hpp"
#include "zerobias/stages.hpp"
#include "zerobias/taps.hpp"

namespace zerobias {

using Objective = std::function<double(const AgentVector&)>;

enum class EngineKind { stoa, tsa, random_search };

inline constexpr std::string_view engine_name(EngineKind kind) {
    switch (kind) {
        case EngineKind::stoa: return "stoa";
        case EngineKind::tsa: return "tsa";
        case EngineKind::random_search: return "random-search";
    }
    return "unknown";
}

inline std::optional<EngineKind> engine_from_name(std::string_view name) {
    if (name == "stoa") return EngineKind::stoa;
    if (name == "tsa") return EngineKind::tsa;
    if (name == "random-search" || name == "random_search") return EngineKind::random_search;
    return std::nullopt;
}

/// Boundary handling after an update. record_only leaves agents wherever the
/// arithmetic puts them (the audit needs the undistorted densities) and only
/// counts excursions; clamp projects back into the box, which the benchmark
/// harness uses so runaway updates keep finite objective values.
enum class BoundaryPolicy { record_only, clamp };

inline constexpr std::string_view boundary_name(BoundaryPolicy p) {
    return p == BoundaryPolicy::clamp ? "clamp" : "record-only";
}

inline std::optional<BoundaryPolicy> boundary_from_name(std::string_view name) {
    if (name == "clamp") return BoundaryPolicy::clamp;
    if (name == "record-only" || name == "record_only") return BoundaryPolicy::record_only;
    return std::nullopt;
}

struct EngineConfig {
    std::size_t population = 30;
    std::size_t iterations = 500;
    std::size_t dimension = 10;
    SearchBox box = SearchBox::cube(10, -100.0, 100.0);
    std::uint64_t seed = kDefaultSeed;
    BoundaryPolicy boundary = BoundaryPolicy::record_only;
    std::vector<StageId> taps;

    void validate() const {
        if (population == 0) throw InvalidRange("population must be >= 1");
        if (iterations == 0) throw InvalidRange("iterations must be >= 1");
        if (dimension == 0) throw InvalidRange("dimension must be >= 1");
        if (box.dimension() != dimension) {
            throw DimensionMismatch("box dimension does not match config dimension");
        }
    }
};

/// Population optimizer with greedy best-so-far tracking. Updates within one
/// iteration all see the best frozen at the previous iteration (synchronous
/// semantics), the objective is evaluated once per agent per iteration, and
/// the best is refreshed after the sweep — so best_value never increases.
class Optimizer {
  public:
    explicit Optimizer(EngineConfig config)
        : config_(std::move(config)), stream_(config_.seed) {
        config_.validate();
        reset();
    }

    virtual ~Optimizer() = default;

    virtual EngineKind kind() const = 0;

    const EngineConfig& config() const { return config_; }
    const std::vector<AgentVector>& population() const { return population_; }
    const AgentVector& best_agent() const { return best_agent_; }
    double best_value() const { return best_value_; }
    std::size_t iteration() const { return iteration_; }
    std::uint64_t out_of_bounds_events() const { return out_of_bounds_; }

    /// Re-deploy the population uniformly over the box and restart the stream.
    void reset() {
        stream_ = RandomStream(config_.seed);
        iteration_ = 0;
        out_of_bounds_ = 0;
        population_.clear();
        population_.reserve(config_.population);
        for (std::size_t i = 0; i < config_.population; ++i) {
            AgentVector x(config_.dimension);
            for (std::size_t d = 0; d < config_.dimension; ++d) {
                x[d] = stream_.uniform(config_.box.lower[d], config_.box.upper[d]);
            }
            population_.push_back(std::move(x));
        }
        values_.assign(config_.population, std::numeric_limits<double>::infinity());
        best_value_ = std::numeric_limits<double>::infinity();
        best_agent_ = population_.front();
        pending_initial_eval_ = true;
    }

    /// Advance one iteration. Throws IterationExhausted past the horizon.
    void step(const Objective& objective, TapSet* taps = nullptr) {
        if (iteration_ >= config_.iterations) {
            throw IterationExhausted("optimizer already ran its " +
                                     std::to_string(config_.iterations) + " iterations");
        }
        if (pending_initial_eval_) evaluate_initial(objective);
        update_population(objective, taps);
        refresh_best();
        ++iteration_;
    }

    void run(const Objective& objective, TapSet* taps = nullptr) {
        while (iteration_ < config_.iterations) step(objective, taps);
    }

  protected:
    virtual void update_population(const Objective& objective, TapSet* taps) = 0;

    AgentVector apply_boundary(AgentVector x) {
        if (!config_.box.contains(x)) {
            ++out_of_bounds_;
            if (config_.boundary == BoundaryPolicy::clamp) {
                return config_.box.clamped(std::move(x));
            }
        }
        return x;
    }

    void place_agent(std::size_t i, AgentVector x, const Objective& objective) {
        x = apply_boundary(std::move(x));
        values_[i] = objective(x);
        population_[i] = std::move(x);
    }

    std::uint32_t trace_iteration() const { return static_cast<std::uint32_t>(iteration_); }

    EngineConfig config_;
    RandomStream stream_;
    std::vector<AgentVector> population_;
    std::vector<double> values_;
    AgentVector best_agent_;
    double best_value_ = std::numeric_limits<double>::infinity();
    std::size_t iteration_ = 0;
    std::uint64_t out_of_bounds_ = 0;

  private:
    void evaluate_initial(const Objective& objective) {
        for (std::size_t i = 0; i < population_.size(); ++i) {
            values_[i] = objective(population_[i]);
        }
        refresh_best();
        pending_initial_eval_ = false;
    }

    void refresh_best() {
        for (std::size_t i = 0; i < population_.size(); ++i) {
            if (values_[i] < best_value_) {  // NaN compares false, never selected
                best_value_ = values_[i];
                best_agent_ = population_[i];
            }
        }
    }

    bool pending_initial_eval_ = true;
};

/// Migration (collision avoidance + convergence) followed by the spiral
/// exploitation update. One fresh spiral draw per agent per iteration.
class StoaOptimizer final : public Optimizer {
  public:
    using Optimizer::Optimizer;

    EngineKind kind() const override { return EngineKind::stoa; }

  protected:
    void update_population(const Objective& objective, TapSet* taps) override {
        const AgentVector frozen_best = best_agent_;
        const std::uint32_t it = trace_iteration();
        for (std::size_t i = 0; i < population_.size(); ++i) {
            const auto agent = static_cast<std::uint32_t>(i);
            AgentVector ca = stoa_collision_avoidance(population_[i], iteration_,
                                                      config_.iterations);
            AgentVector cv = stoa_convergence(population_[i], frozen_best, stream_);
            AgentVector delta = stoa_step(ca, cv);
            SpiralDraw spiral = stoa_spiral(stream_);
            AgentVector next = stoa_update(frozen_best, delta, spiral);
            if (taps) {
                record_vector(*taps, StageId::stoa_ca, it, agent, ca);
                record_vector(*taps, StageId::stoa_cv, it, agent, cv);
                record_vector(*taps, StageId::stoa_step, it, agent, delta);
                taps->record(StageId::stoa_spiral_alpha, it, agent, 0, spiral.alpha);
                taps->record(StageId::stoa_spiral_beta, it, agent, 0, spiral.beta);
                taps->record(StageId::stoa_spiral_gamma, it, agent, 0, spiral.gamma);
                taps->record(StageId::stoa_spiral_rho, it, agent, 0, spiral.rho);
                record_vector(*taps, StageId::stoa_update, it, agent, next);
            }
            place_agent(i, std::move(next), objective);
        }
    }

  private:
    static void record_vector(TapSet& taps, StageId id, std::uint32_t it,
                              std::uint32_t agent, const AgentVector& v) {
        for (std::size_t d = 0; d < v.size(); ++d) {
            taps.record(id, it, agent, static_cast<std::uint32_t>(d), v[d]);
        }
    }
};

/// Movement factor, step toward best, vicinity branch, swarm contraction.
class TsaOptimizer final : public Optimizer {
  public:
    using Optimizer::Optimizer;

    EngineKind kind() const override { return EngineKind::tsa; }

  protected:
    void update_population(const Objective& objective, TapSet* taps) override {
        const AgentVector frozen_best = best_agent_;
        const std::uint32_t it = trace_iteration();
        for (std::size_t i = 0; i < population_.size(); ++i) {
            const auto agent = static_cast<std::uint32_t>(i);
            AgentVector factor = tsa_move_factor(stream_, config_.dimension);
            AgentVector delta = tsa_step(frozen_best, population_[i], stream_);
            AgentVector vicinity = tsa_vicinity(frozen_best, factor, delta, stream_);
            AgentVector next = tsa_swarm(vicinity, stream_);
            if (taps) {
                record_vector(*taps, StageId::tsa_movefactor, it, agent, factor);
                record_vector(*taps, StageId::tsa_step, it, agent, delta);
                record_vector(*taps, StageId::tsa_vicinity, it, agent, vicinity);
                record_vector(*taps, StageId::tsa_swarm, it, agent, next);
            }
            place_agent(i, std::move(next), objective);
        }
    }

  private:
    static void record_vector(TapSet& taps, StageId id, std::uint32_t it,
                              std::uint32_t agent, const AgentVector& v) {
        for (std::size_t d = 0; d < v.size(); ++d) {
            taps.record(id, it, agent, static_cast<std::uint32_t>(d), v[d]);
        }
    }
};

/// Shift-invariant baseline: every agent is redrawn uniformly over the box
/// each iteration. By construction its outcome distribution cannot depend on
/// where the optimum sits.
class RandomSearchOptimizer final : public Optimizer {
  public:
    using Optimizer::Optimizer;

    EngineKind kind() const override { return EngineKind::random_search; }

  protected:
    void update_population(const Objective& objective, TapSet*) override {
        for (std::size_t i = 0; i < population_.size(); ++i) {
            AgentVector x(config_.dimension);
            for (std::size_t d = 0; d < config_.dimension; ++d) {
                x[d] = stream_.uniform(config_.box.lower[d], config_.box.upper[d]);
            }
            place_agent(i, std::move(x), objective);
        }
    }
};

inline std::unique_ptr<Optimizer> make_optimizer(EngineKind kind, EngineConfig config) {
    switch (kind) {
        case EngineKind::stoa:
            return std::make_unique<StoaOptimizer>(std::move(config));
        case EngineKind::tsa:
            return std::make_unique<TsaOptimizer>(std::move(config));
        case EngineKind::random_search:
            return std::make_unique<RandomSearchOptimizer>(std::move(config));
    }
    throw InvalidRange("unknown engine kind");
}

}  // namespace zerobias
