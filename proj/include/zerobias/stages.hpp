#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string_view>

#include "zerobias/core.hpp"
#include "zerobias/rng.hpp"

namespace zerobias {

/// Every intermediate computation stage of the two engines. Each stage can be
/// tapped during iteration and audited in isolation by the distribution lab.
enum class StageId {
    stoa_ca,
    stoa_cv,
    stoa_step,
    stoa_spiral_alpha,
    stoa_spiral_beta,
    stoa_spiral_gamma,
    stoa_spiral_rho,
    stoa_update,
    tsa_movefactor,
    tsa_step,
    tsa_vicinity,
    tsa_swarm,
};

inline constexpr std::array<StageId, 12> kAllStages = {
    StageId::stoa_ca,           StageId::stoa_cv,
    StageId::stoa_step,         StageId::stoa_spiral_alpha,
    StageId::stoa_spiral_beta,  StageId::stoa_spiral_gamma,
    StageId::stoa_spiral_rho,   StageId::stoa_update,
    StageId::tsa_movefactor,    StageId::tsa_step,
    StageId::tsa_vicinity,      StageId::tsa_swarm,
};

inline constexpr std::string_view stage_name(StageId id) {
    switch (id) {
        case StageId::stoa_ca: return "stoa_ca";
        case StageId::stoa_cv: return "stoa_cv";
        case StageId::stoa_step: return "stoa_step";
        case StageId::stoa_spiral_alpha: return "stoa_spiral_alpha";
        case StageId::stoa_spiral_beta: return "stoa_spiral_beta";
        case StageId::stoa_spiral_gamma: return "stoa_spiral_gamma";
        case StageId::stoa_spiral_rho: return "stoa_spiral_rho";
        case StageId::stoa_update: return "stoa_update";
        case StageId::tsa_movefactor: return "tsa_movefactor";
        case StageId::tsa_step: return "tsa_step";
        case StageId::tsa_vicinity: return "tsa_vicinity";
        case StageId::tsa_swarm: return "tsa_swarm";
    }
    return "unknown";
}

inline std::optional<StageId> stage_from_name(std::string_view name) {
    for (StageId id : kAllStages) {
        if (stage_name(id) == name) return id;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// STOA stages
// ---------------------------------------------------------------------------

/// Collision-avoidance scaling, x * (2 - 2t/T). The factor sweeps from 2 at
/// t = 0 down to 0 at t = T.
inline AgentVector stoa_collision_avoidance(const AgentVector& x, std::uint64_t t,
                                            std::uint64_t horizon) {
    if (horizon == 0) throw InvalidRange("collision avoidance requires T >= 1");
    if (t > horizon) throw InvalidRange("collision avoidance requires t <= T");
    const double factor =
        2.0 - 2.0 * static_cast<double>(t) / static_cast<double>(horizon);
    return scaled(x, factor);
}

/// Convergence pull toward the best-so-far agent: 0.5 r (x* - x),
/// r fresh uniform per coordinate.
inline AgentVector stoa_convergence(const AgentVector& x, const AgentVector& best,
                                    RandomStream& stream) {
    require_same_dimension(x, best);
    AgentVector out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) {
        out[d] = 0.5 * stream.next_double() * (best[d] - x[d]);
    }
    return out;
}

/// Step size: collision-avoidance term plus convergence term.
inline AgentVector stoa_step(const AgentVector& ca_next, const AgentVector& cv_next) {
    return add(ca_next, cv_next);
}

/// One spiral trajectory draw. theta is a single scalar shared by all three
/// trigonometric terms, and the radius uses the decaying form exp(-theta),
/// bounded in (exp(-2*pi), 1]. The growing form exp(+theta) found in some
/// descriptions reaches exp(2*pi) = 535.49 and would eject agents from any
/// practical search box; it is not used here.
struct SpiralDraw {
    double theta;
    double rho;
    double alpha;
    double beta;
    double gamma;

    static SpiralDraw from_theta(double theta) {
        SpiralDraw s;
        s.theta = theta;
        s.rho = std::exp(-theta);
        s.alpha = s.rho * std::sin(theta);
        s.beta = s.rho * std::cos(theta);
        s.gamma = s.rho * theta;
        return s;
    }

    double sum() const { return alpha + beta + gamma; }
};

inline SpiralDraw stoa_spiral(RandomStream& stream) {
    return SpiralDraw::from_theta(stream.uniform(0.0, 2.0 * std::numbers::pi));
}

/// Position update: x* (.) step, scaled by the scalar spiral sum
/// alpha + beta + gamma.
inline AgentVector stoa_update(const AgentVector& best, const AgentVector& step,
                               const SpiralDraw& spiral) {
    require_same_dimension(best, step);
    const double s = spiral.sum();
    AgentVector out(best.size());
    for (std::size_t d = 0; d < best.size(); ++d) out[d] = best[d] * step[d] * s;
    return out;
}

// ---------------------------------------------------------------------------
// TSA stages
// ---------------------------------------------------------------------------

/// Movement-factor kernel (r1 + r2 - 2 r3) / (4 r3). Heavy-tailed: the
/// denominator can be arbitrarily close to zero.
inline double tsa_move_factor_value(double r1, double r2, double r3) {
    return (r1 + r2 - 2.0 * r3) / (4.0 * r3);
}

/// Movement factor vector with fresh r1, r2, r3 per coordinate. r3 values
/// below kDivisionEpsilon are redrawn so the quotient stays finite; the tail
/// this preserves is part of the audited distortion.
inline AgentVector tsa_move_factor(RandomStream& stream, std::size_t dim) {
    if (dim == 0) throw InvalidRange("move factor needs dimension >= 1");
    AgentVector out(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        const double r1 = stream.next_double();
        const double r2 = stream.next_double();
        double r3 = stream.next_double();
        while (r3 < kDivisionEpsilon) r3 = stream.next_double();
        out[d] = tsa_move_factor_value(r1, r2, r3);
    }
    return out;
}

/// Step size toward the best-so-far: |x* - r4 x| elementwise.
inline AgentVector tsa_step(const AgentVector& best, const AgentVector& x,
                            RandomStream& stream) {
    require_same_dimension(best, x);
    AgentVector out(best.size());
    for (std::size_t d = 0; d < best.size(); ++d) {
        out[d] = std::abs(best[d] - stream.next_double() * x[d]);
    }
    return out;
}

/// Vicinity update: x* +/- a (.) step, the branch chosen by one scalar r5 per
/// agent (r5 >= 0.5 takes the plus branch).
inline AgentVector tsa_vicinity(const AgentVector& best, const AgentVector& a,
                                const AgentVector& step, RandomStream& stream) {
    require_same_dimension(best, a);
    require_same_dimension(best, step);
    const double r5 = stream.next_double();
    const double sign = (r5 >= 0.5) ? 1.0 : -1.0;
    AgentVector out(best.size());
    for (std::size_t d = 0; d < best.size(); ++d) {
        out[d] = best[d] + sign * a[d] * step[d];
    }
    return out;
}

/// Swarm contraction kernel x / (1 + r3): always shrinks, never by more than
/// half, since the denominator lies in (1, 2).
inline double tsa_swarm_value(double x, double r3) { return x / (1.0 + r3); }

inline AgentVector tsa_swarm(const AgentVector& x, RandomStream& stream) {
    AgentVector out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) {
        out[d] = tsa_swarm_value(x[d], stream.next_double());
    }
    return out;
}

}  // namespace zerobias
