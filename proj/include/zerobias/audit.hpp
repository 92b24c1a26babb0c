#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <thread>
#include <utility>
#include <vector>

#include "zerobias/density.hpp"
#include "zerobias/stages.hpp"

namespace zerobias {

/// Simulation protocol for stage-isolated density estimation: every stage
/// input is drawn fresh (maximum uncertainty), the stage expression is
/// evaluated coordinate-wise in 1-D, and the outcomes are histogrammed over
/// the span. Position-like inputs default to the span; the shrinking factors
/// of the two terminal update stages default to O(1) ranges, which is where
/// the published panels place them (see input_range).
struct AuditProtocol {
    std::uint64_t samples = 1'000'000;
    double span_lo = -100.0;
    double span_hi = 100.0;
    double resolution = 1.0;          // histogram bin width, search-space units
    double angle_resolution = 0.01;   // radians, for the trigonometric channels
    double window = 1.0;              // near-zero window of the bias report
    std::uint64_t seed = kDefaultSeed;
    std::vector<StageId> stages{kAllStages.begin(), kAllStages.end()};
    std::map<StageId, std::pair<double, double>> input_ranges;  // per-stage overrides
    unsigned threads = 1;

    void validate() const {
        if (samples == 0) throw InvalidRange("protocol needs samples >= 1");
        if (!(span_lo < span_hi)) throw InvalidRange("protocol needs span_lo < span_hi");
        if (!(resolution > 0.0)) throw InvalidRange("protocol needs resolution > 0");
        if (!(angle_resolution > 0.0)) throw InvalidRange("protocol needs angle resolution > 0");
        if (!(window > 0.0) || !(window < 0.5 * (span_hi - span_lo))) {
            throw InvalidRange("window must lie in (0, (span_hi-span_lo)/2)");
        }
        if (threads == 0) throw InvalidRange("threads must be >= 1");
    }

    /// Effective input range for the range-sensitive factor of a stage.
    /// Defaults: the convergence difference x* - x and the update-stage step
    /// factor live on [-1, 1]; the swarm stage input is triangular on [-1, 1]
    /// (the shape the vicinity stage produces); the vicinity step magnitude
    /// spans [0, span_hi]; everything else falls back to the global span.
    std::pair<double, double> input_range(StageId stage) const {
        if (auto it = input_ranges.find(stage); it != input_ranges.end()) {
            return it->second;
        }
        switch (stage) {
            case StageId::stoa_cv:
            case StageId::stoa_update:
            case StageId::tsa_swarm:
                return {-1.0, 1.0};
            case StageId::tsa_vicinity:
                return {0.0, span_hi};
            default:
                return {span_lo, span_hi};
        }
    }
};

namespace detail {

inline double triangular(RandomStream& stream, double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    return mid + (stream.next_double() - stream.next_double()) * half;
}

}  // namespace detail

/// One-sample generator for a stage expression evaluated in isolation.
inline std::function<double(RandomStream&)> make_stage_sampler(StageId stage,
                                                               const AuditProtocol& p) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const auto [lo, hi] = p.input_range(stage);
    const double span_lo = p.span_lo;
    const double span_hi = p.span_hi;
    switch (stage) {
        case StageId::stoa_ca:
            // iteration fraction t/T swept uniformly
            return [=](RandomStream& s) {
                return s.uniform(lo, hi) * (2.0 - 2.0 * s.next_double());
            };
        case StageId::stoa_cv:
            return [=](RandomStream& s) {
                return 0.5 * s.next_double() * s.uniform(lo, hi);
            };
        case StageId::stoa_step:
            return [=](RandomStream& s) { return s.uniform(lo, hi) + s.uniform(lo, hi); };
        case StageId::stoa_spiral_alpha:
            return [=](RandomStream& s) {
                return SpiralDraw::from_theta(s.uniform(0.0, two_pi)).alpha;
            };
        case StageId::stoa_spiral_beta:
            return [=](RandomStream& s) {
                return SpiralDraw::from_theta(s.uniform(0.0, two_pi)).beta;
            };
        case StageId::stoa_spiral_gamma:
            return [=](RandomStream& s) {
                return SpiralDraw::from_theta(s.uniform(0.0, two_pi)).gamma;
            };
        case StageId::stoa_spiral_rho:
            return [=](RandomStream& s) {
                return SpiralDraw::from_theta(s.uniform(0.0, two_pi)).rho;
            };
        case StageId::stoa_update:
            return [=](RandomStream& s) {
                const double best = s.uniform(span_lo, span_hi);
                const double step = s.uniform(lo, hi);
                return best * step * SpiralDraw::from_theta(s.uniform(0.0, two_pi)).sum();
            };
        case StageId::tsa_movefactor:
            return [](RandomStream& s) {
                const double r1 = s.next_double();
                const double r2 = s.next_double();
                double r3 = s.next_double();
                while (r3 < kDivisionEpsilon) r3 = s.next_double();
                return tsa_move_factor_value(r1, r2, r3);
            };
        case StageId::tsa_step:
            return [=](RandomStream& s) {
                return std::abs(s.uniform(lo, hi) - s.next_double() * s.uniform(lo, hi));
            };
        case StageId::tsa_vicinity:
            return [=](RandomStream& s) {
                const double best = s.uniform(span_lo, span_hi);
                const double prod = s.next_double() * s.uniform(lo, hi);
                const double sign = (s.next_double() >= 0.5) ? 1.0 : -1.0;
                return best + sign * prod;
            };
        case StageId::tsa_swarm:
            return [=](RandomStream& s) {
                const double x = detail::triangular(s, lo, hi);
                return tsa_swarm_value(x, s.next_double());
            };
    }
    throw InvalidRange("unknown stage id");
}

struct StageAudit {
    StageId stage = StageId::stoa_ca;
    EmpiricalDensity density;
    BiasReport report;
};

namespace detail {

inline constexpr std::uint64_t kAuditBlock = 1 << 16;

inline std::uint64_t audit_stream_id(StageId stage, std::uint64_t block) {
    return (static_cast<std::uint64_t>(stage) << 32) | block;
}

}  // namespace detail

/// Monte Carlo density + bias report for one stage under the protocol.
/// Sampling is split into fixed blocks, one substream per block, so the
/// result is identical for any thread count.
inline StageAudit stage_audit(StageId stage, const AuditProtocol& protocol) {
    protocol.validate();
    const auto sampler = make_stage_sampler(stage, protocol);
    const std::uint64_t blocks =
        (protocol.samples + detail::kAuditBlock - 1) / detail::kAuditBlock;

    auto run_block = [&](std::uint64_t block, EmpiricalDensity& into) {
        RandomStream stream(protocol.seed, detail::audit_stream_id(stage, block));
        const std::uint64_t begin = block * detail::kAuditBlock;
        const std::uint64_t end = std::min(protocol.samples, begin + detail::kAuditBlock);
        for (std::uint64_t i = begin; i < end; ++i) into.add(sampler(stream));
    };

    EmpiricalDensity density(protocol.span_lo, protocol.span_hi, protocol.resolution);
    const unsigned threads = std::min<std::uint64_t>(protocol.threads, blocks);
    if (threads <= 1) {
        for (std::uint64_t b = 0; b < blocks; ++b) run_block(b, density);
    } else {
        std::vector<EmpiricalDensity> partial(
            threads, EmpiricalDensity(protocol.span_lo, protocol.span_hi, protocol.resolution));
        std::vector<std::thread> pool;
        pool.reserve(threads);
        const std::uint64_t chunk = (blocks + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t]() {
                const std::uint64_t first = t * chunk;
                const std::uint64_t last = std::min(blocks, first + chunk);
                for (std::uint64_t b = first; b < last; ++b) run_block(b, partial[t]);
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& part : partial) density.merge(part);
    }

    StageAudit audit;
    audit.stage = stage;
    audit.report = bias_report(density, protocol.window);
    audit.report.stage = std::string(stage_name(stage));
    audit.density = std::move(density);
    return audit;
}

}  // namespace zerobias
