#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "zerobias/stages.hpp"

namespace zerobias {

/// One tapped value with its position in the run. Scalar (per-agent) stages
/// such as the spiral terms record dim = 0.
struct TraceRow {
    std::uint32_t iteration;
    std::uint32_t agent;
    std::uint32_t dim;
    StageId stage;
    double value;
};

/// Flat sample buffer for one stage. Only finite values enter the buffer;
/// infinities and NaNs bump the nonfinite counter instead, so histograms stay
/// well-defined while the overflow frequency remains observable.
struct StageTap {
    StageId stage = StageId::stoa_ca;
    std::vector<double> samples;
    std::uint64_t nonfinite = 0;
};

/// Set of enabled instrumentation taps plus the positional trace log.
class TapSet {
  public:
    TapSet() = default;

    explicit TapSet(const std::vector<StageId>& stages) {
        for (StageId id : stages) enable(id);
    }

    TapSet(std::initializer_list<StageId> stages) {
        for (StageId id : stages) enable(id);
    }

    static TapSet all() {
        TapSet t;
        for (StageId id : kAllStages) t.enable(id);
        return t;
    }

    void enable(StageId id) {
        enabled_[index(id)] = true;
        taps_[index(id)].stage = id;
    }

    bool enabled(StageId id) const { return enabled_[index(id)]; }

    void record(StageId id, std::uint32_t iteration, std::uint32_t agent,
                std::uint32_t dim, double value) {
        if (!enabled(id)) return;
        StageTap& tap = taps_[index(id)];
        if (std::isfinite(value)) {
            tap.samples.push_back(value);
            rows_.push_back(TraceRow{iteration, agent, dim, id, value});
        } else {
            ++tap.nonfinite;
        }
    }

    const StageTap& tap(StageId id) const { return taps_[index(id)]; }

    const std::vector<TraceRow>& rows() const { return rows_; }

  private:
    static std::size_t index(StageId id) { return static_cast<std::size_t>(id); }

    std::array<bool, kAllStages.size()> enabled_{};
    std::array<StageTap, kAllStages.size()> taps_{};
    std::vector<TraceRow> rows_;
};

}  // namespace zerobias
