#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "zerobias/core.hpp"
#include "zerobias/rng.hpp"

namespace zerobias {

/// Fixed-bin histogram over [lo, hi]. Bins are left-closed right-open except
/// the final bin, which closes at hi. Non-finite samples are counted, never
/// binned, so the normalized density always integrates to binned/total mass.
struct EmpiricalDensity {
    double lo = 0.0;
    double hi = 1.0;
    double bin_width = 1.0;
    std::vector<std::uint64_t> counts;
    std::uint64_t total = 0;
    std::uint64_t overflow_low = 0;
    std::uint64_t overflow_high = 0;
    std::uint64_t nonfinite = 0;

    EmpiricalDensity() = default;

    EmpiricalDensity(double lo_, double hi_, double bin_width_)
        : lo(lo_), hi(hi_), bin_width(bin_width_) {
        if (!(lo < hi)) throw InvalidRange("density requires lo < hi");
        if (!(bin_width > 0.0)) throw InvalidRange("density requires bin_width > 0");
        counts.assign(static_cast<std::size_t>(std::ceil((hi - lo) / bin_width)), 0);
        if (counts.empty()) counts.assign(1, 0);
    }

    std::size_t bin_count() const { return counts.size(); }

    double bin_lower(std::size_t i) const { return lo + static_cast<double>(i) * bin_width; }

    /// Upper edge; the last bin is truncated at hi.
    double bin_upper(std::size_t i) const {
        return std::min(hi, lo + static_cast<double>(i + 1) * bin_width);
    }

    double bin_center(std::size_t i) const {
        return 0.5 * (bin_lower(i) + bin_upper(i));
    }

    double density(std::size_t i) const {
        if (total == 0) return 0.0;
        return static_cast<double>(counts[i]) /
               (static_cast<double>(total) * bin_width);
    }

    std::uint64_t binned_count() const {
        return total - overflow_low - overflow_high - nonfinite;
    }

    void add(double value) {
        ++total;
        if (!std::isfinite(value)) {
            ++nonfinite;
            return;
        }
        if (value < lo) {
            ++overflow_low;
            return;
        }
        if (value > hi) {
            ++overflow_high;
            return;
        }
        auto idx = static_cast<std::size_t>((value - lo) / bin_width);
        if (idx >= counts.size()) idx = counts.size() - 1;  // value == hi
        ++counts[idx];
    }

    /// Additive merge of a histogram with identical geometry. Merging blocks
    /// in order reproduces the serial histogram exactly.
    void merge(const EmpiricalDensity& other) {
        if (other.lo != lo || other.hi != hi || other.bin_width != bin_width ||
            other.counts.size() != counts.size()) {
            throw InvalidRange("cannot merge densities with different geometry");
        }
        for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
        total += other.total;
        overflow_low += other.overflow_low;
        overflow_high += other.overflow_high;
        nonfinite += other.nonfinite;
    }
};

inline EmpiricalDensity estimate_density(std::span<const double> samples, double lo,
                                         double hi, double bin_width) {
    if (samples.empty()) throw InvalidRange("cannot estimate a density from no samples");
    EmpiricalDensity d(lo, hi, bin_width);
    for (double v : samples) d.add(v);
    return d;
}

// ---------------------------------------------------------------------------
// Closed-form reference: sine/cosine of a uniform angle
// ---------------------------------------------------------------------------

/// Density of sin(theta) (equivalently cos) for theta uniform on [0, 2*pi):
/// 1 / (pi sqrt(1 - y^2)). Unbounded as |y| -> 1.
inline double arcsine_density(double y) {
    if (!(std::abs(y) < 1.0)) {
        throw std::domain_error("arcsine density is defined for |y| < 1");
    }
    return 1.0 / (std::numbers::pi * std::sqrt(1.0 - y * y));
}

inline std::vector<double> sine_of_uniform_samples(RandomStream& stream, std::size_t n) {
    if (n == 0) throw InvalidRange("need at least one sample");
    std::vector<double> out(n);
    for (double& v : out) v = std::sin(stream.uniform(0.0, 2.0 * std::numbers::pi));
    return out;
}

inline std::vector<double> cosine_of_uniform_samples(RandomStream& stream, std::size_t n) {
    if (n == 0) throw InvalidRange("need at least one sample");
    std::vector<double> out(n);
    for (double& v : out) v = std::cos(stream.uniform(0.0, 2.0 * std::numbers::pi));
    return out;
}

// ---------------------------------------------------------------------------
// Peak detection
// ---------------------------------------------------------------------------

namespace detail {

inline double median_density(const EmpiricalDensity& d) {
    std::vector<double> v(d.bin_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = d.density(i);
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) {
        auto lower = std::max_element(v.begin(), mid);
        m = 0.5 * (m + *lower);
    }
    return m;
}

}  // namespace detail

/// Bins whose density exceeds both neighbours and 2x the median bin density.
/// Edge bins compare against their single neighbour.
inline std::vector<std::size_t> peak_bins(const EmpiricalDensity& d) {
    std::vector<std::size_t> peaks;
    const std::size_t n = d.bin_count();
    if (n == 0 || d.binned_count() == 0) return peaks;
    const double threshold = 2.0 * detail::median_density(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = d.density(i);
        if (v <= threshold || d.counts[i] == 0) continue;
        const bool above_left = (i == 0) || v > d.density(i - 1);
        const bool above_right = (i + 1 == n) || v > d.density(i + 1);
        if (above_left && above_right) peaks.push_back(i);
    }
    return peaks;
}

/// Peak angles of a theta-domain density over [0, 2*pi]. Candidate bins
/// (density above 2x the median) are grouped into contiguous clusters, with
/// the first and last clusters merged across the 0/2*pi seam, and each
/// cluster contributes its count-weighted mean angle. A flat (uniform)
/// density has no candidates and yields an empty list.
inline std::vector<double> theta_peak_locations(const EmpiricalDensity& d) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    if (std::abs(d.lo) > d.bin_width || std::abs(d.hi - two_pi) > d.bin_width) {
        throw InvalidRange("theta peak detection expects a density over [0, 2*pi]");
    }
    const std::size_t n = d.bin_count();
    std::vector<double> peaks;
    if (n == 0 || d.binned_count() == 0) return peaks;

    const double threshold = 2.0 * detail::median_density(d);
    std::vector<bool> mask(n);
    for (std::size_t i = 0; i < n; ++i) {
        mask[i] = d.counts[i] > 0 && d.density(i) > threshold;
    }

    struct Cluster {
        double weighted_sum = 0.0;
        double weight = 0.0;
        bool touches_start = false;
        bool touches_end = false;
    };
    std::vector<Cluster> clusters;
    for (std::size_t i = 0; i < n;) {
        if (!mask[i]) {
            ++i;
            continue;
        }
        Cluster c;
        c.touches_start = (i == 0);
        while (i < n && mask[i]) {
            c.weighted_sum += d.bin_center(i) * static_cast<double>(d.counts[i]);
            c.weight += static_cast<double>(d.counts[i]);
            ++i;
        }
        c.touches_end = (i == n);
        clusters.push_back(c);
    }
    if (clusters.empty()) return peaks;

    // Wrap-around: a cluster at the 2*pi edge continues at 0.
    if (clusters.size() > 1 && clusters.front().touches_start && clusters.back().touches_end) {
        Cluster tail = clusters.back();
        clusters.pop_back();
        Cluster& head = clusters.front();
        head.weighted_sum += tail.weighted_sum - two_pi * tail.weight;  // unwrap below 0
        head.weight += tail.weight;
    }

    for (const Cluster& c : clusters) {
        double center = c.weighted_sum / c.weight;
        if (center < 0.0) center += two_pi;
        peaks.push_back(center);
    }
    std::sort(peaks.begin(), peaks.end());
    return peaks;
}

enum class AngleChannel { sine, cosine };

/// End-to-end peak-angle pipeline for one trigonometric channel: sample the
/// channel, find the singular peaks of its value density, then histogram the
/// originating angles of the peak-bin samples and return the cluster centers.
/// For the sine channel the clusters sit at pi/2 and 3*pi/2; for cosine at
/// 0 (== 2*pi) and pi.
inline std::vector<double> channel_peak_angles(AngleChannel channel, RandomStream& stream,
                                               std::size_t n, double value_bin_width = 0.01,
                                               double angle_bin_width = 0.01) {
    if (n == 0) throw InvalidRange("need at least one sample");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    std::vector<double> thetas(n);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
        thetas[i] = stream.uniform(0.0, two_pi);
        values[i] = (channel == AngleChannel::sine) ? std::sin(thetas[i])
                                                    : std::cos(thetas[i]);
    }
    EmpiricalDensity value_density = estimate_density(values, -1.0, 1.0, value_bin_width);
    const std::vector<std::size_t> peaks = peak_bins(value_density);
    if (peaks.empty()) return {};

    EmpiricalDensity theta_density(0.0, two_pi, angle_bin_width);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t b : peaks) {
            const bool last = (b + 1 == value_density.bin_count());
            const double up = value_density.bin_upper(b);
            if (values[i] >= value_density.bin_lower(b) &&
                (last ? values[i] <= up : values[i] < up)) {
                theta_density.add(thetas[i]);
                break;
            }
        }
    }
    if (theta_density.binned_count() == 0) return {};
    return theta_peak_locations(theta_density);
}

// ---------------------------------------------------------------------------
// Concentration metrics
// ---------------------------------------------------------------------------

/// How much probability mass sits within |value| <= window, compared against
/// the mass a uniform distribution over [lo, hi] would place there.
/// concentration_ratio > 1 flags zero-bias.
struct BiasReport {
    std::string stage;  // empty when the density is not tied to a stage
    double window = 1.0;
    double near_zero_mass = 0.0;
    double uniform_baseline = 0.0;
    double concentration_ratio = 0.0;
    double mode_bin_center = 0.0;
    double l1_distance_to_uniform = 0.0;
    std::uint64_t nonfinite = 0;
    std::uint64_t overflow_low = 0;
    std::uint64_t overflow_high = 0;
};

inline BiasReport bias_report(const EmpiricalDensity& d, double window) {
    if (d.total == 0) throw InvalidRange("bias report requires samples");
    if (!(window > 0.0) || !(window < 0.5 * (d.hi - d.lo))) {
        throw InvalidRange("window must lie in (0, (hi-lo)/2)");
    }
    if (d.lo > 0.0 || d.hi < 0.0) {
        throw InvalidRange("bias report requires 0 inside [lo, hi]");
    }

    BiasReport r;
    r.window = window;
    r.nonfinite = d.nonfinite;
    r.overflow_low = d.overflow_low;
    r.overflow_high = d.overflow_high;

    // Mass in [-window, +window]; partially covered bins contribute their
    // overlap fraction, assuming uniformity within a bin.
    double covered = 0.0;
    double mode = 0.0;
    std::uint64_t mode_count = 0;
    for (std::size_t i = 0; i < d.bin_count(); ++i) {
        const double b_lo = d.bin_lower(i);
        const double b_hi = d.bin_upper(i);
        const double overlap =
            std::max(0.0, std::min(b_hi, window) - std::max(b_lo, -window));
        if (overlap > 0.0 && b_hi > b_lo) {
            covered += static_cast<double>(d.counts[i]) * (overlap / (b_hi - b_lo));
        }
        if (d.counts[i] > mode_count) {
            mode_count = d.counts[i];
            mode = d.bin_center(i);
        }
    }
    r.near_zero_mass = covered / static_cast<double>(d.total);
    r.uniform_baseline = 2.0 * window / (d.hi - d.lo);
    r.concentration_ratio = r.near_zero_mass / r.uniform_baseline;
    r.mode_bin_center = mode;

    double l1 = 0.0;
    for (std::size_t i = 0; i < d.bin_count(); ++i) {
        const double p = static_cast<double>(d.counts[i]) / static_cast<double>(d.total);
        const double u = (d.bin_upper(i) - d.bin_lower(i)) / (d.hi - d.lo);
        l1 += std::abs(p - u);
    }
    r.l1_distance_to_uniform = l1;
    return r;
}

}  // namespace zerobias
