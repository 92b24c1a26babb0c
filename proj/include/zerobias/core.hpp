#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace zerobias {

/// Divisors with magnitude below this are rejected by hadamard_div.
/// Deliberately tiny: the audited update rules divide by variates that can
/// come arbitrarily close to zero, and the resulting heavy tails are part of
/// what the lab measures. Only exact/subnormal zeros are treated as errors.
inline constexpr double kDivisionEpsilon = 1e-12;

/// Fixed default seed so committed output files are reproducible.
inline constexpr std::uint64_t kDefaultSeed = 20250101;

struct InvalidRange : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DivisionDegenerate : std::runtime_error {
    std::size_t index;
    explicit DivisionDegenerate(std::size_t bad_index)
        : std::runtime_error("division by near-zero element at index " +
                             std::to_string(bad_index)),
          index(bad_index) {}
};

struct IterationExhausted : std::logic_error {
    using std::logic_error::logic_error;
};

/// A point in the D-dimensional search space.
struct AgentVector {
    std::vector<double> coords;

    AgentVector() = default;
    explicit AgentVector(std::size_t dim, double value = 0.0) : coords(dim, value) {}
    AgentVector(std::initializer_list<double> init) : coords(init) {}
    explicit AgentVector(std::vector<double> values) : coords(std::move(values)) {}

    std::size_t size() const { return coords.size(); }
    bool empty() const { return coords.empty(); }
    double& operator[](std::size_t i) { return coords[i]; }
    double operator[](std::size_t i) const { return coords[i]; }
    auto begin() { return coords.begin(); }
    auto end() { return coords.end(); }
    auto begin() const { return coords.begin(); }
    auto end() const { return coords.end(); }

    bool all_finite() const {
        return std::all_of(coords.begin(), coords.end(),
                           [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const AgentVector& a, const AgentVector& b) {
        return a.coords == b.coords;
    }
};

inline void require_same_dimension(const AgentVector& a, const AgentVector& b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("vector dimensions differ: " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
    }
}

/// Axis-aligned bounded search region, lower[d] < upper[d] for every d.
struct SearchBox {
    std::vector<double> lower;
    std::vector<double> upper;

    SearchBox(std::vector<double> lo, std::vector<double> hi)
        : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.empty() || lower.size() != upper.size()) {
            throw InvalidRange("search box needs matching non-empty bound vectors");
        }
        for (std::size_t d = 0; d < lower.size(); ++d) {
            if (!(lower[d] < upper[d])) {
                throw InvalidRange("search box requires lower < upper in every dimension");
            }
        }
    }

    static SearchBox cube(std::size_t dim, double lo, double hi) {
        if (dim == 0) throw InvalidRange("search box dimension must be >= 1");
        return SearchBox(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
    }

    std::size_t dimension() const { return lower.size(); }

    bool contains(const AgentVector& x) const {
        if (x.size() != dimension()) return false;
        for (std::size_t d = 0; d < x.size(); ++d) {
            if (x[d] < lower[d] || x[d] > upper[d]) return false;
        }
        return true;
    }

    AgentVector clamped(AgentVector x) const {
        require_dimension(x);
        for (std::size_t d = 0; d < x.size(); ++d) {
            x[d] = std::clamp(x[d], lower[d], upper[d]);
        }
        return x;
    }

    void require_dimension(const AgentVector& x) const {
        if (x.size() != dimension()) {
            throw DimensionMismatch("agent dimension " + std::to_string(x.size()) +
                                    " does not match box dimension " +
                                    std::to_string(dimension()));
        }
    }
};

inline AgentVector hadamard_mul(const AgentVector& a, const AgentVector& b) {
    require_same_dimension(a, b);
    AgentVector out(a.size());
    for (std::size_t d = 0; d < a.size(); ++d) out[d] = a[d] * b[d];
    return out;
}

inline AgentVector hadamard_div(const AgentVector& a, const AgentVector& b) {
    require_same_dimension(a, b);
    AgentVector out(a.size());
    for (std::size_t d = 0; d < a.size(); ++d) {
        if (std::abs(b[d]) < kDivisionEpsilon) throw DivisionDegenerate(d);
        out[d] = a[d] / b[d];
    }
    return out;
}

inline AgentVector add(const AgentVector& a, const AgentVector& b) {
    require_same_dimension(a, b);
    AgentVector out(a.size());
    for (std::size_t d = 0; d < a.size(); ++d) out[d] = a[d] + b[d];
    return out;
}

inline AgentVector sub(const AgentVector& a, const AgentVector& b) {
    require_same_dimension(a, b);
    AgentVector out(a.size());
    for (std::size_t d = 0; d < a.size(); ++d) out[d] = a[d] - b[d];
    return out;
}

inline AgentVector scaled(const AgentVector& a, double s) {
    AgentVector out(a.size());
    for (std::size_t d = 0; d < a.size(); ++d) out[d] = a[d] * s;
    return out;
}

}  // namespace zerobias
