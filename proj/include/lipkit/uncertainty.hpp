// Noise model plumbing: nominal high-probability intervals for measured
// values, fixed-point Lipschitz refinement of those intervals across a
// set of visited points, and measurement trimming.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipkit/bounds.hpp"
#include "lipkit/types.hpp"

namespace lipkit {

enum class MeasurementTag { MainIterate, Probe };

struct Measurement {
    Point at;
    double value = 0.0;        // observed f_hat
    double noise_lower = 0.0;  // w_lo
    double noise_upper = 0.0;  // w_hi
    MeasurementTag tag = MeasurementTag::MainIterate;
    int index = 0;
};

struct BoundedValue {
    Point at;
    double lower = 0.0;
    double upper = 0.0;
};

struct RefinementResult {
    std::vector<BoundedValue> bounds;
    int passes = 0;
    double max_last_change = 0.0;
    bool hit_pass_cap = false;
};

// Raised when refinement drives some interval to lower > upper: the
// constants are too small for the data. The campaign layer may repair
// the constants (estimation module) and retry.
struct InconsistentData : std::runtime_error {
    std::size_t point_index;
    explicit InconsistentData(std::size_t idx)
        : std::runtime_error("refine_bounds: inconsistent data at point " +
                             std::to_string(idx) +
                             " (Lipschitz constants too small)"),
          point_index(idx) {}
};

// [f_hat - w_hi, f_hat - w_lo].
inline BoundedValue nominal_bounds(const Measurement& m) {
    if (m.noise_lower > m.noise_upper)
        throw std::invalid_argument("nominal_bounds: noise_lower > noise_upper");
    return {m.at, m.value - m.noise_upper, m.value - m.noise_lower};
}

namespace detail {

// Worst-case decrease (for the lower bound) when propagating from a to b.
inline double lower_increment(const LipschitzSpec& spec, const Point& a,
                              const Point& b) {
    if (spec.directional && spec.curvature)
        return directional_increment(spec, a, b, /*use_max=*/false);
    if (spec.lumped) return -spec.lumped->kappa * distance(a, b);
    return -norm2(mixed_kappa(spec, BoundSide::Lower)) * distance(a, b);
}

inline double upper_increment(const LipschitzSpec& spec, const Point& a,
                              const Point& b) {
    if (spec.directional && spec.curvature)
        return directional_increment(spec, a, b, /*use_max=*/true);
    if (spec.lumped) return spec.lumped->kappa * distance(a, b);
    return norm2(mixed_kappa(spec, BoundSide::Upper)) * distance(a, b);
}

}  // namespace detail

// Iterated propagation of bounding values between all visited points until
// the largest change drops below tol. Intervals never widen; the map is
// monotone and bounded, so the pass cap of 1000 is only a safety net.
inline RefinementResult refine_bounds(const std::vector<Measurement>& measurements,
                                      const LipschitzSpec& spec, double tol,
                                      int max_passes = 1000) {
    spec.validate();
    if (tol <= 0.0) throw std::invalid_argument("refine_bounds: tol must be > 0");

    RefinementResult res;
    res.bounds.reserve(measurements.size());
    for (const auto& m : measurements) res.bounds.push_back(nominal_bounds(m));
    if (measurements.size() <= 1) {
        res.passes = measurements.empty() ? 0 : 1;
        return res;
    }

    const std::size_t n = res.bounds.size();
    for (int pass = 1; pass <= max_passes; ++pass) {
        double max_change = 0.0;
        for (std::size_t b = 0; b < n; ++b) {
            double lo = res.bounds[b].lower;
            double hi = res.bounds[b].upper;
            for (std::size_t a = 0; a < n; ++a) {
                if (a == b) continue;
                lo = std::max(lo, res.bounds[a].lower +
                                      detail::lower_increment(
                                          spec, res.bounds[a].at, res.bounds[b].at));
                hi = std::min(hi, res.bounds[a].upper +
                                      detail::upper_increment(
                                          spec, res.bounds[a].at, res.bounds[b].at));
            }
            if (lo > hi) throw InconsistentData(b);
            max_change = std::max(max_change, lo - res.bounds[b].lower);
            max_change = std::max(max_change, res.bounds[b].upper - hi);
            res.bounds[b].lower = lo;
            res.bounds[b].upper = hi;
        }
        res.passes = pass;
        res.max_last_change = max_change;
        if (max_change < tol) return res;
    }
    res.hit_pass_cap = true;
    return res;
}

// Clamp the observed value into its refined interval.
inline double trim_measurement(const Measurement& m, const BoundedValue& b) {
    return std::clamp(m.value, b.lower, b.upper);
}

}  // namespace lipkit
