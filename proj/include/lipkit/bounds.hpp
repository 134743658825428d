// Lipschitz bound computations: the classic lumped two-sided bound, the
// directional/local/curvature-aware bounds, the mixed absolute-constant
// vectors, and the tightness comparison between the two families.

#pragma once

#include <cmath>
#include <utility>

#include "lipkit/types.hpp"

namespace lipkit {

enum class BoundSide { Lower, Upper };

// f(a) -+ kappa * ||b - a||.
inline std::pair<double, double> lumped_bounds(double f_at_a, const Point& a,
                                               const Point& b,
                                               const LumpedConstant& kappa) {
    check_finite(a, "lumped_bounds: a");
    check_finite(b, "lumped_bounds: b");
    if (!std::isfinite(f_at_a))
        throw std::invalid_argument("lumped_bounds: nonfinite f_at_a");
    const double spread = kappa.kappa * distance(a, b);
    return {f_at_a - spread, f_at_a + spread};
}

namespace detail {

// One coordinate's contribution to the directional bound. On curvature
// dimensions with derivative bounds available, the derivative bounds are
// used; otherwise the directional constants. `use_max` picks the upper
// (max) or lower (min) branch.
inline double directional_increment(const LipschitzSpec& spec, const Point& a,
                                    const Point& b, bool use_max) {
    const auto& dir = *spec.directional;
    const auto& curved = use_max ? spec.curvature->concave_dims
                                 : spec.curvature->convex_dims;
    const bool deriv_at_a =
        spec.deriv_bounds && spec.deriv_bounds->at == a;
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double du = b[i] - a[i];
        double lo, hi;
        if (curved.count(i) && deriv_at_a) {
            lo = spec.deriv_bounds->lower[i] * du;
            hi = spec.deriv_bounds->upper[i] * du;
        } else {
            lo = dir.lower[i] * du;
            hi = dir.upper[i] * du;
        }
        sum += use_max ? std::max(lo, hi) : std::min(lo, hi);
    }
    return sum;
}

inline void check_directional_inputs(const LipschitzSpec& spec, const Point& a,
                                     const Point& b) {
    spec.validate();
    if (!spec.directional)
        throw std::invalid_argument("directional bound: missing directional constants");
    if (!spec.curvature)
        throw std::invalid_argument("directional bound: missing curvature info");
    check_same_dim(a, b);
    check_same_dim(a, spec.directional->lower);
    if (!spec.directional->domain.contains(a) ||
        !spec.directional->domain.contains(b))
        throw std::invalid_argument("directional bound: point outside domain");
}

}  // namespace detail

inline double directional_upper_bound(double f_at_a, const Point& a,
                                      const Point& b,
                                      const LipschitzSpec& spec) {
    detail::check_directional_inputs(spec, a, b);
    return f_at_a + detail::directional_increment(spec, a, b, /*use_max=*/true);
}

inline double directional_lower_bound(double f_at_a, const Point& a,
                                      const Point& b,
                                      const LipschitzSpec& spec) {
    detail::check_directional_inputs(spec, a, b);
    return f_at_a + detail::directional_increment(spec, a, b, /*use_max=*/false);
}

// Mixed vector of greatest absolute constants: derivative bounds on the
// curvature dimensions of the requested side, directional constants
// elsewhere. With no curvature info it falls back to the directional
// constants on every coordinate.
inline Point mixed_kappa(const LipschitzSpec& spec, BoundSide side) {
    spec.validate();
    if (!spec.directional)
        throw std::invalid_argument("mixed_kappa: missing directional constants");
    const auto& dir = *spec.directional;
    const std::set<std::size_t>* curved = nullptr;
    if (spec.curvature && spec.deriv_bounds)
        curved = side == BoundSide::Upper ? &spec.curvature->concave_dims
                                          : &spec.curvature->convex_dims;
    Point out(dir.lower.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (curved && curved->count(i))
            out[i] = std::max(std::fabs(spec.deriv_bounds->lower[i]),
                              std::fabs(spec.deriv_bounds->upper[i]));
        else
            out[i] = std::max(std::fabs(dir.lower[i]), std::fabs(dir.upper[i]));
    }
    return out;
}

// kappa := max(||ktilde_lower||, ||ktilde_upper||) is a valid lumped constant.
inline LumpedConstant lumped_from_directional(const LipschitzSpec& spec) {
    const double lo = norm2(mixed_kappa(spec, BoundSide::Lower));
    const double hi = norm2(mixed_kappa(spec, BoundSide::Upper));
    return LumpedConstant(std::max(lo, hi));
}

// Sufficient condition for the directional bound to dominate the lumped one.
inline bool is_directional_tighter(const LipschitzSpec& spec,
                                   const LumpedConstant& kappa,
                                   BoundSide side) {
    return norm2(mixed_kappa(spec, side)) <= kappa.kappa;
}

}  // namespace lipkit
