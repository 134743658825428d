// Core value types shared by every module: decision points, box domains,
// and the various flavors of Lipschitz information that can be attached
// to an experimental function.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace lipkit {

using Point = std::vector<double>;

inline bool all_finite(const Point& p) {
    return std::all_of(p.begin(), p.end(),
                       [](double x) { return std::isfinite(x); });
}

inline void check_finite(const Point& p, const char* what) {
    if (!all_finite(p))
        throw std::invalid_argument(std::string(what) + ": nonfinite entry");
}

inline void check_same_dim(const Point& a, const Point& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dimension mismatch");
}

inline double norm2(const Point& p) {
    double s = 0.0;
    for (double x : p) s += x * x;
    return std::sqrt(s);
}

inline double distance(const Point& a, const Point& b) {
    check_same_dim(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = b[i] - a[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct BoxDomain {
    Point lower;
    Point upper;

    BoxDomain() = default;
    BoxDomain(Point lo, Point hi) : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size())
            throw std::invalid_argument("BoxDomain: lower/upper length mismatch");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!(lower[i] <= upper[i]))
                throw std::invalid_argument("BoxDomain: lower > upper");
    }

    static BoxDomain unit(std::size_t n) {
        return BoxDomain(Point(n, 0.0), Point(n, 1.0));
    }

    std::size_t dimension() const { return lower.size(); }

    bool contains(const Point& u, double tol = 1e-12) const {
        if (u.size() != lower.size()) return false;
        for (std::size_t i = 0; i < u.size(); ++i)
            if (u[i] < lower[i] - tol || u[i] > upper[i] + tol) return false;
        return true;
    }

    Point clip(Point u) const {
        check_same_dim(u, lower);
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = std::clamp(u[i], lower[i], upper[i]);
        return u;
    }
};

struct LumpedConstant {
    double kappa = 0.0;

    LumpedConstant() = default;
    explicit LumpedConstant(double k) : kappa(k) {
        if (!(std::isfinite(k)) || k < 0.0)
            throw std::invalid_argument("LumpedConstant: kappa must be finite and >= 0");
    }
};

// Per-coordinate bounds on the partial derivatives over `domain`.
struct DirectionalConstants {
    Point lower;   // kappa_lo_i
    Point upper;   // kappa_hi_i
    BoxDomain domain;

    DirectionalConstants() = default;
    DirectionalConstants(Point lo, Point hi, BoxDomain dom)
        : lower(std::move(lo)), upper(std::move(hi)), domain(std::move(dom)) {
        if (lower.size() != upper.size() || lower.size() != domain.dimension())
            throw std::invalid_argument("DirectionalConstants: length mismatch");
        // +-infinity is a legal entry: a side with no physical information
        // stays unbounded. NaN is not.
        for (double x : lower)
            if (std::isnan(x))
                throw std::invalid_argument("DirectionalConstants: NaN entry");
        for (double x : upper)
            if (std::isnan(x))
                throw std::invalid_argument("DirectionalConstants: NaN entry");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (lower[i] > upper[i])
                throw std::invalid_argument("DirectionalConstants: lower > upper");
    }
};

// Index sets of coordinates in which the function is known convex/concave.
// A coordinate may appear in both sets (coordinate-wise affine).
struct CurvatureInfo {
    std::set<std::size_t> convex_dims;
    std::set<std::size_t> concave_dims;
    BoxDomain domain;
};

// Bounds on the local derivatives at a specific point.
struct DerivativeBounds {
    Point at;
    Point lower;
    Point upper;

    DerivativeBounds() = default;
    DerivativeBounds(Point a, Point lo, Point hi)
        : at(std::move(a)), lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size() || lower.size() != at.size())
            throw std::invalid_argument("DerivativeBounds: length mismatch");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (lower[i] > upper[i])
                throw std::invalid_argument("DerivativeBounds: lower > upper");
    }
};

// Everything that is known about a function's sensitivity, bundled.
// At least one of lumped/directional must be present.
struct LipschitzSpec {
    std::optional<LumpedConstant> lumped;
    std::optional<DirectionalConstants> directional;
    std::optional<CurvatureInfo> curvature;
    std::optional<DerivativeBounds> deriv_bounds;

    void validate() const {
        if (!lumped && !directional)
            throw std::invalid_argument(
                "LipschitzSpec: need at least one of lumped/directional");
        if (deriv_bounds && (!curvature || !directional))
            throw std::invalid_argument(
                "LipschitzSpec: derivative bounds require curvature and "
                "directional constants");
    }

    static LipschitzSpec from_lumped(double kappa) {
        LipschitzSpec s;
        s.lumped = LumpedConstant(kappa);
        return s;
    }

    static LipschitzSpec from_directional(DirectionalConstants d) {
        LipschitzSpec s;
        s.directional = std::move(d);
        return s;
    }
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace lipkit
