// Setting and repairing Lipschitz constants: physical-sign presets,
// model-based min/max of sensitivities over a parameter set, data-driven
// local model fits, and the consistency check/inflate loop.

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "lipkit/bounds.hpp"
#include "lipkit/solver.hpp"
#include "lipkit/types.hpp"
#include "lipkit/uncertainty.hpp"

namespace lipkit {

using ModelFn = std::function<double(const Point& u, const Point& theta)>;
using ModelGradFn = std::function<Point(const Point& u, const Point& theta)>;

struct SingularDesign : std::runtime_error {
    SingularDesign() : std::runtime_error("fit_local_model: singular design matrix") {}
};

// Parametric model f(u, theta) with theta confined to param_box.
struct ParametricModel {
    ModelFn evaluate;
    ModelGradFn gradient;   // d/du
    BoxDomain param_box;

    // Constructs after verifying the gradient against finite differences
    // at sampled (u, theta) pairs.
    static ParametricModel validated(ModelFn eval, ModelGradFn grad,
                                     BoxDomain param_box, const BoxDomain& u_box,
                                     unsigned seed = 7, int samples = 16,
                                     double rel_tol = 1e-4) {
        ParametricModel m{std::move(eval), std::move(grad), std::move(param_box)};
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        auto draw = [&](const BoxDomain& b) {
            Point p(b.dimension());
            for (std::size_t i = 0; i < p.size(); ++i)
                p[i] = b.lower[i] + unif(rng) * (b.upper[i] - b.lower[i]);
            return p;
        };
        for (int s = 0; s < samples; ++s) {
            const Point u = draw(u_box);
            const Point th = draw(m.param_box);
            const Point g = m.gradient(u, th);
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double h = 1e-6 * std::max(1.0, std::fabs(u[i]));
                Point up = u, um = u;
                up[i] += h;
                um[i] -= h;
                const double fd = (m.evaluate(up, th) - m.evaluate(um, th)) / (2 * h);
                const double scale = std::max({1.0, std::fabs(fd), std::fabs(g[i])});
                if (std::fabs(fd - g[i]) > rel_tol * scale)
                    throw std::invalid_argument(
                        "ParametricModel: gradient inconsistent with evaluate");
            }
        }
        return m;
    }
};

struct EstimationOptions {
    int grid_per_dim = 9;
    double padding = 0.0;  // explicit conservatism, added after the search
    unsigned seed = 12345;
};

// kappa_lo_i / kappa_hi_i = min / max of df/du_i over domain x param_box.
inline DirectionalConstants estimate_directional_from_model(
    const ParametricModel& model, const BoxDomain& domain,
    const EstimationOptions& opt = {}) {
    const std::size_t n = domain.dimension();
    const std::size_t np = model.param_box.dimension();
    BoxDomain joint(Point(n + np), Point(n + np));
    for (std::size_t i = 0; i < n; ++i) {
        joint.lower[i] = domain.lower[i];
        joint.upper[i] = domain.upper[i];
    }
    for (std::size_t i = 0; i < np; ++i) {
        joint.lower[n + i] = model.param_box.lower[i];
        joint.upper[n + i] = model.param_box.upper[i];
    }
    std::mt19937_64 rng(opt.seed);
    Point lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto sens = [&](const Point& x) {
            const Point u(x.begin(), x.begin() + n);
            const Point th(x.begin() + n, x.end());
            return model.gradient(u, th)[i];
        };
        lo[i] = extremize_on_box(sens, joint, /*maximize=*/false, rng,
                                 opt.grid_per_dim) -
                opt.padding;
        hi[i] = extremize_on_box(sens, joint, /*maximize=*/true, rng,
                                 opt.grid_per_dim) +
                opt.padding;
    }
    return DirectionalConstants(std::move(lo), std::move(hi), domain);
}

// Best-found maximum of the difference quotient over (u_a, u_b, theta).
inline LumpedConstant estimate_lumped_from_model(const ParametricModel& model,
                                                 const BoxDomain& domain,
                                                 const EstimationOptions& opt = {}) {
    const std::size_t n = domain.dimension();
    const std::size_t np = model.param_box.dimension();
    BoxDomain joint(Point(2 * n + np), Point(2 * n + np));
    for (std::size_t i = 0; i < n; ++i) {
        joint.lower[i] = joint.lower[n + i] = domain.lower[i];
        joint.upper[i] = joint.upper[n + i] = domain.upper[i];
    }
    for (std::size_t i = 0; i < np; ++i) {
        joint.lower[2 * n + i] = model.param_box.lower[i];
        joint.upper[2 * n + i] = model.param_box.upper[i];
    }
    std::mt19937_64 rng(opt.seed);
    auto quotient = [&](const Point& x) {
        const Point ua(x.begin(), x.begin() + n);
        const Point ub(x.begin() + n, x.begin() + 2 * n);
        const Point th(x.begin() + 2 * n, x.end());
        const double d = distance(ua, ub);
        if (d < 1e-8) return -kInfinity;  // excluded pairs
        return (model.evaluate(ub, th) - model.evaluate(ua, th)) / d;
    };
    const double k =
        extremize_on_box(quotient, joint, /*maximize=*/true, rng, opt.grid_per_dim);
    return LumpedConstant(std::max(0.0, k + opt.padding));
}

enum class LocalModelForm { Linear, Quadratic };

namespace detail {

// Dense symmetric positive (semi)definite solve by Gaussian elimination
// with partial pivoting; throws SingularDesign on rank deficiency.
inline std::vector<double> solve_linear(std::vector<std::vector<double>> A,
                                        std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
        if (std::fabs(A[piv][c]) < 1e-12) throw SingularDesign();
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double m = A[r][c] / A[c][c];
            for (std::size_t k = c; k < n; ++k) A[r][k] -= m * A[c][k];
            b[r] -= m * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double s = b[r];
        for (std::size_t k = r + 1; k < n; ++k) s -= A[r][k] * x[k];
        x[r] = s / A[r][r];
    }
    return x;
}

inline std::vector<double> basis_values(const Point& u, LocalModelForm form) {
    std::vector<double> phi;
    phi.push_back(1.0);
    for (double x : u) phi.push_back(x);
    if (form == LocalModelForm::Quadratic)
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t j = i; j < u.size(); ++j)
                phi.push_back(u[i] * u[j]);
    return phi;
}

inline std::vector<double> basis_partials(const Point& u, LocalModelForm form,
                                          std::size_t dim) {
    std::vector<double> d;
    d.push_back(0.0);
    for (std::size_t i = 0; i < u.size(); ++i) d.push_back(i == dim ? 1.0 : 0.0);
    if (form == LocalModelForm::Quadratic)
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t j = i; j < u.size(); ++j) {
                double v = 0.0;
                if (i == dim) v += u[j];
                if (j == dim) v += u[i];
                d.push_back(v);
            }
    return d;
}

}  // namespace detail

// Least-squares fit of a linear or quadratic response surface; the
// parameter box is the joint (Bonferroni-adjusted) 95% confidence region
// from the residual variance.
inline ParametricModel fit_local_model(const std::vector<Measurement>& data,
                                       LocalModelForm form) {
    if (data.empty()) throw std::invalid_argument("fit_local_model: no data");
    const std::size_t n = data.front().at.size();
    const std::size_t p = form == LocalModelForm::Linear
                              ? n + 1
                              : (n + 1) * (n + 2) / 2;
    const std::size_t m = data.size();
    if (m < p)
        throw std::invalid_argument("fit_local_model: not enough points for form");

    std::vector<std::vector<double>> X(m);
    std::vector<double> y(m);
    for (std::size_t r = 0; r < m; ++r) {
        X[r] = detail::basis_values(data[r].at, form);
        y[r] = data[r].value;
    }
    std::vector<std::vector<double>> XtX(p, std::vector<double>(p, 0.0));
    std::vector<double> Xty(p, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t i = 0; i < p; ++i) {
            Xty[i] += X[r][i] * y[r];
            for (std::size_t j = 0; j < p; ++j) XtX[i][j] += X[r][i] * X[r][j];
        }
    const std::vector<double> beta = detail::solve_linear(XtX, Xty);

    double rss = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        double pred = 0.0;
        for (std::size_t i = 0; i < p; ++i) pred += X[r][i] * beta[i];
        rss += (y[r] - pred) * (y[r] - pred);
    }
    const int dof = int(m) - int(p);
    const double s2 = dof > 0 ? rss / dof : 0.0;

    // Coefficientwise intervals from the residual variance. The quantile is
    // Bonferroni-adjusted over the p coefficients so the resulting box is a
    // (conservative) joint 95% region for theta.
    Point lo(p), hi(p);
    const double q =
        dof > 0
            ? boost::math::quantile(boost::math::students_t_distribution<double>(dof),
                                    1.0 - 0.05 / (2.0 * double(p)))
            : 0.0;
    for (std::size_t i = 0; i < p; ++i) {
        std::vector<double> e(p, 0.0);
        e[i] = 1.0;
        const std::vector<double> col = detail::solve_linear(XtX, e);
        const double se = std::sqrt(std::max(0.0, s2 * col[i]));
        lo[i] = beta[i] - q * se;
        hi[i] = beta[i] + q * se;
    }

    ModelFn eval = [form](const Point& u, const Point& theta) {
        const auto phi = detail::basis_values(u, form);
        double v = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) v += theta[i] * phi[i];
        return v;
    };
    ModelGradFn grad = [form, n](const Point& u, const Point& theta) {
        Point g(n, 0.0);
        for (std::size_t d = 0; d < n; ++d) {
            const auto dphi = detail::basis_partials(u, form, d);
            for (std::size_t i = 0; i < dphi.size(); ++i) g[d] += theta[i] * dphi[i];
        }
        return g;
    };
    return ParametricModel{std::move(eval), std::move(grad),
                           BoxDomain(std::move(lo), std::move(hi))};
}

// Fitted coefficients of a model produced by fit_local_model (box center).
inline Point fitted_coefficients(const ParametricModel& m) {
    Point c(m.param_box.dimension());
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = 0.5 * (m.param_box.lower[i] + m.param_box.upper[i]);
    return c;
}

struct ConsistencyReport {
    LipschitzSpec initial;
    LipschitzSpec repaired;
    int violations_found = 0;
    int inflation_steps = 0;
};

struct ConsistencyOptions {
    double inflation = 0.1;
    // When set, the check uses interval endpoints (f_lo <= f_hi + k d)
    // instead of raw values, so noise alone does not force inflation.
    bool use_noise_bounds = false;
};

namespace detail {

inline bool pair_consistent(const LipschitzSpec& spec, const Measurement& m1,
                            const Measurement& m2, bool use_noise_bounds) {
    const double d = distance(m1.at, m2.at);
    double v1 = m1.value, v2 = m2.value;
    if (use_noise_bounds) {
        v1 = nominal_bounds(m1).upper;  // f_hi at u1
        v2 = nominal_bounds(m2).lower;  // f_lo at u2
    }
    if (spec.directional && spec.curvature) {
        // the directional upper envelope from m1 to m2 must not cut below v2
        return v2 <= v1 + directional_increment(spec, m1.at, m2.at, true) + 1e-12;
    }
    const double kappa = spec.lumped ? spec.lumped->kappa
                                     : lumped_from_directional(spec).kappa;
    return v2 <= v1 + kappa * d + 1e-12;
}

inline bool data_consistent(const LipschitzSpec& spec,
                            const std::vector<Measurement>& data,
                            bool use_noise_bounds, int* violations = nullptr) {
    bool ok = true;
    for (std::size_t i = 0; i < data.size(); ++i)
        for (std::size_t j = 0; j < data.size(); ++j) {
            if (i == j) continue;
            if (!pair_consistent(spec, data[i], data[j], use_noise_bounds)) {
                ok = false;
                if (violations) ++*violations;
            }
        }
    return ok;
}

// One inflation step: doubling with an additive floor.
inline void inflate(LipschitzSpec& spec, double inflation) {
    if (spec.lumped)
        spec.lumped = LumpedConstant(
            std::max(2.0 * spec.lumped->kappa, spec.lumped->kappa + inflation));
    if (spec.directional) {
        DirectionalConstants d = *spec.directional;
        for (std::size_t i = 0; i < d.lower.size(); ++i) {
            d.lower[i] = std::min(2.0 * d.lower[i], d.lower[i] - inflation);
            d.upper[i] = std::max(2.0 * d.upper[i], d.upper[i] + inflation);
        }
        spec.directional = std::move(d);
        // Widened constants can leave previously valid derivative bounds
        // inside the range, so those stay untouched.
    }
}

}  // namespace detail

// Inflate the constants until every ordered data pair satisfies the
// corresponding Lipschitz inequality. Terminates: the data set is finite
// and the constants grow without bound.
inline ConsistencyReport consistency_repair(const LipschitzSpec& spec,
                                            const std::vector<Measurement>& data,
                                            const ConsistencyOptions& opt = {}) {
    if (opt.inflation <= 0.0)
        throw std::invalid_argument("consistency_repair: inflation must be > 0");
    spec.validate();
    ConsistencyReport rep;
    rep.initial = spec;
    rep.repaired = spec;
    detail::data_consistent(rep.repaired, data, opt.use_noise_bounds,
                            &rep.violations_found);
    while (!detail::data_consistent(rep.repaired, data, opt.use_noise_bounds)) {
        detail::inflate(rep.repaired, opt.inflation);
        ++rep.inflation_steps;
    }
    return rep;
}

enum class PhysicalSign { NonNegative, NonPositive, Free };

// Directional presets from qualitative physical knowledge: a sensitivity
// known nonnegative pins kappa_lo at 0, a known magnitude caps the other
// side, and so on.
inline DirectionalConstants preset_from_physics(
    const std::vector<PhysicalSign>& signs,
    const std::vector<std::optional<double>>& magnitudes,
    const BoxDomain& domain) {
    if (signs.size() != magnitudes.size() || signs.size() != domain.dimension())
        throw std::invalid_argument("preset_from_physics: length mismatch");
    Point lo(signs.size()), hi(signs.size());
    for (std::size_t i = 0; i < signs.size(); ++i) {
        if (magnitudes[i] && *magnitudes[i] <= 0.0)
            throw std::invalid_argument("preset_from_physics: magnitude must be > 0");
        const double mag = magnitudes[i] ? *magnitudes[i] : kInfinity;
        switch (signs[i]) {
            case PhysicalSign::NonNegative:
                lo[i] = 0.0;
                hi[i] = mag;
                break;
            case PhysicalSign::NonPositive:
                lo[i] = -mag;
                hi[i] = 0.0;
                break;
            case PhysicalSign::Free:
                lo[i] = -mag;
                hi[i] = mag;
                break;
        }
    }
    return DirectionalConstants(std::move(lo), std::move(hi), domain);
}

}  // namespace lipkit
