// Simulated experimental systems with analytic ground truth: values,
// gradients, valid directional/lumped constants, known optima, Gaussian
// noise injection, and deliberately mismatched models.

#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipkit/bounds.hpp"
#include "lipkit/estimation.hpp"
#include "lipkit/types.hpp"
#include "lipkit/uncertainty.hpp"

namespace lipkit {

using PlantFn = std::function<double(const Point&)>;
using PlantGradFn = std::function<Point(const Point&)>;

// Approximate process model with deliberately wrong nominal parameters.
struct PlantModel {
    ParametricModel cost;
    std::vector<ParametricModel> constraints;
    Point cost_theta;                      // nominal (mismatched) parameters
    std::vector<Point> constraint_theta;

    double eval_cost(const Point& u) const { return cost.evaluate(u, cost_theta); }
    Point grad_cost(const Point& u) const { return cost.gradient(u, cost_theta); }
    double eval_constraint(std::size_t j, const Point& u) const {
        return constraints[j].evaluate(u, constraint_theta[j]);
    }
    Point grad_constraint(std::size_t j, const Point& u) const {
        return constraints[j].gradient(u, constraint_theta[j]);
    }
};

struct PlantOracle {
    LipschitzSpec cost_spec;
    std::vector<LipschitzSpec> constraint_specs;
    Point optimum;
    double optimal_cost = 0.0;
    PlantGradFn cost_gradient;
    std::vector<PlantGradFn> constraint_gradients;
};

struct Plant {
    std::string name;
    BoxDomain box;
    PlantFn cost;
    std::vector<PlantFn> constraints;
    double noise_sigma = 0.07;
    Point initial;
    PlantOracle oracle;
    PlantModel model;

    std::size_t dimension() const { return box.dimension(); }
};

// Copies a spec and attaches exact derivative bounds at `at` from the
// oracle gradient (DerivativeBounds with lower == upper).
inline LipschitzSpec with_exact_derivatives(const LipschitzSpec& spec,
                                            const PlantGradFn& grad,
                                            const Point& at) {
    LipschitzSpec s = spec;
    const Point g = grad(at);
    s.deriv_bounds = DerivativeBounds(at, g, g);
    return s;
}

enum class PlantOutput { Cost, Constraint };

// One experiment: value plus additive N(0, sigma^2) noise from the given
// stream, with the +-3 sigma bounds attached.
inline Measurement measure(const Plant& plant, PlantOutput which,
                           std::size_t constraint_index, const Point& u,
                           std::mt19937_64& rng,
                           MeasurementTag tag = MeasurementTag::MainIterate,
                           int index = 0) {
    if (!plant.box.contains(u))
        throw std::invalid_argument("measure: point outside the plant box");
    const double truth = which == PlantOutput::Cost
                             ? plant.cost(u)
                             : plant.constraints.at(constraint_index)(u);
    double w = 0.0;
    if (plant.noise_sigma > 0.0) {
        std::normal_distribution<double> gauss(0.0, plant.noise_sigma);
        w = gauss(rng);
    }
    const double b = 3.0 * plant.noise_sigma;
    return Measurement{u, truth + w, -b, b, tag, index};
}

inline Measurement measure(const Plant& plant, const Point& u,
                           std::mt19937_64& rng) {
    return measure(plant, PlantOutput::Cost, 0, u, rng);
}

namespace detail {

inline LipschitzSpec make_spec(double lumped, Point dlo, Point dhi,
                               const BoxDomain& box) {
    LipschitzSpec s;
    s.lumped = LumpedConstant(lumped);
    s.directional = DirectionalConstants(std::move(dlo), std::move(dhi), box);
    return s;
}

inline ParametricModel shifted_quadratic_model(double offset) {
    // f(u, theta) = sum_i (u_i - theta_i)^2 + offset
    return ParametricModel{
        [offset](const Point& u, const Point& th) {
            double v = offset;
            for (std::size_t i = 0; i < u.size(); ++i)
                v += (u[i] - th[i]) * (u[i] - th[i]);
            return v;
        },
        [](const Point& u, const Point& th) {
            Point g(u.size());
            for (std::size_t i = 0; i < u.size(); ++i) g[i] = 2.0 * (u[i] - th[i]);
            return g;
        },
        BoxDomain(Point{0.0, 0.0}, Point{1.0, 1.0})};
}

}  // namespace detail

// P-LIN: linear constraint g = u1 + u2 - 1 on the unit box, quadratic
// cost, exact directional constants (1, 1), lumped sqrt(2). The model's
// constraint is optimistic (believes the boundary lies farther out).
inline Plant make_p_lin() {
    Plant p;
    p.name = "p-lin";
    p.box = BoxDomain::unit(2);
    p.cost = [](const Point& u) {
        return (u[0] - 0.7) * (u[0] - 0.7) + (u[1] - 0.8) * (u[1] - 0.8);
    };
    p.constraints = {[](const Point& u) { return u[0] + u[1] - 1.0; }};
    p.initial = {0.2, 0.3};

    p.oracle.cost_gradient = [](const Point& u) {
        return Point{2.0 * (u[0] - 0.7), 2.0 * (u[1] - 0.8)};
    };
    p.oracle.constraint_gradients = {[](const Point&) { return Point{1.0, 1.0}; }};
    p.oracle.cost_spec = detail::make_spec(std::sqrt(4.52), {-1.4, -1.6},
                                           {0.6, 0.4}, p.box);
    LipschitzSpec gs = detail::make_spec(std::sqrt(2.0), {1.0, 1.0}, {1.0, 1.0},
                                         p.box);
    // affine in both coordinates: convex and concave everywhere
    gs.curvature = CurvatureInfo{{0, 1}, {0, 1}, p.box};
    p.oracle.constraint_specs = {gs};
    p.oracle.optimum = {0.45, 0.55};
    p.oracle.optimal_cost = 0.125;

    p.model.cost = detail::shifted_quadratic_model(0.0);
    p.model.cost.param_box = BoxDomain(Point{0.6, 0.6}, Point{1.0, 1.0});
    p.model.cost_theta = {0.9, 0.9};
    p.model.constraints = {ParametricModel{
        [](const Point& u, const Point& th) { return u[0] + u[1] - th[0]; },
        [](const Point&, const Point&) { return Point{1.0, 1.0}; },
        BoxDomain(Point{0.9}, Point{1.3})}};
    p.model.constraint_theta = {{1.25}};
    return p;
}

// P-QUAD: leaching-like scenario. Quadratic disc constraint whose
// boundary sits close to the cost optimum; the initial point mirrors the
// scaled (52, 18) start of the original study.
inline Plant make_p_quad() {
    Plant p;
    p.name = "p-quad";
    p.box = BoxDomain::unit(2);
    p.cost = [](const Point& u) {
        return (u[0] - 0.45) * (u[0] - 0.45) + (u[1] - 0.78) * (u[1] - 0.78) + 0.5;
    };
    p.constraints = {[](const Point& u) {
        return 2.0 * ((u[0] - 0.6) * (u[0] - 0.6) + (u[1] - 0.9) * (u[1] - 0.9) -
                      0.16);
    }};
    p.initial = {0.6, 13.0 / 15.0};  // scaled (52, 18)

    p.oracle.cost_gradient = [](const Point& u) {
        return Point{2.0 * (u[0] - 0.45), 2.0 * (u[1] - 0.78)};
    };
    p.oracle.constraint_gradients = {[](const Point& u) {
        return Point{4.0 * (u[0] - 0.6), 4.0 * (u[1] - 0.9)};
    }};
    p.oracle.cost_spec = detail::make_spec(std::sqrt(1.1 * 1.1 + 1.56 * 1.56),
                                           {-0.9, -1.56}, {1.1, 0.44}, p.box);
    p.oracle.constraint_specs = {detail::make_spec(
        4.0 * std::sqrt(0.36 + 0.81), {-2.4, -3.6}, {1.6, 0.4}, p.box)};
    p.oracle.optimum = {0.45, 0.78};
    p.oracle.optimal_cost = 0.5;

    p.model.cost = detail::shifted_quadratic_model(0.5);
    p.model.cost.param_box = BoxDomain(Point{0.2, 0.5}, Point{0.6, 0.9});
    p.model.cost_theta = {0.3, 0.6};
    p.model.constraints = {ParametricModel{
        [](const Point& u, const Point& th) {
            return 2.0 * ((u[0] - 0.6) * (u[0] - 0.6) +
                          (u[1] - 0.9) * (u[1] - 0.9) - th[0]);
        },
        [](const Point& u, const Point&) {
            return Point{4.0 * (u[0] - 0.6), 4.0 * (u[1] - 0.9)};
        },
        BoxDomain(Point{0.12}, Point{0.24})}};
    p.model.constraint_theta = {{0.2}};  // optimistic: true value is 0.16
    return p;
}

// P-CONV: constraint convex in u1 and concave in u2, with analytic
// derivative bounds.
inline Plant make_p_conv() {
    Plant p;
    p.name = "p-conv";
    p.box = BoxDomain::unit(2);
    p.cost = [](const Point& u) {
        return (u[0] - 0.5) * (u[0] - 0.5) + (u[1] - 0.5) * (u[1] - 0.5);
    };
    p.constraints = {[](const Point& u) {
        return u[0] * u[0] - u[1] * u[1] - 0.5;
    }};
    p.initial = {0.2, 0.5};

    p.oracle.cost_gradient = [](const Point& u) {
        return Point{2.0 * (u[0] - 0.5), 2.0 * (u[1] - 0.5)};
    };
    p.oracle.constraint_gradients = {[](const Point& u) {
        return Point{2.0 * u[0], -2.0 * u[1]};
    }};
    p.oracle.cost_spec =
        detail::make_spec(std::sqrt(2.0), {-1.0, -1.0}, {1.0, 1.0}, p.box);
    LipschitzSpec gs =
        detail::make_spec(2.0 * std::sqrt(2.0), {0.0, -2.0}, {2.0, 0.0}, p.box);
    gs.curvature = CurvatureInfo{{0}, {1}, p.box};
    p.oracle.constraint_specs = {gs};
    p.oracle.optimum = {0.5, 0.5};
    p.oracle.optimal_cost = 0.0;

    p.model.cost = detail::shifted_quadratic_model(0.0);
    p.model.cost.param_box = BoxDomain(Point{0.4, 0.4}, Point{0.6, 0.6});
    p.model.cost_theta = {0.55, 0.45};
    p.model.constraints = {ParametricModel{
        [](const Point& u, const Point& th) {
            return u[0] * u[0] - u[1] * u[1] - th[0];
        },
        [](const Point& u, const Point&) {
            return Point{2.0 * u[0], -2.0 * u[1]};
        },
        BoxDomain(Point{0.4}, Point{0.6})}};
    p.model.constraint_theta = {{0.45}};
    return p;
}

// P-PREM: linear cost whose descent direction runs into the constraint
// boundary far from the optimum, so a guarded descent stalls there.
inline Plant make_p_prem() {
    Plant p;
    p.name = "p-prem";
    p.box = BoxDomain::unit(2);
    p.cost = [](const Point& u) { return -u[0] - 0.3 * u[1]; };
    p.constraints = {[](const Point& u) { return u[0] - 0.5; }};
    p.initial = {0.1, 0.1};

    p.oracle.cost_gradient = [](const Point&) { return Point{-1.0, -0.3}; };
    p.oracle.constraint_gradients = {[](const Point&) { return Point{1.0, 0.0}; }};
    p.oracle.cost_spec = detail::make_spec(std::sqrt(1.09), {-1.0, -0.3},
                                           {-1.0, -0.3}, p.box);
    p.oracle.constraint_specs = {
        detail::make_spec(1.0, {1.0, 0.0}, {1.0, 0.0}, p.box)};
    p.oracle.optimum = {0.5, 1.0};
    p.oracle.optimal_cost = -0.8;

    p.model.cost = ParametricModel{
        [](const Point& u, const Point& th) { return -th[0] * u[0] - th[1] * u[1]; },
        [](const Point&, const Point& th) { return Point{-th[0], -th[1]}; },
        BoxDomain(Point{0.5, 0.1}, Point{1.5, 0.8})};
    p.model.cost_theta = {0.9, 0.4};
    p.model.constraints = {ParametricModel{
        [](const Point& u, const Point& th) { return u[0] - th[0]; },
        [](const Point&, const Point&) { return Point{1.0, 0.0}; },
        BoxDomain(Point{0.4}, Point{0.7})}};
    p.model.constraint_theta = {{0.55}};
    return p;
}

// Dense-grid validation of the oracle constants: the lumped constant must
// dominate every observed difference quotient and the per-dimension
// quotients must fall inside the directional range.
inline void validate_oracle(const Plant& plant, int grid_per_dim = 21,
                            double tol = 1e-9) {
    const std::size_t n = plant.dimension();
    std::vector<Point> grid;
    std::vector<int> idx(n, 0);
    for (;;) {
        Point u(n);
        for (std::size_t i = 0; i < n; ++i)
            u[i] = plant.box.lower[i] + double(idx[i]) / (grid_per_dim - 1) *
                                            (plant.box.upper[i] - plant.box.lower[i]);
        grid.push_back(std::move(u));
        std::size_t d = 0;
        while (d < n && ++idx[d] == grid_per_dim) idx[d++] = 0;
        if (d == n) break;
    }

    auto check = [&](const PlantFn& f, const LipschitzSpec& spec) {
        const double kappa = spec.lumped ? spec.lumped->kappa : kInfinity;
        std::vector<double> vals(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = f(grid[i]);
        for (std::size_t a = 0; a < grid.size(); ++a)
            for (std::size_t b = a + 1; b < grid.size(); ++b) {
                const double d = distance(grid[a], grid[b]);
                if (d < 1e-12) continue;
                if (std::fabs(vals[b] - vals[a]) > kappa * d + tol)
                    throw std::logic_error(plant.name +
                                           ": oracle lumped constant invalid");
            }
        if (!spec.directional) return;
        for (const auto& u : grid)
            for (std::size_t i = 0; i < n; ++i) {
                const double h = (plant.box.upper[i] - plant.box.lower[i]) /
                                 (grid_per_dim - 1);
                if (u[i] + h > plant.box.upper[i] + 1e-12) continue;
                Point v = u;
                v[i] += h;
                const double q = (f(v) - f(u)) / h;
                if (q < spec.directional->lower[i] - tol ||
                    q > spec.directional->upper[i] + tol)
                    throw std::logic_error(plant.name +
                                           ": oracle directional constants invalid");
            }
    };
    check(plant.cost, plant.oracle.cost_spec);
    for (std::size_t j = 0; j < plant.constraints.size(); ++j)
        check(plant.constraints[j], plant.oracle.constraint_specs[j]);
}

inline const std::vector<Plant>& builtin_plants() {
    static const std::vector<Plant> catalog = [] {
        std::vector<Plant> out{make_p_lin(), make_p_quad(), make_p_conv(),
                               make_p_prem()};
        for (const auto& p : out) validate_oracle(p, 11);
        return out;
    }();
    return catalog;
}

inline const Plant& find_plant(const std::string& id) {
    for (const auto& p : builtin_plants())
        if (p.name == id) return p;
    throw std::invalid_argument("unknown plant id: " + id);
}

}  // namespace lipkit
