// Multi-start local search for the small (2-4 dimensional) smooth
// subproblems that arise in the reference optimizers and in model-based
// constant estimation. Compass search with random polling directions,
// box projection and a feasibility-restoration phase.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "lipkit/types.hpp"

namespace lipkit {

using ObjectiveFn = std::function<double(const Point&)>;
using ConstraintFn = std::function<double(const Point&)>;

struct SolveOptions {
    int starts = 20;
    double initial_step = 0.25;
    double step_tol = 1e-10;
    double feasibility_tol = -1e-10;  // constraints must reach g <= this
    int max_poll_rounds = 4000;
    int random_directions = 4;
};

struct SolveResult {
    Point minimizer;
    double value = kInfinity;
    bool feasible = false;
};

namespace detail {

inline bool is_feasible(const Point& u, const std::vector<ConstraintFn>& cons,
                        double tol) {
    for (const auto& g : cons)
        if (g(u) > tol) return false;
    return true;
}

inline double violation(const Point& u, const std::vector<ConstraintFn>& cons) {
    double v = 0.0;
    for (const auto& g : cons) v += std::max(0.0, g(u));
    return v;
}

// Pattern search on `f` restricted to the box, moves rejected unless
// `accept` holds at the trial point.
template <class F, class Accept>
Point compass_search(Point u, const BoxDomain& box, F&& f, Accept&& accept,
                     const SolveOptions& opt, std::mt19937_64& rng) {
    const std::size_t n = box.dimension();
    std::normal_distribution<double> gauss(0.0, 1.0);
    double h = opt.initial_step;
    double fu = f(u);
    int rounds = 0;
    while (h > opt.step_tol && rounds++ < opt.max_poll_rounds) {
        bool improved = false;
        auto try_move = [&](const Point& dir) {
            Point v(n);
            for (std::size_t i = 0; i < n; ++i) v[i] = u[i] + h * dir[i];
            v = box.clip(std::move(v));
            if (!accept(v)) return;
            const double fv = f(v);
            if (fv < fu - 1e-15) {
                u = std::move(v);
                fu = fv;
                improved = true;
            }
        };
        for (std::size_t i = 0; i < n && !improved; ++i) {
            Point e(n, 0.0);
            e[i] = 1.0;
            try_move(e);
            if (improved) break;
            e[i] = -1.0;
            try_move(e);
        }
        for (int r = 0; r < opt.random_directions && !improved; ++r) {
            Point d(n);
            double nd = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                d[i] = gauss(rng);
                nd += d[i] * d[i];
            }
            nd = std::sqrt(nd);
            if (nd < 1e-14) continue;
            for (auto& x : d) x /= nd;
            try_move(d);
        }
        if (improved)
            h = std::min(h * 2.0, opt.initial_step);
        else
            h *= 0.5;
    }
    return u;
}

}  // namespace detail

// Minimize `cost` over box subject to cons_j(u) <= 0. Starts are u_center,
// points near it, and uniform draws from the box. Ties within `tie_tol`
// in cost break toward the point closest to u_center.
inline SolveResult solve_subproblem(const ObjectiveFn& cost,
                                    const std::vector<ConstraintFn>& cons,
                                    const BoxDomain& box, const Point& u_center,
                                    std::mt19937_64& rng,
                                    const SolveOptions& opt = {},
                                    double tie_tol = 1e-9) {
    const std::size_t n = box.dimension();
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<Point> starts;
    starts.push_back(box.clip(u_center));
    for (int s = 1; s < opt.starts; ++s) {
        Point u(n);
        if (s % 3 == 0) {
            // local start near the center
            std::normal_distribution<double> gauss(0.0, 0.05);
            for (std::size_t i = 0; i < n; ++i) u[i] = u_center[i] + gauss(rng);
        } else {
            for (std::size_t i = 0; i < n; ++i)
                u[i] = box.lower[i] + unif(rng) * (box.upper[i] - box.lower[i]);
        }
        starts.push_back(box.clip(std::move(u)));
    }

    SolveResult best;
    for (Point u : starts) {
        if (!detail::is_feasible(u, cons, opt.feasibility_tol)) {
            // restoration: drive the total violation to zero first
            u = detail::compass_search(
                std::move(u), box,
                [&](const Point& v) { return detail::violation(v, cons); },
                [](const Point&) { return true; }, opt, rng);
            if (!detail::is_feasible(u, cons, opt.feasibility_tol)) continue;
        }
        u = detail::compass_search(
            std::move(u), box, cost,
            [&](const Point& v) {
                return detail::is_feasible(v, cons, opt.feasibility_tol);
            },
            opt, rng);
        const double fu = cost(u);
        if (!best.feasible || fu < best.value - tie_tol ||
            (fu < best.value + tie_tol &&
             distance(u, u_center) < distance(best.minimizer, u_center))) {
            best.minimizer = std::move(u);
            best.value = fu;
            best.feasible = true;
        }
    }
    return best;
}

// Maximize/minimize a smooth scalar over a box: multi-start refinement
// seeded by a coarse grid plus random draws.
inline double extremize_on_box(const ObjectiveFn& f, const BoxDomain& box,
                               bool maximize, std::mt19937_64& rng,
                               int grid_per_dim = 9, const SolveOptions& opt = {}) {
    const std::size_t n = box.dimension();
    ObjectiveFn obj = maximize ? ObjectiveFn([&f](const Point& u) { return -f(u); })
                               : f;

    // Coarse grid, capped so high-dimensional boxes fall back to sampling.
    std::vector<Point> seeds;
    double total = 1.0;
    for (std::size_t i = 0; i < n; ++i) total *= grid_per_dim;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    if (total <= 20000.0) {
        std::vector<int> idx(n, 0);
        for (;;) {
            Point u(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double t =
                    grid_per_dim == 1 ? 0.5 : double(idx[i]) / (grid_per_dim - 1);
                u[i] = box.lower[i] + t * (box.upper[i] - box.lower[i]);
            }
            seeds.push_back(std::move(u));
            std::size_t d = 0;
            while (d < n && ++idx[d] == grid_per_dim) idx[d++] = 0;
            if (d == n) break;
        }
    } else {
        for (int s = 0; s < 20000; ++s) {
            Point u(n);
            for (std::size_t i = 0; i < n; ++i)
                u[i] = box.lower[i] + unif(rng) * (box.upper[i] - box.lower[i]);
            seeds.push_back(std::move(u));
        }
    }

    // Keep the best few seeds and polish them.
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(seeds.size());
    for (std::size_t s = 0; s < seeds.size(); ++s)
        scored.emplace_back(obj(seeds[s]), s);
    std::sort(scored.begin(), scored.end());
    const std::size_t polish = std::min<std::size_t>(scored.size(), 8);

    double best = scored.front().first;
    for (std::size_t s = 0; s < polish; ++s) {
        Point u = detail::compass_search(
            seeds[scored[s].second], box, obj, [](const Point&) { return true; },
            opt, rng);
        best = std::min(best, obj(u));
    }
    return maximize ? -best : best;
}

}  // namespace lipkit
