// Guard conditions certifying the next experiment and perturbation balls
// as feasible, in exact and noise-robust forms.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "lipkit/bounds.hpp"
#include "lipkit/types.hpp"

namespace lipkit {

struct GuardDecision {
    bool feasible = true;
    double margin = -kInfinity;          // worst slack; <= 0 means pass
    std::vector<double> margins;         // per constraint
    std::optional<std::size_t> binding_constraint;
};

struct BackoffReport {
    std::vector<double> per_constraint_backoff;
    std::vector<bool> satisfied;

    bool all_satisfied() const {
        for (bool s : satisfied)
            if (!s) return false;
        return true;
    }
};

namespace detail {

// Worst-case increase of constraint j when moving from u_k to u_next.
inline double guard_increment(const LipschitzSpec& spec, const Point& u_k,
                              const Point& u_next) {
    if (spec.directional && spec.curvature)
        return directional_increment(spec, u_k, u_next, /*use_max=*/true);
    if (spec.lumped)
        return spec.lumped->kappa * distance(u_k, u_next);
    // Directional constants without curvature info: conservative reduction
    // through the mixed vector.
    return norm2(mixed_kappa(spec, BoundSide::Upper)) * distance(u_k, u_next);
}

inline GuardDecision evaluate_guard(const std::vector<double>& g_at_k,
                                    const Point& u_k, const Point& u_next,
                                    const std::vector<LipschitzSpec>& specs) {
    if (g_at_k.size() != specs.size())
        throw std::invalid_argument("guard: one spec per constraint required");
    for (double g : g_at_k)
        if (g > 0.0)
            throw std::domain_error("guard: starting point infeasible (g > 0)");
    GuardDecision d;
    d.margins.resize(g_at_k.size());
    for (std::size_t j = 0; j < g_at_k.size(); ++j) {
        specs[j].validate();
        const double m = g_at_k[j] + guard_increment(specs[j], u_k, u_next);
        d.margins[j] = m;
        if (m > d.margin) {
            d.margin = m;
            d.binding_constraint = j;
        }
        if (m > 0.0) d.feasible = false;
    }
    if (g_at_k.empty()) d.margin = 0.0;
    return d;
}

}  // namespace detail

// Certifies u_next: passing implies g_j(u_next) <= 0 whenever the specs
// are valid and g_at_k are true (or upper-bounding) values.
inline GuardDecision guard_step(const std::vector<double>& g_at_k,
                                const Point& u_k, const Point& u_next,
                                const std::vector<LipschitzSpec>& specs) {
    return detail::evaluate_guard(g_at_k, u_k, u_next, specs);
}

// Same inequality fed with upper bounding values instead of exact ones;
// feasibility then holds with the probability of those bounds.
inline GuardDecision robust_guard_step(const std::vector<double>& g_upper_at_k,
                                       const Point& u_k, const Point& u_next,
                                       const std::vector<LipschitzSpec>& specs) {
    return detail::evaluate_guard(g_upper_at_k, u_k, u_next, specs);
}

// Largest r such that every step of length <= r passes the lumped guard.
// kappa = 0 with g <= 0 yields +infinity.
inline double max_safe_radius(const std::vector<double>& g_at_k,
                              const std::vector<LipschitzSpec>& specs) {
    if (g_at_k.size() != specs.size())
        throw std::invalid_argument("max_safe_radius: one spec per constraint");
    double r = kInfinity;
    for (std::size_t j = 0; j < g_at_k.size(); ++j) {
        if (g_at_k[j] > 0.0)
            throw std::domain_error("max_safe_radius: g > 0 at current point");
        specs[j].validate();
        const double kappa = specs[j].lumped
                                 ? specs[j].lumped->kappa
                                 : lumped_from_directional(specs[j]).kappa;
        if (kappa > 0.0) r = std::min(r, -g_at_k[j] / kappa);
    }
    return r;
}

namespace detail {

inline double backoff_amount(const LipschitzSpec& spec, double delta_e) {
    // Mixed vector when directional information is present; plain lumped
    // constant otherwise.
    if (spec.directional)
        return delta_e * norm2(mixed_kappa(spec, BoundSide::Upper));
    return delta_e * spec.lumped->kappa;
}

inline BackoffReport evaluate_backoff(const std::vector<double>& g_at_k,
                                      const std::vector<LipschitzSpec>& specs,
                                      double delta_e) {
    if (delta_e < 0.0)
        throw std::invalid_argument("perturbation_backoff: negative delta_e");
    if (g_at_k.size() != specs.size())
        throw std::invalid_argument("perturbation_backoff: one spec per constraint");
    BackoffReport r;
    r.per_constraint_backoff.resize(specs.size());
    r.satisfied.resize(specs.size());
    for (std::size_t j = 0; j < specs.size(); ++j) {
        specs[j].validate();
        const double b = backoff_amount(specs[j], delta_e);
        r.per_constraint_backoff[j] = b;
        r.satisfied[j] = g_at_k[j] + b <= 0.0;
    }
    return r;
}

}  // namespace detail

// Back-off delta_e * kappa (or delta_e * ||ktilde||): satisfied_j implies
// every point of the delta_e-ball around u_k is feasible for constraint j.
inline BackoffReport perturbation_backoff(const std::vector<double>& g_at_k,
                                          const std::vector<LipschitzSpec>& specs,
                                          double delta_e) {
    return detail::evaluate_backoff(g_at_k, specs, delta_e);
}

inline BackoffReport robust_perturbation_backoff(
    const std::vector<double>& g_upper_at_k,
    const std::vector<LipschitzSpec>& specs, double delta_e) {
    return detail::evaluate_backoff(g_upper_at_k, specs, delta_e);
}

}  // namespace lipkit
