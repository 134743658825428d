// Reference optimizers: constraint adaptation and modifier adaptation,
// each runnable unguarded or with the lumped/directional Lipschitz guard,
// with optional noise, bound refinement and measurement trimming. Also a
// guarded steepest-descent loop used to demonstrate premature convergence.

#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "lipkit/feasibility.hpp"
#include "lipkit/plants.hpp"
#include "lipkit/solver.hpp"
#include "lipkit/types.hpp"
#include "lipkit/uncertainty.hpp"

namespace lipkit {

enum class GuardMode { None, Lumped, Directional };
enum class Algorithm { ConstraintAdaptation, ModifierAdaptation };

struct CampaignConfig {
    int max_iterations = 30;  // k_f: main experiments after the initial one
    double delta_e = 0.05;
    GuardMode guard = GuardMode::Lumped;
    bool noise = false;
    bool trim = false;  // refine bounds + trim measured values (MA, noisy)
    unsigned seed = 1;
    double alpha = 1.0;
    double refine_tol = 1e-6;
    SolveOptions solve;
};

struct ModifierState {
    std::vector<double> eps;                  // per constraint
    std::vector<Point> lambda_g;              // per constraint, length n_u
    Point lambda_phi;                         // length n_u
    double alpha = 1.0;

    static ModifierState zeros(std::size_t n_g, std::size_t n_u, double alpha) {
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw std::invalid_argument("ModifierState: alpha must be in (0, 1]");
        return {std::vector<double>(n_g, 0.0),
                std::vector<Point>(n_g, Point(n_u, 0.0)), Point(n_u, 0.0), alpha};
    }
};

struct IterateRecord {
    int index = 0;
    Point u;
    double measured_cost = 0.0;
    double true_cost = 0.0;
    std::vector<double> measured_g;
    std::vector<double> true_g;
    std::vector<double> guard_margins;  // of the step that produced this iterate
    double bound_lower = 0.0;           // cost interval at this point
    double bound_upper = 0.0;
};

struct ProbeRecord {
    Measurement cost;
    std::vector<double> measured_g;
    std::vector<double> true_g;
};

struct CampaignLog {
    std::vector<IterateRecord> iterates;
    std::vector<ProbeRecord> probes;
    int violations = 0;
    int infeasible_subproblems = 0;
    int inconsistent_refinements = 0;

    static constexpr double kViolationTol = 1e-12;
};

namespace detail {

// Strips the spec down to what the configured guard mode may use.
inline LipschitzSpec select_spec(const LipschitzSpec& full, GuardMode mode) {
    if (mode == GuardMode::Directional && full.directional) return full;
    LipschitzSpec s;
    s.lumped = full.lumped ? *full.lumped : lumped_from_directional(full);
    return s;
}

}  // namespace detail

// Drives one campaign on one plant. Owns the noise stream, the solver
// stream, and the full measurement history (main iterates and probes).
class CampaignRunner {
  public:
    CampaignRunner(const Plant& plant, Algorithm algo, CampaignConfig config)
        : plant_(plant), algo_(algo), config_(std::move(config)),
          noise_rng_(config_.seed), solver_rng_(config_.seed ^ 0x9e3779b97f4a7c15ull) {
        if (!config_.noise) plant_.noise_sigma = 0.0;
        n_g_ = plant_.constraints.size();
        guard_specs_.reserve(n_g_);
        for (const auto& s : plant_.oracle.constraint_specs)
            guard_specs_.push_back(detail::select_spec(s, config_.guard));
        cost_spec_ = detail::select_spec(plant_.oracle.cost_spec, config_.guard);
        state_ = ModifierState::zeros(n_g_, plant_.dimension(), config_.alpha);
    }

    CampaignLog run() {
        Point u = plant_.initial;
        if (algo_ == Algorithm::ModifierAdaptation && config_.guard != GuardMode::None)
            require_backoff_compliant(u);
        record_iterate(0, u, {});
        for (int k = 1; k <= config_.max_iterations; ++k) {
            Point u_next;
            std::vector<double> margins;
            if (algo_ == Algorithm::ConstraintAdaptation)
                u_next = constraint_adaptation_step(u, margins);
            else
                u_next = modifier_adaptation_step(u, margins);
            u = u_next;
            record_iterate(k, u, margins);
        }
        return log_;
    }

    const CampaignLog& log() const { return log_; }

  private:
    void require_backoff_compliant(const Point& u0) {
        std::vector<double> g(n_g_);
        for (std::size_t j = 0; j < n_g_; ++j) g[j] = plant_.constraints[j](u0);
        const auto rep = perturbation_backoff(g, guard_specs_, config_.delta_e);
        if (!rep.all_satisfied())
            throw std::domain_error(
                "modifier adaptation: initial point does not satisfy the "
                "perturbation back-off");
    }

    Measurement measure_output(PlantOutput which, std::size_t j, const Point& u,
                               MeasurementTag tag, int index) {
        Measurement m = measure(plant_, which, j, u, noise_rng_, tag, index);
        if (which == PlantOutput::Cost)
            cost_history_.push_back(m);
        else
            g_history_[j].push_back(m);
        return m;
    }

    void record_iterate(int k, const Point& u, const std::vector<double>& margins) {
        if (g_history_.size() != n_g_) g_history_.resize(n_g_);
        IterateRecord rec;
        rec.index = k;
        rec.u = u;
        rec.guard_margins = margins;
        const Measurement mc =
            measure_output(PlantOutput::Cost, 0, u, MeasurementTag::MainIterate, k);
        rec.measured_cost = mc.value;
        rec.true_cost = plant_.cost(u);
        last_cost_meas_ = mc;
        last_g_meas_.clear();
        for (std::size_t j = 0; j < n_g_; ++j) {
            const Measurement mg = measure_output(PlantOutput::Constraint, j, u,
                                                  MeasurementTag::MainIterate, k);
            rec.measured_g.push_back(mg.value);
            rec.true_g.push_back(plant_.constraints[j](u));
            last_g_meas_.push_back(mg);
        }
        const BoundedValue bv = cost_interval_at(mc);
        rec.bound_lower = bv.lower;
        rec.bound_upper = bv.upper;
        for (double g : rec.true_g)
            if (g > CampaignLog::kViolationTol) ++log_.violations;
        log_.iterates.push_back(std::move(rec));
    }

    // Refined (or nominal) cost interval at the latest main measurement.
    BoundedValue cost_interval_at(const Measurement& m) {
        if (!config_.trim || !config_.noise) return nominal_bounds(m);
        const auto res = refine_channel(cost_history_, cost_spec_);
        return res.empty() ? nominal_bounds(m) : res.back();
    }

    std::vector<BoundedValue> refine_channel(const std::vector<Measurement>& h,
                                             const LipschitzSpec& spec) {
        try {
            return refine_bounds(h, spec, config_.refine_tol).bounds;
        } catch (const InconsistentData&) {
            ++log_.inconsistent_refinements;
            return {};
        }
    }

    // Upper bounding value for constraint j at the current point: exact
    // value when noiseless, nominal or refined f_hi otherwise.
    double g_upper_value(std::size_t j) {
        if (!config_.noise) return last_g_meas_[j].value;
        if (config_.trim) {
            const auto refined = refine_channel(g_history_[j], guard_specs_[j]);
            if (!refined.empty()) return refined.back().upper;
        }
        return nominal_bounds(last_g_meas_[j]).upper;
    }

    std::vector<ConstraintFn> guard_constraints(const Point& u_k,
                                                double extra_backoff) {
        std::vector<ConstraintFn> cons;
        for (std::size_t j = 0; j < n_g_; ++j) {
            const double g_up = g_upper_value(j);
            const LipschitzSpec spec = guard_specs_[j];
            cons.push_back([spec, g_up, u_k, extra_backoff](const Point& u) {
                return g_up + detail::guard_increment(spec, u_k, u) +
                       extra_backoff *
                           (spec.directional
                                ? norm2(mixed_kappa(spec, BoundSide::Upper))
                                : spec.lumped->kappa);
            });
        }
        return cons;
    }

    Point solve_or_hold(const ObjectiveFn& cost,
                        std::vector<ConstraintFn> cons, const Point& u_k,
                        std::vector<double>& margins_out) {
        const SolveResult sol =
            solve_subproblem(cost, cons, plant_.box, u_k, solver_rng_, config_.solve);
        Point u_next = sol.feasible ? sol.minimizer : u_k;
        if (!sol.feasible) ++log_.infeasible_subproblems;
        if (config_.guard != GuardMode::None) {
            // Computed directly: noisy upper bounds may sit above zero, which
            // the guard_step precondition would reject.
            margins_out.resize(n_g_);
            for (std::size_t j = 0; j < n_g_; ++j)
                margins_out[j] = g_upper_value(j) +
                                 detail::guard_increment(guard_specs_[j], u_k, u_next);
        }
        return u_next;
    }

    Point constraint_adaptation_step(const Point& u_k,
                                     std::vector<double>& margins_out) {
        for (std::size_t j = 0; j < n_g_; ++j) {
            const double err =
                last_g_meas_[j].value - plant_.model.eval_constraint(j, u_k);
            state_.eps[j] = config_.alpha * err + (1.0 - config_.alpha) * state_.eps[j];
        }
        ObjectiveFn cost = [this](const Point& u) { return plant_.model.eval_cost(u); };
        std::vector<ConstraintFn> cons;
        for (std::size_t j = 0; j < n_g_; ++j) {
            const double eps = state_.eps[j];
            cons.push_back([this, j, eps](const Point& u) {
                return plant_.model.eval_constraint(j, u) + eps;
            });
        }
        if (config_.guard != GuardMode::None)
            for (auto& c : guard_constraints(u_k, 0.0)) cons.push_back(std::move(c));
        return solve_or_hold(cost, std::move(cons), u_k, margins_out);
    }

    // Probe at u_k -+ delta_e e_i; forward difference when the backward
    // probe would leave the box below.
    Point modifier_adaptation_step(const Point& u_k,
                                   std::vector<double>& margins_out) {
        const std::size_t n = plant_.dimension();
        const double de = config_.delta_e;

        std::vector<Measurement> probe_cost;
        std::vector<std::vector<Measurement>> probe_g(n_g_);
        std::vector<bool> forward(n);
        for (std::size_t i = 0; i < n; ++i) {
            forward[i] = u_k[i] - de < plant_.box.lower[i];
            Point up = u_k;
            up[i] += forward[i] ? de : -de;
            ProbeRecord pr;
            pr.cost = measure_output(PlantOutput::Cost, 0, up, MeasurementTag::Probe,
                                     int(log_.iterates.size()) - 1);
            probe_cost.push_back(pr.cost);
            for (std::size_t j = 0; j < n_g_; ++j) {
                const Measurement mg = measure_output(
                    PlantOutput::Constraint, j, up, MeasurementTag::Probe,
                    int(log_.iterates.size()) - 1);
                probe_g[j].push_back(mg);
                pr.measured_g.push_back(mg.value);
                pr.true_g.push_back(plant_.constraints[j](up));
            }
            for (double g : pr.true_g)
                if (g > CampaignLog::kViolationTol) ++log_.violations;
            log_.probes.push_back(std::move(pr));
        }

        // Values entering the modifiers, trimmed to refined intervals when
        // operating noisily with trimming enabled.
        double cost_at_k = last_cost_meas_.value;
        std::vector<double> cost_at_probe(n);
        for (std::size_t i = 0; i < n; ++i) cost_at_probe[i] = probe_cost[i].value;
        std::vector<double> g_at_k(n_g_);
        std::vector<std::vector<double>> g_at_probe(n_g_, std::vector<double>(n));
        for (std::size_t j = 0; j < n_g_; ++j) {
            g_at_k[j] = last_g_meas_[j].value;
            for (std::size_t i = 0; i < n; ++i) g_at_probe[j][i] = probe_g[j][i].value;
        }
        if (config_.noise && config_.trim) {
            const auto cb = refine_channel(cost_history_, cost_spec_);
            if (!cb.empty()) {
                auto find = [&](const Measurement& m) {
                    for (std::size_t t = cost_history_.size(); t-- > 0;)
                        if (cost_history_[t].at == m.at &&
                            cost_history_[t].value == m.value)
                            return trim_measurement(m, cb[t]);
                    return m.value;
                };
                cost_at_k = find(last_cost_meas_);
                for (std::size_t i = 0; i < n; ++i)
                    cost_at_probe[i] = find(probe_cost[i]);
            }
            for (std::size_t j = 0; j < n_g_; ++j) {
                const auto gb = refine_channel(g_history_[j], guard_specs_[j]);
                if (gb.empty()) continue;
                auto find = [&](const Measurement& m) {
                    for (std::size_t t = g_history_[j].size(); t-- > 0;)
                        if (g_history_[j][t].at == m.at &&
                            g_history_[j][t].value == m.value)
                            return trim_measurement(m, gb[t]);
                    return m.value;
                };
                g_at_k[j] = find(last_g_meas_[j]);
                for (std::size_t i = 0; i < n; ++i)
                    g_at_probe[j][i] = find(probe_g[j][i]);
            }
        }

        auto fd_gradient = [&](double at_k, const std::vector<double>& at_probe) {
            Point g(n);
            for (std::size_t i = 0; i < n; ++i)
                g[i] = forward[i] ? (at_probe[i] - at_k) / de
                                  : (at_k - at_probe[i]) / de;
            return g;
        };
        const Point grad_cost = fd_gradient(cost_at_k, cost_at_probe);
        const Point model_grad_cost = plant_.model.grad_cost(u_k);
        const double a = config_.alpha;
        for (std::size_t i = 0; i < n; ++i)
            state_.lambda_phi[i] = a * (grad_cost[i] - model_grad_cost[i]) +
                                   (1.0 - a) * state_.lambda_phi[i];
        for (std::size_t j = 0; j < n_g_; ++j) {
            const double err = g_at_k[j] - plant_.model.eval_constraint(j, u_k);
            state_.eps[j] = a * err + (1.0 - a) * state_.eps[j];
            const Point grad_g = fd_gradient(g_at_k[j], g_at_probe[j]);
            const Point model_grad_g = plant_.model.grad_constraint(j, u_k);
            for (std::size_t i = 0; i < n; ++i)
                state_.lambda_g[j][i] = a * (grad_g[i] - model_grad_g[i]) +
                                        (1.0 - a) * state_.lambda_g[j][i];
        }

        ObjectiveFn cost = [this](const Point& u) {
            double v = plant_.model.eval_cost(u);
            for (std::size_t i = 0; i < u.size(); ++i)
                v += state_.lambda_phi[i] * u[i];
            return v;
        };
        std::vector<ConstraintFn> cons;
        for (std::size_t j = 0; j < n_g_; ++j) {
            const double eps = state_.eps[j];
            const Point lam = state_.lambda_g[j];
            const Point uk = u_k;
            cons.push_back([this, j, eps, lam, uk](const Point& u) {
                double v = plant_.model.eval_constraint(j, u) + eps;
                for (std::size_t i = 0; i < u.size(); ++i)
                    v += lam[i] * (u[i] - uk[i]);
                return v;
            });
        }
        if (config_.guard != GuardMode::None)
            for (auto& c : guard_constraints(u_k, config_.delta_e))
                cons.push_back(std::move(c));
        return solve_or_hold(cost, std::move(cons), u_k, margins_out);
    }

    Plant plant_;
    Algorithm algo_;
    CampaignConfig config_;
    std::mt19937_64 noise_rng_;
    std::mt19937_64 solver_rng_;
    std::size_t n_g_ = 0;
    std::vector<LipschitzSpec> guard_specs_;
    LipschitzSpec cost_spec_;
    ModifierState state_;
    std::vector<Measurement> cost_history_;
    std::vector<std::vector<Measurement>> g_history_;
    Measurement last_cost_meas_;
    std::vector<Measurement> last_g_meas_;
    CampaignLog log_;
};

inline CampaignLog run_campaign(const Plant& plant, Algorithm algo,
                                const CampaignConfig& config) {
    return CampaignRunner(plant, algo, config).run();
}

struct DescentTrace {
    std::vector<Point> iterates;
    std::vector<double> step_norms;
    bool stalled = false;
    Point final;
};

// Guarded steepest descent on the true cost gradient: the textbook loop
// that exhibits premature convergence on P-PREM (the safe radius shrinks
// to zero on an active constraint away from the optimum).
inline DescentTrace run_guarded_descent(const Plant& plant, int iterations,
                                        double nominal_step = 0.25,
                                        double stall_tol = 1e-4) {
    std::vector<LipschitzSpec> specs;
    for (const auto& s : plant.oracle.constraint_specs)
        specs.push_back(detail::select_spec(s, GuardMode::Lumped));
    DescentTrace tr;
    Point u = plant.initial;
    tr.iterates.push_back(u);
    for (int k = 0; k < iterations; ++k) {
        Point d = plant.oracle.cost_gradient(u);
        double nd = norm2(d);
        if (nd < 1e-14) break;
        for (auto& x : d) x = -x / nd;
        std::vector<double> g(plant.constraints.size());
        for (std::size_t j = 0; j < g.size(); ++j) g[j] = plant.constraints[j](u);
        const double r = max_safe_radius(g, specs);
        const double t = std::min(nominal_step, r);
        Point u_next(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) u_next[i] = u[i] + t * d[i];
        u_next = plant.box.clip(std::move(u_next));
        tr.step_norms.push_back(distance(u, u_next));
        u = std::move(u_next);
        tr.iterates.push_back(u);
        if (tr.step_norms.back() < stall_tol) {
            tr.stalled = true;
            break;
        }
    }
    tr.final = u;
    return tr;
}

}  // namespace lipkit
