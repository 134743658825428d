// Campaign persistence: run specifications (JSON), per-experiment iterate
// tables (CSV) and batch summaries (JSON), plus the matching readers used
// by the round-trip tests.

#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lipkit/campaign.hpp"
#include "lipkit/types.hpp"

namespace lipkit {

struct RunSpec {
    std::string plant_id = "p-lin";
    Algorithm algorithm = Algorithm::ConstraintAdaptation;
    GuardMode guard = GuardMode::Lumped;
    bool noise = false;
    bool trim = false;
    int realizations = 1;
    unsigned seed = 1;
    int iterations = 30;
    double delta_e = 0.05;
    double alpha = 0.7;
    int workers = 1;
    std::string out_dir = ".";
};

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "ca" || s == "constraint-adaptation") return Algorithm::ConstraintAdaptation;
    if (s == "ma" || s == "modifier-adaptation") return Algorithm::ModifierAdaptation;
    throw std::invalid_argument("unknown algorithm: " + s);
}

inline GuardMode parse_guard(const std::string& s) {
    if (s == "none") return GuardMode::None;
    if (s == "lumped") return GuardMode::Lumped;
    if (s == "directional") return GuardMode::Directional;
    throw std::invalid_argument("unknown guard mode: " + s);
}

inline const char* algorithm_name(Algorithm a) {
    return a == Algorithm::ConstraintAdaptation ? "ca" : "ma";
}

inline const char* guard_name(GuardMode g) {
    switch (g) {
        case GuardMode::None: return "none";
        case GuardMode::Lumped: return "lumped";
        default: return "directional";
    }
}

inline RunSpec read_run_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open spec file: " + path);
    nlohmann::json j;
    in >> j;
    RunSpec s;
    s.plant_id = j.value("plant", s.plant_id);
    if (j.contains("algorithm")) s.algorithm = parse_algorithm(j["algorithm"]);
    if (j.contains("guard")) s.guard = parse_guard(j["guard"]);
    s.noise = j.value("noise", s.noise);
    s.trim = j.value("trim", s.trim);
    s.realizations = j.value("realizations", s.realizations);
    s.seed = j.value("seed", s.seed);
    s.iterations = j.value("iterations", s.iterations);
    s.delta_e = j.value("delta_e", s.delta_e);
    s.alpha = j.value("alpha", s.alpha);
    s.workers = j.value("workers", s.workers);
    s.out_dir = j.value("out", s.out_dir);
    if (s.realizations < 1)
        throw std::invalid_argument("run spec: realizations must be >= 1");
    if (s.iterations < 1)
        throw std::invalid_argument("run spec: iterations must be >= 1");
    if (!(s.alpha > 0.0 && s.alpha <= 1.0))
        throw std::invalid_argument("run spec: alpha must be in (0, 1]");
    if (!(s.delta_e > 0.0))
        throw std::invalid_argument("run spec: delta_e must be positive");
    if (s.workers < 1)
        throw std::invalid_argument("run spec: workers must be >= 1");
    return s;
}

inline CampaignConfig to_config(const RunSpec& s, unsigned seed) {
    CampaignConfig c;
    c.max_iterations = s.iterations;
    c.delta_e = s.delta_e;
    c.guard = s.guard;
    c.noise = s.noise;
    c.trim = s.trim;
    c.seed = seed;
    c.alpha = s.alpha;
    return c;
}

namespace detail {

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace detail

// One row per experiment, probes interleaved after their main iterate.
inline void write_iterates_table(std::ostream& os, const CampaignLog& log) {
    const std::size_t n_u = log.iterates.empty() ? 0 : log.iterates.front().u.size();
    const std::size_t n_g =
        log.iterates.empty() ? 0 : log.iterates.front().true_g.size();
    os << "index,tag";
    for (std::size_t i = 0; i < n_u; ++i) os << ",u" << i + 1;
    os << ",measured_cost";
    for (std::size_t j = 0; j < n_g; ++j) os << ",measured_g" << j + 1;
    for (std::size_t j = 0; j < n_g; ++j) os << ",true_g" << j + 1;
    os << ",guard_margin,interval_lower,interval_upper\n";
    auto row = [&](int index, const char* tag, const Point& u, double cost,
                   const std::vector<double>& mg, const std::vector<double>& tg,
                   double margin, double lo, double hi) {
        os << index << ',' << tag;
        for (double x : u) os << ',' << detail::fmt(x);
        os << ',' << detail::fmt(cost);
        for (double x : mg) os << ',' << detail::fmt(x);
        for (double x : tg) os << ',' << detail::fmt(x);
        os << ',' << detail::fmt(margin) << ',' << detail::fmt(lo) << ','
           << detail::fmt(hi) << '\n';
    };
    std::size_t probe_pos = 0;
    for (const auto& it : log.iterates) {
        double margin = -kInfinity;
        for (double m : it.guard_margins) margin = std::max(margin, m);
        if (it.guard_margins.empty()) margin = 0.0;
        row(it.index, "iterate", it.u, it.measured_cost, it.measured_g, it.true_g,
            margin, it.bound_lower, it.bound_upper);
        while (probe_pos < log.probes.size() &&
               log.probes[probe_pos].cost.index <= it.index) {
            const auto& pr = log.probes[probe_pos++];
            row(pr.cost.index, "probe", pr.cost.at, pr.cost.value, pr.measured_g,
                pr.true_g, 0.0, nominal_bounds(pr.cost).lower,
                nominal_bounds(pr.cost).upper);
        }
    }
}

struct IterateRow {
    int index = 0;
    std::string tag;
    Point u;
    double measured_cost = 0.0;
    std::vector<double> measured_g;
    std::vector<double> true_g;
    double guard_margin = 0.0;
    double interval_lower = 0.0;
    double interval_upper = 0.0;
};

inline std::vector<IterateRow> read_iterates_table(std::istream& is) {
    std::string line;
    if (!std::getline(is, line))
        throw std::invalid_argument("iterates table: empty file");
    std::vector<std::string> cols;
    {
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    std::size_t n_u = 0, n_g = 0;
    for (const auto& c : cols) {
        if (c.rfind("u", 0) == 0 && c.size() > 1 && std::isdigit(c[1])) ++n_u;
        if (c.rfind("true_g", 0) == 0) ++n_g;
    }
    std::vector<IterateRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        IterateRow r;
        std::getline(ss, tok, ',');
        r.index = std::stoi(tok);
        std::getline(ss, r.tag, ',');
        auto next = [&] {
            std::getline(ss, tok, ',');
            return std::stod(tok);
        };
        for (std::size_t i = 0; i < n_u; ++i) r.u.push_back(next());
        r.measured_cost = next();
        for (std::size_t j = 0; j < n_g; ++j) r.measured_g.push_back(next());
        for (std::size_t j = 0; j < n_g; ++j) r.true_g.push_back(next());
        r.guard_margin = next();
        r.interval_lower = next();
        r.interval_upper = next();
        rows.push_back(std::move(r));
    }
    return rows;
}

struct BatchSummary {
    int violations_iterates = 0;
    int violations_probes = 0;
    std::vector<double> delta_phi_ave;  // per realization (compare-trim runs)
    std::vector<int> convergence_iteration;
    std::vector<double> final_cost_gap;
    int realizations = 0;
};

inline nlohmann::json summary_to_json(const BatchSummary& s) {
    nlohmann::json j;
    j["realizations"] = s.realizations;
    j["violations"] = {{"iterates", s.violations_iterates},
                       {"probes", s.violations_probes}};
    j["delta_phi_ave"] = s.delta_phi_ave;
    j["convergence_iteration"] = s.convergence_iteration;
    j["final_cost_gap"] = s.final_cost_gap;
    return j;
}

inline BatchSummary summary_from_json(const nlohmann::json& j) {
    BatchSummary s;
    s.realizations = j.at("realizations").get<int>();
    s.violations_iterates = j.at("violations").at("iterates").get<int>();
    s.violations_probes = j.at("violations").at("probes").get<int>();
    s.delta_phi_ave = j.at("delta_phi_ave").get<std::vector<double>>();
    s.convergence_iteration = j.at("convergence_iteration").get<std::vector<int>>();
    s.final_cost_gap = j.at("final_cost_gap").get<std::vector<double>>();
    return s;
}

}  // namespace lipkit
