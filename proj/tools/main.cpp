// Command-line front end: seeded campaign batches, paired trim comparison,
// constant estimation, and the plant catalog.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <lipkit/campaign.hpp>
#include <lipkit/estimation.hpp>
#include <lipkit/io.hpp>
#include <lipkit/plants.hpp>

namespace fs = std::filesystem;
using namespace lipkit;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CliOverrides {
    std::string spec_path;
    int seed = -1;
    int realizations = -1;
    int workers = -1;
    std::string out_dir;
};

RunSpec load_spec(const CliOverrides& o) {
    RunSpec s = o.spec_path.empty() ? RunSpec{} : read_run_spec(o.spec_path);
    if (o.seed >= 0) s.seed = unsigned(o.seed);
    if (o.realizations >= 0) s.realizations = o.realizations;
    if (o.workers >= 0) s.workers = o.workers;
    if (!o.out_dir.empty()) s.out_dir = o.out_dir;
    if (s.realizations < 1)
        throw std::invalid_argument("realizations must be >= 1");
    if (s.workers < 1) throw std::invalid_argument("workers must be >= 1");
    return s;
}

// Runs fn(r) for r in [0, n) on up to `workers` threads.
void run_batch(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1) {
        for (int r = 0; r < n; ++r) fn(r);
        return;
    }
    std::mutex mu;
    int next = 0;
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (;;) {
                int r;
                {
                    std::lock_guard<std::mutex> lk(mu);
                    if (next >= n) return;
                    r = next++;
                }
                fn(r);
            }
        });
    for (auto& th : pool) th.join();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

// First iteration whose true cost is within 1% of the known optimum; -1 if
// the campaign never gets there.
int convergence_iteration(const CampaignLog& log, const Plant& plant) {
    const double tol =
        0.01 * std::max(1e-12, std::fabs(plant.oracle.optimal_cost));
    for (const auto& it : log.iterates)
        if (std::fabs(it.true_cost - plant.oracle.optimal_cost) <= tol)
            return it.index;
    return -1;
}

int cmd_run(const CliOverrides& o) {
    const RunSpec spec = load_spec(o);
    const Plant& plant = find_plant(spec.plant_id);
    fs::create_directories(spec.out_dir);

    std::vector<CampaignLog> logs(spec.realizations);
    run_batch(spec.realizations, spec.workers, [&](int r) {
        logs[r] = run_campaign(plant, spec.algorithm,
                               to_config(spec, spec.seed + unsigned(r)));
    });

    BatchSummary summary;
    summary.realizations = spec.realizations;
    for (int r = 0; r < spec.realizations; ++r) {
        const auto& log = logs[r];
        std::ostringstream csv;
        write_iterates_table(csv, log);
        write_file(fs::path(spec.out_dir) /
                       ("iterates_" + std::to_string(r) + ".csv"),
                   csv.str());
        for (const auto& it : logs[r].iterates)
            for (double g : it.true_g)
                if (g > CampaignLog::kViolationTol) ++summary.violations_iterates;
        for (const auto& pr : logs[r].probes)
            for (double g : pr.true_g)
                if (g > CampaignLog::kViolationTol) ++summary.violations_probes;
        summary.convergence_iteration.push_back(
            convergence_iteration(log, plant));
        summary.final_cost_gap.push_back(std::fabs(
            log.iterates.back().true_cost - plant.oracle.optimal_cost));
    }
    write_file(fs::path(spec.out_dir) / "summary.json",
               summary_to_json(summary).dump(2) + "\n");
    return 0;
}

int cmd_compare_trim(const CliOverrides& o) {
    RunSpec spec = load_spec(o);
    if (spec.realizations < 2)
        throw std::invalid_argument("compare-trim needs realizations >= 2");
    const Plant& plant = find_plant(spec.plant_id);
    fs::create_directories(spec.out_dir);

    BatchSummary summary;
    summary.realizations = spec.realizations;
    summary.delta_phi_ave.resize(spec.realizations);
    std::vector<int> viol_it(spec.realizations, 0), viol_pr(spec.realizations, 0);
    run_batch(spec.realizations, spec.workers, [&](int r) {
        auto cfg = to_config(spec, spec.seed + unsigned(r));
        cfg.trim = false;
        const auto raw = run_campaign(plant, spec.algorithm, cfg);
        cfg.trim = true;
        const auto trimmed = run_campaign(plant, spec.algorithm, cfg);
        double sum = 0.0;
        const std::size_t n =
            std::min(raw.iterates.size(), trimmed.iterates.size());
        for (std::size_t k = 0; k < n; ++k)
            sum += raw.iterates[k].true_cost - trimmed.iterates[k].true_cost;
        summary.delta_phi_ave[r] = sum / double(n);
        viol_it[r] = raw.violations + trimmed.violations;
    });
    summary.violations_iterates =
        std::accumulate(viol_it.begin(), viol_it.end(), 0);

    std::ostringstream csv;
    csv << "realization,delta_phi_ave\n";
    for (int r = 0; r < spec.realizations; ++r)
        csv << r << "," << detail::fmt(summary.delta_phi_ave[r]) << "\n";
    write_file(fs::path(spec.out_dir) / "delta_phi.csv", csv.str());

    // histogram of the per-realization averages, ten equal-width bins
    const auto [mn_it, mx_it] = std::minmax_element(
        summary.delta_phi_ave.begin(), summary.delta_phi_ave.end());
    const double lo = *mn_it, hi = *mx_it;
    const int nbins = 10;
    std::vector<int> counts(nbins, 0);
    const double width = (hi - lo) / nbins;
    for (double d : summary.delta_phi_ave) {
        int b = width > 0 ? int((d - lo) / width) : 0;
        counts[std::clamp(b, 0, nbins - 1)]++;
    }
    json j = summary_to_json(summary);
    j["histogram"] = {{"lower", lo}, {"upper", hi}, {"counts", counts}};
    const double mean = std::accumulate(summary.delta_phi_ave.begin(),
                                        summary.delta_phi_ave.end(), 0.0) /
                        spec.realizations;
    j["mean_delta_phi_ave"] = mean;
    write_file(fs::path(spec.out_dir) / "summary.json", j.dump(2) + "\n");
    std::cout << "mean delta_phi_ave = " << mean << " over "
              << spec.realizations << " realizations\n";
    return 0;
}

std::vector<Measurement> read_data_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open data file: " + path);
    std::vector<Measurement> ms;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> vals;
        std::string cell;
        bool numeric = true;
        while (std::getline(ls, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (...) {
                numeric = false;
                break;
            }
        }
        if (!numeric) continue;  // header row
        if (vals.size() < 2)
            throw std::invalid_argument("data rows need coordinates and a value");
        Measurement m;
        m.at.assign(vals.begin(), vals.end() - 1);
        m.value = vals.back();
        ms.push_back(std::move(m));
    }
    if (ms.empty()) throw std::invalid_argument("no data rows in " + path);
    return ms;
}

json directional_to_json(const DirectionalConstants& d) {
    return {{"lower", d.lower}, {"upper", d.upper}};
}

int cmd_estimate(const CliOverrides& o) {
    if (o.spec_path.empty())
        throw std::invalid_argument("estimate requires --spec <config.json>");
    std::ifstream in(o.spec_path);
    if (!in) throw std::invalid_argument("cannot open " + o.spec_path);
    json cfg;
    in >> cfg;

    const std::string method = cfg.value("method", "");
    const bool repair = cfg.value("repair", false);
    const std::string out_dir = !o.out_dir.empty()
                                    ? o.out_dir
                                    : cfg.value("out", std::string("."));
    EstimationOptions opt;
    opt.grid_per_dim = cfg.value("grid", 9);
    if (o.seed >= 0) opt.seed = unsigned(o.seed);

    json result;
    result["method"] = method;
    result["grid_per_dim"] = opt.grid_per_dim;
    LipschitzSpec spec;

    if (method == "model") {
        const Plant& plant = find_plant(cfg.at("plant").get<std::string>());
        const std::size_t j = cfg.value("constraint", 0);
        if (j >= plant.model.constraints.size())
            throw std::invalid_argument("plant has no such constraint model");
        const auto d = estimate_directional_from_model(
            plant.model.constraints[j], plant.box, opt);
        spec.directional = d;
        spec.lumped = LumpedConstant{lumped_from_directional(spec)};
        result["plant"] = plant.name;
        result["constraint"] = j;
    } else if (method == "fit") {
        const auto data = read_data_csv(cfg.at("data").get<std::string>());
        const auto model = fit_local_model(data, LocalModelForm::Linear);
        BoxDomain box(cfg.at("domain").at("lower").get<Point>(),
                      cfg.at("domain").at("upper").get<Point>());
        const auto d = estimate_directional_from_model(model, box, opt);
        spec.directional = d;
        spec.lumped = LumpedConstant{lumped_from_directional(spec)};
        result["points"] = data.size();
        result["coefficients"] = fitted_coefficients(model);
    } else if (method == "physics") {
        std::vector<PhysicalSign> signs;
        for (const auto& s : cfg.at("signs")) {
            const std::string name = s.get<std::string>();
            if (name == "nonneg")
                signs.push_back(PhysicalSign::NonNegative);
            else if (name == "nonpos")
                signs.push_back(PhysicalSign::NonPositive);
            else if (name == "free")
                signs.push_back(PhysicalSign::Free);
            else
                throw std::invalid_argument("unknown sign: " + name);
        }
        std::vector<std::optional<double>> mags(signs.size());
        if (cfg.contains("magnitudes")) {
            const auto& jm = cfg["magnitudes"];
            for (std::size_t i = 0; i < signs.size() && i < jm.size(); ++i)
                if (!jm[i].is_null()) mags[i] = jm[i].get<double>();
        }
        BoxDomain box(cfg.at("domain").at("lower").get<Point>(),
                      cfg.at("domain").at("upper").get<Point>());
        spec.directional = preset_from_physics(signs, mags, box);
    } else {
        throw std::invalid_argument("method must be model, fit, or physics");
    }

    if (repair) {
        const auto data = read_data_csv(cfg.at("data").get<std::string>());
        const auto rep = consistency_repair(spec, data);
        spec = rep.repaired;
        result["repair"] = {{"violations_found", rep.violations_found},
                           {"inflation_steps", rep.inflation_steps}};
    }

    if (spec.lumped) result["lumped"] = spec.lumped->kappa;
    if (spec.directional)
        result["directional"] = directional_to_json(*spec.directional);
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "lipschitz.json", result.dump(2) + "\n");
    std::cout << result.dump(2) << "\n";
    return 0;
}

int cmd_plants() {
    for (const auto& p : builtin_plants()) {
        std::cout << p.name << ": dim=" << p.dimension()
                  << ", sigma=" << p.noise_sigma
                  << ", optimal_cost=" << p.oracle.optimal_cost
                  << ", initial=(";
        for (std::size_t i = 0; i < p.initial.size(); ++i)
            std::cout << (i ? "," : "") << p.initial[i];
        std::cout << ")\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"seeded experimental-optimization campaigns with Lipschitz "
                 "safety guards"};
    app.require_subcommand(1);

    CliOverrides o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--spec", o.spec_path, "config file (JSON)");
        sub->add_option("--seed", o.seed, "base seed override");
        sub->add_option("--realizations", o.realizations,
                        "number of independent realizations");
        sub->add_option("--out", o.out_dir, "output directory");
        sub->add_option("--workers", o.workers, "concurrent realizations");
    };
    auto* run = app.add_subcommand("run", "run a campaign batch");
    add_common(run);
    auto* cmp = app.add_subcommand(
        "compare-trim", "paired-noise comparison of trimming on vs off");
    add_common(cmp);
    auto* est = app.add_subcommand(
        "estimate", "estimate Lipschitz constants from a model, a fit, or "
                    "physical reasoning");
    add_common(est);
    app.add_subcommand("plants", "list the built-in plant catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (run->parsed()) return cmd_run(o);
        if (cmp->parsed()) return cmd_compare_trim(o);
        if (est->parsed()) return cmd_estimate(o);
        return cmd_plants();
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return kExitRuntime;
    }
}
