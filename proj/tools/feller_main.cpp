// Command-line front end: scenario-driven solves, simulations, risk reports,
// parameter sweeps, and figure-data replication for the interbank lending game.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "feller/coeffs.hpp"
#include "feller/equilibrium.hpp"
#include "feller/io.hpp"
#include "feller/risk.hpp"
#include "feller/scenario.hpp"
#include "feller/sde.hpp"

namespace fs = std::filesystem;
using namespace feller;

namespace {

// All artifacts are staged as <name>.tmp and renamed once complete, so a
// failed run never leaves a partial output behind.
class OutputDir {
public:
    explicit OutputDir(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

    void write(const std::string& name, const std::string& content) const {
        const fs::path tmp = dir_ / (name + ".tmp");
        {
            std::ofstream os(tmp, std::ios::binary);
            if (!os) throw std::runtime_error("cannot write " + tmp.string());
            os << content;
        }
        fs::rename(tmp, dir_ / name);
    }

    fs::path path(const std::string& name) const { return dir_ / name; }

private:
    fs::path dir_;
};

struct CliOptions {
    std::string scenario_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed_override;
    std::optional<int> paths_override;
    bool allow_inadmissible = false;
};

Scenario load_scenario(const CliOptions& opt) {
    Scenario sc = Scenario::load(opt.scenario_path);
    if (opt.seed_override) sc.sim.seed = *opt.seed_override;
    if (opt.paths_override) sc.sim.n_paths = *opt.paths_override;
    return sc;
}

std::string coefficients_csv(const CoefficientPath& path, int stride) {
    std::ostringstream os;
    os.precision(12);
    write_coefficients_csv(path, os, stride);
    return os.str();
}

std::string ensemble_csv(const PathEnsemble& ens, int stride) {
    std::ostringstream os;
    os.precision(12);
    write_ensemble_csv(ens, os, stride);
    return os.str();
}

std::string ensemble_bin(const PathEnsemble& ens) {
    std::ostringstream os(std::ios::binary);
    write_ensemble_binary(ens, os);
    return os.str();
}

struct MeanVar {
    double mean = 0.0, var = 0.0, se_mean = 0.0;
};

MeanVar terminal_reserve_stats(const PathEnsemble& ens) {
    MeanVar mv;
    const int P = ens.n_paths;
    for (int p = 0; p < P; ++p) mv.mean += ens.terminal_sum(p);
    mv.mean /= P;
    for (int p = 0; p < P; ++p) {
        const double d = ens.terminal_sum(p) - mv.mean;
        mv.var += d * d;
    }
    mv.var /= (P > 1 ? P - 1 : 1);
    mv.se_mean = std::sqrt(mv.var / P);
    return mv;
}

// Drift tabulation N*(gamma_t - psi_t) for the total-reserve process.
void reserve_drift(const ModelParams& params, const CoefficientPath& coeffs,
                   std::vector<double>& grid, std::vector<double>& drift) {
    const double n = static_cast<double>(params.n_banks);
    grid = coeffs.grid;
    drift.resize(coeffs.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        drift[k] = n * (params.gamma(coeffs.grid[k]) - coeffs.psi[k]);
}

int cmd_solve(const CliOptions& opt) {
    const Scenario sc = load_scenario(opt);
    const OutputDir out(opt.out_dir);
    std::ostringstream manifest;
    manifest << sc.to_manifest();
    manifest << "\n# solver\n# eta cross-check tolerance: 1e-8\n";
    if (sc.model.mode == HorizonMode::Finite) {
        const auto fp = solve_finite_horizon(sc.model);
        const auto mf = solve_mfg(sc.model);
        out.write("coeffs_finite_player.csv", coefficients_csv(fp, sc.stride));
        out.write("coeffs_mean_field.csv", coefficients_csv(mf, sc.stride));
    } else {
        const auto st = solve_infinite_horizon(sc.model);
        std::ostringstream os;
        os.precision(12);
        os << "eta,L,phi,mu,psi\n"
           << st.eta << ',' << st.L << ',' << st.phi << ',' << st.mu << ',' << st.psi << '\n';
        out.write("coeffs_stationary.csv", os.str());
    }
    out.write("manifest.txt", manifest.str());
    std::cout << "solve: wrote coefficient tables to " << opt.out_dir << "\n";
    return 0;
}

int cmd_simulate(const CliOptions& opt) {
    const Scenario sc = load_scenario(opt);
    const OutputDir out(opt.out_dir);

    PathEnsemble ens;
    if (sc.system == SimSystem::Uncontrolled) {
        ens = simulate_uncontrolled(sc.model, sc.sim, sc.init);
    } else if (sc.system == SimSystem::Equilibrium) {
        const auto coeffs = solve_finite_horizon(sc.model);
        ens = simulate_equilibrium(sc.model, coeffs, sc.sim, sc.init, opt.allow_inadmissible);
    } else {
        const auto coeffs = solve_finite_horizon(sc.model);
        std::vector<double> grid, drift;
        reserve_drift(sc.model, coeffs, grid, drift);
        ens = simulate_total_reserve(sc.y0, grid, drift, sc.model.horizon, sc.sim);
    }

    const MeanVar mv = terminal_reserve_stats(ens);
    const DefaultStats ds = default_statistics(ens);
    std::ostringstream summary;
    summary.precision(12);
    summary << "terminal_reserve_mean: " << mv.mean << "\n";
    summary << "terminal_reserve_se: " << mv.se_mean << "\n";
    summary << "terminal_reserve_var: " << mv.var << "\n";
    for (std::size_t b = 0; b < ds.per_bank_freq.size(); ++b)
        summary << "bank_" << b << "_default_freq: " << ds.per_bank_freq[b] << "\n";
    summary << "all_default_freq: " << ds.all_default_freq << "\n";
    summary << "truncation_events: " << ens.truncation_events << " of " << ens.total_steps
            << " steps\n";
    summary << "dt_too_coarse: " << (ens.dt_too_coarse() ? "yes" : "no") << "\n";

    if (sc.csv_output) out.write("paths.csv", ensemble_csv(ens, sc.stride));
    if (sc.binary_output) out.write("paths.bin", ensemble_bin(ens));
    out.write("summary.txt", summary.str());
    out.write("manifest.txt", sc.to_manifest());
    std::cout << "simulate: E[Y_T] = " << mv.mean << " (se " << mv.se_mean << ")\n";
    return 0;
}

int cmd_risk(const CliOptions& opt) {
    const Scenario sc = load_scenario(opt);
    const OutputDir out(opt.out_dir);

    RiskReport report;
    std::ostringstream extra;
    extra.precision(12);

    if (sc.model.mode == HorizonMode::Finite) {
        const auto coeffs = solve_finite_horizon(sc.model);
        report.stability = stability_report(sc.model, coeffs);
        const double inf_growth = report.stability.inf_margin + 2.0 / sc.model.n_banks;
        report.effective_growth = std::max(inf_growth, 0.0);
        report.regime = classify_regime(report.effective_growth, sc.model.n_banks);
        report.bounds = tail_bounds(sc.model, coeffs, sc.y0, sc.model.horizon);

        // Monte Carlo survival estimate alongside the analytic bracket.
        std::vector<double> grid, drift;
        reserve_drift(sc.model, coeffs, grid, drift);
        SimConfig mc = sc.sim;
        mc.record = RecordMode::TerminalPlusEvents;
        bool nonneg = true;
        for (double d : drift) nonneg = nonneg && d >= 0.0;
        mc.scheme = nonneg ? Scheme::ExactBesq : Scheme::FullTruncationEuler;
        const auto ens = simulate_total_reserve(sc.y0, grid, drift, sc.model.horizon, mc);
        report.defaults = default_statistics(ens);
        const double surv = 1.0 - report.defaults->all_default_freq;
        extra << "\nmonte_carlo:\n  survival_estimate: " << surv << "\n  survival_se: "
              << report.defaults->all_default_se << "\n  paths: " << mc.n_paths << "\n";
        if (sc.model.gamma.is_constant() && sc.model.gamma(0.0) > 0.0) {
            const auto iv = min_incentive_finite(sc.model.gamma(0.0), sc.model.eps);
            extra << "\nincentive_bound:\n  q_low: " << iv.q_low << "\n  q_high: " << iv.q_high
                  << "\n";
        }
    } else {
        const auto st = solve_infinite_horizon(sc.model);
        const double g = sc.model.gamma(0.0) - st.psi;
        report.effective_growth = std::max(g, 0.0);
        report.regime = classify_regime(report.effective_growth, sc.model.n_banks);
        report.stability.inf_margin = g - 2.0 / sc.model.n_banks;
        report.stability.sup_margin = report.stability.inf_margin;
        report.stability.stable_strict = report.stability.inf_margin > 0.0;
        report.stability.stable_weak = report.stability.inf_margin >= 0.0;
        report.stability.worst_case = report.stability.sup_margin <= 0.0;
        extra << "\nstationary:\n  eta: " << st.eta << "\n  psi: " << st.psi << "\n";
        extra << "  q_low: "
              << min_incentive_discounted(sc.model.gamma(0.0), sc.model.eps, sc.model.discount)
              << "\n";
        extra << "  deta_dq: " << eta_q_derivative(sc.model) << "\n";
    }

    out.write("risk.txt", report.to_text() + extra.str());
    out.write("manifest.txt", sc.to_manifest());
    std::cout << "risk: regime " << regime_name(report.regime.regime) << "\n";
    return 0;
}

void apply_sweep_param(ModelParams& m, const std::string& param, double v) {
    if (param == "q") m.q = v;
    else if (param == "eps") m.eps = v;
    else if (param == "r") m.discount = v;
    else if (param == "gamma") m.gamma = GrowthRate::constant(v);
    else if (param == "N") m.n_banks = static_cast<int>(std::llround(v));
}

int cmd_sweep(const CliOptions& opt) {
    const Scenario sc = load_scenario(opt);
    if (!sc.sweep) throw std::invalid_argument("sweep: scenario has no [sweep] section");
    const OutputDir out(opt.out_dir);

    std::vector<double> grid1, grid2{0.0};
    const auto fill = [](const SweepAxis& ax, std::vector<double>& g) {
        g.clear();
        for (int i = 0; i < ax.count; ++i)
            g.push_back(ax.count == 1 ? ax.lo
                                      : ax.lo + (ax.hi - ax.lo) * i / (ax.count - 1));
    };
    fill(*sc.sweep, grid1);
    if (sc.sweep2) fill(*sc.sweep2, grid2);

    std::ostringstream os;
    os.precision(12);
    os << sc.sweep->param;
    if (sc.sweep2) os << ',' << sc.sweep2->param;
    os << ",status,psi_sup,inf_margin,sup_margin,stable_strict,growth_ok,bankcount_ok,"
          "surv_lower,surv_upper,q_low_analytic\n";
    for (double v1 : grid1) {
        for (double v2 : grid2) {
            ModelParams m = sc.model;
            apply_sweep_param(m, sc.sweep->param, v1);
            if (sc.sweep2) apply_sweep_param(m, sc.sweep2->param, v2);
            os << v1;
            if (sc.sweep2) os << ',' << v2;
            double q_low = std::nan("");
            const double gamma0 = m.gamma(0.0);
            try {
                if (m.mode == HorizonMode::Finite) {
                    const auto coeffs = solve_finite_horizon(m);
                    const auto sm = stability_report(m, coeffs);
                    const auto adm = check_admissibility(m, coeffs);
                    const auto tb = tail_bounds(m, coeffs, sc.y0, m.horizon);
                    double psi_sup = 0.0;
                    for (double p : coeffs.psi) psi_sup = std::max(psi_sup, p);
                    if (m.gamma.is_constant() && gamma0 > 0.0)
                        q_low = min_incentive_finite(gamma0, m.eps).q_low;
                    os << ",ok," << psi_sup << ',' << sm.inf_margin << ',' << sm.sup_margin << ','
                       << sm.stable_strict << ',' << adm.growth_ok << ',' << adm.bankcount_ok
                       << ',' << tb.lower << ',' << tb.upper << ',' << q_low << '\n';
                } else {
                    const auto st = solve_infinite_horizon(m);
                    const auto adm = check_admissibility(m, st);
                    const double margin = gamma0 - st.psi - 2.0 / m.n_banks;
                    q_low = min_incentive_discounted(gamma0, m.eps, m.discount);
                    os << ",ok," << st.psi << ',' << margin << ',' << margin << ','
                       << (margin > 0.0) << ',' << adm.growth_ok << ',' << adm.bankcount_ok
                       << ",nan,nan," << q_low << '\n';
                }
            } catch (const std::invalid_argument&) {
                // Frontier probing: invalid cells are reported, not fatal.
                os << ",invalid,nan,nan,nan,0,0,0,nan,nan,nan\n";
            }
        }
    }
    out.write("frontier.csv", os.str());
    out.write("manifest.txt", sc.to_manifest());
    std::cout << "sweep: wrote frontier table (" << grid1.size() * grid2.size() << " cells)\n";
    return 0;
}

struct FigureRun {
    std::string name;
    double gamma;
    double a = 10.0;
};

int cmd_replicate_figures(const CliOptions& opt) {
    // Trajectory figures: one realization of the uncontrolled N=10 system,
    // T=100, Euler step 1e-4, mean-reverting rate a=10.
    const auto trajectory_bundle = [&](const std::string& fig, double gamma_left,
                                       double gamma_right) {
        const OutputDir out(opt.out_dir + "/" + fig);
        for (const auto& [tag, g] : {std::pair{"left", gamma_left}, std::pair{"right", gamma_right}}) {
            ModelParams m;
            m.a = 10.0;
            m.n_banks = 10;
            m.horizon = 100.0;
            m.gamma = GrowthRate::constant(g);
            SimConfig sim;
            sim.dt = 1e-4;
            sim.n_paths = 1;
            sim.seed = opt.seed_override.value_or(20240501);
            const auto ens = simulate_uncontrolled(m, sim, InitialCondition::point(1.0));
            out.write(std::string("trajectories_") + tag + ".csv", ensemble_csv(ens, 1000));

            // Cross-sectional spread of the realization, for the flocking check.
            std::ostringstream sp;
            sp.precision(12);
            sp << "t,xbar,cross_sectional_var\n";
            for (std::size_t k = 0; k < ens.grid.size(); k += 100) {
                double mean = 0.0, var = 0.0;
                for (int b = 0; b < ens.n_banks; ++b) mean += ens.value(0, k, b);
                mean /= ens.n_banks;
                for (int b = 0; b < ens.n_banks; ++b) {
                    const double d = ens.value(0, k, b) - mean;
                    var += d * d;
                }
                var /= ens.n_banks;
                sp << ens.grid[k] << ',' << mean << ',' << var << '\n';
            }
            out.write(std::string("spread_") + tag + ".csv", sp.str());
        }
        out.write("plot_description.txt",
                  "title: one realization of N=10 coupled reserves, a=10, T=100\n"
                  "x_axis: t\ny_axis: X^i_t\n"
                  "left_panel: trajectories_left.csv (one series per bank)\n"
                  "right_panel: trajectories_right.csv (one series per bank)\n");
    };
    trajectory_bundle("fig1", 0.2, 0.0);
    trajectory_bundle("fig2", 2.0, 0.0);

    {
        // Absorption statistics for the gamma=0 run. With zero growth the
        // total reserve of the N=10 system is a dimension-0 squared Bessel
        // process, absorbed at zero; sample it exactly at the reserve level
        // (the coupled Euler scheme cannot reach the all-zeros state because
        // truncation biases each bank upward at the boundary).
        const OutputDir out(opt.out_dir + "/fig2");
        SimConfig sim;
        sim.dt = 0.1;
        sim.n_paths = opt.paths_override.value_or(100);
        sim.seed = opt.seed_override.value_or(20240502);
        sim.scheme = Scheme::ExactBesq;
        sim.record = RecordMode::TerminalPlusEvents;
        const std::vector<double> grid{0.0, 100.0}, drift{0.0, 0.0};
        const auto ens = simulate_total_reserve(10 * 0.2, grid, drift, 100.0, sim);
        std::ostringstream os;
        os.precision(12);
        os << "path,terminal_total,absorbed\n";
        int absorbed = 0;
        for (int p = 0; p < ens.n_paths; ++p) {
            const double y = ens.terminal_sum(p);
            absorbed += (y == 0.0);
            os << p << ',' << y << ',' << (y == 0.0) << '\n';
        }
        os << "# absorbed " << absorbed << " of " << ens.n_paths << " paths\n";
        out.write("absorption_stats.csv", os.str());
    }

    // Coefficient figures: eta_t and psi_t for a=1, q=1, eps=2, c=0, N=10.
    const auto coefficient_bundle = [&](const std::string& fig, double T, int stride) {
        const OutputDir out(opt.out_dir + "/" + fig);
        ModelParams m;
        m.a = 1.0;
        m.q = 1.0;
        m.eps = 2.0;
        m.c = 0.0;
        m.n_banks = 10;
        m.horizon = T;
        m.gamma = GrowthRate::constant(1.0);
        const auto coeffs = solve_finite_horizon(m);
        out.write("coefficients.csv", coefficients_csv(coeffs, stride));
        out.write("plot_description.txt",
                  "title: Riccati coefficient and deposit rate, a=1 q=1 eps=2 c=0 N=10 T=" +
                      std::to_string(T) +
                      "\nx_axis: t\nleft_panel: eta column of coefficients.csv\n"
                      "right_panel: psi column of coefficients.csv\n");
    };
    coefficient_bundle("fig3", 1.0, 10);
    coefficient_bundle("fig4", 100.0, 1000);

    std::cout << "replicate-figures: wrote fig1..fig4 bundles to " << opt.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Interbank lending stochastic game: solvers, simulation, risk analytics"};
    app.require_subcommand(1);

    CliOptions opt;
    std::function<int(const CliOptions&)> action;

    const auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
        if (needs_scenario)
            cmd->add_option("--scenario", opt.scenario_path, "scenario file")->required();
        cmd->add_option("--out", opt.out_dir, "output directory");
        cmd->add_option("--seed", opt.seed_override, "master seed override");
        cmd->add_option("--paths", opt.paths_override, "path count override");
        cmd->add_flag("--allow-inadmissible", opt.allow_inadmissible,
                      "run even when gamma_t < psi_t somewhere");
    };

    add_common(app.add_subcommand("solve", "solve coefficient systems")
                   ->callback([&] { action = cmd_solve; }),
               true);
    add_common(app.add_subcommand("simulate", "Monte Carlo path ensembles")
                   ->callback([&] { action = cmd_simulate; }),
               true);
    add_common(app.add_subcommand("risk", "systemic-risk report")
                   ->callback([&] { action = cmd_risk; }),
               true);
    add_common(app.add_subcommand("sweep", "parameter sweep frontier table")
                   ->callback([&] { action = cmd_sweep; }),
               true);
    add_common(app.add_subcommand("replicate-figures", "emit the four figure-data bundles")
                   ->callback([&] { action = cmd_replicate_figures; }),
               false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        return action(opt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
