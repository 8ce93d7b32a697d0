#include "feller/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "feller/equilibrium.hpp"
#include "feller/special.hpp"

namespace feller {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t path_seed(std::uint64_t master, std::uint64_t path_index) {
    return splitmix64(master ^ splitmix64(path_index + 1));
}

double step_full_truncation(double x, double drift, double dt, double z,
                            std::uint64_t* truncations) {
    const double xp = x > 0.0 ? x : 0.0;
    const double next = x + drift * dt + 2.0 * std::sqrt(xp) * std::sqrt(dt) * z;
    if (next < 0.0) {
        if (truncations) ++*truncations;
        return 0.0;
    }
    return next;
}

double exact_besq_step(double y, double dim, double dt, std::mt19937_64& rng) {
    if (dim < 0.0) throw std::invalid_argument("squared-Bessel dimension must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    long k = 0;
    if (y > 0.0) {
        std::poisson_distribution<long> pois(y / (2.0 * dt));
        k = pois(rng);
    }
    const double dof = dim + 2.0 * static_cast<double>(k);
    if (dof == 0.0) return 0.0;
    std::gamma_distribution<double> chi2(dof / 2.0, 2.0);
    return dt * chi2(rng);
}

namespace {

struct Recorder {
    PathEnsemble* out;
    int path;

    void start(std::size_t n_steps) {
        (void)n_steps;
        for (int b = 0; b < out->n_banks; ++b)
            out->first_zero[static_cast<std::size_t>(path) * out->n_banks + b] =
                std::numeric_limits<double>::quiet_NaN();
    }
    void state(int step, const double* x) {
        if (out->record == RecordMode::FullPaths) {
            double* dst =
                &out->values[(static_cast<std::size_t>(path) * out->grid.size() + step) *
                             out->n_banks];
            for (int b = 0; b < out->n_banks; ++b) dst[b] = x[b];
        }
        for (int b = 0; b < out->n_banks; ++b) {
            auto& fz = out->first_zero[static_cast<std::size_t>(path) * out->n_banks + b];
            if (x[b] == 0.0 && std::isnan(fz)) fz = out->grid[step];
        }
        if (static_cast<std::size_t>(step) == out->n_steps()) {
            double* dst = &out->terminal[static_cast<std::size_t>(path) * out->n_banks];
            for (int b = 0; b < out->n_banks; ++b) dst[b] = x[b];
        }
    }
    void zero_hit(int step, int bank) {
        auto& fz = out->first_zero[static_cast<std::size_t>(path) * out->n_banks + bank];
        if (std::isnan(fz)) fz = out->grid[step];
    }
};

PathEnsemble make_ensemble(std::size_t n_steps, double horizon, int n_paths, int n_banks,
                           const SimConfig& sim) {
    PathEnsemble ens;
    ens.config = sim;
    ens.record = sim.record;
    ens.n_paths = n_paths;
    ens.n_banks = n_banks;
    ens.grid.resize(n_steps + 1);
    const double h = horizon / static_cast<double>(n_steps);
    for (std::size_t k = 0; k <= n_steps; ++k)
        ens.grid[k] = (k == n_steps) ? horizon : h * static_cast<double>(k);
    const std::size_t npaths = static_cast<std::size_t>(n_paths);
    if (sim.record == RecordMode::FullPaths) {
        const std::size_t count = npaths * ens.grid.size() * static_cast<std::size_t>(n_banks);
        if (count > 400'000'000ULL)
            throw std::invalid_argument(
                "full-path recording would exceed the memory budget; use terminal-plus-events");
        ens.values.resize(count);
    }
    ens.terminal.resize(npaths * n_banks);
    ens.first_zero.resize(npaths * n_banks);
    return ens;
}

// Runs `body(path, rng)` over all paths, partitioned across threads. Each
// path derives its own RNG stream, so the partitioning never changes results.
void for_each_path(const SimConfig& sim, const std::function<void(int, std::mt19937_64&)>& body) {
    const int n_threads = [&] {
        int t = sim.n_threads > 0 ? sim.n_threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
        if (t < 1) t = 1;
        return std::min(t, sim.n_paths);
    }();
    auto run_range = [&](int lo, int hi) {
        for (int p = lo; p < hi; ++p) {
            std::mt19937_64 rng(path_seed(sim.seed, static_cast<std::uint64_t>(p)));
            body(p, rng);
        }
    };
    if (n_threads == 1) {
        run_range(0, sim.n_paths);
        return;
    }
    std::vector<std::thread> pool;
    const int chunk = (sim.n_paths + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
        const int lo = t * chunk;
        const int hi = std::min(sim.n_paths, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
}

std::vector<double> draw_initial(const InitialCondition& init, int n_banks,
                                 std::mt19937_64& rng) {
    std::vector<double> x(n_banks);
    switch (init.kind) {
        case InitialCondition::Kind::PointMass:
            for (auto& v : x) v = init.value;
            break;
        case InitialCondition::Kind::Vector:
            if (static_cast<int>(init.values.size()) != n_banks)
                throw std::invalid_argument("initial vector size must equal N");
            x = init.values;
            break;
        case InitialCondition::Kind::GammaIid: {
            std::gamma_distribution<double> g(init.shape, init.scale);
            for (auto& v : x) v = g(rng);
            break;
        }
    }
    for (double v : x)
        if (!(v >= 0.0)) throw std::invalid_argument("initial reserves must be nonnegative");
    return x;
}

// Coupled N-bank Euler run. mean_rate[k] multiplies (Xbar - X^i), shift[k]
// is the state-independent drift, both tabulated at step left endpoints.
PathEnsemble run_coupled(const ModelParams& params, const SimConfig& sim,
                         const InitialCondition& init, const std::vector<double>& mean_rate,
                         const std::vector<double>& shift, double horizon) {
    if (sim.scheme != Scheme::FullTruncationEuler)
        throw std::invalid_argument("the exact squared-Bessel scheme is one-dimensional only");
    if (sim.n_paths < 1 || !(sim.dt > 0.0)) throw std::invalid_argument("bad simulation config");
    const std::size_t n_steps = mean_rate.size();
    const int N = params.n_banks;
    PathEnsemble ens = make_ensemble(n_steps, horizon, sim.n_paths, N, sim);

    std::atomic<std::uint64_t> truncations{0};
    const double dt = horizon / static_cast<double>(n_steps);
    for_each_path(sim, [&](int p, std::mt19937_64& rng) {
        Recorder rec{&ens, p};
        rec.start(n_steps);
        std::vector<double> x = draw_initial(init, N, rng);
        std::vector<double> next(N);
        std::normal_distribution<double> gauss;
        std::uint64_t local_trunc = 0;
        rec.state(0, x.data());
        for (std::size_t k = 0; k < n_steps; ++k) {
            double xbar = 0.0;
            for (double v : x) xbar += v;
            xbar /= static_cast<double>(N);
            for (int b = 0; b < N; ++b) {
                const double drift = mean_rate[k] * (xbar - x[b]) + shift[k];
                next[b] = step_full_truncation(x[b], drift, dt, gauss(rng), &local_trunc);
            }
            x.swap(next);
            rec.state(static_cast<int>(k + 1), x.data());
        }
        truncations.fetch_add(local_trunc, std::memory_order_relaxed);
    });
    ens.truncation_events = truncations.load();
    ens.total_steps =
        static_cast<std::uint64_t>(sim.n_paths) * n_steps * static_cast<std::uint64_t>(N);
    return ens;
}

}  // namespace

PathEnsemble simulate_uncontrolled(const ModelParams& params, const SimConfig& sim,
                                   const InitialCondition& init) {
    params.validate();
    if (params.mode != HorizonMode::Finite)
        throw std::invalid_argument("simulation requires a finite horizon T");
    const double T = params.horizon;
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(T / sim.dt));
    if (n_steps < 1) throw std::invalid_argument("dt larger than the horizon");
    const double dt = T / static_cast<double>(n_steps);
    std::vector<double> mean_rate(n_steps), shift(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) {
        mean_rate[k] = params.a;
        shift[k] = params.gamma(dt * static_cast<double>(k));
    }
    return run_coupled(params, sim, init, mean_rate, shift, T);
}

PathEnsemble simulate_equilibrium(const ModelParams& params, const CoefficientPath& coeffs,
                                  const SimConfig& sim, const InitialCondition& init,
                                  bool allow_inadmissible) {
    params.validate();
    if (params.mode != HorizonMode::Finite)
        throw std::invalid_argument("simulation requires a finite horizon T");
    const auto report = check_admissibility(params, coeffs);
    if (!report.growth_ok && !allow_inadmissible)
        throw std::runtime_error(
            "equilibrium run refused: gamma_t < psi_t (first violation at t=" +
            std::to_string(report.first_growth_violation) +
            "); rerun with the inadmissible override to probe this regime");

    const double T = params.horizon;
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(T / sim.dt));
    if (n_steps < 1) throw std::invalid_argument("dt larger than the horizon");
    const double dt = T / static_cast<double>(n_steps);
    const double n = static_cast<double>(params.n_banks);
    const double eta_weight = (coeffs.mode == GameMode::MeanField) ? 1.0 : 1.0 - 1.0 / n;
    std::vector<double> mean_rate(n_steps), shift(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = dt * static_cast<double>(k);
        mean_rate[k] = params.a + params.q + eta_weight * coeffs.eta_at(t);
        shift[k] = params.gamma(t) - coeffs.psi_at(t);
    }
    return run_coupled(params, sim, init, mean_rate, shift, T);
}

PathEnsemble simulate_total_reserve(double y0, const std::vector<double>& drift_grid,
                                    const std::vector<double>& drift_values, double horizon,
                                    const SimConfig& sim) {
    if (!(y0 >= 0.0)) throw std::invalid_argument("y0 must be >= 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
    if (drift_grid.size() != drift_values.size() || drift_grid.empty())
        throw std::invalid_argument("drift tabulation empty or mismatched");
    if (sim.n_paths < 1 || !(sim.dt > 0.0)) throw std::invalid_argument("bad simulation config");
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(horizon / sim.dt));
    if (n_steps < 1) throw std::invalid_argument("dt larger than the horizon");
    const double dt = horizon / static_cast<double>(n_steps);

    // Left-endpoint tabulation: drift is constant over each step. Negative
    // drift is allowed for Euler (inadmissible-regime probing) but not for
    // the exact scheme, whose dimension must be nonnegative.
    auto drift_at = [&](double t) {
        if (t <= drift_grid.front()) return drift_values.front();
        if (t >= drift_grid.back()) return drift_values.back();
        const auto it = std::upper_bound(drift_grid.begin(), drift_grid.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - drift_grid.begin());
        const double w = (t - drift_grid[hi - 1]) / (drift_grid[hi] - drift_grid[hi - 1]);
        return (1.0 - w) * drift_values[hi - 1] + w * drift_values[hi];
    };
    std::vector<double> drift(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) drift[k] = drift_at(dt * static_cast<double>(k));
    if (sim.scheme == Scheme::ExactBesq) {
        for (double d : drift)
            if (d < 0.0)
                throw std::invalid_argument("exact scheme requires nonnegative dimension");
    }

    PathEnsemble ens = make_ensemble(n_steps, horizon, sim.n_paths, 1, sim);
    std::atomic<std::uint64_t> truncations{0};

    for_each_path(sim, [&](int p, std::mt19937_64& rng) {
        Recorder rec{&ens, p};
        rec.start(n_steps);
        double y = y0;
        std::normal_distribution<double> gauss;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::uint64_t local_trunc = 0;
        bool hit = (y == 0.0);
        rec.state(0, &y);
        for (std::size_t k = 0; k < n_steps; ++k) {
            if (sim.scheme == Scheme::FullTruncationEuler) {
                y = step_full_truncation(y, drift[k], dt, gauss(rng), &local_trunc);
            } else {
                const double prev = y;
                y = exact_besq_step(prev, drift[k], dt, rng);
                // First passage inside the step: Bessel-bridge survival given
                // the exact endpoints. Only the first hit is of interest.
                if (!hit && drift[k] < 2.0 && prev > 0.0 && y > 0.0) {
                    if (unif(rng) > besq_bridge_survival(prev, y, drift[k], dt)) {
                        rec.zero_hit(static_cast<int>(k + 1), 0);
                        hit = true;
                    }
                }
            }
            if (y == 0.0) hit = true;
            rec.state(static_cast<int>(k + 1), &y);
        }
        truncations.fetch_add(local_trunc, std::memory_order_relaxed);
    });
    ens.truncation_events = truncations.load();
    ens.total_steps = static_cast<std::uint64_t>(sim.n_paths) * n_steps;
    return ens;
}

}  // namespace feller
