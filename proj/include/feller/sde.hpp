#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "feller/coeffs.hpp"
#include "feller/params.hpp"

namespace feller {

enum class Scheme { FullTruncationEuler, ExactBesq };
enum class RecordMode { FullPaths, TerminalPlusEvents };

struct SimConfig {
    double dt = 1e-3;
    int n_paths = 1;
    std::uint64_t seed = 0;
    Scheme scheme = Scheme::FullTruncationEuler;
    RecordMode record = RecordMode::FullPaths;
    int n_threads = 0;  // 0 = hardware concurrency
};

// Initial reserves: fixed vector, common point mass, or i.i.d. gamma draws.
struct InitialCondition {
    enum class Kind { PointMass, Vector, GammaIid };
    Kind kind = Kind::PointMass;
    double value = 1.0;
    double shape = 1.0, scale = 1.0;
    std::vector<double> values;

    static InitialCondition point(double v) {
        InitialCondition ic;
        ic.value = v;
        return ic;
    }
    static InitialCondition vector(std::vector<double> v) {
        InitialCondition ic;
        ic.kind = Kind::Vector;
        ic.values = std::move(v);
        return ic;
    }
    static InitialCondition gamma_iid(double shape, double scale) {
        InitialCondition ic;
        ic.kind = Kind::GammaIid;
        ic.shape = shape;
        ic.scale = scale;
        return ic;
    }
};

struct PathEnsemble {
    std::vector<double> grid;
    int n_paths = 0;
    int n_banks = 0;
    RecordMode record = RecordMode::FullPaths;
    std::vector<double> values;      // [path][step][bank], FullPaths only
    std::vector<double> terminal;    // [path][bank]
    std::vector<double> first_zero;  // [path][bank], NaN when never hit
    SimConfig config;
    std::uint64_t truncation_events = 0;
    std::uint64_t total_steps = 0;

    std::size_t n_steps() const { return grid.size() - 1; }
    double value(int path, int step, int bank) const {
        return values[(static_cast<std::size_t>(path) * grid.size() + step) * n_banks + bank];
    }
    double terminal_value(int path, int bank) const {
        return terminal[static_cast<std::size_t>(path) * n_banks + bank];
    }
    double terminal_sum(int path) const {
        double s = 0.0;
        for (int b = 0; b < n_banks; ++b) s += terminal_value(path, b);
        return s;
    }
    double first_zero_time(int path, int bank) const {
        return first_zero[static_cast<std::size_t>(path) * n_banks + bank];
    }
    // More than 1% of Euler steps truncated: dt is likely too coarse.
    bool dt_too_coarse() const {
        return total_steps > 0 && truncation_events * 100 > total_steps;
    }
};

// Documented RNG splitting: the stream of path p is mt19937_64 seeded with
// splitmix64(master ^ splitmix64(p + 1)). Increments are drawn path-major,
// time-minor, bank-minor, so the ensemble is bit-identical at any thread count.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t path_seed(std::uint64_t master, std::uint64_t path_index);

// One full-truncation Euler step; the caller evaluates the drift at x+ = max(x,0).
// Returns max(x + drift*dt + 2*sqrt(x+)*sqrt(dt)*z, 0); bumps *truncations when
// the raw update went negative.
double step_full_truncation(double x, double drift, double dt, double z,
                            std::uint64_t* truncations = nullptr);

// Exact squared-Bessel transition over dt for dY = dim*dt + 2*sqrt(Y) dW:
// y' = dt * chi'^2_dim(y/dt), sampled through the Poisson-gamma mixture.
double exact_besq_step(double y, double dim, double dt, std::mt19937_64& rng);

// Uncontrolled coupled system: drift a(Xbar - X^i) + gamma_t, diffusion 2 sqrt(X^i).
PathEnsemble simulate_uncontrolled(const ModelParams& params, const SimConfig& sim,
                                   const InitialCondition& init);

// Equilibrium-controlled system: drift (a+q+(1-1/N)eta_t)(Xbar - X^i) + gamma_t - psi_t.
// Refuses inadmissible runs (gamma_t < psi_t somewhere) unless allow_inadmissible.
PathEnsemble simulate_equilibrium(const ModelParams& params, const CoefficientPath& coeffs,
                                  const SimConfig& sim, const InitialCondition& init,
                                  bool allow_inadmissible = false);

// One-dimensional total reserve dY = drift(t) dt + 2 sqrt(Y) dW with the drift
// tabulated on drift_grid (linear interpolation, frozen at the left endpoint of
// each step so the exact scheme sees a piecewise-constant dimension).
PathEnsemble simulate_total_reserve(double y0, const std::vector<double>& drift_grid,
                                    const std::vector<double>& drift_values,
                                    double horizon, const SimConfig& sim);

}  // namespace feller
