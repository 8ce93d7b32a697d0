#pragma once

#include <cstddef>
#include <vector>

#include "feller/params.hpp"

namespace feller {

enum class GameMode { FinitePlayer, MeanField };

// delta^± = -(a+q) ± sqrt(R) with R = (a+q)^2 + f*(eps-q^2),
// f = 1-1/N^2 (finite player) or 1 (mean field).
struct RiccatiConstants {
    double delta_plus = 0.0;
    double delta_minus = 0.0;
    double big_r = 0.0;
};

RiccatiConstants riccati_constants(const ModelParams& params, GameMode mode);

// Closed-form Riccati coefficient eta_t on [0,T]. Aborts with
// std::runtime_error if the denominator is not strictly negative.
double eta_closed_form(const ModelParams& params, double t, GameMode mode);

// Time-gridded solution of the coefficient ODE system.
// psi = (1/N-1)L + phi/N in finite-player mode, psi = -L in mean-field mode.
struct CoefficientPath {
    std::vector<double> grid;
    std::vector<double> eta, L, phi, mu, psi;
    GameMode mode = GameMode::FinitePlayer;

    std::size_t size() const { return grid.size(); }
    std::size_t nearest_index(double t) const;

    double eta_at(double t) const { return interp(eta, t); }
    double L_at(double t) const { return interp(L, t); }
    double phi_at(double t) const { return interp(phi, t); }
    double mu_at(double t) const { return interp(mu, t); }
    double psi_at(double t) const { return interp(psi, t); }

private:
    double interp(const std::vector<double>& series, double t) const;
};

struct SolveOptions {
    double steps_per_unit_time = 1e4;
    double cross_check_tol = 1e-8;  // closed-form eta vs RK4, sup norm
};

// Backward RK4 on the linear (L,phi,mu) system with eta taken from the
// closed form; the RK4-integrated eta is kept as an internal cross-check.
// Throws std::runtime_error (with the achieved error) if the cross-check
// fails, std::invalid_argument on bad params.
CoefficientPath solve_finite_horizon(const ModelParams& params, const SolveOptions& opts = {});

// Mean-field counterpart. Additionally cross-checks L against its
// integral representation L_t = -2 int_t^T e^{(a+q)(t-s)} eta_s ds.
CoefficientPath solve_mfg(const ModelParams& params, const SolveOptions& opts = {});

// Scalar coefficients of the infinite-horizon discounted game.
struct StationaryCoefficients {
    double eta = 0.0, L = 0.0, phi = 0.0, mu = 0.0, psi = 0.0;
    ModelParams params;
};

StationaryCoefficients solve_infinite_horizon(const ModelParams& params);

// Mean capitalization path dm = (gamma_t - psi_t) dt, trapezoidal.
struct MeanPath {
    std::vector<double> grid;
    std::vector<double> m;
};

// Requires mean-field coefficients and gamma_t >= psi_t on the grid;
// throws std::invalid_argument carrying the first offending time otherwise.
MeanPath mean_path(const ModelParams& params, const CoefficientPath& coeffs, double m0);

}  // namespace feller
