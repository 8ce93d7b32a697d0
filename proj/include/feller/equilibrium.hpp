#pragma once

#include <span>
#include <vector>

#include "feller/coeffs.hpp"
#include "feller/params.hpp"

namespace feller {

// State snapshot for a control evaluation: own reserve and the averaged
// capitalization (finite player) or mean-field mean.
struct ControlQuery {
    double t = 0.0;
    double x_own = 0.0;
    double x_mean = 0.0;
};

// hat alpha^i = (q + (1-1/N) eta_t)(xbar - x_i) - psi_t
double nash_control_finite(const ControlQuery& query, const ModelParams& params,
                           const CoefficientPath& coeffs);

// hat alpha = (q + eta_t)(m_t - x) - psi_t with psi = -L
double mfg_control(const ControlQuery& query, const ModelParams& params,
                   const CoefficientPath& coeffs);

// Stationary feedback rule of the discounted game.
double stationary_control(const ControlQuery& query, const StationaryCoefficients& coeffs);

// Sum of all equilibrium controls; the mean-reversion terms cancel so this
// is -N psi_t independent of the state vector.
double aggregate_control(const ModelParams& params, const CoefficientPath& coeffs, double t);

struct AdmissibilityReport {
    bool growth_ok = false;       // inf_t(gamma_t - psi_t) >= 0
    double growth_margin = 0.0;   // inf_t(gamma_t - psi_t)
    double first_growth_violation = 0.0;  // NaN when growth_ok
    bool bankcount_ok = false;    // sup_t A_t <= N
    double bankcount_margin = 0.0;  // N - sup_t A_t
    std::vector<double> liquidity;  // A_t = a + q + (1-1/N) eta_t on the grid
};

AdmissibilityReport check_admissibility(const ModelParams& params, const CoefficientPath& coeffs);
AdmissibilityReport check_admissibility(const ModelParams& params,
                                        const StationaryCoefficients& coeffs);

// Plugs the quadratic value-function ansatz and the equilibrium controls
// into the HJB operator for bank `bank_index` and returns the residual.
// Time derivatives of the coefficients come from central differences on
// the coefficient grid (one-sided at the grid boundary).
double hjb_residual(const ModelParams& params, const CoefficientPath& coeffs, double t,
                    std::span<const double> state, int bank_index);

// Stationary variant (discounted HJB, no time derivative).
double hjb_residual(const ModelParams& params, const StationaryCoefficients& coeffs,
                    std::span<const double> state, int bank_index);

}  // namespace feller
