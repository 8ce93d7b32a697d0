#include "feller/equilibrium.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace feller {

namespace {

void check_time(const ModelParams& params, double t) {
    if (!(t >= 0.0 && t <= params.horizon))
        throw std::invalid_argument("t outside [0,T]");
}

}  // namespace

double nash_control_finite(const ControlQuery& query, const ModelParams& params,
                           const CoefficientPath& coeffs) {
    if (coeffs.mode != GameMode::FinitePlayer)
        throw std::invalid_argument("finite-player coefficients required");
    check_time(params, query.t);
    const double n = static_cast<double>(params.n_banks);
    const double rate = params.q + (1.0 - 1.0 / n) * coeffs.eta_at(query.t);
    return rate * (query.x_mean - query.x_own) - coeffs.psi_at(query.t);
}

double mfg_control(const ControlQuery& query, const ModelParams& params,
                   const CoefficientPath& coeffs) {
    if (coeffs.mode != GameMode::MeanField)
        throw std::invalid_argument("mean-field coefficients required");
    check_time(params, query.t);
    const double rate = params.q + coeffs.eta_at(query.t);
    return rate * (query.x_mean - query.x_own) - coeffs.psi_at(query.t);
}

double stationary_control(const ControlQuery& query, const StationaryCoefficients& coeffs) {
    const double n = static_cast<double>(coeffs.params.n_banks);
    const double rate = coeffs.params.q + (1.0 - 1.0 / n) * coeffs.eta;
    return rate * (query.x_mean - query.x_own) - coeffs.psi;
}

double aggregate_control(const ModelParams& params, const CoefficientPath& coeffs, double t) {
    check_time(params, t);
    return -static_cast<double>(params.n_banks) * coeffs.psi_at(t);
}

AdmissibilityReport check_admissibility(const ModelParams& params, const CoefficientPath& coeffs) {
    const double n = static_cast<double>(params.n_banks);
    AdmissibilityReport rep;
    rep.liquidity.resize(coeffs.size());
    double inf_growth = std::numeric_limits<double>::infinity();
    double sup_liquidity = -std::numeric_limits<double>::infinity();
    rep.first_growth_violation = std::numeric_limits<double>::quiet_NaN();
    const double eta_weight = (coeffs.mode == GameMode::MeanField) ? 1.0 : 1.0 - 1.0 / n;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const double t = coeffs.grid[k];
        const double margin = params.gamma(t) - coeffs.psi[k];
        if (margin < inf_growth) inf_growth = margin;
        if (margin < 0.0 && std::isnan(rep.first_growth_violation))
            rep.first_growth_violation = t;
        rep.liquidity[k] = params.a + params.q + eta_weight * coeffs.eta[k];
        sup_liquidity = std::max(sup_liquidity, rep.liquidity[k]);
    }
    rep.growth_margin = inf_growth;
    rep.growth_ok = inf_growth >= 0.0;
    rep.bankcount_margin = n - sup_liquidity;
    rep.bankcount_ok = rep.bankcount_margin >= 0.0;
    return rep;
}

AdmissibilityReport check_admissibility(const ModelParams& params,
                                        const StationaryCoefficients& coeffs) {
    const double n = static_cast<double>(params.n_banks);
    AdmissibilityReport rep;
    rep.growth_margin = params.gamma(0.0) - coeffs.psi;
    rep.growth_ok = rep.growth_margin >= 0.0;
    rep.first_growth_violation =
        rep.growth_ok ? std::numeric_limits<double>::quiet_NaN() : 0.0;
    const double a_liq = params.a + params.q + (1.0 - 1.0 / n) * coeffs.eta;
    rep.liquidity = {a_liq};
    rep.bankcount_margin = n - a_liq;
    rep.bankcount_ok = rep.bankcount_margin >= 0.0;
    return rep;
}

namespace {

struct CoeffSample {
    double eta, L, phi, mu, psi;
    double deta, dL, dphi, dmu;  // time derivatives (zero for stationary)
};

CoeffSample sample_at(const CoefficientPath& coeffs, double t) {
    const std::size_t k = coeffs.nearest_index(t);
    CoeffSample s;
    s.eta = coeffs.eta[k];
    s.L = coeffs.L[k];
    s.phi = coeffs.phi[k];
    s.mu = coeffs.mu[k];
    s.psi = coeffs.psi[k];
    const std::size_t last = coeffs.size() - 1;
    auto diff = [&](const std::vector<double>& v) {
        if (k == 0) return (v[1] - v[0]) / (coeffs.grid[1] - coeffs.grid[0]);
        if (k == last) return (v[last] - v[last - 1]) / (coeffs.grid[last] - coeffs.grid[last - 1]);
        return (v[k + 1] - v[k - 1]) / (coeffs.grid[k + 1] - coeffs.grid[k - 1]);
    };
    s.deta = diff(coeffs.eta);
    s.dL = diff(coeffs.L);
    s.dphi = diff(coeffs.phi);
    s.dmu = diff(coeffs.mu);
    return s;
}

double residual_impl(const ModelParams& params, const CoeffSample& cs, double gamma_t,
                     double discount, std::span<const double> state, int bank_index) {
    const int N = params.n_banks;
    if (static_cast<int>(state.size()) != N)
        throw std::invalid_argument("state vector size must equal N");
    if (bank_index < 0 || bank_index >= N) throw std::invalid_argument("bank index out of range");
    const double n = static_cast<double>(N);

    double xbar = 0.0;
    for (double x : state) {
        if (!(x >= 0.0)) throw std::invalid_argument("state components must be nonnegative");
        xbar += x;
    }
    xbar /= n;
    const double d = xbar - state[bank_index];
    const double ctrl_rate = params.q + (1.0 - 1.0 / n) * cs.eta;

    // Time derivative of the ansatz (zero in the stationary case where the
    // d* members are zeroed and the -rV term is applied instead).
    double res = 0.5 * cs.deta * d * d + cs.dL * d + cs.dphi * xbar + cs.dmu;
    res -= discount * (0.5 * cs.eta * d * d + cs.L * d + cs.phi * xbar + cs.mu);

    double alpha_i = 0.0;
    for (int j = 0; j < N; ++j) {
        const double dj = xbar - state[j];
        const double alpha_j = ctrl_rate * dj - cs.psi;
        if (j == bank_index) alpha_i = alpha_j;
        const double drift_j = params.a * dj + gamma_t + alpha_j;
        const double ind = (j == bank_index) ? 1.0 : 0.0;
        const double grad_j = (cs.eta * d + cs.L) * (1.0 / n - ind) + cs.phi / n;
        res += drift_j * grad_j;
        res += 2.0 * state[j] * cs.eta * (1.0 / n - ind) * (1.0 / n - ind);
    }
    res += 0.5 * alpha_i * alpha_i - params.q * alpha_i * d + 0.5 * params.eps * d * d;
    return res;
}

}  // namespace

double hjb_residual(const ModelParams& params, const CoefficientPath& coeffs, double t,
                    std::span<const double> state, int bank_index) {
    if (coeffs.mode != GameMode::FinitePlayer)
        throw std::invalid_argument("finite-player coefficients required");
    check_time(params, t);
    // Snap to the nearest grid point so the coefficient values, their central
    // differences, and gamma are all evaluated at the same instant.
    const double t_snap = coeffs.grid[coeffs.nearest_index(t)];
    return residual_impl(params, sample_at(coeffs, t_snap), params.gamma(t_snap), 0.0, state,
                         bank_index);
}

double hjb_residual(const ModelParams& params, const StationaryCoefficients& coeffs,
                    std::span<const double> state, int bank_index) {
    CoeffSample cs{coeffs.eta, coeffs.L, coeffs.phi, coeffs.mu, coeffs.psi, 0.0, 0.0, 0.0, 0.0};
    return residual_impl(params, cs, params.gamma(0.0), params.discount, state, bank_index);
}

}  // namespace feller
