#include "feller/coeffs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace feller {

namespace {

double mode_factor(const ModelParams& params, GameMode mode) {
    if (mode == GameMode::MeanField) return 1.0;
    const double n = static_cast<double>(params.n_banks);
    return 1.0 - 1.0 / (n * n);
}

void check_convexity(const ModelParams& params) {
    if (params.q * params.q > params.eps)
        throw std::invalid_argument("running cost is non-convex: q^2 <= eps violated");
}

}  // namespace

RiccatiConstants riccati_constants(const ModelParams& params, GameMode mode) {
    check_convexity(params);
    const double f = mode_factor(params, mode);
    const double aq = params.a + params.q;
    RiccatiConstants rc;
    rc.big_r = aq * aq + f * (params.eps - params.q * params.q);
    if (!(rc.big_r > 0.0))
        throw std::invalid_argument("R must be positive: a+q and eps-q^2 cannot both vanish");
    const double s = std::sqrt(rc.big_r);
    rc.delta_plus = -aq + s;
    rc.delta_minus = -aq - s;
    return rc;
}

double eta_closed_form(const ModelParams& params, double t, GameMode mode) {
    if (!(t >= 0.0 && t <= params.horizon))
        throw std::invalid_argument("t outside [0,T]");
    const auto rc = riccati_constants(params, mode);
    const double f = mode_factor(params, mode);
    const double forcing = params.eps - params.q * params.q;
    const double two_sqrt_r = rc.delta_plus - rc.delta_minus;
    // F = e^{-2 sqrt(R) (T-t)} keeps the evaluation overflow-free for any T.
    const double F = std::exp(-two_sqrt_r * (params.horizon - t));
    const double num = -forcing * (1.0 - F) - params.c * (rc.delta_plus - rc.delta_minus * F);
    const double den = (rc.delta_minus - rc.delta_plus * F) - params.c * f * (1.0 - F);
    if (!(den < 0.0))
        throw std::runtime_error("internal consistency: eta denominator not strictly negative");
    return num / den;
}

std::size_t CoefficientPath::nearest_index(double t) const {
    auto it = std::lower_bound(grid.begin(), grid.end(), t);
    if (it == grid.begin()) return 0;
    if (it == grid.end()) return grid.size() - 1;
    std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    return (t - grid[hi - 1] <= grid[hi] - t) ? hi - 1 : hi;
}

double CoefficientPath::interp(const std::vector<double>& series, double t) const {
    if (t <= grid.front()) return series.front();
    if (t >= grid.back()) return series.back();
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - grid.begin());
    const double w = (t - grid[hi - 1]) / (grid[hi] - grid[hi - 1]);
    return (1.0 - w) * series[hi - 1] + w * series[hi];
}

namespace {

// Backward RK4 of the coupled (eta, L, phi, mu) system. eta is also
// available in closed form; the integrated copy is the cross-check.
CoefficientPath solve_path(const ModelParams& params, GameMode mode, const SolveOptions& opts) {
    params.validate();
    if (params.n_banks < 2) throw std::invalid_argument("the game needs N >= 2");
    if (params.mode != HorizonMode::Finite)
        throw std::invalid_argument("finite-horizon solver requires T > 0");

    const double T = params.horizon;
    const std::size_t n_steps =
        static_cast<std::size_t>(std::llround(opts.steps_per_unit_time * T));
    if (n_steps < 10) throw std::invalid_argument("time grid too coarse");
    const double h = T / static_cast<double>(n_steps);

    const double n = static_cast<double>(params.n_banks);
    const double f = mode_factor(params, mode);
    const double aq = params.a + params.q;
    const double forcing = params.eps - params.q * params.q;
    const bool mf = (mode == GameMode::MeanField);

    // ODE coefficients; in mean-field mode the 1/N terms drop out.
    const double lin_L = aq;                                          // + eta-dependent part below
    const double eta_L_self = mf ? 0.0 : (1.0 / n) * (1.0 - 1.0 / n); // coefficient of eta*L
    const double eta_phi = mf ? 0.0 : (1.0 / n) * (1.0 - 1.0 / n);    // coefficient of eta*phi
    const double eta_force_L = mf ? 2.0 : 2.0 * (1.0 - 2.0 / n);      // coefficient of eta
    const double phi_force = mf ? 2.0 : 2.0 * (1.0 - 1.0 / n);        // phidot = -phi_force*eta
    const double mu_phi2 = mf ? 0.0 : (1.0 / n) * (1.0 - 1.0 / (2.0 * n));
    const double mu_L2 = mf ? 0.5 : 0.5 * (1.0 - 1.0 / n) * (1.0 - 1.0 / n);
    const double mu_Lphi = mf ? 1.0 : (1.0 - 1.0 / n) * (1.0 - 1.0 / n);

    struct State {
        double eta, L, phi, mu;
    };
    auto rhs = [&](double t, const State& y) -> State {
        State d;
        d.eta = 2.0 * aq * y.eta + f * y.eta * y.eta - forcing;
        d.L = (lin_L + eta_L_self * y.eta) * y.L + eta_phi * y.eta * y.phi + eta_force_L * y.eta;
        d.phi = -phi_force * y.eta;
        d.mu = mu_phi2 * y.phi * y.phi - mu_L2 * y.L * y.L - mu_Lphi * y.L * y.phi -
               params.gamma(t) * y.phi;
        return d;
    };

    CoefficientPath path;
    path.mode = mode;
    path.grid.resize(n_steps + 1);
    path.eta.resize(n_steps + 1);
    path.L.resize(n_steps + 1);
    path.phi.resize(n_steps + 1);
    path.mu.resize(n_steps + 1);
    path.psi.resize(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k)
        path.grid[k] = (k == n_steps) ? T : h * static_cast<double>(k);

    State y{params.c, 0.0, 0.0, 0.0};
    path.eta[n_steps] = params.c;
    path.L[n_steps] = 0.0;
    path.phi[n_steps] = 0.0;
    path.mu[n_steps] = 0.0;

    double eta_gap = 0.0;
    for (std::size_t k = n_steps; k-- > 0;) {
        const double t = path.grid[k + 1];
        const State k1 = rhs(t, y);
        const State y2{y.eta - 0.5 * h * k1.eta, y.L - 0.5 * h * k1.L, y.phi - 0.5 * h * k1.phi,
                       y.mu - 0.5 * h * k1.mu};
        const State k2 = rhs(t - 0.5 * h, y2);
        const State y3{y.eta - 0.5 * h * k2.eta, y.L - 0.5 * h * k2.L, y.phi - 0.5 * h * k2.phi,
                       y.mu - 0.5 * h * k2.mu};
        const State k3 = rhs(t - 0.5 * h, y3);
        const State y4{y.eta - h * k3.eta, y.L - h * k3.L, y.phi - h * k3.phi, y.mu - h * k3.mu};
        const State k4 = rhs(t - h, y4);
        y.eta -= h / 6.0 * (k1.eta + 2.0 * k2.eta + 2.0 * k3.eta + k4.eta);
        y.L -= h / 6.0 * (k1.L + 2.0 * k2.L + 2.0 * k3.L + k4.L);
        y.phi -= h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
        y.mu -= h / 6.0 * (k1.mu + 2.0 * k2.mu + 2.0 * k3.mu + k4.mu);

        const double eta_cf = eta_closed_form(params, path.grid[k], mode);
        eta_gap = std::max(eta_gap, std::abs(eta_cf - y.eta));
        path.eta[k] = eta_cf;
        path.L[k] = y.L;
        path.phi[k] = y.phi;
        path.mu[k] = y.mu;
    }
    if (eta_gap > opts.cross_check_tol)
        throw std::runtime_error("eta closed-form/RK4 cross-check failed: sup gap " +
                                 std::to_string(eta_gap) + " exceeds tolerance");

    for (std::size_t k = 0; k <= n_steps; ++k) {
        path.psi[k] = mf ? -path.L[k]
                         : (1.0 / n - 1.0) * path.L[k] + path.phi[k] / n;
    }

    if (mf) {
        // L_t = -2 int_t^T e^{(a+q)(t-s)} eta_s ds, accumulated backward with
        // per-step Simpson quadrature on the closed-form eta.
        double acc = 0.0;
        double quad_gap = 0.0;
        const double decay = std::exp(-aq * h);
        for (std::size_t k = n_steps; k-- > 0;) {
            const double t0 = path.grid[k];
            const double e0 = path.eta[k];
            const double em = eta_closed_form(params, t0 + 0.5 * h, mode);
            const double e1 = path.eta[k + 1];
            const double seg = h / 6.0 *
                (e0 + 4.0 * std::exp(-aq * 0.5 * h) * em + decay * e1);
            acc = decay * acc + seg;
            quad_gap = std::max(quad_gap, std::abs(-2.0 * acc - path.L[k]));
        }
        if (quad_gap > opts.cross_check_tol)
            throw std::runtime_error("mean-field L quadrature cross-check failed: sup gap " +
                                     std::to_string(quad_gap) + " exceeds tolerance");
    }

    return path;
}

}  // namespace

CoefficientPath solve_finite_horizon(const ModelParams& params, const SolveOptions& opts) {
    return solve_path(params, GameMode::FinitePlayer, opts);
}

CoefficientPath solve_mfg(const ModelParams& params, const SolveOptions& opts) {
    return solve_path(params, GameMode::MeanField, opts);
}

StationaryCoefficients solve_infinite_horizon(const ModelParams& params) {
    params.validate();
    if (params.n_banks < 2) throw std::invalid_argument("the game needs N >= 2");
    if (params.mode != HorizonMode::Discounted || !(params.discount > 0.0))
        throw std::invalid_argument("infinite-horizon solver requires r > 0");

    const double n = static_cast<double>(params.n_banks);
    const double f = 1.0 - 1.0 / (n * n);
    const double aq = params.a + params.q;
    const double r = params.discount;
    const double forcing = params.eps - params.q * params.q;

    StationaryCoefficients sc;
    sc.params = params;
    const double half = aq + 0.5 * r;
    sc.eta = forcing / (half + std::sqrt(half * half + f * forcing));
    sc.phi = 2.0 / r * (1.0 - 1.0 / n) * sc.eta;
    sc.L = ((1.0 / n) * (1.0 / n - 1.0) * sc.eta * sc.phi + 2.0 * (2.0 / n - 1.0) * sc.eta) /
           (aq + r + (1.0 / n) * (1.0 - 1.0 / n) * sc.eta);
    if (!params.gamma.is_constant())
        throw std::invalid_argument("infinite horizon requires a constant growth rate");
    const double gamma = params.gamma(0.0);
    sc.mu = (0.5 * (1.0 - 1.0 / n) * (1.0 - 1.0 / n) * sc.L * sc.L +
             (1.0 - 1.0 / n) * (1.0 - 1.0 / n) * sc.L * sc.phi + gamma * sc.phi -
             (1.0 / n) * (1.0 - 1.0 / (2.0 * n)) * sc.phi * sc.phi) /
            r;
    sc.psi = (1.0 / n - 1.0) * sc.L + sc.phi / n;

    const double residual =
        r * sc.eta + 2.0 * aq * sc.eta + f * sc.eta * sc.eta - forcing;
    if (std::abs(residual) > 1e-12)
        throw std::runtime_error("algebraic Riccati residual exceeds 1e-12");
    return sc;
}

MeanPath mean_path(const ModelParams& params, const CoefficientPath& coeffs, double m0) {
    if (coeffs.mode != GameMode::MeanField)
        throw std::invalid_argument("mean_path requires mean-field coefficients");
    if (!(m0 >= 0.0)) throw std::invalid_argument("m0 must be >= 0");

    MeanPath mp;
    mp.grid = coeffs.grid;
    mp.m.resize(coeffs.size());
    mp.m[0] = m0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const double drift = params.gamma(coeffs.grid[k]) - coeffs.psi[k];
        if (drift < -1e-12)
            throw std::invalid_argument("admissibility violated: gamma_t < psi_t at t=" +
                                        std::to_string(coeffs.grid[k]));
        if (k > 0) {
            const double prev = params.gamma(coeffs.grid[k - 1]) - coeffs.psi[k - 1];
            mp.m[k] = mp.m[k - 1] + 0.5 * (prev + drift) * (coeffs.grid[k] - coeffs.grid[k - 1]);
        }
    }
    return mp;
}

}  // namespace feller
