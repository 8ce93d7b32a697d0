#include "feller/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "feller/special.hpp"

namespace feller {

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::NeverHitsZero: return "never-hits-zero";
        case Regime::HitsZeroRecurrent: return "hits-zero-recurrent-limsup-infinite";
        case Regime::HitsZeroReflecting: return "hits-zero-reflecting";
        case Regime::AbsorbedFiniteTime: return "absorbed-in-finite-time";
    }
    return "?";
}

RegimeVerdict classify_regime(double effective_growth, int n_banks) {
    if (n_banks < 2) throw std::invalid_argument("N must be >= 2");
    if (!(effective_growth >= 0.0))
        throw std::invalid_argument("effective growth rate must be >= 0");
    constexpr double tol = 1e-12;
    RegimeVerdict v;
    v.threshold_margin = effective_growth - 2.0 / static_cast<double>(n_banks);
    v.boundary = std::abs(v.threshold_margin) <= tol;
    if (effective_growth <= tol)
        v.regime = Regime::AbsorbedFiniteTime;
    else if (v.boundary)
        v.regime = Regime::HitsZeroRecurrent;
    else if (v.threshold_margin > 0.0)
        v.regime = Regime::NeverHitsZero;
    else
        v.regime = Regime::HitsZeroReflecting;
    return v;
}

double besq_zero_hit_survival(double y0, double T, double dim, SurvivalFormula variant) {
    if (!(y0 > 0.0)) throw std::invalid_argument("y0 must be > 0");
    if (!(T > 0.0)) throw std::invalid_argument("T must be > 0");
    if (variant == SurvivalFormula::StandardBesq) {
        if (dim >= 2.0) return 1.0;
        return gamma_p(1.0 - dim / 2.0, y0 / (2.0 * T));
    }
    if (!(dim > 0.0))
        throw std::invalid_argument("unregularized variant requires a positive shape");
    return lower_incomplete_gamma(dim, y0 * y0 / (2.0 * T));
}

TailBounds tail_bounds(const ModelParams& params, const CoefficientPath& coeffs, double y0,
                       double T) {
    if (coeffs.mode != GameMode::FinitePlayer)
        throw std::invalid_argument("tail bounds use finite-player coefficients");
    const double n = static_cast<double>(params.n_banks);
    double inf_g = std::numeric_limits<double>::infinity();
    double sup_g = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const double g = params.gamma(coeffs.grid[k]) - coeffs.psi[k];
        inf_g = std::min(inf_g, g);
        sup_g = std::max(sup_g, g);
    }
    TailBounds tb;
    tb.y0 = y0;
    tb.horizon = T;
    tb.dim_inf = n * inf_g;
    tb.dim_sup = n * sup_g;
    tb.instability_premise = sup_g < 2.0 / n;
    tb.lower = besq_zero_hit_survival(y0, T, tb.dim_inf, SurvivalFormula::StandardBesq);
    tb.upper = besq_zero_hit_survival(y0, T, tb.dim_sup, SurvivalFormula::StandardBesq);
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    tb.alt_lower = tb.dim_inf > 0.0
        ? besq_zero_hit_survival(y0, T, tb.dim_inf, SurvivalFormula::UnregularizedSquared) : nan;
    tb.alt_upper = tb.dim_sup > 0.0
        ? besq_zero_hit_survival(y0, T, tb.dim_sup, SurvivalFormula::UnregularizedSquared) : nan;
    return tb;
}

StabilityMargins stability_report(const ModelParams& params, const CoefficientPath& coeffs) {
    const double n = static_cast<double>(params.n_banks);
    double inf_g = std::numeric_limits<double>::infinity();
    double sup_g = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const double g = params.gamma(coeffs.grid[k]) - coeffs.psi[k];
        inf_g = std::min(inf_g, g);
        sup_g = std::max(sup_g, g);
    }
    StabilityMargins sm;
    sm.inf_margin = inf_g - 2.0 / n;
    sm.sup_margin = sup_g - 2.0 / n;
    sm.stable_strict = sm.inf_margin > 0.0;
    sm.stable_weak = sm.inf_margin >= 0.0;
    sm.worst_case = sm.sup_margin <= 0.0;
    return sm;
}

IncentiveInterval min_incentive_finite(double gamma, double eps) {
    if (!(gamma > 0.0))
        throw std::invalid_argument("empty incentive interval: growth rate must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    IncentiveInterval iv;
    iv.q_low = std::sqrt(2.0 * eps) / std::sqrt(gamma + 2.0);
    iv.q_high = std::sqrt(eps);
    return iv;
}

PenaltyInterval penalty_interval(double gamma, double q) {
    if (!(gamma > 0.0)) throw std::invalid_argument("growth rate must be positive");
    if (!(q > 0.0)) throw std::invalid_argument("q must be positive");
    return {q * q, 0.5 * (gamma + 2.0) * q * q};
}

double min_incentive_discounted(double gamma, double eps, double r) {
    if (!(gamma >= 0.0 && eps >= 0.0 && r >= 0.0))
        throw std::invalid_argument("gamma, eps, r must be nonnegative");
    const double premise = (gamma * gamma / 4.0 + gamma / 2.0) * r * r;
    if (eps < premise) return 0.0;
    const double b = (gamma * gamma / 4.0 + 3.0 * gamma / 4.0) * r;
    const double lead = (gamma / 2.0 + 1.0) * (gamma / 2.0 + 1.0);
    return (-b + std::sqrt(b * b + (eps - premise) * lead)) / lead;
}

double eta_q_derivative(const ModelParams& params) {
    if (!(params.q >= 0.0 && params.q <= std::sqrt(params.eps)))
        throw std::invalid_argument("q must lie in [0, sqrt(eps)]");
    const double n = static_cast<double>(params.n_banks);
    const double f = 1.0 - 1.0 / (n * n);
    const double half = params.a + params.q + 0.5 * params.discount;
    const double root =
        std::sqrt(half * half + f * (params.eps - params.q * params.q));
    const double d =
        (-1.0 + (params.a + 0.5 * params.discount + params.q / (n * n)) / root) / f;
    if (!(d < 0.0))
        throw std::runtime_error("internal consistency: d eta/dq not negative on [0, sqrt(eps)]");
    return d;
}

DefaultStats default_statistics(const PathEnsemble& ensemble) {
    DefaultStats ds;
    const int P = ensemble.n_paths;
    const int B = ensemble.n_banks;
    if (P < 1) throw std::invalid_argument("empty ensemble");
    ds.per_bank_freq.assign(B, 0.0);
    ds.per_bank_se.assign(B, 0.0);
    int all_count = 0;
    for (int p = 0; p < P; ++p) {
        bool all = true;
        double tau = 0.0;
        for (int b = 0; b < B; ++b) {
            const double fz = ensemble.first_zero_time(p, b);
            if (std::isnan(fz)) {
                all = false;
            } else {
                ds.per_bank_freq[b] += 1.0;
                tau = std::max(tau, fz);
            }
        }
        if (all) {
            ++all_count;
            ds.tau_samples.push_back(tau);
        }
    }
    const double np = static_cast<double>(P);
    for (int b = 0; b < B; ++b) {
        const double f = ds.per_bank_freq[b] / np;
        ds.per_bank_freq[b] = f;
        ds.per_bank_se[b] = std::sqrt(f * (1.0 - f) / np);
    }
    ds.all_default_freq = static_cast<double>(all_count) / np;
    ds.all_default_se = std::sqrt(ds.all_default_freq * (1.0 - ds.all_default_freq) / np);
    return ds;
}

std::string RiskReport::to_text() const {
    std::ostringstream os;
    os.precision(12);
    os << "regime: " << regime_name(regime.regime) << "\n";
    os << "threshold_margin: " << regime.threshold_margin << "\n";
    os << "threshold_boundary: " << (regime.boundary ? "yes" : "no") << "\n";
    os << "effective_growth: " << effective_growth << "\n";
    os << "\nstability:\n";
    os << "  inf_margin: " << stability.inf_margin << "\n";
    os << "  sup_margin: " << stability.sup_margin << "\n";
    os << "  stable_strict: " << (stability.stable_strict ? "yes" : "no") << "\n";
    os << "  stable_weak: " << (stability.stable_weak ? "yes" : "no") << "\n";
    os << "  worst_case: " << (stability.worst_case ? "yes" : "no") << "\n";
    if (bounds) {
        os << "\ntail_bounds:\n";
        os << "  y0: " << bounds->y0 << "\n";
        os << "  horizon: " << bounds->horizon << "\n";
        os << "  dim_inf: " << bounds->dim_inf << "\n";
        os << "  dim_sup: " << bounds->dim_sup << "\n";
        os << "  survival_lower: " << bounds->lower << "\n";
        os << "  survival_upper: " << bounds->upper << "\n";
        os << "  unregularized_variant_lower: " << bounds->alt_lower << "\n";
        os << "  unregularized_variant_upper: " << bounds->alt_upper << "\n";
        os << "  instability_premise: " << (bounds->instability_premise ? "holds" : "violated")
           << "\n";
    }
    if (defaults) {
        os << "\ndefaults:\n";
        for (std::size_t b = 0; b < defaults->per_bank_freq.size(); ++b)
            os << "  bank_" << b << "_freq: " << defaults->per_bank_freq[b] << " (se "
               << defaults->per_bank_se[b] << ")\n";
        os << "  all_default_freq: " << defaults->all_default_freq << " (se "
           << defaults->all_default_se << ")\n";
        os << "  all_default_count: " << defaults->tau_samples.size() << "\n";
    }
    return os.str();
}

}  // namespace feller
