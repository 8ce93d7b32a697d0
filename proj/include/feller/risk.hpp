#pragma once

#include <optional>
#include <string>
#include <vector>

#include "feller/coeffs.hpp"
#include "feller/params.hpp"
#include "feller/sde.hpp"

namespace feller {

// Long-run behavior of the total reserve dY = N*g dt + 2 sqrt(Y) dW for an
// effective growth rate g, classified by N*g against the critical value 2.
enum class Regime {
    NeverHitsZero,              // g > 2/N
    HitsZeroRecurrent,          // g = 2/N: limsup Y = inf, inf Y = 0
    HitsZeroReflecting,         // 0 < g < 2/N: hits zero, reflects
    AbsorbedFiniteTime,         // g = 0: absorbed at zero in finite time
};

struct RegimeVerdict {
    Regime regime = Regime::NeverHitsZero;
    double threshold_margin = 0.0;  // g - 2/N
    bool boundary = false;          // |g - 2/N| <= 1e-12
};

std::string regime_name(Regime r);

RegimeVerdict classify_regime(double effective_growth, int n_banks);

enum class SurvivalFormula { StandardBesq, UnregularizedSquared };

// P(tau_0 > T) for the total reserve started at y0 with constant dimension.
// StandardBesq: regularized lower incomplete gamma P(1 - dim/2, y0/(2T)) for
// dim < 2, 1 for dim >= 2 (dim < 0 accepted for comparison bounds).
// UnregularizedSquared: the variant gamma(dim, y0^2/(2T)) — unnormalized,
// squared argument — evaluated verbatim for side-by-side reporting; it is
// not a probability in general and is never clamped to [0,1].
double besq_zero_hit_survival(double y0, double T, double dim, SurvivalFormula variant);

struct TailBounds {
    double lower = 0.0, upper = 0.0;     // standard-besq variant
    SurvivalFormula variant = SurvivalFormula::StandardBesq;
    double alt_lower = 0.0, alt_upper = 0.0;  // unregularized variant, informational
    double y0 = 0.0, horizon = 0.0;
    double dim_inf = 0.0, dim_sup = 0.0;  // N*inf(gamma-psi), N*sup(gamma-psi)
    bool instability_premise = false;     // sup(gamma-psi) < 2/N
};

TailBounds tail_bounds(const ModelParams& params, const CoefficientPath& coeffs, double y0,
                       double T);

struct StabilityMargins {
    double inf_margin = 0.0;   // inf_t(gamma-psi) - 2/N; > 0 strict, >= 0 weak
    double sup_margin = 0.0;   // sup_t(gamma-psi) - 2/N; <= 0 is the worst case
    bool stable_strict = false;
    bool stable_weak = false;
    bool worst_case = false;
};

StabilityMargins stability_report(const ModelParams& params, const CoefficientPath& coeffs);

// Sufficient incentive bounds (mean-field, a = c = 0, constant growth rate):
// q in (sqrt(2 eps)/sqrt(gamma+2), sqrt(eps)] keeps inf(gamma - psi) > 0.
struct IncentiveInterval {
    double q_low = 0.0, q_high = 0.0;  // open at q_low, closed at q_high
};

IncentiveInterval min_incentive_finite(double gamma, double eps);

// Dual statement for a fixed incentive: eps in [q^2, (gamma+2)q^2/2).
struct PenaltyInterval {
    double eps_low = 0.0, eps_high = 0.0;
};

PenaltyInterval penalty_interval(double gamma, double q);

// Infinite-horizon regulator bound on q for a = 0, N -> infinity; 0 when the
// radical's premise eps >= (gamma^2/4 + gamma/2) r^2 fails.
double min_incentive_discounted(double gamma, double eps, double r);

// Closed-form d eta / dq for the stationary game; negative on [0, sqrt(eps)].
double eta_q_derivative(const ModelParams& params);

// Default frequencies with binomial standard errors. A path counts as
// all-default when every bank has hit zero by the horizon; its tau sample is
// the time the last bank first defaulted (grid resolution).
struct DefaultStats {
    std::vector<double> per_bank_freq;
    std::vector<double> per_bank_se;
    double all_default_freq = 0.0;
    double all_default_se = 0.0;
    std::vector<double> tau_samples;
};

DefaultStats default_statistics(const PathEnsemble& ensemble);

struct RiskReport {
    RegimeVerdict regime;
    StabilityMargins stability;
    std::optional<TailBounds> bounds;
    std::optional<DefaultStats> defaults;
    double effective_growth = 0.0;

    std::string to_text() const;  // key: value blocks
};

}  // namespace feller
