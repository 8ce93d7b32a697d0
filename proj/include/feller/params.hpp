#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace feller {

// Deterministic nonnegative growth rate, tabulated piecewise-linear.
// A constant rate is a one-knot table. Queries outside the knot range
// clamp to the nearest endpoint value.
class GrowthRate {
public:
    GrowthRate() : times_{0.0}, values_{0.0} {}

    GrowthRate(std::vector<double> times, std::vector<double> values)
        : times_(std::move(times)), values_(std::move(values)) {
        if (times_.empty() || times_.size() != values_.size())
            throw std::invalid_argument("growth rate table: empty or mismatched columns");
        for (std::size_t i = 1; i < times_.size(); ++i)
            if (!(times_[i] > times_[i - 1]))
                throw std::invalid_argument("growth rate table: times not strictly increasing");
        for (double v : values_)
            if (!(v >= 0.0))
                throw std::invalid_argument("growth rate must be nonnegative");
    }

    static GrowthRate constant(double g) { return GrowthRate({0.0}, {g}); }

    double operator()(double t) const {
        if (times_.size() == 1 || t <= times_.front()) return values_.front();
        if (t >= times_.back()) return values_.back();
        std::size_t hi = 1;
        while (times_[hi] < t) ++hi;
        const double w = (t - times_[hi - 1]) / (times_[hi] - times_[hi - 1]);
        return (1.0 - w) * values_[hi - 1] + w * values_[hi];
    }

    bool is_constant() const {
        for (double v : values_)
            if (v != values_.front()) return false;
        return true;
    }

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

enum class HorizonMode { Finite, Discounted };

// Game and market constants shared by every solver.
struct ModelParams {
    double a = 0.0;         // lending preference rate
    double q = 0.0;         // borrowing/lending incentive
    double eps = 0.0;       // running penalty weight
    double c = 0.0;         // terminal penalty weight
    int n_banks = 2;        // N
    double horizon = 0.0;   // T (finite mode)
    double discount = 0.0;  // r (discounted mode)
    HorizonMode mode = HorizonMode::Finite;
    GrowthRate gamma;

    // Throws std::invalid_argument naming the violated condition.
    void validate() const {
        if (!(a >= 0.0)) throw std::invalid_argument("a must be >= 0");
        if (!(q >= 0.0)) throw std::invalid_argument("q must be >= 0");
        if (!(eps >= 0.0)) throw std::invalid_argument("eps must be >= 0");
        if (!(c >= 0.0)) throw std::invalid_argument("c must be >= 0");
        if (q * q > eps)
            throw std::invalid_argument(
                "running cost is non-convex: q^2 <= eps violated (q=" + std::to_string(q) +
                ", eps=" + std::to_string(eps) + ")");
        if (n_banks < 1) throw std::invalid_argument("N must be >= 1");
        if (mode == HorizonMode::Finite) {
            if (!(horizon > 0.0)) throw std::invalid_argument("T must be > 0 in finite-horizon mode");
        } else {
            if (!(discount > 0.0)) throw std::invalid_argument("r must be > 0 in discounted mode");
        }
    }
};

}  // namespace feller
