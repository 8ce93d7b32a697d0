#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "feller/params.hpp"
#include "feller/sde.hpp"

namespace feller {

enum class SimSystem { Uncontrolled, Equilibrium, TotalReserve };

struct SweepAxis {
    std::string param;  // one of: q, eps, r, gamma, N
    double lo = 0.0, hi = 0.0;
    int count = 0;
};

// Declarative run description, sectioned key-value text. Unknown sections or
// keys are rejected; the model block is validated on load.
struct Scenario {
    ModelParams model;
    SimConfig sim;
    InitialCondition init;
    SimSystem system = SimSystem::Uncontrolled;
    double y0 = 1.0;  // total-reserve start
    bool csv_output = true;
    bool binary_output = false;
    int stride = 1;
    std::optional<SweepAxis> sweep;
    std::optional<SweepAxis> sweep2;

    static Scenario parse(std::istream& is);
    static Scenario load(const std::string& path);

    // Re-parsable echo of the validated scenario; Scenario::parse of the
    // result reproduces the same configuration.
    std::string to_manifest() const;
};

}  // namespace feller
