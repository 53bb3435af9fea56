#pragma once

#include <stdexcept>
#include <string>

namespace eplab {

// Error families surfaced by the lab. The CLI maps each family to a
// distinct exit code.

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bernoulli/enthalpy argument at or below the vacuum limit.
struct VacuumError : std::domain_error {
    using std::domain_error::domain_error;
};

// 1D integration lost subsonicity: p'(rho) - J^2/rho^2 fell under the floor.
struct SonicBreakdown : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Stream-function Bernoulli equation has no subsonic root (margin <= 0).
struct NoSubsonicRoot : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// gamma*rho_sub^{gamma+1} - |q|^2 fell under the floor; coefficient
// formulas degenerate at the sonic fold.
struct SonicDegeneracy : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Picard residual grew for several consecutive iterations.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Linear algebra failure (singular assembly, factorization breakdown,
// residual above contract).
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace eplab
