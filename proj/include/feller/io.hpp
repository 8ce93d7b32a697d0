#pragma once

#include <iosfwd>
#include <string>

#include "feller/coeffs.hpp"
#include "feller/sde.hpp"

namespace feller {

// CSV stream of an ensemble: header "path,t,bank,value". Full-path records
// emit every stored step (optionally thinned); terminal records emit the
// final state only. UTF-8, '.' decimal, newline-terminated.
void write_ensemble_csv(const PathEnsemble& ensemble, std::ostream& os, int stride = 1);

// Coefficient table: "t,eta,L,phi,mu,psi".
void write_coefficients_csv(const CoefficientPath& path, std::ostream& os, int stride = 1);

// Compact binary cache for replay. Layout (little-endian):
//   magic "FELLERSIM1" (10 bytes), u32 version, u32 record mode,
//   u64 n_paths, u64 n_banks, u64 n_times, u64 seed, f64 dt,
//   u64 truncation_events, u64 total_steps,
//   grid[n_times], values[n_paths*n_times*n_banks] (full-path mode only),
//   terminal[n_paths*n_banks], first_zero[n_paths*n_banks] (NaN = never).
void write_ensemble_binary(const PathEnsemble& ensemble, std::ostream& os);
PathEnsemble read_ensemble_binary(std::istream& is);

}  // namespace feller
