#pragma once

#include <vector>

#include "annealab/grid.hpp"
#include "annealab/potential.hpp"

namespace annealab {

/// V sampled at the grid points.
std::vector<double> potential_on_grid(const Grid& grid, const PotentialParams& params);

/// H(m) psi with the spectral kinetic operator and a diagonal potential.
Wavefunction apply_hamiltonian(const Wavefunction& psi, std::span<const double> potential,
                               double mass);

}  // namespace annealab
