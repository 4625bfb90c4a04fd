#include "annealab/hamiltonian.hpp"

#include <stdexcept>

namespace annealab {

std::vector<double> potential_on_grid(const Grid& grid, const PotentialParams& params) {
  const auto x = grid.points();
  std::vector<double> v(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) v[j] = potential(params, x[j]);
  return v;
}

Wavefunction apply_hamiltonian(const Wavefunction& psi, std::span<const double> potential,
                               double mass) {
  if (potential.size() != psi.size()) throw std::invalid_argument("potential size mismatch");
  Wavefunction out = apply_kinetic(psi, mass);
  for (std::size_t j = 0; j < psi.size(); ++j) out[j] += potential[j] * psi[j];
  return out;
}

}  // namespace annealab
