#pragma once

#include <span>
#include <vector>

namespace annealab::detail {

struct TridiagonalEigen {
  std::vector<double> values;                ///< ascending
  std::vector<std::vector<double>> vectors;  ///< unit 2-norm
};

/// Lowest `count` eigenpairs of the symmetric tridiagonal matrix with
/// diagonal `d` and off-diagonal `e` (size d.size() - 1), by Sturm bisection
/// and inverse iteration. Assumes the requested eigenvalues are simple.
TridiagonalEigen tridiagonal_lowest(std::span<const double> d, std::span<const double> e,
                                    int count);

}  // namespace annealab::detail
