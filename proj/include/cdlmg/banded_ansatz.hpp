#pragma once

#include <span>
#include <string>

#include "cdlmg/error.hpp"
#include "cdlmg/spin_algebra.hpp"

namespace cdlmg {

/// Banded ansatz with one constant value x_i along each band i (offset 2i).
///
/// Same sign pattern as the band table: in excitation labels, H[p + 2i][p] = i x_i,
/// which in the S_z basis puts +i x_i above the diagonal.
inline OperatorMatrix ansatz_matrix(DickeSector sector, std::span<const double> x) {
  const int n = sector.n();
  detail::require(2 * static_cast<int>(x.size()) <= n,
                  "ansatz_matrix: " + std::to_string(x.size()) + " bands exceed N/2 for N=" +
                      std::to_string(n));
  OperatorMatrix out(sector);
  for (int b = 1; b <= static_cast<int>(x.size()); ++b) {
    const double v = x[b - 1];
    if (v == 0.0) continue;
    for (int r = 0; r + 2 * b <= n; ++r) {
      out(r, r + 2 * b) = cplx(0.0, v);
      out(r + 2 * b, r) = cplx(0.0, -v);
    }
  }
  return out;
}

}  // namespace cdlmg
