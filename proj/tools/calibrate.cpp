// Fits the frozen constants on the calibration set and prints them in the
// layout of include/lpstab/calibration.hpp. Nothing here is run by the tests.
#include <algorithm>
#include <cstdio>

#include "lpstab/calibration.hpp"
#include "lpstab/cli/checks.hpp"

using namespace lpstab;
namespace cal = lpstab::calibration;

int main() {
  const auto seed = cal::kSeed;
  std::printf("kSobolevC{");
  for (std::size_t i = 0; i < cal::kSobolevSigma.size(); ++i) {
    std::printf("%s%.6g", i ? ", " : "", checks::fit_sobolev_constant(256, cal::kSobolevSigma[i], 100, seed));
  }
  std::printf("}\n");
  std::printf("kMappingC = %.6g\n", checks::fit_mapping_constant(256, 3, 0.5, 50, seed));
  std::printf("kRemainderC = %.6g\n", checks::fit_remainder_constant(256, 3, 0.5, 50, seed));
  std::printf("kAdjointC = %.6g\n", checks::fit_adjoint_constant(256, 3, 50, seed));

  double M = 0.0, gamma0 = 0.0, interior = 0.0, aux = 0.0, square = 0.0;
  for (const auto& run : checks::energy_calibration_runs()) {
    const auto res = checks::energy_run(run);
    for (const auto& rep : res.reports) M = std::max(M, rep.fitted_M);
    gamma0 = std::max(gamma0, res.gamma0);
    interior = std::max(interior, res.interior.lhs / res.interior.rhs);
    const auto d = res.diagnostics.max();
    aux = std::max(aux, d.auxp1);
    square = std::max(square, d.comm_square);
    std::printf("  %s n=%d steps=%d: M %.6g gamma0 %.3g interior %.4g auxp1 %.4g comm_square %.4g residual %.3g\n",
                run.family.c_str(), run.n, run.steps,
                std::max({res.reports[0].fitted_M, res.reports[1].fitted_M, res.reports[2].fitted_M}),
                res.gamma0, res.interior.lhs / res.interior.rhs, d.auxp1, d.comm_square,
                d.transform_residual);
  }
  std::printf("kEnergyM = %.6g\nkGamma0 = %.6g\nkInteriorC = %.6g\nkAuxP1C = %.6g\nkCommSquareC = %.6g\n",
              M, gamma0, interior, aux, square);
}
