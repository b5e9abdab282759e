// Frozen constants for inequalities whose constants are only known to exist.
// Each value is the largest quotient observed on the calibration set printed
// by lpstab-calibrate; checks compare against kSafety times the value, on
// inputs disjoint from the calibration set.
#pragma once

#include <array>
#include <cstdint>

namespace lpstab::calibration {

inline constexpr double kSafety = 1.25;
inline constexpr std::uint64_t kSeed = 0x1234;

// Dyadic/direct Sobolev ratios, sigma = -0.5, 0, 0.7 on n = 256.
inline constexpr std::array<double, 3> kSobolevSigma{-0.5, 0.0, 0.7};
inline constexpr std::array<double, 3> kSobolevC{1.17257, 1.15555, 1.15432};

// T_a^3 on H^0.5 (n = 256), remainder into H^0.5 from H^-0.5, adjoint defect,
// all over random Lipschitz a.
inline constexpr double kMappingC = 0.81337;
inline constexpr double kRemainderC = 0.529517;
inline constexpr double kAdjointC = 0.0803162;

// Weighted energy inequality and companions, (s, lambda, alpha, gamma) = (0.5, 2, 1, 1),
// fitted on n = 512 runs of the constant, lip_x and loglip_t families. The AuxP1 constant is
// zero because the (1/N) time term alone already dominates at N = 4.
inline constexpr double kEnergyM = 5.72384e-21;
inline constexpr double kGamma0 = 0.0;
inline constexpr double kInteriorC = 0.721989;
inline constexpr double kAuxP1C = 0.0;
inline constexpr double kCommSquareC = 0.012504;

}  // namespace lpstab::calibration
