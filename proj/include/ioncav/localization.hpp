#pragma once

// Ion wave-packet size versus standing-wave visibility, the reduced
// effective coupling, and simulated standing-wave scans.

#include <span>
#include <vector>

#include "ioncav/dynamics.hpp"

namespace ioncav {

struct LocalizationParams {
  /// rms size of the Gaussian ion wave packet along the cavity axis.
  double sigma_nm = 0.0;
  double wavelength_nm = 866.0;
  double phase_offset_rad = 0.0;
  /// Ground-state wave-packet size; informational only.
  double ground_state_size_nm = 0.0;

  double wavenumber_per_nm() const;
  void validate() const;
};

/// exp(-2 (k sigma)^2)
double visibility_from_sigma(const LocalizationParams& p);
/// Inverse of visibility_from_sigma. Throws DomainError unless 0 < V <= 1.
double sigma_from_visibility(double visibility, double wavelength_nm = 866.0);
/// Antinode coupling averaged over the wave packet, g_max exp(-(k sigma)^2 / 2).
double g_effective(double g_max_mhz, const LocalizationParams& p);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for weight exp(-t^2) (Golub-Welsch).
QuadratureRule gauss_hermite(int n);

/// Average of f over a centred Gaussian of rms width sigma, with an n-node
/// rule.
template <class Fn>
double gaussian_average(Fn&& f, double sigma, const QuadratureRule& rule);

struct StandingWaveOptions {
  int quadrature_nodes = 16;
  int workers = 1;
  /// Node doubling may change an averaged rate by at most this fraction.
  double convergence_tolerance = 5e-3;
  SteadyStateOptions steady;
};

struct StandingWavePoint {
  double displacement_nm = 0.0;
  double rate_cps = 0.0;
};

/// Detected total rate versus mirror displacement x0. The ion sees
/// g(x) = g_max sin(k (x - x0) + phase_offset), averaged over its Gaussian
/// position distribution. Throws SolverError when the quadrature has not
/// converged.
std::vector<StandingWavePoint> standing_wave_scan(const ModelParams& params, const LocalizationParams& loc,
                                                  std::span<const double> displacements_nm,
                                                  const DetectionChain& chain, const StandingWaveOptions& options = {});

struct SinSquaredFit {
  double amplitude = 0.0;
  double offset = 0.0;
  double phase_rad = 0.0;
  /// Contrast of the fitted curve after subtracting the background.
  double visibility = 0.0;
};

/// Least squares y = a sin^2(k x + phi) + c with k = 2 pi / wavelength.
/// Needs at least 6 points spanning a quarter wavelength; throws DomainError
/// otherwise or when the design matrix is rank deficient.
SinSquaredFit fit_sin_squared(std::span<const double> x_nm, std::span<const double> y, double wavelength_nm,
                              double background = 0.0);

template <class Fn>
double gaussian_average(Fn&& f, double sigma, const QuadratureRule& rule) {
  constexpr double kInvSqrtPi = 0.56418958354775628695;
  constexpr double kSqrt2 = 1.41421356237309504880;
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(kSqrt2 * sigma * rule.nodes[i]);
  return kInvSqrtPi * sum;
}

}  // namespace ioncav
