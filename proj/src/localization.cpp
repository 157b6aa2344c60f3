#include "ioncav/localization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ioncav/parallel.hpp"

namespace ioncav {

double LocalizationParams::wavenumber_per_nm() const { return 2.0 * std::numbers::pi / wavelength_nm; }

void LocalizationParams::validate() const {
  if (!(sigma_nm >= 0.0)) throw DomainError("sigma must be non-negative");
  if (!(wavelength_nm > 0.0)) throw DomainError("wavelength must be positive");
  if (!std::isfinite(phase_offset_rad)) throw DomainError("phase offset must be finite");
  if (!(ground_state_size_nm >= 0.0)) throw DomainError("ground-state size must be non-negative");
}

double visibility_from_sigma(const LocalizationParams& p) {
  p.validate();
  const double ks = p.wavenumber_per_nm() * p.sigma_nm;
  return std::exp(-2.0 * ks * ks);
}

double sigma_from_visibility(double visibility, double wavelength_nm) {
  if (!(visibility > 0.0 && visibility <= 1.0)) throw DomainError("visibility must lie in (0, 1]");
  if (!(wavelength_nm > 0.0)) throw DomainError("wavelength must be positive");
  return wavelength_nm / (2.0 * std::numbers::pi) * std::sqrt(-std::log(visibility) / 2.0);
}

double g_effective(double g_max_mhz, const LocalizationParams& p) {
  p.validate();
  if (!(g_max_mhz >= 0.0)) throw DomainError("g_max must be non-negative");
  const double ks = p.wavenumber_per_nm() * p.sigma_nm;
  return g_max_mhz * std::exp(-ks * ks / 2.0);
}

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw DomainError("quadrature needs at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(i / 2.0);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = eig.eigenvalues()(i);
    const double v0 = eig.eigenvectors()(0, i);
    rule.weights[i] = sqrt_pi * v0 * v0;
  }
  return rule;
}

std::vector<StandingWavePoint> standing_wave_scan(const ModelParams& params, const LocalizationParams& loc,
                                                  std::span<const double> displacements_nm,
                                                  const DetectionChain& chain, const StandingWaveOptions& options) {
  params.validate();
  loc.validate();
  chain.validate();
  if (options.quadrature_nodes < 15) throw DomainError("standing-wave quadrature needs at least 15 nodes");
  for (double x0 : displacements_nm)
    if (!std::isfinite(x0)) throw DomainError("displacements must be finite");

  const double k = loc.wavenumber_per_nm();
  const QuadratureRule coarse = gauss_hermite(options.quadrature_nodes);
  const QuadratureRule fine = gauss_hermite(2 * options.quadrature_nodes);

  // Every (displacement, node) pair needs one steady state at coupling |g|.
  // Collect them, solve the distinct ones in parallel, then reassemble.
  std::vector<double> couplings;
  auto coupling_at = [&](double x, double x0) {
    return std::abs(params.g_max_mhz * std::sin(k * (x - x0) + loc.phase_offset_rad));
  };
  for (double x0 : displacements_nm) {
    if (loc.sigma_nm == 0.0) {
      couplings.push_back(coupling_at(0.0, x0));
      continue;
    }
    for (const QuadratureRule* rule : {&coarse, &fine})
      for (double t : rule->nodes) couplings.push_back(coupling_at(std::numbers::sqrt2 * loc.sigma_nm * t, x0));
  }
  std::vector<double> unique = couplings;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

  const std::vector<double> rates = parallel_map(unique.size(), options.workers, [&](std::size_t i) {
    ModelParams p = params;
    p.g_obs_mhz = std::min(unique[i], params.g_max_mhz);
    try {
      return detected_rate(solve_model(p, options.steady).rho, p, chain).total_cps;
    } catch (const SolverError& e) {
      std::ostringstream msg;
      msg << "steady state at coupling " << unique[i] << " MHz: " << e.what();
      throw SolverError(msg.str());
    }
  });
  auto rate_of = [&](double g) {
    const auto it = std::lower_bound(unique.begin(), unique.end(), g);
    return rates[static_cast<std::size_t>(it - unique.begin())];
  };

  std::vector<StandingWavePoint> out;
  out.reserve(displacements_nm.size());
  for (double x0 : displacements_nm) {
    if (loc.sigma_nm == 0.0) {
      out.push_back({x0, rate_of(coupling_at(0.0, x0))});
      continue;
    }
    auto f = [&](double x) { return rate_of(coupling_at(x, x0)); };
    const double low = gaussian_average(f, loc.sigma_nm, coarse);
    const double high = gaussian_average(f, loc.sigma_nm, fine);
    if (std::abs(high - low) > options.convergence_tolerance * std::abs(high)) {
      std::ostringstream msg;
      msg << "position average at displacement " << x0 << " nm not converged: " << options.quadrature_nodes
          << " nodes give " << low << ", " << 2 * options.quadrature_nodes << " give " << high;
      throw SolverError(msg.str());
    }
    out.push_back({x0, high});
  }
  return out;
}

SinSquaredFit fit_sin_squared(std::span<const double> x_nm, std::span<const double> y, double wavelength_nm,
                              double background) {
  if (x_nm.size() != y.size()) throw DomainError("fit: x and y differ in length");
  if (x_nm.size() < 6) throw DomainError("fit needs at least 6 points");
  if (!(wavelength_nm > 0.0)) throw DomainError("wavelength must be positive");
  const auto [lo, hi] = std::minmax_element(x_nm.begin(), x_nm.end());
  if (*hi - *lo < wavelength_nm / 4.0) throw DomainError("fit points must span at least a quarter wavelength");

  // sin^2(kx + phi) = 1/2 - cos(2kx + 2phi)/2, linear in [1, cos 2kx, sin 2kx].
  const double two_k = 4.0 * std::numbers::pi / wavelength_nm;
  const auto n = static_cast<Eigen::Index>(x_nm.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(two_k * x_nm[i]);
    design(i, 2) = std::sin(two_k * x_nm[i]);
    rhs(i) = y[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) throw DomainError("sin^2 fit is rank deficient");
  const Eigen::Vector3d c = qr.solve(rhs);

  SinSquaredFit fit;
  const double half_amplitude = std::hypot(c(1), c(2));
  fit.amplitude = 2.0 * half_amplitude;
  fit.offset = c(0) - half_amplitude;
  fit.phase_rad = half_amplitude > 0.0 ? 0.5 * std::atan2(c(2), -c(1)) : 0.0;
  const double denominator = fit.amplitude + 2.0 * (fit.offset - background);
  if (fit.amplitude == 0.0) {
    fit.visibility = 0.0;
  } else if (denominator <= 0.0) {
    throw DomainError("fitted curve lies below the background");
  } else {
    fit.visibility = fit.amplitude / denominator;
  }
  return fit;
}

}  // namespace ioncav
