#pragma once

// Rotating-frame model of the driven ion coupled to a two-mode cavity,
// steady-state and time-domain solvers, and detected count rates.
//
// Frame: S at the drive frequency, D at drive minus repump, photons at the
// repump frequency. All couplings are then time independent and the swept
// two-photon detuning is delta = Delta1 - DeltaC. Detunings are signed as
// field minus atom (red = negative). Configuration values are linear MHz;
// the conversion to angular units happens only in build_hamiltonian and
// build_collapse_ops, so times are in microseconds.

#include <stdexcept>
#include <string>
#include <vector>

#include "ioncav/atomic_model.hpp"
#include "ioncav/operator_algebra.hpp"

namespace ioncav {

/// Numerical failure of a solver.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr int kModeH = 0;
constexpr int kModeV = 1;

struct ModelParams {
  double omega1_mhz = 82.0;
  double omega2_mhz = 7.7;
  double delta1_mhz = -320.0;
  double delta2_mhz = -0.5;
  double delta_c_mhz = -320.0;
  double g_max_mhz = 1.61;
  double g_obs_mhz = 1.4;
  double kappa_mhz = 0.054;
  double gamma1_mhz = 10.3;
  double gamma2_mhz = 0.845;
  double b_field_mt = 0.28;
  double linewidth_drive_mhz = 0.030;
  double linewidth_repump_mhz = 0.150;
  double linewidth_cavity_mhz = 0.050;
  DriveConfig drive_config = DriveConfig::pi;
  int n_max = 2;

  /// Throws DomainError when an invariant is violated.
  void validate() const;
};

/// Photon detection efficiencies of the cavity output path.
struct DetectionChain {
  double cavity_output_coupling = 0.19;
  double fiber = 0.92;
  double filter_path = 0.67;
  double detector_qe = 0.415;
  double background_cps = 300.0;

  double total() const { return cavity_output_coupling * fiber * filter_path * detector_qe; }
  void validate() const;
};

struct SteadyStateOptions {
  double tolerance = 1e-10;
  /// Constrained systems with an estimated 1-norm condition number above
  /// this are treated as singular.
  double max_condition = 1e13;
};

struct SteadyStateSolution {
  DensityMatrix rho;
  double residual_norm = 0.0;
  std::vector<double> top_fock_population;
  double solve_time_s = 0.0;
};

struct EvolveOptions {
  double abs_tolerance = 1e-10;
  double rel_tolerance = 1e-10;
  double initial_step_us = 1e-4;
  double min_step_us = 1e-14;
};

struct DetectedRates {
  double h_cps = 0.0;
  double v_cps = 0.0;
  /// Signal of both modes plus the background counted once.
  double total_cps = 0.0;
};

/// Atom tensor H-mode tensor V-mode with n_max photons per mode.
HilbertSpace model_space(const ModelParams& params);

SparseMatrix build_hamiltonian(const ModelParams& params, const HilbertSpace& space);
std::vector<SparseMatrix> build_collapse_ops(const ModelParams& params, const HilbertSpace& space);
SparseMatrix build_liouvillian(const ModelParams& params, const HilbertSpace& space);

/// Solves L vec(rho) = 0 with one diagonal row replaced by the trace
/// condition. Throws SolverError for a singular constrained system or a
/// residual above tolerance.
SteadyStateSolution steady_state(const SparseMatrix& liouvillian, const SteadyStateOptions& options = {});

/// steady_state of the full model, with Fock-truncation diagnostics filled in.
SteadyStateSolution solve_model(const ModelParams& params, const SteadyStateOptions& options = {});

/// rho(t) by adaptive Dormand-Prince integration; t in microseconds.
DensityMatrix evolve(const DensityMatrix& rho0, const SparseMatrix& liouvillian, double t_us,
                     const EvolveOptions& options = {});

double mean_photon_number(const DensityMatrix& rho, const HilbertSpace& space, int mode);
double manifold_population(const DensityMatrix& rho, const HilbertSpace& space, Manifold manifold);
/// Population with the given mode at its Fock cutoff.
double top_fock_population(const DensityMatrix& rho, const HilbertSpace& space, int mode);

/// Count rate for a mean intracavity photon number in one mode, including
/// the detector background.
double detected_rate_for_photons(double mean_photons, const ModelParams& params, const DetectionChain& chain);

DetectedRates detected_rate(const DensityMatrix& rho, const ModelParams& params, const DetectionChain& chain);

}  // namespace ioncav
