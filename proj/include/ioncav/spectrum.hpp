#pragma once

// Two-photon detuning sweeps, peak extraction, analytic line predictions and
// the motional-sideband overlay.

#include <span>
#include <string>
#include <vector>

#include "ioncav/atomic_model.hpp"
#include "ioncav/dynamics.hpp"

namespace ioncav {

enum class SweptParameter { drive_detuning, cavity_detuning };

const char* swept_parameter_name(SweptParameter p);

struct SweepSpec {
  SweptParameter swept = SweptParameter::drive_detuning;
  double start_mhz = -15.0;
  double stop_mhz = 15.0;
  int points = 241;
  ModelParams params;

  void validate() const;
  /// Two-photon detuning of grid point i.
  double detuning(int i) const;
  /// Model parameters at two-photon detuning delta; the swept laser moves,
  /// the other frequency is held at its configured value.
  ModelParams params_at(double delta_mhz) const;
};

struct SpectrumRecord {
  double detuning_mhz = 0.0;
  double n_h = 0.0;
  double n_v = 0.0;
  double rate_h_cps = 0.0;
  double rate_v_cps = 0.0;
  double rate_total_cps = 0.0;
  double residual = 0.0;
  double top_fock_population = 0.0;
};

/// A sweep point whose steady-state solve failed.
class SweepError : public SolverError {
 public:
  SweepError(double detuning_mhz, const std::string& what);
  double detuning_mhz() const { return detuning_; }

 private:
  double detuning_;
};

/// Steady state of one sweep point.
SpectrumRecord spectrum_point(const ModelParams& params, double detuning_mhz, const DetectionChain& chain,
                              const SteadyStateOptions& options = {});

/// One record per grid point in grid order. Output does not depend on the
/// worker count.
std::vector<SpectrumRecord> sweep_spectrum(const SweepSpec& spec, const DetectionChain& chain, int workers = 1,
                                           const SteadyStateOptions& options = {});

struct Peak {
  double position_mhz = 0.0;
  double height = 0.0;
  double prominence = 0.0;
};

/// Interior local maxima whose topographic prominence reaches
/// min_prominence; position and height refined by a three-point parabola.
std::vector<Peak> find_peaks(std::span<const double> x, std::span<const double> y, double min_prominence);

enum class Channel { total, h, v };

std::vector<Peak> find_peaks(std::span<const SpectrumRecord> records, double min_prominence,
                             Channel channel = Channel::total);

struct SidebandSpec {
  double axial_mhz = 1.08;
  double radial_mhz = 2.92;
  double axial_red_weight = 0.2;
  double axial_blue_weight = 0.2;
  double radial_red_weight = 0.1;
  double radial_blue_weight = 0.1;

  void validate() const;
};

enum class LineKind { carrier, axial_red, axial_blue, radial_red, radial_blue };

const char* line_kind_name(LineKind k);

struct OverlayLine {
  std::string label;
  double position_mhz = 0.0;
  double strength = 0.0;
  LineKind kind = LineKind::carrier;
};

/// Each carrier followed by its sidebands at -/+ axial and -/+ radial
/// frequency with strength carrier * weight; zero-weight sidebands omitted.
std::vector<OverlayLine> sideband_overlay(std::span<const OverlayLine> carriers, const SidebandSpec& sidebands);

struct PredictedPeak {
  char label = 'A';
  /// Tabulated line position, shift factor times mu_B B / h.
  double position_mhz = 0.0;
  /// Two-photon detuning of the bare resonance in the model Hamiltonian.
  double resonance_mhz = 0.0;
  Rational effective_strength;
  CavityPolarization polarization = CavityPolarization::H;
};

std::vector<PredictedPeak> predict_peaks(const ModelParams& params);

/// Second-order light shift of the S manifold by the drive, averaged over
/// the two sublevels (MHz).
double drive_light_shift_mhz(const ModelParams& params);

/// params with the drive moved onto the light-shifted analytic resonance of
/// one line; the cavity frequency is kept.
ModelParams tuned_to_line(const ModelParams& params, char label);

/// Two-photon detuning of the simulated maximum of one line in its own
/// polarization channel, found by a local sweep around the light-shifted
/// analytic resonance.
double locate_resonance(const ModelParams& params, char label, const DetectionChain& chain, int workers = 1,
                        double half_window_mhz = 1.0, int points = 41,
                        SweptParameter swept = SweptParameter::drive_detuning);

}  // namespace ioncav
