#include "ioncav/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ioncav/parallel.hpp"

namespace ioncav {

const char* swept_parameter_name(SweptParameter p) {
  return p == SweptParameter::drive_detuning ? "drive_detuning" : "cavity_detuning";
}

void SweepSpec::validate() const {
  if (points < 2) throw DomainError("a sweep needs at least two points");
  if (!(start_mhz < stop_mhz)) throw DomainError("sweep start must be below sweep stop");
  params.validate();
}

double SweepSpec::detuning(int i) const {
  return start_mhz + (stop_mhz - start_mhz) * static_cast<double>(i) / static_cast<double>(points - 1);
}

ModelParams SweepSpec::params_at(double delta_mhz) const {
  ModelParams p = params;
  if (swept == SweptParameter::drive_detuning)
    p.delta1_mhz = p.delta_c_mhz + delta_mhz;
  else
    p.delta_c_mhz = p.delta1_mhz - delta_mhz;
  return p;
}

SweepError::SweepError(double detuning_mhz, const std::string& what)
    : SolverError([&] {
        std::ostringstream msg;
        msg.precision(9);
        msg << "solve failed at detuning " << detuning_mhz << " MHz: " << what;
        return msg.str();
      }()),
      detuning_(detuning_mhz) {}

SpectrumRecord spectrum_point(const ModelParams& params, double detuning_mhz, const DetectionChain& chain,
                              const SteadyStateOptions& options) {
  const HilbertSpace space = model_space(params);
  const SteadyStateSolution sol = [&] {
    try {
      return solve_model(params, options);
    } catch (const SolverError& e) {
      throw SweepError(detuning_mhz, e.what());
    }
  }();
  SpectrumRecord r;
  r.detuning_mhz = detuning_mhz;
  r.n_h = mean_photon_number(sol.rho, space, kModeH);
  r.n_v = mean_photon_number(sol.rho, space, kModeV);
  const DetectedRates rates = detected_rate(sol.rho, params, chain);
  r.rate_h_cps = rates.h_cps;
  r.rate_v_cps = rates.v_cps;
  r.rate_total_cps = rates.total_cps;
  r.residual = sol.residual_norm;
  r.top_fock_population = *std::max_element(sol.top_fock_population.begin(), sol.top_fock_population.end());
  return r;
}

std::vector<SpectrumRecord> sweep_spectrum(const SweepSpec& spec, const DetectionChain& chain, int workers,
                                           const SteadyStateOptions& options) {
  spec.validate();
  chain.validate();
  return parallel_map(static_cast<std::size_t>(spec.points), workers, [&](std::size_t i) {
    const double delta = spec.detuning(static_cast<int>(i));
    return spectrum_point(spec.params_at(delta), delta, chain, options);
  });
}

namespace {

// Vertex of the parabola through three points.
std::pair<double, double> parabola_vertex(double x0, double y0, double x1, double y1, double x2, double y2) {
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double curvature = (d12 - d01) / (x2 - x0);
  if (curvature >= 0.0) return {x1, y1};
  const double slope_mid = d01 + curvature * (x1 - x0);  // slope at x1 of the parabola
  const double dx = -slope_mid / (2.0 * curvature);
  const double x = std::clamp(x1 + dx, x0, x2);
  const double y = y1 + slope_mid * (x - x1) + curvature * (x - x1) * (x - x1);
  return {x, y};
}

}  // namespace

std::vector<Peak> find_peaks(std::span<const double> x, std::span<const double> y, double min_prominence) {
  if (x.size() != y.size()) throw DomainError("find_peaks: x and y differ in length");
  std::vector<Peak> peaks;
  const std::size_t n = y.size();
  if (n < 3) return peaks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1])) continue;
    // Plateau: the peak is at its left end, and must drop afterwards.
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 >= n || !(y[j + 1] < y[i])) continue;

    double left_min = y[i];
    for (std::size_t k = i; k-- > 0;) {
      if (y[k] > y[i]) break;
      left_min = std::min(left_min, y[k]);
    }
    double right_min = y[i];
    for (std::size_t k = j + 1; k < n; ++k) {
      if (y[k] > y[i]) break;
      right_min = std::min(right_min, y[k]);
    }
    const double prominence = y[i] - std::max(left_min, right_min);
    if (prominence < min_prominence) continue;

    Peak p;
    if (j == i) {
      const auto [px, py] = parabola_vertex(x[i - 1], y[i - 1], x[i], y[i], x[i + 1], y[i + 1]);
      p.position_mhz = px;
      p.height = py;
    } else {
      p.position_mhz = 0.5 * (x[i] + x[j]);
      p.height = y[i];
    }
    p.prominence = prominence;
    peaks.push_back(p);
    i = j;
  }
  return peaks;
}

std::vector<Peak> find_peaks(std::span<const SpectrumRecord> records, double min_prominence, Channel channel) {
  std::vector<double> x;
  std::vector<double> y;
  x.reserve(records.size());
  y.reserve(records.size());
  for (const auto& r : records) {
    x.push_back(r.detuning_mhz);
    y.push_back(channel == Channel::h ? r.rate_h_cps : channel == Channel::v ? r.rate_v_cps : r.rate_total_cps);
  }
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) throw DomainError("find_peaks: records must be sorted by detuning");
  return find_peaks(x, y, min_prominence);
}

void SidebandSpec::validate() const {
  if (!(axial_mhz > 0.0) || !(radial_mhz > 0.0)) throw DomainError("sideband frequencies must be positive");
  for (double w : {axial_red_weight, axial_blue_weight, radial_red_weight, radial_blue_weight})
    if (!(w >= 0.0)) throw DomainError("sideband weights must be non-negative");
}

const char* line_kind_name(LineKind k) {
  switch (k) {
    case LineKind::carrier: return "carrier";
    case LineKind::axial_red: return "axial_red";
    case LineKind::axial_blue: return "axial_blue";
    case LineKind::radial_red: return "radial_red";
    case LineKind::radial_blue: return "radial_blue";
  }
  return "?";
}

std::vector<OverlayLine> sideband_overlay(std::span<const OverlayLine> carriers, const SidebandSpec& sb) {
  sb.validate();
  std::vector<OverlayLine> out;
  out.reserve(carriers.size() * 5);
  for (const auto& c : carriers) {
    out.push_back(c);
    const struct {
      LineKind kind;
      double offset;
      double weight;
    } companions[] = {
        {LineKind::axial_red, -sb.axial_mhz, sb.axial_red_weight},
        {LineKind::axial_blue, sb.axial_mhz, sb.axial_blue_weight},
        {LineKind::radial_red, -sb.radial_mhz, sb.radial_red_weight},
        {LineKind::radial_blue, sb.radial_mhz, sb.radial_blue_weight},
    };
    for (const auto& comp : companions) {
      if (comp.weight == 0.0) continue;
      out.push_back({c.label, c.position_mhz + comp.offset, c.strength * comp.weight, comp.kind});
    }
  }
  return out;
}

std::vector<PredictedPeak> predict_peaks(const ModelParams& params) {
  const ZeemanField field(params.b_field_mt);
  std::vector<PredictedPeak> out;
  for (const auto& e : effective_lines(params.drive_config, field)) {
    PredictedPeak p;
    p.label = e.line.label;
    p.position_mhz = e.position_mhz;
    p.resonance_mhz = two_photon_resonance_mhz(e.line, field);
    p.effective_strength = e.effective_strength;
    p.polarization = e.cavity_polarization;
    out.push_back(p);
  }
  return out;
}

double drive_light_shift_mhz(const ModelParams& params) {
  const ZeemanField field(params.b_field_mt);
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  double total = 0.0;
  int count = 0;
  for (const auto& s : all_levels()) {
    if (s.manifold != Manifold::S12) continue;
    double shift = 0.0;
    for (int q = -1; q <= 1; ++q) {
      const double e_q = params.drive_config == DriveConfig::pi ? (q == 0 ? 1.0 : 0.0) : (q == 0 ? 0.0 : kInvSqrt2);
      const AtomicLevel p{Manifold::P12, s.mj + HalfInt::integer(q)};
      if (e_q == 0.0 || std::abs(p.mj.twice()) > 1) continue;
      const double coupling = 0.5 * params.omega1_mhz * e_q * cg_amplitude(kHalf, s.mj, q, kHalf, p.mj);
      const double gap = zeeman_shift(s, field) - (-params.delta1_mhz + zeeman_shift(p, field));
      if (gap != 0.0) shift += coupling * coupling / gap;
    }
    total += shift;
    ++count;
  }
  return total / count;
}

ModelParams tuned_to_line(const ModelParams& params, char label) {
  const double bare = two_photon_resonance_mhz(raman_line(label), ZeemanField(params.b_field_mt));
  ModelParams p = params;
  p.delta1_mhz = p.delta_c_mhz + bare;
  for (int pass = 0; pass < 2; ++pass) p.delta1_mhz = p.delta_c_mhz + bare - drive_light_shift_mhz(p);
  return p;
}

double locate_resonance(const ModelParams& params, char label, const DetectionChain& chain, int workers,
                        double half_window_mhz, int points, SweptParameter swept) {
  const ZeemanField field(params.b_field_mt);
  const RamanLine& line = raman_line(label);
  const bool pi_stokes = line.stokes_polarization == Polarization::pi;

  SweepSpec spec;
  spec.swept = swept;
  const double center = two_photon_resonance_mhz(line, field) - drive_light_shift_mhz(tuned_to_line(params, label));
  spec.params = params;
  spec.start_mhz = center - half_window_mhz;
  spec.stop_mhz = center + half_window_mhz;
  spec.points = points;
  const auto records = sweep_spectrum(spec, chain, workers);

  const Channel channel = pi_stokes ? Channel::h : Channel::v;
  const auto peaks = find_peaks(records, 0.0, channel);
  if (peaks.empty()) {
    std::ostringstream msg;
    msg << "no maximum of line " << label << " within +/-" << half_window_mhz << " MHz of " << center << " MHz";
    throw SolverError(msg.str());
  }
  const auto best = std::max_element(peaks.begin(), peaks.end(),
                                     [](const Peak& a, const Peak& b) { return a.height < b.height; });
  return best->position_mhz;
}

}  // namespace ioncav
