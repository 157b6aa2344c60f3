#include "ioncav/atomic_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace ioncav {

std::string HalfInt::str() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return (twice_ > 0 ? "+" : "-") + std::to_string(std::abs(twice_)) + "/2";
}

int orbital_of(Manifold m) {
  switch (m) {
    case Manifold::S12: return 0;
    case Manifold::P12: return 1;
    case Manifold::D32: return 2;
  }
  return 0;
}

HalfInt total_j_of(Manifold m) { return m == Manifold::D32 ? kThreeHalves : kHalf; }

const char* manifold_name(Manifold m) {
  switch (m) {
    case Manifold::S12: return "S1/2";
    case Manifold::P12: return "P1/2";
    case Manifold::D32: return "D3/2";
  }
  return "?";
}

std::string AtomicLevel::name() const {
  return std::string(manifold_name(manifold)) + "(" + mj.str() + ")";
}

const std::array<AtomicLevel, kAtomDim>& all_levels() {
  static const std::array<AtomicLevel, kAtomDim> levels = {{
      {Manifold::S12, -kHalf},
      {Manifold::S12, kHalf},
      {Manifold::P12, -kHalf},
      {Manifold::P12, kHalf},
      {Manifold::D32, -kThreeHalves},
      {Manifold::D32, -kHalf},
      {Manifold::D32, kHalf},
      {Manifold::D32, kThreeHalves},
  }};
  return levels;
}

int level_index(const AtomicLevel& level) {
  const int j2 = level.j().twice();
  const int m2 = level.mj.twice();
  if (std::abs(m2) > j2 || (j2 - m2) % 2 != 0)
    throw DomainError("invalid sublevel " + level.name());
  const int offset = level.manifold == Manifold::S12 ? 0 : level.manifold == Manifold::P12 ? 2 : 4;
  return offset + (m2 + j2) / 2;
}

ZeemanField::ZeemanField(double b_millitesla) : b_mt_(b_millitesla) {
  if (!(b_millitesla >= 0.0)) throw DomainError("magnetic field must be non-negative");
}

Rational lande_g(int orbital, HalfInt spin, HalfInt total_j) {
  const HalfInt l = HalfInt::integer(orbital);
  if (orbital < 0 || spin.twice() < 0 || total_j.twice() <= 0)
    throw DomainError("Lande factor needs L >= 0, S >= 0, J > 0");
  const int lo = std::abs(l.twice() - spin.twice());
  const int hi = l.twice() + spin.twice();
  if (total_j.twice() < lo || total_j.twice() > hi || (total_j.twice() - lo) % 2 != 0)
    throw DomainError("J is not a valid coupling of L and S");
  const Rational j = total_j.rational();
  const Rational s = spin.rational();
  const Rational ll = l.rational();
  return Rational(1) + (j * (j + 1) + s * (s + 1) - ll * (ll + 1)) / (2 * j * (j + 1));
}

Rational lande_g(Manifold m) { return lande_g(orbital_of(m), kHalf, total_j_of(m)); }

double zeeman_shift(const AtomicLevel& level, const ZeemanField& field) {
  const Rational factor = -level.mj.rational() * lande_g(level.manifold);
  return boost::rational_cast<double>(factor) * field.bohr_frequency_mhz();
}

namespace {

std::int64_t factorial(int n) {
  std::int64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Racah's closed form, all angular momenta passed as twice their value.
// Returns (squared magnitude, sign).
std::pair<Rational, int> racah_cg(int j1, int m1, int j2, int m2, int J, int M) {
  const Rational zero(0);
  if (m1 + m2 != M) return {zero, 0};
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(M) > J) return {zero, 0};
  if ((j1 - m1) % 2 || (j2 - m2) % 2 || (J - M) % 2) return {zero, 0};
  if (J < std::abs(j1 - j2) || J > j1 + j2 || (j1 + j2 - J) % 2) return {zero, 0};

  auto f = [](int twice_arg) { return factorial(twice_arg / 2); };

  Rational prefactor(static_cast<std::int64_t>(J + 1) * f(J + j1 - j2) * f(J - j1 + j2) * f(j1 + j2 - J),
                     f(j1 + j2 + J + 2));
  prefactor *= Rational(f(J + M) * f(J - M) * f(j1 - m1) * f(j1 + m1) * f(j2 - m2) * f(j2 + m2));

  Rational sum(0);
  for (int k = 0;; ++k) {
    const int a = (j1 + j2 - J) / 2 - k;
    const int b = (j1 - m1) / 2 - k;
    const int c = (j2 + m2) / 2 - k;
    const int d = (J - j2 + m1) / 2 + k;
    const int e = (J - j1 - m2) / 2 + k;
    if (a < 0 || b < 0 || c < 0) break;
    if (d < 0 || e < 0) continue;
    const Rational term(k % 2 ? -1 : 1,
                        factorial(k) * factorial(a) * factorial(b) * factorial(c) *
                            factorial(d) * factorial(e));
    sum += term;
  }
  if (sum == zero) return {zero, 0};
  return {prefactor * sum * sum, sum > zero ? 1 : -1};
}

}  // namespace

Rational cg_squared(HalfInt j1, HalfInt m1, int q, HalfInt j2, HalfInt m2) {
  if (std::abs(q) > 1) return Rational(0);
  return racah_cg(j1.twice(), m1.twice(), 2, 2 * q, j2.twice(), m2.twice()).first;
}

double cg_amplitude(HalfInt j1, HalfInt m1, int q, HalfInt j2, HalfInt m2) {
  if (std::abs(q) > 1) return 0.0;
  const auto [sq, sign] = racah_cg(j1.twice(), m1.twice(), 2, 2 * q, j2.twice(), m2.twice());
  return sign * std::sqrt(boost::rational_cast<double>(sq));
}

int spherical_index(Polarization p) {
  switch (p) {
    case Polarization::pi: return 0;
    case Polarization::sigma_plus: return 1;
    case Polarization::sigma_minus: return -1;
  }
  return 0;
}

Polarization polarization_from_index(int q) {
  if (q == 0) return Polarization::pi;
  if (q == 1) return Polarization::sigma_plus;
  if (q == -1) return Polarization::sigma_minus;
  throw DomainError("polarization index must be in {-1, 0, 1}");
}

const char* polarization_name(Polarization p) {
  switch (p) {
    case Polarization::pi: return "pi";
    case Polarization::sigma_plus: return "sigma+";
    case Polarization::sigma_minus: return "sigma-";
  }
  return "?";
}

const char* drive_config_name(DriveConfig c) { return c == DriveConfig::pi ? "pi" : "sigma"; }

const char* cavity_polarization_name(CavityPolarization p) {
  return p == CavityPolarization::H ? "H" : "V";
}

namespace {

std::array<RamanLine, 12> build_table() {
  std::array<RamanLine, 12> table{};
  const Rational g_s = lande_g(Manifold::S12);
  const Rational g_d = lande_g(Manifold::D32);
  char label = 'A';
  std::size_t i = 0;
  for (const DriveConfig config : {DriveConfig::pi, DriveConfig::sigma}) {
    for (const HalfInt m_s : {kHalf, -kHalf}) {
      const HalfInt m_p = config == DriveConfig::pi ? m_s : -m_s;
      const int drive_q = (m_p - m_s).twice() / 2;
      const Rational drive = cg_squared(kHalf, m_s, drive_q, kHalf, m_p);
      for (int dq = -1; dq <= 1; ++dq) {
        const HalfInt m_d = m_p + HalfInt::integer(dq);
        RamanLine& line = table[i++];
        line.label = label++;
        line.initial = {Manifold::S12, m_s};
        line.intermediate = {Manifold::P12, m_p};
        line.final = {Manifold::D32, m_d};
        line.shift_factor = m_d.rational() * g_d - m_s.rational() * g_s;
        // Stokes leg normalised as a P -> D emission branch, so that the
        // lines from one S sublevel exhaust unit strength.
        const Rational stokes = cg_squared(kThreeHalves, m_d, -dq, kHalf, m_p);
        line.strength = drive * stokes;
        line.stokes_polarization = polarization_from_index(dq);
      }
    }
  }
  return table;
}

}  // namespace

const std::array<RamanLine, 12>& raman_table() {
  static const std::array<RamanLine, 12> table = build_table();
  return table;
}

const RamanLine& raman_line(char label) {
  for (const auto& line : raman_table())
    if (line.label == label) return line;
  throw DomainError(std::string("no Raman line labelled '") + label + "'");
}

std::vector<PositionedLine> raman_lines(const ZeemanField& field) {
  std::vector<PositionedLine> out;
  out.reserve(12);
  for (const auto& line : raman_table())
    out.push_back({line, boost::rational_cast<double>(line.shift_factor) * field.bohr_frequency_mhz()});
  return out;
}

double two_photon_resonance_mhz(const RamanLine& line, const ZeemanField& field) {
  return zeeman_shift(line.final, field) - zeeman_shift(line.initial, field);
}

std::vector<EffectiveLine> effective_lines(DriveConfig config, const ZeemanField& field) {
  std::vector<EffectiveLine> out;
  const std::size_t first = config == DriveConfig::pi ? 0 : 6;
  const Rational drive_projection = config == DriveConfig::pi ? Rational(1) : Rational(1, 2);
  for (std::size_t i = first; i < first + 6; ++i) {
    const RamanLine& line = raman_table()[i];
    const bool pi_stokes = line.stokes_polarization == Polarization::pi;
    EffectiveLine e;
    e.line = line;
    e.drive_config = config;
    e.cavity_polarization = pi_stokes ? CavityPolarization::H : CavityPolarization::V;
    e.effective_strength = line.strength * drive_projection * (pi_stokes ? Rational(1) : Rational(1, 2));
    e.position_mhz = boost::rational_cast<double>(line.shift_factor) * field.bohr_frequency_mhz();
    out.push_back(e);
  }
  return out;
}

std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace ioncav
