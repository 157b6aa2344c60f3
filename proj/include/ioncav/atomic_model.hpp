#pragma once

// Level structure of 40Ca+ restricted to S1/2, P1/2 and D3/2, Zeeman shifts,
// Clebsch-Gordan coefficients and the vacuum-stimulated Raman line tables.

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace ioncav {

using Rational = boost::rational<std::int64_t>;

/// Thrown for arguments outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Integer or half-integer quantum number, stored as twice its value.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  static constexpr HalfInt from_twice(int twice) { return HalfInt(twice); }
  static constexpr HalfInt integer(int value) { return HalfInt(2 * value); }

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  Rational rational() const { return Rational(twice_, 2); }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  constexpr HalfInt operator-() const { return HalfInt(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return HalfInt(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return HalfInt(twice_ - o.twice_); }
  constexpr auto operator<=>(const HalfInt&) const = default;

  std::string str() const;

 private:
  constexpr explicit HalfInt(int twice) : twice_(twice) {}
  int twice_ = 0;
};

constexpr HalfInt kHalf = HalfInt::from_twice(1);
constexpr HalfInt kThreeHalves = HalfInt::from_twice(3);

enum class Manifold { S12, P12, D32 };

int orbital_of(Manifold m);
HalfInt total_j_of(Manifold m);
const char* manifold_name(Manifold m);

struct AtomicLevel {
  Manifold manifold = Manifold::S12;
  HalfInt mj = kHalf;

  int orbital() const { return orbital_of(manifold); }
  HalfInt j() const { return total_j_of(manifold); }
  std::string name() const;

  bool operator==(const AtomicLevel&) const = default;
};

/// Number of electronic sublevels in the model.
constexpr int kAtomDim = 8;

/// All sublevels in basis order: S(-1/2,+1/2), P(-1/2,+1/2), D(-3/2..+3/2).
const std::array<AtomicLevel, kAtomDim>& all_levels();

/// Basis index of a sublevel; throws DomainError for |mJ| > J or parity mismatch.
int level_index(const AtomicLevel& level);

/// Magnetic field along the quantization axis.
class ZeemanField {
 public:
  /// Bohr magneton over Planck constant in MHz/mT.
  static constexpr double kBohrMhzPerMillitesla = 13.996;

  explicit ZeemanField(double b_millitesla = 0.0);

  double millitesla() const { return b_mt_; }
  /// mu_B * B / h in MHz.
  double bohr_frequency_mhz() const { return kBohrMhzPerMillitesla * b_mt_; }

 private:
  double b_mt_;
};

/// Lande g-factor with g_s = 2.
Rational lande_g(int orbital, HalfInt spin, HalfInt total_j);

/// g-factor of a manifold of the ion (electron spin 1/2).
Rational lande_g(Manifold m);

/// Linear Zeeman shift in MHz, -mJ g mu_B B / h.
double zeeman_shift(const AtomicLevel& level, const ZeemanField& field);

/// Exact square of <j1 m1; 1 q | j2 m2> (Condon-Shortley phase); 0 when
/// the projections are inconsistent or out of range.
Rational cg_squared(HalfInt j1, HalfInt m1, int q, HalfInt j2, HalfInt m2);

/// <j1 m1; 1 q | j2 m2> with the Condon-Shortley phase convention.
double cg_amplitude(HalfInt j1, HalfInt m1, int q, HalfInt j2, HalfInt m2);

enum class Polarization { pi, sigma_plus, sigma_minus };

int spherical_index(Polarization p);
Polarization polarization_from_index(int q);
const char* polarization_name(Polarization p);

enum class DriveConfig { pi, sigma };
enum class CavityPolarization { H, V };

const char* drive_config_name(DriveConfig c);
const char* cavity_polarization_name(CavityPolarization p);

struct RamanLine {
  char label = 'A';
  AtomicLevel initial;
  AtomicLevel intermediate;
  AtomicLevel final;
  /// Line position in units of mu_B B / h, (m_D g_D - m_S g_S).
  Rational shift_factor;
  Rational strength;
  /// q = m_D - m_P of the Stokes leg.
  Polarization stokes_polarization = Polarization::pi;
};

/// The twelve S1/2 -> P1/2 -> D3/2 Raman lines A..L, built from the level
/// structure and CG coefficients.
const std::array<RamanLine, 12>& raman_table();

const RamanLine& raman_line(char label);

struct PositionedLine {
  RamanLine line;
  double position_mhz = 0.0;
};

std::vector<PositionedLine> raman_lines(const ZeemanField& field);

/// Two-photon detuning (drive minus cavity) at which |S,m_S>|0> and
/// |D,m_D>|1> are degenerate in the model Hamiltonian.
double two_photon_resonance_mhz(const RamanLine& line, const ZeemanField& field);

struct EffectiveLine {
  RamanLine line;
  DriveConfig drive_config = DriveConfig::pi;
  Rational effective_strength;
  CavityPolarization cavity_polarization = CavityPolarization::H;
  double position_mhz = 0.0;
};

/// Lines reachable in a drive configuration with drive and cavity field
/// projections applied.
std::vector<EffectiveLine> effective_lines(DriveConfig config, const ZeemanField& field);

std::string to_string(const Rational& r);

}  // namespace ioncav
