#include "ioncav/dynamics.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/UmfPackSupport>
#include <boost/numeric/odeint.hpp>
#include <boost/numeric/odeint/external/eigen/eigen.hpp>

namespace ioncav {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_non_negative(double v, const char* name) {
  if (!(v >= 0.0)) throw DomainError(std::string(name) + " must be non-negative");
}

void require_fraction(double v, const char* name) {
  if (!(v > 0.0 && v <= 1.0)) throw DomainError(std::string(name) + " must lie in (0, 1]");
}

// Spherical components e_q of the polarization vector of a linearly
// polarized field perpendicular to the quantization axis.
constexpr double kInvSqrt2 = 0.70710678118654752440;
double perpendicular_component(int q) { return q == 1 ? -kInvSqrt2 : q == -1 ? kInvSqrt2 : 0.0; }

using Triplets = std::vector<Eigen::Triplet<Complex>>;

// Adds coeff * |to><from| (tensor identity on the cavity) to the triplet list.
void add_transfer(Triplets& t, const HilbertSpace& space, const AtomicLevel& from, const AtomicLevel& to,
                  Complex coeff) {
  const int block = space.total_dim() / kAtomDim;
  const int f = level_index(from);
  const int g = level_index(to);
  for (int k = 0; k < block; ++k) t.emplace_back(g * block + k, f * block + k, coeff);
}

SparseMatrix from_triplets(const HilbertSpace& space, const Triplets& t) {
  SparseMatrix m(space.total_dim(), space.total_dim());
  m.setFromTriplets(t.begin(), t.end());
  return finalized(std::move(m));
}

}  // namespace

void ModelParams::validate() const {
  require_non_negative(omega1_mhz, "omega1");
  require_non_negative(omega2_mhz, "omega2");
  require_non_negative(g_max_mhz, "g_max");
  require_non_negative(g_obs_mhz, "g_obs");
  require_non_negative(kappa_mhz, "kappa");
  require_non_negative(gamma1_mhz, "gamma1");
  require_non_negative(gamma2_mhz, "gamma2");
  require_non_negative(b_field_mt, "b_field");
  require_non_negative(linewidth_drive_mhz, "linewidth_drive");
  require_non_negative(linewidth_repump_mhz, "linewidth_repump");
  require_non_negative(linewidth_cavity_mhz, "linewidth_cavity");
  if (!std::isfinite(delta1_mhz) || !std::isfinite(delta2_mhz) || !std::isfinite(delta_c_mhz))
    throw DomainError("detunings must be finite");
  if (n_max < 1) throw DomainError("n_max must be at least 1");
  if (g_obs_mhz > g_max_mhz) throw DomainError("g_obs must not exceed g_max");
}

void DetectionChain::validate() const {
  require_fraction(cavity_output_coupling, "cavity_output_coupling");
  require_fraction(fiber, "fiber");
  require_fraction(filter_path, "filter_path");
  require_fraction(detector_qe, "detector_qe");
  require_non_negative(background_cps, "background_cps");
}

HilbertSpace model_space(const ModelParams& params) {
  return HilbertSpace({params.n_max, params.n_max});
}

SparseMatrix build_hamiltonian(const ModelParams& p, const HilbertSpace& space) {
  p.validate();
  if (space.mode_count() != 2) throw DomainError("model needs exactly two cavity modes (H, V)");
  const ZeemanField field(p.b_field_mt);
  const int block = space.total_dim() / kAtomDim;
  Triplets t;

  // Diagonal: manifold detunings, Zeeman shifts, photon energies.
  for (const auto& level : all_levels()) {
    double energy = zeeman_shift(level, field);
    if (level.manifold == Manifold::P12) energy += -p.delta1_mhz;
    if (level.manifold == Manifold::D32) energy += p.delta2_mhz - p.delta1_mhz;
    const int a = level_index(level);
    for (int k = 0; k < block; ++k) {
      const int idx = a * block + k;
      const int photons = space.occupation_of(idx, kModeH) + space.occupation_of(idx, kModeV);
      const double e = energy + photons * (p.delta_c_mhz - p.delta2_mhz);
      if (e != 0.0) t.emplace_back(idx, idx, kTwoPi * e);
    }
  }

  auto add_hermitian_pair = [&](const AtomicLevel& lower, const AtomicLevel& upper, double amp) {
    if (amp == 0.0) return;
    add_transfer(t, space, lower, upper, amp);
    add_transfer(t, space, upper, lower, amp);
  };

  // Drive S <-> P.
  const double drive = kTwoPi * p.omega1_mhz / 2.0;
  for (const auto& s : all_levels()) {
    if (s.manifold != Manifold::S12) continue;
    for (int q = -1; q <= 1; ++q) {
      const double e_q = p.drive_config == DriveConfig::pi ? (q == 0 ? 1.0 : 0.0) : perpendicular_component(q);
      const AtomicLevel pl{Manifold::P12, s.mj + HalfInt::integer(q)};
      if (std::abs(pl.mj.twice()) > 1 || e_q == 0.0) continue;
      add_hermitian_pair(s, pl, drive * e_q * cg_amplitude(kHalf, s.mj, q, kHalf, pl.mj));
    }
  }

  // Repump D <-> P, sigma+/sigma- from a field perpendicular to B.
  const double repump = kTwoPi * p.omega2_mhz / 2.0;
  for (const auto& d : all_levels()) {
    if (d.manifold != Manifold::D32) continue;
    for (int q : {-1, 1}) {
      const AtomicLevel pl{Manifold::P12, d.mj + HalfInt::integer(q)};
      if (std::abs(pl.mj.twice()) > 1) continue;
      add_hermitian_pair(d, pl, repump * perpendicular_component(q) * cg_amplitude(kThreeHalves, d.mj, q, kHalf, pl.mj));
    }
  }

  // Cavity: g a_m^dag |D><P| + h.c.; pi photons into H, sigma photons into V.
  const double g = kTwoPi * p.g_obs_mhz;
  if (g != 0.0) {
    const SparseMatrix a_h = mode_annihilation(space, kModeH);
    const SparseMatrix a_v = mode_annihilation(space, kModeV);
    SparseMatrix coupling(space.total_dim(), space.total_dim());
    for (const auto& d : all_levels()) {
      if (d.manifold != Manifold::D32) continue;
      for (int q = -1; q <= 1; ++q) {
        const AtomicLevel pl{Manifold::P12, d.mj + HalfInt::integer(q)};
        if (std::abs(pl.mj.twice()) > 1) continue;
        const double amp = g * cg_amplitude(kThreeHalves, d.mj, q, kHalf, pl.mj) *
                           (q == 0 ? 1.0 : perpendicular_component(q));
        const SparseMatrix& a = q == 0 ? a_h : a_v;
        coupling += SparseMatrix(amp * (SparseMatrix(a.adjoint()) * atomic_transfer(pl, d, space)));
      }
    }
    const SparseMatrix h_atom = from_triplets(space, t);
    return finalized(h_atom + coupling + SparseMatrix(coupling.adjoint()));
  }
  return from_triplets(space, t);
}

std::vector<SparseMatrix> build_collapse_ops(const ModelParams& p, const HilbertSpace& space) {
  p.validate();
  std::vector<SparseMatrix> ops;

  auto emission = [&](Manifold lower, double half_rate) {
    if (half_rate == 0.0) return;
    const double amp = std::sqrt(2.0 * kTwoPi * half_rate);
    const HalfInt j = total_j_of(lower);
    for (int q = -1; q <= 1; ++q) {
      Triplets t;
      for (const auto& low : all_levels()) {
        if (low.manifold != lower) continue;
        const AtomicLevel up{Manifold::P12, low.mj + HalfInt::integer(q)};
        if (std::abs(up.mj.twice()) > 1) continue;
        const double c = cg_amplitude(j, low.mj, q, kHalf, up.mj);
        if (c != 0.0) add_transfer(t, space, up, low, amp * c);
      }
      if (!t.empty()) ops.push_back(from_triplets(space, t));
    }
  };
  emission(Manifold::S12, p.gamma1_mhz);
  emission(Manifold::D32, p.gamma2_mhz);

  if (p.kappa_mhz > 0.0) {
    const double amp = std::sqrt(2.0 * kTwoPi * p.kappa_mhz);
    for (int mode = 0; mode < space.mode_count(); ++mode)
      ops.push_back(finalized(amp * mode_annihilation(space, mode)));
  }

  if (p.linewidth_drive_mhz > 0.0)
    ops.push_back(finalized(std::sqrt(2.0 * kTwoPi * p.linewidth_drive_mhz) * manifold_projector(Manifold::S12, space)));
  if (p.linewidth_repump_mhz > 0.0)
    ops.push_back(finalized(std::sqrt(2.0 * kTwoPi * p.linewidth_repump_mhz) * manifold_projector(Manifold::D32, space)));
  if (p.linewidth_cavity_mhz > 0.0) {
    SparseMatrix n(space.total_dim(), space.total_dim());
    for (int mode = 0; mode < space.mode_count(); ++mode) {
      const SparseMatrix a = mode_annihilation(space, mode);
      n += SparseMatrix(SparseMatrix(a.adjoint()) * a);
    }
    ops.push_back(finalized(std::sqrt(2.0 * kTwoPi * p.linewidth_cavity_mhz) * n));
  }
  return ops;
}

SparseMatrix build_liouvillian(const ModelParams& params, const HilbertSpace& space) {
  const auto ops = build_collapse_ops(params, space);
  return liouvillian(build_hamiltonian(params, space), ops);
}

SteadyStateSolution steady_state(const SparseMatrix& l, const SteadyStateOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto n = l.rows();
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (l.cols() != n || static_cast<Eigen::Index>(d) * d != n) throw DomainError("Liouvillian must be d^2 x d^2");

  // Replace the equation for rho_00 with Tr(rho) = 1.
  using ColMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;
  Triplets t;
  t.reserve(static_cast<std::size_t>(l.nonZeros()) + d);
  for (int r = 1; r < l.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(l, r); it; ++it) t.emplace_back(r, static_cast<int>(it.col()), it.value());
  for (int i = 0; i < d; ++i) t.emplace_back(0, i * (d + 1), 1.0);
  ColMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();

  Eigen::UmfPackLU<ColMatrix> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SolverError("steady state: constrained Liouvillian is singular");

  ComplexVector b = ComplexVector::Zero(n);
  b(0) = 1.0;
  ComplexVector x = lu.solve(b);
  x += lu.solve(ComplexVector(b - a * x));
  if (!x.allFinite()) throw SolverError("steady state: solution is not finite");

  // Cheap lower bound on the 1-norm condition number.
  double a_norm = 0.0;
  for (int c = 0; c < a.outerSize(); ++c) {
    double s = 0.0;
    for (ColMatrix::InnerIterator it(a, c); it; ++it) s += std::abs(it.value());
    a_norm = std::max(a_norm, s);
  }
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double growth = 0.0;
  for (int trial = 0; trial < 2; ++trial) {
    ComplexVector r(n);
    for (Eigen::Index i = 0; i < n; ++i) r(i) = Complex(uni(rng), uni(rng));
    const ComplexVector y = lu.solve(r);
    growth = std::max(growth, y.lpNorm<1>() / r.lpNorm<1>());
  }
  const double condition = a_norm * growth;
  if (!(condition <= options.max_condition)) {
    std::ostringstream msg;
    msg << "steady state: constrained Liouvillian is numerically singular (condition estimate " << condition
        << "); the steady state is not unique";
    throw SolverError(msg.str());
  }

  DenseMatrix rho = unvec(x, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();

  SteadyStateSolution sol{DensityMatrix(rho), 0.0, {}, 0.0};
  sol.residual_norm = (l * vec(sol.rho.matrix())).norm();
  if (!(sol.residual_norm < options.tolerance)) {
    std::ostringstream msg;
    msg << "steady state: residual " << sol.residual_norm << " exceeds tolerance " << options.tolerance;
    throw SolverError(msg.str());
  }
  sol.solve_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

SteadyStateSolution solve_model(const ModelParams& params, const SteadyStateOptions& options) {
  const HilbertSpace space = model_space(params);
  SteadyStateSolution sol = steady_state(build_liouvillian(params, space), options);
  for (int mode = 0; mode < space.mode_count(); ++mode)
    sol.top_fock_population.push_back(top_fock_population(sol.rho, space, mode));
  return sol;
}

DensityMatrix evolve(const DensityMatrix& rho0, const SparseMatrix& l, double t_us, const EvolveOptions& options) {
  namespace odeint = boost::numeric::odeint;
  if (!(t_us >= 0.0)) throw DomainError("evolution time must be non-negative");
  const int d = rho0.dim();
  const Eigen::Index n = static_cast<Eigen::Index>(d) * d;
  if (l.rows() != n || l.cols() != n) throw DomainError("Liouvillian dimension does not match the state");
  if (t_us == 0.0) return rho0;

  // Real state vector holding interleaved (re, im) pairs; std::complex is
  // layout compatible with double[2].
  using State = Eigen::VectorXd;
  auto as_complex = [n](State& s) { return Eigen::Map<ComplexVector>(reinterpret_cast<Complex*>(s.data()), n); };
  auto as_complex_const = [n](const State& s) {
    return Eigen::Map<const ComplexVector>(reinterpret_cast<const Complex*>(s.data()), n);
  };

  State x(2 * n);
  as_complex(x) = vec(rho0.matrix());

  auto rhs = [&](const State& s, State& ds, double) { as_complex(ds).noalias() = l * as_complex_const(s); };

  double t_reached = 0.0;
  double last_dt = options.initial_step_us;
  std::size_t steps = 0;
  auto observer = [&](const State&, double t) {
    if (steps > 0) last_dt = t - t_reached;
    t_reached = t;
    ++steps;
    if (steps > 2 && t < t_us && last_dt < options.min_step_us) {
      std::ostringstream msg;
      msg << "evolve: step size underflow (dt = " << last_dt << " us at t = " << t << " us after " << steps
          << " steps)";
      throw SolverError(msg.str());
    }
  };

  try {
    using Stepper = odeint::runge_kutta_dopri5<State, double, State, double, odeint::vector_space_algebra>;
    auto stepper = odeint::make_controlled<Stepper>(options.abs_tolerance, options.rel_tolerance);
    odeint::integrate_adaptive(stepper, rhs, x, 0.0, t_us, options.initial_step_us, observer);
  } catch (const odeint::odeint_error& e) {
    std::ostringstream msg;
    msg << "evolve: integrator failed at t = " << t_reached << " us (last dt = " << last_dt << " us, " << steps
        << " steps): " << e.what();
    throw SolverError(msg.str());
  }

  DenseMatrix rho = unvec(as_complex(x), d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::move(rho));
}

double mean_photon_number(const DensityMatrix& rho, const HilbertSpace& space, int mode) {
  double n = 0.0;
  for (int i = 0; i < space.total_dim(); ++i) n += space.occupation_of(i, mode) * rho.population(i);
  return n;
}

double manifold_population(const DensityMatrix& rho, const HilbertSpace& space, Manifold manifold) {
  double p = 0.0;
  for (int i = 0; i < space.total_dim(); ++i)
    if (all_levels()[space.atom_of(i)].manifold == manifold) p += rho.population(i);
  return p;
}

double top_fock_population(const DensityMatrix& rho, const HilbertSpace& space, int mode) {
  double p = 0.0;
  for (int i = 0; i < space.total_dim(); ++i)
    if (space.occupation_of(i, mode) == space.cutoff(mode)) p += rho.population(i);
  return p;
}

double detected_rate_for_photons(double mean_photons, const ModelParams& params, const DetectionChain& chain) {
  const double kappa_per_s = kTwoPi * params.kappa_mhz * 1e6;
  return 2.0 * kappa_per_s * mean_photons * chain.total() + chain.background_cps;
}

DetectedRates detected_rate(const DensityMatrix& rho, const ModelParams& params, const DetectionChain& chain) {
  const HilbertSpace space = model_space(params);
  if (rho.dim() != space.total_dim()) throw DomainError("state dimension does not match the model");
  DetectedRates r;
  r.h_cps = detected_rate_for_photons(mean_photon_number(rho, space, kModeH), params, chain);
  r.v_cps = detected_rate_for_photons(mean_photon_number(rho, space, kModeV), params, chain);
  r.total_cps = r.h_cps + r.v_cps - chain.background_cps;
  return r;
}

}  // namespace ioncav
