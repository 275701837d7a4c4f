#pragma once

// Quantum sawtooth map on the torus: state representation, spectral
// transforms between momentum and angle bases, and one-kick propagation.
//
// Grid conventions
//   momentum slot i in [0, N) carries index n = i - N/2 and rescaled
//   momentum P_n = T n, so P lies on [-pi, pi);
//   angle slot m in [0, N) sits at theta_m = 2 pi m / N.
// Both transforms are unitary (1/sqrt(N) each way).

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sawchan/errors.hpp"

namespace sawchan {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kDefaultShift = 0.28284271247461900976; // sqrt(2)/5

struct TorusSpec {
  int N = 0;
  double T = 0.0; // effective Planck constant, 2 pi / N
  double phi0 = kDefaultShift;
  double theta0 = kDefaultShift;

  int min_index() const { return -N / 2; }
  int max_index() const { return N / 2 - 1; }
  double hbar_eff() const { return T; }

  friend bool operator==(const TorusSpec&, const TorusSpec&) = default;
};

/// Builds a torus of dimension N with T = 2 pi / N. Throws ValidationError for N < 2.
TorusSpec make_spec(int N, double phi0 = kDefaultShift, double theta0 = kDefaultShift);

/// Normalized amplitude vector in the momentum eigenbasis.
struct EnvState {
  TorusSpec spec;
  CVector amplitudes;

  double norm_squared() const { return amplitudes.squaredNorm(); }
};

/// Effective coefficient multiplying (theta - pi)^2 / 2 in the kick phase.
/// The bare map uses K / T; a qubit passage with sigma_z eigenvalue s uses
/// (K - eta T s) / T.
struct KickCoefficient {
  double value = 0.0;

  static KickCoefficient from_k_eff(double k_eff, const TorusSpec& spec) {
    return KickCoefficient{k_eff / spec.T};
  }
};

EnvState momentum_eigenstate(const TorusSpec& spec, int index);

/// Independent complex Gaussians, normalized: Haar-uniform on the unit sphere.
EnvState haar_random_state(const TorusSpec& spec, std::uint64_t seed);

EnvState apply_kinetic(const EnvState& state);
EnvState apply_kick(const EnvState& state, KickCoefficient coeff);
/// One sawtooth iteration: kick with K_eff / T, then the kinetic phase.
EnvState floquet_step(const EnvState& state, double k_eff);
/// Multiplies slot n by exp(i s strength T sin(n)), the sin(p) coupling
/// acting for one transit time.
EnvState apply_momentum_coupling_phase(const EnvState& state, double strength, int s);

/// <a|b>
cplx overlap(const EnvState& a, const EnvState& b);

/// Angle-basis amplitudes psi(theta_m) of a momentum-basis state.
CVector to_angle_basis(const EnvState& state);
EnvState from_angle_basis(const TorusSpec& spec, const CVector& angle_amplitudes);

namespace detail {
class SpectralPlan;
}

/// Precomputed diagonal phases for one Floquet step
///   U = D_mom * F * D_kick * F^-1
/// applied in place to momentum-basis amplitudes. D_mom is the kinetic phase,
/// optionally times a sin(p) coupling phase. Immutable after construction,
/// safe to share across threads.
class FloquetOperator {
 public:
  FloquetOperator(const TorusSpec& spec, KickCoefficient kick, double sinp_strength = 0.0,
                  int sinp_sign = +1);

  const TorusSpec& spec() const { return spec_; }

  void apply(std::span<cplx> amplitudes) const;
  void apply(CVector& amplitudes) const { apply(std::span<cplx>(amplitudes.data(), amplitudes.size())); }
  /// Applies to every column of a column-major N x r block.
  void apply_columns(CMatrix& block) const;

 private:
  TorusSpec spec_;
  std::vector<cplx> kick_phase_;    // angle grid, includes the 1/N of the transform pair
  std::vector<cplx> momentum_phase_;
  std::shared_ptr<const detail::SpectralPlan> plan_;
};

namespace detail {

/// Phase tables, reduced modulo 2 pi in extended precision.
std::vector<cplx> kinetic_phases(const TorusSpec& spec);
std::vector<cplx> kick_phases(const TorusSpec& spec, KickCoefficient coeff);
std::vector<cplx> sinp_phases(const TorusSpec& spec, double strength, int s);

/// Unitary FFT pair for dimension N. The backward transform maps
/// momentum slots to angle slots up to the per-slot sign (-1)^m, which the
/// public angle-basis helpers restore.
class SpectralPlan {
 public:
  static std::shared_ptr<const SpectralPlan> get(int N);
  ~SpectralPlan();
  SpectralPlan(const SpectralPlan&) = delete;
  SpectralPlan& operator=(const SpectralPlan&) = delete;

  int size() const { return n_; }
  void to_angle_unscaled(cplx* data) const;
  void to_momentum_unscaled(cplx* data) const;

 private:
  explicit SpectralPlan(int n);
  int n_;
  void* forward_;
  void* backward_;
};

} // namespace detail
} // namespace sawchan
