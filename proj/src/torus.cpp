#include "sawchan/torus.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

#include <fftw3.h>

namespace sawchan {
namespace {

constexpr long double kTwoPiL = 2.0L * std::numbers::pi_v<long double>;

cplx unit_phase(long double angle) {
  long double reduced = std::fmod(angle, kTwoPiL);
  return std::polar(1.0, static_cast<double>(reduced));
}

long double planck(const TorusSpec& spec) {
  return kTwoPiL / static_cast<long double>(spec.N);
}

void require_same_spec(const EnvState& a, const EnvState& b) {
  if (a.spec.N != b.spec.N || a.amplitudes.size() != b.amplitudes.size()) {
    throw ValidationError("state dimension mismatch: " + std::to_string(a.amplitudes.size()) +
                          " vs " + std::to_string(b.amplitudes.size()));
  }
}

// Slot i holds n = i - N/2, so the plain DFT carries exp(2 pi i m (N/2) / N);
// (-1)^m for even N. Includes the 1/sqrt(N) normalization.
std::vector<cplx> slot_offset_phases(const TorusSpec& spec) {
  const long double scale = 1.0L / std::sqrt(static_cast<long double>(spec.N));
  std::vector<cplx> out(spec.N);
  for (int m = 0; m < spec.N; ++m) {
    const long double angle = kTwoPiL * static_cast<long double>((static_cast<long long>(m) * (spec.N / 2)) % spec.N) /
                              static_cast<long double>(spec.N);
    out[m] = std::polar(static_cast<double>(scale), static_cast<double>(angle));
  }
  return out;
}

} // namespace

TorusSpec make_spec(int N, double phi0, double theta0) {
  if (N < 2) {
    throw ValidationError("torus dimension N must be >= 2, got " + std::to_string(N));
  }
  TorusSpec spec;
  spec.N = N;
  spec.T = 2.0 * std::numbers::pi / N;
  spec.phi0 = phi0;
  spec.theta0 = theta0;
  return spec;
}

EnvState momentum_eigenstate(const TorusSpec& spec, int index) {
  if (index < spec.min_index() || index > spec.max_index()) {
    throw ValidationError("momentum index " + std::to_string(index) + " outside [" +
                          std::to_string(spec.min_index()) + ", " +
                          std::to_string(spec.max_index()) + "]");
  }
  EnvState s{spec, CVector::Zero(spec.N)};
  s.amplitudes[index + spec.N / 2] = 1.0;
  return s;
}

EnvState haar_random_state(const TorusSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  EnvState s{spec, CVector(spec.N)};
  for (int i = 0; i < spec.N; ++i) {
    double re = gauss(rng);
    double im = gauss(rng);
    s.amplitudes[i] = cplx(re, im);
  }
  s.amplitudes /= s.amplitudes.norm();
  return s;
}

namespace detail {

std::vector<cplx> kinetic_phases(const TorusSpec& spec) {
  // exp(-i (P_n + T phi0)^2 / (2T)) = exp(-i T (n + phi0)^2 / 2)
  const long double t = planck(spec);
  std::vector<cplx> out(spec.N);
  for (int i = 0; i < spec.N; ++i) {
    long double n = static_cast<long double>(i - spec.N / 2) + spec.phi0;
    out[i] = unit_phase(-t * n * n / 2.0L);
  }
  return out;
}

std::vector<cplx> kick_phases(const TorusSpec& spec, KickCoefficient coeff) {
  // exp(+i c (theta_m + T theta0 - pi)^2 / 2)
  const long double t = planck(spec);
  const long double pi = std::numbers::pi_v<long double>;
  std::vector<cplx> out(spec.N);
  for (int m = 0; m < spec.N; ++m) {
    long double x = t * m + t * spec.theta0 - pi;
    out[m] = unit_phase(static_cast<long double>(coeff.value) * x * x / 2.0L);
  }
  return out;
}

std::vector<cplx> sinp_phases(const TorusSpec& spec, double strength, int s) {
  const long double t = planck(spec);
  std::vector<cplx> out(spec.N);
  for (int i = 0; i < spec.N; ++i) {
    long double p = static_cast<long double>(i - spec.N / 2);
    out[i] = unit_phase(static_cast<long double>(s) * strength * t * std::sin(p));
  }
  return out;
}

namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
} // namespace

SpectralPlan::SpectralPlan(int n) : n_(n) {
  std::vector<fftw_complex> scratch(static_cast<std::size_t>(n));
  forward_ = fftw_plan_dft_1d(n, scratch.data(), scratch.data(), FFTW_FORWARD,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  backward_ = fftw_plan_dft_1d(n, scratch.data(), scratch.data(), FFTW_BACKWARD,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (forward_ == nullptr || backward_ == nullptr) {
    throw ResourceError("FFTW plan creation failed for N=" + std::to_string(n));
  }
}

SpectralPlan::~SpectralPlan() {
  std::lock_guard lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_));
  fftw_destroy_plan(static_cast<fftw_plan>(backward_));
}

std::shared_ptr<const SpectralPlan> SpectralPlan::get(int n) {
  // FFTW planning is not thread-safe; execution on distinct arrays is.
  std::lock_guard lock(plan_mutex());
  static std::map<int, std::shared_ptr<const SpectralPlan>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::shared_ptr<const SpectralPlan> plan(new SpectralPlan(n));
  cache.emplace(n, plan);
  return plan;
}

void SpectralPlan::to_angle_unscaled(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(backward_), p, p);
}

void SpectralPlan::to_momentum_unscaled(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(forward_), p, p);
}

} // namespace detail

FloquetOperator::FloquetOperator(const TorusSpec& spec, KickCoefficient kick,
                                 double sinp_strength, int sinp_sign)
    : spec_(spec),
      kick_phase_(detail::kick_phases(spec, kick)),
      momentum_phase_(detail::kinetic_phases(spec)),
      plan_(detail::SpectralPlan::get(spec.N)) {
  const double inv_n = 1.0 / spec.N;
  for (auto& k : kick_phase_) k *= inv_n;
  if (sinp_strength != 0.0) {
    auto coupling = detail::sinp_phases(spec, sinp_strength, sinp_sign);
    for (int i = 0; i < spec.N; ++i) momentum_phase_[i] *= coupling[i];
  }
}

void FloquetOperator::apply(std::span<cplx> amplitudes) const {
  // The slot offset phases of the momentum/angle map cancel around a
  // diagonal kick, so they are never applied here.
  const std::size_t n = kick_phase_.size();
  plan_->to_angle_unscaled(amplitudes.data());
  for (std::size_t m = 0; m < n; ++m) amplitudes[m] *= kick_phase_[m];
  plan_->to_momentum_unscaled(amplitudes.data());
  for (std::size_t i = 0; i < n; ++i) amplitudes[i] *= momentum_phase_[i];
}

void FloquetOperator::apply_columns(CMatrix& block) const {
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    apply(std::span<cplx>(block.col(c).data(), static_cast<std::size_t>(block.rows())));
  }
}

EnvState apply_kinetic(const EnvState& state) {
  EnvState out = state;
  auto phases = detail::kinetic_phases(state.spec);
  for (int i = 0; i < state.spec.N; ++i) out.amplitudes[i] *= phases[i];
  return out;
}

CVector to_angle_basis(const EnvState& state) {
  const int n = state.spec.N;
  CVector psi = state.amplitudes;
  detail::SpectralPlan::get(n)->to_angle_unscaled(psi.data());
  const auto offset = slot_offset_phases(state.spec);
  for (int m = 0; m < n; ++m) psi[m] *= std::conj(offset[m]);
  return psi;
}

EnvState from_angle_basis(const TorusSpec& spec, const CVector& angle_amplitudes) {
  if (angle_amplitudes.size() != spec.N) {
    throw ValidationError("angle amplitudes length does not match N");
  }
  const auto offset = slot_offset_phases(spec);
  EnvState out{spec, angle_amplitudes};
  for (int m = 0; m < spec.N; ++m) out.amplitudes[m] *= offset[m];
  detail::SpectralPlan::get(spec.N)->to_momentum_unscaled(out.amplitudes.data());
  return out;
}

EnvState apply_kick(const EnvState& state, KickCoefficient coeff) {
  auto plan = detail::SpectralPlan::get(state.spec.N);
  auto phases = detail::kick_phases(state.spec, coeff);
  EnvState out = state;
  plan->to_angle_unscaled(out.amplitudes.data());
  const double inv_n = 1.0 / state.spec.N;
  for (int m = 0; m < state.spec.N; ++m) out.amplitudes[m] *= phases[m] * inv_n;
  plan->to_momentum_unscaled(out.amplitudes.data());
  return out;
}

EnvState floquet_step(const EnvState& state, double k_eff) {
  FloquetOperator op(state.spec, KickCoefficient::from_k_eff(k_eff, state.spec));
  EnvState out = state;
  op.apply(out.amplitudes);
  return out;
}

EnvState apply_momentum_coupling_phase(const EnvState& state, double strength, int s) {
  if (s != 1 && s != -1) throw ValidationError("coupling sign must be +1 or -1");
  EnvState out = state;
  auto phases = detail::sinp_phases(state.spec, strength, s);
  for (int i = 0; i < state.spec.N; ++i) out.amplitudes[i] *= phases[i];
  return out;
}

cplx overlap(const EnvState& a, const EnvState& b) {
  require_same_spec(a, b);
  return a.amplitudes.dot(b.amplitudes); // Eigen's dot conjugates the left operand
}

} // namespace sawchan
