#include "sawchan/classical.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "sawchan/errors.hpp"
#include "sawchan/stats.hpp"

namespace sawchan::classical {
namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
} // namespace

double wrap_angle(double theta) {
  double w = std::fmod(theta, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0; // fmod rounding at the upper edge
  return w;
}

double wrap_momentum(double P) {
  if (P >= -kPi && P < kPi) return P;
  return wrap_angle(P + kPi) - kPi;
}

ClassicalEnsemble make_ensemble(std::size_t particles, double K, double P0, std::uint64_t seed,
                                Topology topology) {
  ClassicalEnsemble e;
  e.K = K;
  e.topology = topology;
  e.seed = seed;
  e.theta.resize(particles);
  e.P.assign(particles, topology == Topology::Torus ? wrap_momentum(P0) : P0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
  for (auto& t : e.theta) t = uniform(rng);
  return e;
}

Particle step(Particle p, double K, Topology topology) {
  double P = p.P + K * (p.theta - kPi);
  if (topology == Topology::Torus) P = wrap_momentum(P);
  return Particle{wrap_angle(p.theta + P), P};
}

void step_in_place(ClassicalEnsemble& e) {
  for (std::size_t i = 0; i < e.size(); ++i) {
    Particle p = step(Particle{e.theta[i], e.P[i]}, e.K, e.topology);
    e.theta[i] = p.theta;
    e.P[i] = p.P;
  }
}

ClassicalEnsemble step(ClassicalEnsemble ensemble) {
  step_in_place(ensemble);
  return ensemble;
}

double quadratic_observable(double theta, double /*P*/) { return (theta - kPi) * (theta - kPi); }

Autocorrelation autocorrelation(const ClassicalEnsemble& ensemble, int L_max, const Observable& G) {
  if (ensemble.size() == 0) throw ValidationError("autocorrelation of an empty ensemble");
  if (L_max < 0) throw ValidationError("L_max must be >= 0");
  const auto n = static_cast<double>(ensemble.size());

  std::vector<double> g0(ensemble.size());
  double mean0 = 0.0;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    g0[i] = G(ensemble.theta[i], ensemble.P[i]);
    mean0 += g0[i];
  }
  mean0 /= n;

  Autocorrelation out;
  ClassicalEnsemble e = ensemble;
  for (int L = 0; L <= L_max; ++L) {
    if (L > 0) step_in_place(e);
    double mean_l = 0.0;
    double cross = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      const double gl = G(e.theta[i], e.P[i]);
      mean_l += gl;
      cross += gl * g0[i];
    }
    out.C.push_back(std::abs(cross / n - (mean_l / n) * mean0));
  }
  const double c0 = out.C.front();
  for (double c : out.C) out.normalized.push_back(c0 > 0.0 ? c / c0 : 0.0);
  return out;
}

double diffusion_coefficient(double K, int steps, std::size_t particles, std::uint64_t seed, double P0) {
  if (steps < 10) throw ValidationError("diffusion regression needs at least 10 steps");
  if (particles == 0) throw ValidationError("diffusion needs a non-empty ensemble");
  ClassicalEnsemble e = make_ensemble(particles, K, P0, seed, Topology::Cylinder);
  std::vector<double> t, spread;
  for (int s = 1; s <= steps; ++s) {
    step_in_place(e);
    double acc = 0.0;
    for (double P : e.P) acc += (P - P0) * (P - P0);
    t.push_back(s);
    spread.push_back(acc / static_cast<double>(particles));
  }
  return linear_fit(t, spread).slope;
}

} // namespace sawchan::classical
