#pragma once

// Classical sawtooth map in rescaled variables (P = T p, K = k T):
//   P' = P + K (theta - pi),  theta' = theta + P'  (mod 2 pi)

#include <cstdint>
#include <functional>
#include <vector>

namespace sawchan::classical {

struct Particle {
  double theta = 0.0;
  double P = 0.0;
};

enum class Topology {
  Torus,    // P wrapped to [-pi, pi)
  Cylinder, // P unbounded
};

struct ClassicalEnsemble {
  std::vector<double> theta;
  std::vector<double> P;
  double K = 0.0;
  Topology topology = Topology::Torus;
  std::uint64_t seed = 0;

  std::size_t size() const { return theta.size(); }
};

/// theta uniform on [0, 2 pi), P = P0 for every particle.
ClassicalEnsemble make_ensemble(std::size_t particles, double K, double P0, std::uint64_t seed,
                                Topology topology = Topology::Torus);

double wrap_angle(double theta);    // to [0, 2 pi)
double wrap_momentum(double P);     // to [-pi, pi)

/// One map iteration for a single particle.
Particle step(Particle p, double K, Topology topology = Topology::Torus);
ClassicalEnsemble step(ClassicalEnsemble ensemble);
void step_in_place(ClassicalEnsemble& ensemble);

using Observable = std::function<double(double theta, double P)>;

/// G(theta) = (theta - pi)^2, the coupling observable of the kicked interaction.
double quadratic_observable(double theta, double P);

struct Autocorrelation {
  std::vector<double> C;          // C(L), L = 0..L_max
  std::vector<double> normalized; // C(L) / C(0)
};

/// C(L) = |<G(L) G(0)> - <G(L)><G(0)>| with G(0) taken from the initial
/// ensemble. The ensemble is copied; the argument is not advanced.
Autocorrelation autocorrelation(const ClassicalEnsemble& ensemble, int L_max,
                                const Observable& G = quadratic_observable);

/// Least-squares slope of <(P_t - P_0)^2> against t = 1..steps on the
/// cylinder. Requires steps >= 10.
double diffusion_coefficient(double K, int steps, std::size_t particles, std::uint64_t seed,
                             double P0 = 0.0);

} // namespace sawchan::classical
