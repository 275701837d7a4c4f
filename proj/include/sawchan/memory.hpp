#pragma once

// Double-blocking forgetfulness test. M blocks, each made of nq_per_block
// qubit passages (dynamics K_transmit) followed by L idle map steps
// (dynamics K_idle). The memoryful output keeps one environment across
// blocks; the memoryless output resets it to omega_0 before every block, so
// its overlaps factorize into per-block products.

#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "sawchan/channel.hpp"
#include "sawchan/torus.hpp"

namespace sawchan::memory {

struct InitialEnvironment {
  enum class Kind { Haar, MomentumEigenstate };
  Kind kind = Kind::Haar;
  std::uint64_t seed = 0; // Haar
  int index = 0;          // momentum eigenstate

  static InitialEnvironment haar(std::uint64_t seed) { return {Kind::Haar, seed, 0}; }
  static InitialEnvironment momentum(int index) { return {Kind::MomentumEigenstate, 0, index}; }
  EnvState make(const TorusSpec& spec) const;
};

struct BlockProtocol {
  TorusSpec spec;
  int nq_per_block = 1;
  int L = 0;
  int M = 2;
  double K_transmit = std::numbers::sqrt2;
  double K_idle = std::numbers::sqrt2;
  double eta = 0.3;
  Coupling coupling = Coupling::KickedQuadratic;
  InitialEnvironment omega0;

  int total_qubits() const { return M * nq_per_block; }
  int input_dimension() const { return 1 << total_qubits(); }
  void validate() const;
};

/// Hyperspherical angles for the magnitudes of a real nonnegative pure input
/// over all M * nq_per_block qubits (3 angles for two qubits). Phases are
/// zero.
struct InputStateParams {
  std::vector<double> angles;

  /// Normalized amplitudes |cos a0|, |sin a0 cos a1|, ...
  CVector amplitudes() const;
  CMatrix density() const;
};

struct BlockGrams {
  GramMatrix with_memory;
  GramMatrix memoryless;
  GramMatrix single_block;
};

BlockGrams block_grams(const BlockProtocol& protocol);

CMatrix block_output_with_memory(const BlockProtocol& protocol, const InputStateParams& params);
CMatrix block_output_memoryless(const BlockProtocol& protocol, const InputStateParams& params);

/// Half the sum of absolute eigenvalues of A - B (both Hermitian).
double trace_distance(const CMatrix& A, const CMatrix& B);

struct OptimizerBudget {
  int starts = 200;            // random samples of the input domain
  int refinements = 8;         // best samples polished by Nelder-Mead
  int max_evaluations = 20000; // across sampling and refinement
  double tolerance = 1e-12;
  std::uint64_t seed = 1;
};

struct TraceDistanceMaximum {
  double value = 0.0;
  InputStateParams argmax;
  /// Largest |change| of the distance under random input phases at the argmax.
  double phase_sensitivity = 0.0;
  int evaluations = 0;
  bool budget_exhausted = false;
};

/// Maximizes trace_distance(memoryful, memoryless) over InputStateParams.
TraceDistanceMaximum maximize_trace_distance(const BlockProtocol& protocol, const OptimizerBudget& budget);
/// Same, with the Gram matrices already computed.
TraceDistanceMaximum maximize_trace_distance(const BlockGrams& grams, int qubits, const OptimizerBudget& budget);

struct ForgetfulnessPoint {
  int L = 0;
  std::vector<double> per_seed; // seed order
  double mean = 0.0;
};

/// Maximum trace distance per L. For Haar omega_0 each seed draws the
/// environment; the optimizer seed is always the run seed.
std::vector<ForgetfulnessPoint> forgetfulness_curve(const BlockProtocol& tmpl, std::span<const int> L_values,
                                                    std::span<const std::uint64_t> seeds,
                                                    const OptimizerBudget& budget, int threads = 1);

} // namespace sawchan::memory
