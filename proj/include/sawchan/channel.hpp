#pragma once

// Dynamical dephasing channel: a train of Nq qubits passes through the
// sawtooth-map environment, each qubit coupled for one map period. Because
// the qubit sigma_z commutes with everything, the joint evolution splits
// into conditional environment propagators U_j, one per bit-string j, and
//   rho'_{jl} = rho_{jl} <omega_l|omega_j>,  |omega_j> = U_j |omega_0>.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sawchan/torus.hpp"

namespace sawchan {

enum class Coupling {
  KickedQuadratic, // eta (theta - pi)^2 / 2, kicked with the map
  ContinuousSinP,  // eta sin(p), on during the whole transit
};

std::string_view to_string(Coupling c);
Coupling parse_coupling(std::string_view text);

struct ChannelConfig {
  TorusSpec spec;
  double K = 0.0;
  double eta = 0.0;
  int n0 = 1; // inter-entry time in map periods
  int nq = 1;
  Coupling coupling = Coupling::KickedQuadratic;

  double transit_time() const { return spec.T; }
  double entry_interval() const { return n0 * spec.T; }
  double total_transit_time() const { return ((nq - 1) * n0 + 1) * spec.T; }

  void validate() const;
};

/// Bit 0 maps to sigma_z eigenvalue +1, bit 1 to -1.
constexpr int eigenvalue_of_bit(int bit) { return bit == 0 ? +1 : -1; }

/// Qubit n (0-based) is bit (nq - 1 - n) of the branch index, so the first
/// qubit is the most significant bit and branch indices follow the usual
/// |j1 j2 ... jNq> tensor ordering.
struct BitString {
  std::vector<std::uint8_t> bits;

  static BitString from_index(std::size_t index, int nq);
  std::size_t index() const;
  int eigenvalue(int qubit) const { return eigenvalue_of_bit(bits.at(static_cast<std::size_t>(qubit))); }
  int size() const { return static_cast<int>(bits.size()); }
};

/// Precomputed Floquet operators for one channel configuration.
class ChannelStepper {
 public:
  explicit ChannelStepper(const ChannelConfig& config);

  /// One qubit passage with sigma_z eigenvalue s.
  void conditional(CVector& v, int s) const { (s > 0 ? plus_ : minus_).apply(v); }
  void conditional_columns(CMatrix& m, int s) const { (s > 0 ? plus_ : minus_).apply_columns(m); }
  /// The n0 - 1 bare map steps between consecutive qubit entries.
  void gap(CVector& v) const;
  void gap_columns(CMatrix& m) const;

 private:
  int gap_steps_;
  FloquetOperator plus_;
  FloquetOperator minus_;
  FloquetOperator bare_;
};

/// Conditional environment states, one per bit-string (index order as BitString).
struct BranchStates {
  EnvState omega0;
  int nq = 0;
  std::vector<CVector> states;

  const CVector& operator[](const BitString& j) const { return states.at(j.index()); }
};

struct GramMatrix {
  CMatrix entries; // G_{jl} = <omega_l|omega_j>
};

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{2} << 30; // 2 GiB

/// Propagates all 2^Nq branches through a binary tree sharing prefixes, so
/// 2 (2^Nq - 1) conditional segments are evaluated. Throws ResourceError when
/// 2^Nq N amplitudes exceed the budget.
BranchStates propagate_branches(const ChannelConfig& config, const EnvState& omega0,
                                std::size_t budget_bytes = kDefaultMemoryBudget);

GramMatrix gram_matrix(const BranchStates& branches);

/// Entropy exchange for the unpolarized input, via whichever of the weighted
/// Gram matrix or the environment density matrix is smaller.
double entropy_exchange(const BranchStates& branches);
double entropy_exchange_gram(const GramMatrix& gram);
double entropy_exchange_density(const BranchStates& branches);

/// S_e for every prefix length 1..config.nq of a single growing train, for
/// the unpolarized input. Uses the environment-side recursion
///   rho_E <- (U_+ rho_E U_+^dag + U_- rho_E U_-^dag) / 2
/// kept as a compressed factor rho_E = V V^dag while its rank is below N/2,
/// dense afterwards. Memory is O(N^2) regardless of Nq.
std::vector<double> entropy_exchange_growth(const ChannelConfig& config, const EnvState& omega0);
/// Same, returning S_e only at the listed train lengths (ascending order of
/// Nq); dense-mode eigensolves are skipped elsewhere.
std::vector<double> entropy_exchange_growth(const ChannelConfig& config, const EnvState& omega0,
                                            std::span<const int> record_at);

struct QubitTrainOutput {
  double entropy_exchange = 0.0;
  double coherent_information = 0.0;
  double rate = 0.0;
  GramMatrix gram;
};

QubitTrainOutput run_qubit_train(const ChannelConfig& config, const EnvState& omega0,
                                 std::size_t budget_bytes = kDefaultMemoryBudget);

double coherent_information(double entropy_exchange, int nq);
double coherent_information(const QubitTrainOutput& output, int nq);

/// Throws ValidationError unless m is square, Hermitian, PSD and unit trace
/// (all within tol).
void validate_density_matrix(const CMatrix& m, double tol = 1e-10);

/// rho'_{jl} = rho_{jl} G_{jl}; the diagonal is copied, never multiplied.
CMatrix apply_channel(const CMatrix& rho_in, const GramMatrix& gram);
CMatrix apply_channel(const ChannelConfig& config, const CMatrix& rho_in, const BranchStates& branches);

/// F_e = sum_{jl} rho_jj rho_ll Re G_{jl}. Exact for any input of a dephasing
/// channel: with Kraus operators A_k = sum_j <k|omega_j> |j><j|,
/// sum_k |Tr(rho A_k)|^2 only sees the populations.
double entanglement_fidelity(const CMatrix& rho_in, const GramMatrix& gram);

/// Entropy exchange of one use of the stochastic dephasing channel with
/// parameter g in [0, 1].
double stochastic_rate(double g);

/// One-shot capacity estimate Q = 1 - R for a degradable dephasing channel.
double capacity_estimate(double rate);

/// -ln |<omega_{1..1}|omega_{0..0}>|^2 / nq: fidelity decay per use between
/// the two extreme branches.
double fidelity_decay_rate(const ChannelConfig& config, const EnvState& omega0);

struct RatePoint {
  double eta = 0.0;
  double mean_rate = 0.0;
  double standard_error = 0.0;
  std::vector<double> rates; // one per seed, in seed order
};

/// R = S_e / Nq averaged over Haar-random omega_0 drawn from each seed.
std::vector<RatePoint> rate_vs_eta_scan(const ChannelConfig& tmpl, std::span<const double> etas,
                                        std::span<const std::uint64_t> seeds, int threads = 1);

} // namespace sawchan
