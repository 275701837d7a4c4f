#include "sawchan/memory.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "sawchan/errors.hpp"
#include "sawchan/linalg.hpp"
#include "sawchan/optimize.hpp"
#include "sawchan/parallel.hpp"
#include "sawchan/stats.hpp"

namespace sawchan::memory {
namespace {

// Largest block schedule we are willing to tabulate (2^Q branches).
constexpr int kMaxQubits = 12;

GramMatrix schedule_gram(const BlockProtocol& p, int blocks) {
  ChannelConfig transmit;
  transmit.spec = p.spec;
  transmit.K = p.K_transmit;
  transmit.eta = p.eta;
  transmit.n0 = 1;
  transmit.nq = p.nq_per_block;
  transmit.coupling = p.coupling;
  const ChannelStepper stepper(transmit);
  const FloquetOperator idle(p.spec, KickCoefficient::from_k_eff(p.K_idle, p.spec));

  const int qubits = blocks * p.nq_per_block;
  std::vector<CVector> leaves(std::size_t{1} << qubits);
  auto idle_steps = [&](CVector& v) {
    for (int i = 0; i < p.L; ++i) idle.apply(v);
  };
  std::function<void(int, std::size_t, CVector&)> descend = [&](int q, std::size_t prefix, CVector& state) {
    if (q > 0 && q % p.nq_per_block == 0) idle_steps(state);
    if (q == qubits) {
      leaves[prefix] = state;
      return;
    }
    for (int bit = 0; bit < 2; ++bit) {
      CVector child = state;
      stepper.conditional(child, eigenvalue_of_bit(bit));
      descend(q + 1, (prefix << 1) | static_cast<std::size_t>(bit), child);
    }
  };
  CVector root = p.omega0.make(p.spec).amplitudes;
  descend(0, 0, root);

  BranchStates branches{p.omega0.make(p.spec), qubits, std::move(leaves)};
  return gram_matrix(branches);
}

CMatrix hadamard_output(const CMatrix& rho, const GramMatrix& g) {
  CMatrix out = rho.cwiseProduct(g.entries);
  out.diagonal() = rho.diagonal();
  return out;
}

double distance_for(const BlockGrams& grams, const CVector& amplitudes) {
  const CMatrix rho = amplitudes * amplitudes.adjoint();
  const CMatrix diff = rho.cwiseProduct(grams.with_memory.entries - grams.memoryless.entries);
  const Eigen::VectorXd ev = hermitian_eigenvalues(diff);
  return 0.5 * ev.cwiseAbs().sum();
}

} // namespace

EnvState InitialEnvironment::make(const TorusSpec& spec) const {
  return kind == Kind::Haar ? haar_random_state(spec, seed) : momentum_eigenstate(spec, index);
}

void BlockProtocol::validate() const {
  if (spec.N < 2) throw ValidationError("block protocol: N must be >= 2");
  if (nq_per_block < 1) throw ValidationError("block protocol: nq_per_block must be >= 1");
  if (L < 0) throw ValidationError("block protocol: L must be >= 0");
  if (M < 1) throw ValidationError("block protocol: M must be >= 1");
  if (total_qubits() > kMaxQubits) {
    throw ResourceError("block protocol: " + std::to_string(total_qubits()) + " qubits exceed the limit of " +
                        std::to_string(kMaxQubits));
  }
  if (!(eta >= 0.0)) throw ValidationError("block protocol: eta must be >= 0");
}

CVector InputStateParams::amplitudes() const {
  const std::size_t d = angles.size() + 1;
  CVector a(static_cast<Eigen::Index>(d));
  double running = 1.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    a[static_cast<Eigen::Index>(i)] = std::abs(running * std::cos(angles[i]));
    running *= std::sin(angles[i]);
  }
  a[static_cast<Eigen::Index>(d - 1)] = std::abs(running);
  return a / a.norm();
}

CMatrix InputStateParams::density() const {
  const CVector a = amplitudes();
  return a * a.adjoint();
}

BlockGrams block_grams(const BlockProtocol& protocol) {
  protocol.validate();
  BlockGrams g;
  g.with_memory = schedule_gram(protocol, protocol.M);
  g.single_block = schedule_gram(protocol, 1);

  const int q = protocol.total_qubits();
  const int per = protocol.nq_per_block;
  const Eigen::Index d = Eigen::Index{1} << q;
  const std::size_t block_mask = (std::size_t{1} << per) - 1;
  g.memoryless.entries = CMatrix::Ones(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index l = 0; l < d; ++l) {
      cplx v = 1.0;
      for (int b = 0; b < protocol.M; ++b) {
        const int shift = (protocol.M - 1 - b) * per;
        const auto jb = static_cast<Eigen::Index>((static_cast<std::size_t>(j) >> shift) & block_mask);
        const auto lb = static_cast<Eigen::Index>((static_cast<std::size_t>(l) >> shift) & block_mask);
        v *= g.single_block.entries(jb, lb);
      }
      g.memoryless.entries(j, l) = v;
    }
  }
  return g;
}

static void check_params(const BlockProtocol& protocol, const InputStateParams& params) {
  if (static_cast<int>(params.angles.size()) + 1 != protocol.input_dimension()) {
    throw ValidationError("input parameters: expected " + std::to_string(protocol.input_dimension() - 1) +
                          " angles, got " + std::to_string(params.angles.size()));
  }
}

CMatrix block_output_with_memory(const BlockProtocol& protocol, const InputStateParams& params) {
  check_params(protocol, params);
  return hadamard_output(params.density(), schedule_gram(protocol, protocol.M));
}

CMatrix block_output_memoryless(const BlockProtocol& protocol, const InputStateParams& params) {
  check_params(protocol, params);
  return hadamard_output(params.density(), block_grams(protocol).memoryless);
}

double trace_distance(const CMatrix& A, const CMatrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols() || A.rows() != A.cols()) {
    throw ValidationError("trace distance: dimension mismatch");
  }
  const Eigen::VectorXd ev = hermitian_eigenvalues(A - B);
  return 0.5 * ev.cwiseAbs().sum();
}

TraceDistanceMaximum maximize_trace_distance(const BlockGrams& grams, int qubits, const OptimizerBudget& budget) {
  if (budget.starts < 1) throw ValidationError("optimizer needs at least one start");
  const std::size_t dims = (std::size_t{1} << qubits) - 1;
  TraceDistanceMaximum best;
  std::mt19937_64 rng(budget.seed);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi / 2.0);

  auto objective = [&](const std::vector<double>& x) {
    ++best.evaluations;
    return distance_for(grams, InputStateParams{x}.amplitudes());
  };

  struct Sample {
    double value;
    std::vector<double> x;
  };
  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(budget.starts));
  for (int s = 0; s < budget.starts; ++s) {
    std::vector<double> x(dims);
    for (auto& a : x) a = angle(rng);
    const double v = objective(x);
    samples.push_back({v, std::move(x)});
  }
  std::stable_sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) { return a.value > b.value; });
  best.value = samples.front().value;
  best.argmax.angles = samples.front().x;

  const int refinements = std::min<int>(budget.refinements, static_cast<int>(samples.size()));
  for (int r = 0; r < refinements; ++r) {
    const int remaining = budget.max_evaluations - best.evaluations;
    if (remaining <= 0) {
      best.budget_exhausted = true;
      break;
    }
    SimplexResult res = nelder_mead([&](const std::vector<double>& x) { return -objective(x); },
                                    samples[static_cast<std::size_t>(r)].x, 0.1, budget.tolerance, remaining);
    if (!res.converged) best.budget_exhausted = true;
    if (-res.value > best.value) {
      best.value = -res.value;
      best.argmax.angles = res.x;
    }
  }

  // Phase check: random input phases must not change the distance.
  const CVector a = best.argmax.amplitudes();
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  for (int trial = 0; trial < 4; ++trial) {
    CVector phased = a;
    for (Eigen::Index k = 0; k < phased.size(); ++k) phased[k] *= std::polar(1.0, phase(rng));
    best.phase_sensitivity = std::max(best.phase_sensitivity, std::abs(distance_for(grams, phased) - best.value));
  }
  return best;
}

TraceDistanceMaximum maximize_trace_distance(const BlockProtocol& protocol, const OptimizerBudget& budget) {
  return maximize_trace_distance(block_grams(protocol), protocol.total_qubits(), budget);
}

std::vector<ForgetfulnessPoint> forgetfulness_curve(const BlockProtocol& tmpl, std::span<const int> L_values,
                                                    std::span<const std::uint64_t> seeds,
                                                    const OptimizerBudget& budget, int threads) {
  if (seeds.empty()) throw ValidationError("forgetfulness curve needs at least one seed");
  std::vector<double> values(L_values.size() * seeds.size());
  parallel_for(values.size(), threads, [&](std::size_t k) {
    BlockProtocol p = tmpl;
    p.L = L_values[k / seeds.size()];
    const std::uint64_t seed = seeds[k % seeds.size()];
    if (p.omega0.kind == InitialEnvironment::Kind::Haar) p.omega0.seed = seed;
    OptimizerBudget b = budget;
    b.seed = seed;
    values[k] = maximize_trace_distance(p, b).value;
  });
  std::vector<ForgetfulnessPoint> out(L_values.size());
  for (std::size_t i = 0; i < L_values.size(); ++i) {
    out[i].L = L_values[i];
    out[i].per_seed.assign(values.begin() + static_cast<std::ptrdiff_t>(i * seeds.size()),
                           values.begin() + static_cast<std::ptrdiff_t>((i + 1) * seeds.size()));
    out[i].mean = mean(out[i].per_seed);
  }
  return out;
}

} // namespace sawchan::memory
