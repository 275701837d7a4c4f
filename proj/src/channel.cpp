#include "sawchan/channel.hpp"

#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Eigenvalues>

#include "sawchan/errors.hpp"
#include "sawchan/linalg.hpp"
#include "sawchan/parallel.hpp"
#include "sawchan/stats.hpp"

namespace sawchan {
namespace {

// Factor columns with weight below this are dropped during compression.
constexpr double kFactorTruncation = 1e-14;

FloquetOperator conditional_operator(const ChannelConfig& c, int s) {
  switch (c.coupling) {
    case Coupling::KickedQuadratic:
      return FloquetOperator(c.spec, KickCoefficient::from_k_eff(c.K - c.eta * c.spec.T * s, c.spec));
    case Coupling::ContinuousSinP:
      // eta is the sin(p) coupling integrated over one transit (one map
      // period), so the phase is s eta sin(p) and not s eta T sin(p).
      return FloquetOperator(c.spec, KickCoefficient::from_k_eff(c.K, c.spec), c.eta / c.spec.T, s);
  }
  throw ValidationError("unknown coupling kind");
}

} // namespace

std::string_view to_string(Coupling c) {
  switch (c) {
    case Coupling::KickedQuadratic: return "kicked";
    case Coupling::ContinuousSinP: return "sinp";
  }
  return "unknown";
}

Coupling parse_coupling(std::string_view text) {
  if (text == "kicked" || text == "KickedQuadratic") return Coupling::KickedQuadratic;
  if (text == "sinp" || text == "ContinuousSinP") return Coupling::ContinuousSinP;
  throw ValidationError("unknown coupling '" + std::string(text) + "' (expected kicked or sinp)");
}

void ChannelConfig::validate() const {
  if (spec.N < 2) throw ValidationError("channel: torus dimension N must be >= 2");
  if (nq < 1) throw ValidationError("channel: Nq must be >= 1, got " + std::to_string(nq));
  if (n0 < 1) throw ValidationError("channel: n0 must be >= 1, got " + std::to_string(n0));
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ValidationError("channel: eta must be finite and >= 0");
  if (!std::isfinite(K)) throw ValidationError("channel: K must be finite");
}

BitString BitString::from_index(std::size_t index, int nq) {
  BitString b;
  b.bits.resize(static_cast<std::size_t>(nq));
  for (int n = 0; n < nq; ++n) b.bits[static_cast<std::size_t>(n)] = (index >> (nq - 1 - n)) & 1U;
  return b;
}

std::size_t BitString::index() const {
  std::size_t idx = 0;
  for (auto bit : bits) idx = (idx << 1) | bit;
  return idx;
}

ChannelStepper::ChannelStepper(const ChannelConfig& config)
    : gap_steps_(config.n0 - 1),
      plus_(conditional_operator(config, +1)),
      minus_(conditional_operator(config, -1)),
      bare_(config.spec, KickCoefficient::from_k_eff(config.K, config.spec)) {}

void ChannelStepper::gap(CVector& v) const {
  for (int i = 0; i < gap_steps_; ++i) bare_.apply(v);
}

void ChannelStepper::gap_columns(CMatrix& m) const {
  for (int i = 0; i < gap_steps_; ++i) bare_.apply_columns(m);
}

BranchStates propagate_branches(const ChannelConfig& config, const EnvState& omega0,
                                std::size_t budget_bytes) {
  config.validate();
  if (omega0.spec.N != config.spec.N) throw ValidationError("omega0 dimension does not match the channel");
  if (config.nq > 40) throw ResourceError("Nq = " + std::to_string(config.nq) + " branches cannot be stored");
  const std::size_t count = std::size_t{1} << config.nq;
  const std::size_t bytes = count * static_cast<std::size_t>(config.spec.N) * sizeof(cplx);
  if (bytes > budget_bytes) {
    throw ResourceError("branch storage needs " + std::to_string(bytes) + " bytes, budget is " +
                        std::to_string(budget_bytes));
  }

  ChannelStepper stepper(config);
  BranchStates out{omega0, config.nq, std::vector<CVector>(count)};

  // Depth-first over the bit tree; bare gap steps run once per internal node.
  std::function<void(int, std::size_t, CVector&)> descend = [&](int depth, std::size_t prefix,
                                                                 CVector& state) {
    if (depth == config.nq) {
      out.states[prefix] = state;
      return;
    }
    if (depth > 0) stepper.gap(state);
    for (int bit = 0; bit < 2; ++bit) {
      CVector child = state;
      stepper.conditional(child, eigenvalue_of_bit(bit));
      descend(depth + 1, (prefix << 1) | static_cast<std::size_t>(bit), child);
    }
  };
  CVector root = omega0.amplitudes;
  descend(0, 0, root);
  return out;
}

GramMatrix gram_matrix(const BranchStates& branches) {
  const auto d = static_cast<Eigen::Index>(branches.states.size());
  GramMatrix g{CMatrix(d, d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    g.entries(j, j) = branches.states[j].squaredNorm();
    for (Eigen::Index l = j + 1; l < d; ++l) {
      cplx v = branches.states[l].dot(branches.states[j]); // <omega_l|omega_j>
      g.entries(j, l) = v;
      g.entries(l, j) = std::conj(v);
    }
  }
  return g;
}

double entropy_exchange_gram(const GramMatrix& gram) {
  const double weight = 1.0 / static_cast<double>(gram.entries.rows());
  return von_neumann_entropy(weight * gram.entries);
}

double entropy_exchange_density(const BranchStates& branches) {
  const int n = branches.omega0.spec.N;
  const auto count = static_cast<Eigen::Index>(branches.states.size());
  CMatrix stacked(n, count);
  for (Eigen::Index j = 0; j < count; ++j) stacked.col(j) = branches.states[j];
  CMatrix rho = CMatrix::Zero(n, n);
  rho.selfadjointView<Eigen::Lower>().rankUpdate(stacked, 1.0 / static_cast<double>(count));
  return von_neumann_entropy(rho);
}

double entropy_exchange(const BranchStates& branches) {
  if (branches.states.size() <= static_cast<std::size_t>(branches.omega0.spec.N)) {
    return entropy_exchange_gram(gram_matrix(branches));
  }
  return entropy_exchange_density(branches);
}

std::vector<double> entropy_exchange_growth(const ChannelConfig& config, const EnvState& omega0) {
  return entropy_exchange_growth(config, omega0, {});
}

std::vector<double> entropy_exchange_growth(const ChannelConfig& config, const EnvState& omega0,
                                            std::span<const int> record_at) {
  config.validate();
  std::vector<bool> wanted(static_cast<std::size_t>(config.nq), record_at.empty());
  for (int nq : record_at) {
    if (nq < 1 || nq > config.nq) {
      throw ValidationError("recorded train length " + std::to_string(nq) + " outside [1, " +
                            std::to_string(config.nq) + "]");
    }
    wanted[static_cast<std::size_t>(nq - 1)] = true;
  }
  if (omega0.spec.N != config.spec.N) throw ValidationError("omega0 dimension does not match the channel");
  const Eigen::Index n = config.spec.N;
  ChannelStepper stepper(config);
  std::vector<double> entropies;
  entropies.reserve(static_cast<std::size_t>(config.nq));

  const double half = std::sqrt(0.5);
  CMatrix factor = omega0.amplitudes;
  CMatrix rho; // dense mode once the factor rank would exceed N
  bool dense = false;

  for (int q = 0; q < config.nq; ++q) {
    if (!dense) {
      if (q > 0) stepper.gap_columns(factor);
      const Eigen::Index r = factor.cols();
      CMatrix left = factor;
      CMatrix right = factor;
      stepper.conditional_columns(left, +1);
      stepper.conditional_columns(right, -1);
      CMatrix stacked(n, 2 * r);
      stacked << half * left, half * right;

      if (2 * r <= n / 2) {
        // rho_E = S S^dag shares its nonzero spectrum with S^dag S.
        CMatrix w = stacked.adjoint() * stacked;
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(w);
        if (solver.info() != Eigen::Success) throw NumericalError("factor compression eigensolve failed");
        const Eigen::VectorXd& lambda = solver.eigenvalues();
        if (wanted[static_cast<std::size_t>(q)]) entropies.push_back(entropy_bits(lambda));
        Eigen::Index keep = 0;
        for (Eigen::Index i = 0; i < lambda.size(); ++i) keep += lambda[i] > kFactorTruncation ? 1 : 0;
        keep = std::max<Eigen::Index>(keep, 1);
        factor = stacked * solver.eigenvectors().rightCols(keep);
      } else {
        rho = CMatrix::Zero(n, n);
        rho.selfadjointView<Eigen::Lower>().rankUpdate(stacked, 1.0);
        rho.triangularView<Eigen::StrictlyUpper>() = rho.adjoint();
        if (wanted[static_cast<std::size_t>(q)]) entropies.push_back(von_neumann_entropy(rho));
        dense = true;
        factor.resize(0, 0);
      }
      continue;
    }

    // U rho U^dag via two column passes: A = U rho, then U A^dag = U rho U^dag.
    auto conjugate = [](CMatrix m, auto&& apply) {
      apply(m);
      CMatrix t = m.adjoint();
      apply(t);
      return t;
    };
    if (config.n0 > 1) rho = conjugate(rho, [&](CMatrix& m) { stepper.gap_columns(m); });
    CMatrix plus = conjugate(rho, [&](CMatrix& m) { stepper.conditional_columns(m, +1); });
    CMatrix minus = conjugate(rho, [&](CMatrix& m) { stepper.conditional_columns(m, -1); });
    rho = 0.5 * (plus + minus);
    if (wanted[static_cast<std::size_t>(q)]) entropies.push_back(von_neumann_entropy(rho));
  }
  return entropies;
}

QubitTrainOutput run_qubit_train(const ChannelConfig& config, const EnvState& omega0,
                                 std::size_t budget_bytes) {
  BranchStates branches = propagate_branches(config, omega0, budget_bytes);
  QubitTrainOutput out;
  out.gram = gram_matrix(branches);
  out.entropy_exchange = entropy_exchange(branches);
  out.coherent_information = coherent_information(out.entropy_exchange, config.nq);
  out.rate = out.entropy_exchange / config.nq;
  return out;
}

double coherent_information(double entropy_exchange, int nq) { return nq - entropy_exchange; }

double coherent_information(const QubitTrainOutput& output, int nq) {
  return coherent_information(output.entropy_exchange, nq);
}

void validate_density_matrix(const CMatrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) throw ValidationError("density matrix must be square and non-empty");
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol) throw ValidationError("density matrix is not Hermitian");
  if (std::abs(m.trace() - cplx(1.0)) > tol) throw ValidationError("density matrix trace is not 1");
  Eigen::VectorXd ev = hermitian_eigenvalues(m);
  if (ev.minCoeff() < -tol) throw ValidationError("density matrix is not positive semidefinite");
}

CMatrix apply_channel(const CMatrix& rho_in, const GramMatrix& gram) {
  validate_density_matrix(rho_in);
  if (rho_in.rows() != gram.entries.rows()) throw ValidationError("input dimension does not match 2^Nq");
  const Eigen::Index d = rho_in.rows();
  CMatrix out(d, d);
  for (Eigen::Index l = 0; l < d; ++l) {
    for (Eigen::Index j = 0; j < d; ++j) {
      out(j, l) = j == l ? rho_in(j, l) : rho_in(j, l) * gram.entries(j, l);
    }
  }
  return out;
}

CMatrix apply_channel(const ChannelConfig& config, const CMatrix& rho_in, const BranchStates& branches) {
  if (branches.nq != config.nq) throw ValidationError("branch states were built for a different Nq");
  return apply_channel(rho_in, gram_matrix(branches));
}

double entanglement_fidelity(const CMatrix& rho_in, const GramMatrix& gram) {
  if (rho_in.rows() != gram.entries.rows() || rho_in.cols() != gram.entries.cols()) {
    throw ValidationError("entanglement fidelity: dimension mismatch");
  }
  const Eigen::VectorXd p = rho_in.diagonal().real();
  const double f = p.dot(gram.entries.real() * p);
  return std::clamp(f, 0.0, 1.0);
}

double stochastic_rate(double g) {
  if (!(g >= 0.0 && g <= 1.0)) throw ValidationError("dephasing parameter g must lie in [0, 1]");
  const double a = (2.0 - g) / 2.0;
  const double b = g / 2.0;
  double r = 0.0;
  if (a > 0.0) r -= a * std::log2(a);
  if (b > 0.0) r -= b * std::log2(b);
  return r;
}

double capacity_estimate(double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw ValidationError("entropy exchange rate must lie in [0, 1]");
  return 1.0 - rate;
}

double fidelity_decay_rate(const ChannelConfig& config, const EnvState& omega0) {
  config.validate();
  ChannelStepper stepper(config);
  CVector zeros = omega0.amplitudes;
  CVector ones = omega0.amplitudes;
  for (int q = 0; q < config.nq; ++q) {
    if (q > 0) {
      stepper.gap(zeros);
      stepper.gap(ones);
    }
    stepper.conditional(zeros, eigenvalue_of_bit(0));
    stepper.conditional(ones, eigenvalue_of_bit(1));
  }
  const double fidelity = std::norm(ones.dot(zeros));
  return -std::log(fidelity) / config.nq;
}

std::vector<RatePoint> rate_vs_eta_scan(const ChannelConfig& tmpl, std::span<const double> etas,
                                        std::span<const std::uint64_t> seeds, int threads) {
  if (seeds.empty()) throw ValidationError("rate scan needs at least one seed");
  std::vector<RatePoint> out(etas.size());
  std::vector<double> rates(etas.size() * seeds.size());
  parallel_for(rates.size(), threads, [&](std::size_t k) {
    ChannelConfig c = tmpl;
    c.eta = etas[k / seeds.size()];
    EnvState omega0 = haar_random_state(c.spec, seeds[k % seeds.size()]);
    rates[k] = entropy_exchange_growth(c, omega0).back() / c.nq;
  });
  for (std::size_t e = 0; e < etas.size(); ++e) {
    out[e].eta = etas[e];
    out[e].rates.assign(rates.begin() + static_cast<std::ptrdiff_t>(e * seeds.size()),
                        rates.begin() + static_cast<std::ptrdiff_t>((e + 1) * seeds.size()));
    out[e].mean_rate = mean(out[e].rates);
    out[e].standard_error = standard_error(out[e].rates);
  }
  return out;
}

} // namespace sawchan
