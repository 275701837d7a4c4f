// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// With arguments, runs only the listed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "sawchan/channel.hpp"
#include "sawchan/classical.hpp"
#include "sawchan/experiment.hpp"
#include "sawchan/memory.hpp"
#include "sawchan/stats.hpp"

using namespace sawchan;

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "[fail] ") + what;
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ChannelConfig channel(int N, double K, double eta, int nq, int n0 = 1, Coupling cp = Coupling::KickedQuadratic) {
  ChannelConfig c;
  c.spec = make_spec(N);
  c.K = K;
  c.eta = eta;
  c.nq = nq;
  c.n0 = n0;
  c.coupling = cp;
  return c;
}

const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

// Seed-averaged S_e(Nq) for Nq = 1..c.nq.
std::vector<double> mean_growth(const ChannelConfig& c, const std::vector<std::uint64_t>& seeds) {
  std::vector<double> acc(static_cast<std::size_t>(c.nq), 0.0);
  for (auto s : seeds) {
    const auto g = entropy_exchange_growth(c, haar_random_state(c.spec, s));
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i] / seeds.size();
  }
  return acc;
}

LinearFit fit_vs_nq(const std::vector<double>& s) {
  std::vector<double> x;
  for (std::size_t i = 0; i < s.size(); ++i) x.push_back(static_cast<double>(i + 1));
  return linear_fit(x, s);
}

Verdict criterion1() {
  Verdict v;
  const auto s = mean_growth(channel(1024, kSqrt2, 0.3, 10), kSeeds);
  const auto f = fit_vs_nq(s);
  v.require(f.r_squared >= 0.98, fmt("N=1024 r^2=%.5f (>=0.98)", f.r_squared));
  v.require(f.slope > 0.0 && f.slope < 1.0, fmt("slope R=%.4f in (0,1)", f.slope));

  double max_s = 0.0, min_margin = 8.0;
  for (auto seed : kSeeds) {
    const auto c = channel(256, kSqrt2, 0.3, 24);
    const auto g = entropy_exchange_growth(c, haar_random_state(c.spec, seed));
    for (double x : g) {
      max_s = std::max(max_s, x);
      min_margin = std::min(min_margin, 8.0 - x);
    }
  }
  v.require(min_margin >= -1e-9, fmt("N=256 Nq<=24 max S_e=%.4f (<=8)", max_s));
  v.require(max_s >= 7.0, fmt("reaches %.4f (>=7)", max_s));
  return v;
}

Verdict criterion2() {
  Verdict v;
  const std::vector<double> grid{0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 2.5, 3.0};
  const auto tmpl_k = channel(1024, kSqrt2, 0.0, 8);
  const auto tmpl_s = channel(1024, kSqrt2, 0.0, 8, 1, Coupling::ContinuousSinP);
  const auto kicked = rate_vs_eta_scan(tmpl_k, grid, kSeeds);
  const auto sinp = rate_vs_eta_scan(tmpl_s, grid, kSeeds);

  bool zero = true;
  for (double r : kicked[0].rates) zero = zero && r == 0.0;
  for (double r : sinp[0].rates) zero = zero && r == 0.0;
  v.require(zero, "R(eta=0)=0 exactly, both couplings");

  for (const auto* scan : {&kicked, &sinp}) {
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < 5; ++i) {
      const auto& a = (*scan)[i];
      const auto& b = (*scan)[i + 1];
      const double tol = std::hypot(a.standard_error, b.standard_error);
      monotone = monotone && b.mean_rate >= a.mean_rate - tol;
    }
    v.require(monotone, std::string(scan == &kicked ? "kicked" : "sinp") +
                            fmt(" nondecreasing on {0..0.3}: %.4f %.4f %.4f %.4f %.4f", (*scan)[0].mean_rate,
                                (*scan)[1].mean_rate, (*scan)[2].mean_rate, (*scan)[3].mean_rate, (*scan)[4].mean_rate));
  }
  auto first_above = [&](const std::vector<RatePoint>& scan) {
    for (const auto& p : scan)
      if (p.mean_rate >= 0.95) return p.eta;
    return std::numeric_limits<double>::infinity();
  };
  const double ek = first_above(kicked), es = first_above(sinp);
  double best_k = 0.0;
  for (const auto& p : kicked) best_k = std::max(best_k, p.mean_rate);
  v.require(ek <= 3.0, fmt("kicked reaches R>=0.95 at eta=%g (max mean R %.4f)", ek, best_k));
  v.require(es < ek, fmt("sinp reaches it at eta=%g < %g", es, ek));

  // Fermi golden rule: single-use decay rate ~ eta^2
  std::vector<double> lx, ly;
  const auto c1 = channel(1024, kSqrt2, 0.0, 1);
  for (int i = 0; i < 9; ++i) {
    const double eta = 0.01 * std::pow(10.0, i / 8.0);
    auto c = c1;
    c.eta = eta;
    double gamma = 0.0;
    for (std::uint64_t s = 1; s <= 10; ++s) gamma += fidelity_decay_rate(c, haar_random_state(c.spec, s)) / 10.0;
    lx.push_back(std::log(eta));
    ly.push_back(std::log(gamma));
  }
  const auto fgr = linear_fit(lx, ly);
  v.require(std::abs(fgr.slope - 2.0) <= 0.2, fmt("FGR log-log slope %.4f (2.0 +- 0.2)", fgr.slope));
  return v;
}

Verdict criterion3() {
  Verdict v;
  const double base = fit_vs_nq(mean_growth(channel(1024, kSqrt2, 0.3, 10), kSeeds)).slope;
  const double k25 = fit_vs_nq(mean_growth(channel(1024, 2.5, 0.3, 10), kSeeds)).slope;
  const double n03 = fit_vs_nq(mean_growth(channel(1024, kSqrt2, 0.3, 10, 3), kSeeds)).slope;
  const double dk = std::abs(base - k25) / base, dn = std::abs(base - n03) / base;
  v.require(dk <= 0.05, fmt("R(K=sqrt2)=%.4f R(K=2.5)=%.4f rel diff %.4f (<=0.05)", base, k25, dk));
  v.require(dn <= 0.05, fmt("R(n0=3)=%.4f rel diff %.4f (<=0.05)", n03, dn));
  return v;
}

Verdict criterion4() {
  Verdict v;
  // N = 2^10 fallback
  const std::vector<std::uint64_t> seeds{1, 2};
  for (double K : {-1.8, -2.3, -2.8}) {
    const auto c = channel(1024, K, 0.3, 64);
    std::vector<int> at;
    for (int q = 2; q <= 64; ++q) at.push_back(q);
    std::vector<double> s(at.size(), 0.0);
    for (auto seed : seeds) {
      const auto g = entropy_exchange_growth(c, haar_random_state(c.spec, seed), at);
      for (std::size_t i = 0; i < s.size(); ++i) s[i] += g[i] / seeds.size();
    }
    std::vector<double> lx;
    for (int q : at) lx.push_back(std::log2(q));
    const auto f = linear_fit(lx, s);
    const double r8 = s[6] / 8.0, r64 = s.back() / 64.0;
    v.require(f.r_squared >= 0.95, fmt("K=%g r^2 vs log2 Nq %.4f (>=0.95)", K, f.r_squared));
    v.require(r64 <= 0.5 * r8, fmt("K=%g R(64)=%.4f <= 0.5 R(8)=%.4f", K, r64, 0.5 * r8));
  }
  return v;
}

Verdict criterion5() {
  Verdict v;
  const auto chaotic = classical::autocorrelation(classical::make_ensemble(1'000'000, kSqrt2, 0.0, 1), 50);
  v.require(chaotic.normalized[5] <= 0.05, fmt("K=sqrt2 C(5)/C(0)=%.5f (<=0.05)", chaotic.normalized[5]));
  const auto regular = classical::autocorrelation(classical::make_ensemble(1'000'000, -kSqrt2, 0.0, 1), 50);
  double peak = 0.0;
  for (int L = 1; L <= 50; ++L) peak = std::max(peak, regular.normalized[static_cast<std::size_t>(L)]);
  v.require(peak >= 0.5, fmt("K=-sqrt2 max_{1<=L<=50} C(L)/C(0)=%.4f (>=0.5)", peak));
  const double d1 = classical::diffusion_coefficient(kSqrt2, 100, 100'000, 1);
  const double d2 = classical::diffusion_coefficient(kSqrt2, 100, 100'000, 2);
  v.require(d1 > 0.0 && d2 > 0.0, fmt("D(seed1)=%.4f D(seed2)=%.4f > 0", d1, d2));
  v.require(std::abs(d1 - d2) / std::max(d1, d2) <= 0.1, fmt("seed spread %.4f (<=0.1)", std::abs(d1 - d2) / std::max(d1, d2)));
  return v;
}

Verdict criterion6() {
  Verdict v;
  const TorusSpec spec = make_spec(1024);
  const double bound = 5.0 * std::sqrt(spec.hbar_eff());
  const std::vector<int> Ls{0, 2, 5, 10};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  memory::OptimizerBudget budget; // 200 starts, 8 refinements
  for (double kt : {1.43, -1.64}) {
    memory::BlockProtocol p;
    p.spec = spec;
    p.K_transmit = kt;
    p.K_idle = kSqrt2;
    p.eta = 0.3;

    p.omega0 = memory::InitialEnvironment::haar(0);
    const auto haar = memory::forgetfulness_curve(p, Ls, seeds, budget);
    double worst = 0.0;
    for (const auto& pt : haar)
      for (double x : pt.per_seed) worst = std::max(worst, x);
    v.require(worst <= bound, fmt("K_t=%g Haar max D=%.4f (<=%.4f)", kt, worst, bound));

    p.omega0 = memory::InitialEnvironment::momentum(0);
    const auto mom = memory::forgetfulness_curve(p, Ls, seeds, budget);
    const double d0 = mom[0].mean, d10 = mom[3].mean;
    const double plateau = std::max(mom[2].mean, mom[3].mean);
    v.require(d10 <= 0.5 * d0, fmt("K_t=%g momentum D(10)=%.4f <= 0.5 D(0)=%.4f", kt, d10, 0.5 * d0));
    v.require(plateau <= bound, fmt("plateau %.4f (<=%.4f)", plateau, bound));
  }
  return v;
}

Verdict criterion7() {
  Verdict v;
  double unitarity = 0.0, oracle_dev = 0.0;
  for (int N = 2; N <= 32; ++N) {
    for (double K : {kSqrt2, -1.8, 2.5}) {
      const auto spec = make_spec(N);
      const FloquetOperator op(spec, KickCoefficient::from_k_eff(K, spec));
      CMatrix U = CMatrix::Identity(N, N);
      op.apply_columns(U);
      unitarity = std::max(unitarity, (U.adjoint() * U - CMatrix::Identity(N, N)).cwiseAbs().maxCoeff());
      oracle_dev = std::max(oracle_dev, (U - oracle::floquet(oracle::Torus{N}, K)).cwiseAbs().maxCoeff());
    }
  }
  v.require(unitarity <= 1e-10, fmt("unitarity N<=32 %.2e", unitarity));
  v.require(oracle_dev <= 1e-10, fmt("DFT oracle %.2e", oracle_dev));

  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  auto random_rho = [&](int d) {
    CMatrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
    CMatrix r = a * a.adjoint();
    return CMatrix(r / r.trace().real());
  };

  double joint = 0.0, trace_dev = 0.0;
  bool diag_exact = true;
  for (int N : {4, 8, 16})
    for (int nq : {1, 2})
      for (double K : {kSqrt2, -1.8})
        for (auto cp : {Coupling::KickedQuadratic, Coupling::ContinuousSinP}) {
          const auto c = channel(N, K, 0.4, nq, 1, cp);
          const EnvState w = haar_random_state(c.spec, 11);
          const CMatrix rho = random_rho(1 << nq);
          const auto ref = oracle::run(oracle::Torus{N}, nq, 1, K, 0.4,
                                       cp == Coupling::KickedQuadratic ? oracle::Coupling::Kicked
                                                                       : oracle::Coupling::SinP,
                                       rho, w.amplitudes);
          const auto branches = propagate_branches(c, w);
          const CMatrix out = apply_channel(rho, gram_matrix(branches));
          joint = std::max(joint, (out - ref.output).cwiseAbs().maxCoeff());
          joint = std::max(joint, std::abs(entropy_exchange(branches) - ref.s_e));
          trace_dev = std::max(trace_dev, std::abs(out.trace() - rho.trace()));
          for (int i = 0; i < rho.rows(); ++i) diag_exact = diag_exact && out(i, i) == rho(i, i);
        }
  v.require(joint <= 1e-10, fmt("joint-space oracle Nq<=2 N<=16 %.2e", joint));
  v.require(trace_dev <= 1e-12, fmt("trace preservation %.2e", trace_dev));
  v.require(diag_exact, "diagonal exactly invariant");

  double route = 0.0;
  for (int N : {16, 32, 64})
    for (int nq = 1; nq <= 6; ++nq)
      for (double K : {kSqrt2, -2.3}) {
        const auto c = channel(N, K, 0.3, nq);
        const auto b = propagate_branches(c, haar_random_state(c.spec, 2));
        route = std::max(route, std::abs(entropy_exchange_gram(gram_matrix(b)) - entropy_exchange_density(b)));
      }
  v.require(route <= 1e-8, fmt("Gram vs density Nq<=6 N<=64 %.2e", route));

  // binary entropy of (2-g)/2 evaluated directly
  auto h = [](double p) { return p <= 0.0 ? 0.0 : -p * std::log(p) / std::log(2.0); };
  const double r05 = stochastic_rate(0.5);
  v.require(stochastic_rate(0.0) == 0.0 && std::abs(stochastic_rate(1.0) - 1.0) < 1e-15,
            "R(0)=0, R(1)=1");
  v.require(std::abs(r05 - 0.81128) <= 1e-5 && std::abs(r05 - (h(0.75) + h(0.25))) < 1e-14,
            fmt("R(0.5)=%.8f", r05));
  return v;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict criterion8() {
  Verdict v;
  const auto root = std::filesystem::temp_directory_path() / "sawchan_acceptance_determinism";
  std::filesystem::remove_all(root);
  const std::pair<expt::Scenario, const char*> cases[] = {
      {expt::Scenario::EntropyScan, "N = 64,128\nnq_max = 8"},
      {expt::Scenario::RateVsEta, "N = 128\nnq = 6\neta = 0,0.1,0.3,1"},
      {expt::Scenario::ClassicalAutocorr, "particles = 20000\nL_max = 20\ndiffusion_particles = 5000"},
      {expt::Scenario::Forgetfulness, "N = 128\nL = 0,2,5\nstarts = 30\nrefinements = 2"},
      {expt::Scenario::RegularGrowth, "N = 128\nnq_min = 2\nnq_max = 16"},
      {expt::Scenario::CapacityTransition, "N = 128\nnq = 8\nK = -5,-3,-1,1,3"},
  };
  for (const auto& [s, text] : cases) {
    auto c = expt::parse_config(std::string(text) + "\nseeds = 1,2,3\n", s);
    c.output = (root / "t1").string();
    const auto a = expt::run(c, 1);
    c.output = (root / "t3").string();
    const auto b = expt::run(c, 3);
    c.output = (root / "again").string();
    const auto again = expt::run(c, 1);
    const std::string bytes = slurp(a.csv_path);
    const bool same = !bytes.empty() && bytes == slurp(b.csv_path) && bytes == slurp(again.csv_path);
    v.require(same, std::string(expt::to_string(s)) + fmt(" %zu rows", a.rows));
  }
  std::filesystem::remove_all(root);
  return v;
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
      {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s (%.1fs) %s\n", id, v.pass ? "PASS" : "FAIL", secs, v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
