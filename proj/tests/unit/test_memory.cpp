#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sawchan/channel.hpp"
#include "sawchan/errors.hpp"
#include "sawchan/memory.hpp"

using namespace sawchan;
using namespace sawchan::memory;

namespace {

BlockProtocol protocol(int N, int L, double kt, InitialEnvironment w = InitialEnvironment::haar(1)) {
  BlockProtocol p;
  p.spec = make_spec(N);
  p.L = L;
  p.K_transmit = kt;
  p.K_idle = std::numbers::sqrt2;
  p.eta = 0.3;
  p.omega0 = w;
  return p;
}

} // namespace

TEST_CASE("trace distance examples") {
  CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(2, 2);
  a(0, 0) = 1.0;
  b(1, 1) = 1.0;
  CHECK(trace_distance(a, b) == doctest::Approx(1.0));
  CHECK(trace_distance(a, a) == doctest::Approx(0.0));
  CMatrix c = CMatrix::Zero(2, 2), d = CMatrix::Identity(2, 2) / 2.0;
  c(0, 0) = 0.7;
  c(1, 1) = 0.3;
  CHECK(trace_distance(c, d) == doctest::Approx(0.2));
  // |+> vs |0>: sqrt(1 - |<+|0>|^2)
  CMatrix plus = CMatrix::Constant(2, 2, 0.5);
  CHECK(trace_distance(plus, a) == doctest::Approx(std::sqrt(0.5)));
  CHECK_THROWS_AS(trace_distance(a, CMatrix::Zero(3, 3)), ValidationError);
}

TEST_CASE("hyperspherical inputs") {
  const InputStateParams p{{0.3, 1.1, 2.0}};
  const CVector a = p.amplitudes();
  CHECK(a.size() == 4);
  CHECK(a.norm() == doctest::Approx(1.0));
  for (int i = 0; i < 4; ++i) CHECK(a[i].real() >= 0.0);
  CHECK(a[0].real() == doctest::Approx(std::cos(0.3)));
  CHECK(p.density().trace().real() == doctest::Approx(1.0));
  CHECK_THROWS_AS(block_output_with_memory(protocol(32, 0, 1.43), InputStateParams{{0.1}}), ValidationError);
}

TEST_CASE("memoryless Gram factorizes into single-block Grams") {
  for (int L : {0, 3}) {
    const auto g = block_grams(protocol(32, L, -1.64));
    REQUIRE(g.with_memory.entries.rows() == 4);
    for (int j = 0; j < 4; ++j)
      for (int l = 0; l < 4; ++l) {
        const cplx expected = g.single_block.entries(j >> 1, l >> 1) * g.single_block.entries(j & 1, l & 1);
        CHECK(std::abs(g.memoryless.entries(j, l) - expected) < 1e-14);
      }
  }
}

TEST_CASE("L = 0 memoryful Gram equals the two-qubit channel Gram") {
  const auto p = protocol(64, 0, 1.43, InitialEnvironment::haar(9));
  ChannelConfig c;
  c.spec = p.spec;
  c.K = p.K_transmit;
  c.eta = p.eta;
  c.nq = 2;
  const auto channel = gram_matrix(propagate_branches(c, haar_random_state(p.spec, 9)));
  CHECK((block_grams(p).with_memory.entries - channel.entries).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("block outputs are Hadamard products with the Grams") {
  const auto p = protocol(32, 2, 1.43, InitialEnvironment::momentum(0));
  const InputStateParams in{{0.4, 0.9, 1.3}};
  const auto g = block_grams(p);
  const CMatrix rho = in.density();
  const CMatrix mem = block_output_with_memory(p, in);
  const CMatrix less = block_output_memoryless(p, in);
  CHECK((mem - rho.cwiseProduct(g.with_memory.entries)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((less - rho.cwiseProduct(g.memoryless.entries)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(mem.trace() - 1.0) < 1e-12);
}

TEST_CASE("trace distance maximization") {
  const auto p = protocol(64, 0, -1.64, InitialEnvironment::momentum(0));
  OptimizerBudget b;
  b.starts = 40;
  b.refinements = 3;
  const auto best = maximize_trace_distance(p, b);
  CHECK(best.value > 0.0);
  CHECK(best.value <= 1.0);
  CHECK(best.phase_sensitivity < 1e-10);
  // no sampled input beats the maximum
  const auto g = block_grams(p);
  for (const auto& angles : {std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{1.0, 1.0, 1.0},
                             std::vector<double>{std::numbers::pi / 4, 0.9553, std::numbers::pi / 4}}) {
    const InputStateParams in{angles};
    const double v = trace_distance(in.density().cwiseProduct(g.with_memory.entries),
                                    in.density().cwiseProduct(g.memoryless.entries));
    CHECK(v <= best.value + 1e-9);
  }
  const auto again = maximize_trace_distance(p, b);
  CHECK(again.value == best.value);

  auto still = p;
  still.eta = 0.0;
  CHECK(maximize_trace_distance(still, b).value < 1e-12);
}

TEST_CASE("protocol validation and limits") {
  auto p = protocol(32, 0, 1.43);
  p.M = 13;
  CHECK_THROWS_AS(p.validate(), ResourceError);
  p.M = 2;
  p.L = -1;
  CHECK_THROWS_AS(p.validate(), ValidationError);
  OptimizerBudget b;
  b.starts = 0;
  CHECK_THROWS_AS(maximize_trace_distance(protocol(32, 0, 1.43), b), ValidationError);
}

TEST_CASE("forgetfulness curve is deterministic across threads") {
  OptimizerBudget b;
  b.starts = 20;
  b.refinements = 1;
  const std::vector<int> Ls{0, 2};
  const std::vector<std::uint64_t> seeds{1, 2};
  const auto a = forgetfulness_curve(protocol(32, 0, 1.43), Ls, seeds, b, 1);
  const auto c = forgetfulness_curve(protocol(32, 0, 1.43), Ls, seeds, b, 2);
  REQUIRE(a.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(a[i].per_seed == c[i].per_seed);
  CHECK(a[1].L == 2);
}
