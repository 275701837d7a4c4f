#include <doctest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "sawchan/errors.hpp"
#include "sawchan/linalg.hpp"
#include "sawchan/optimize.hpp"
#include "sawchan/parallel.hpp"
#include "sawchan/stats.hpp"

using namespace sawchan;

TEST_CASE("entropy of simple spectra") {
  CHECK(entropy_bits(std::vector<double>{1.0, 0.0}) == 0.0);
  CHECK(entropy_bits(std::vector<double>{0.5, 0.5}) == doctest::Approx(1.0));
  CHECK(entropy_bits(std::vector<double>{0.25, 0.25, 0.25, 0.25}) == doctest::Approx(2.0));
  CHECK(entropy_bits(std::vector<double>{1.0 + 1e-16, -1e-16}) >= 0.0);
  CHECK(entropy_bits(std::vector<double>{0.5, 0.5, -1e-11}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(entropy_bits(std::vector<double>{1.1, -0.1}), NumericalError);
  CHECK(binary_entropy(0.25) == doctest::Approx(0.8112781244591328));
  CHECK(binary_entropy(0.0) == 0.0);
}

TEST_CASE("von Neumann entropy of a rotated mixture") {
  CMatrix rho(2, 2);
  rho << 0.5, cplx(0.0, 0.25), cplx(0.0, -0.25), 0.5;
  // eigenvalues 0.75, 0.25
  CHECK(von_neumann_entropy(rho) == doctest::Approx(0.8112781244591328));
}

TEST_CASE("mean, standard error, linear fit") {
  const std::vector<double> xs{1, 2, 3, 4};
  CHECK(mean(xs) == doctest::Approx(2.5));
  // sd = sqrt(5/3)
  CHECK(standard_error(xs) == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(standard_error(std::vector<double>{3.0}) == 0.0);

  const std::vector<double> y{3, 5, 7, 9};
  const auto f = linear_fit(xs, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK(f.residual_rms == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(f.slope_stderr == doctest::Approx(0.0).epsilon(1e-12));

  const auto flat = linear_fit(xs, std::vector<double>{4, 4, 4, 4});
  CHECK(flat.slope == 0.0);
  CHECK(flat.slope_stderr == 0.0);

  // y = x + noise {+1,-1,-1,+1}: slope 1, residual sum of squares 4
  const auto noisy = linear_fit(xs, std::vector<double>{2, 1, 2, 5});
  CHECK(noisy.slope == doctest::Approx(1.0));
  CHECK(noisy.intercept == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(noisy.slope_stderr == doctest::Approx(std::sqrt(4.0 / 2.0 / 5.0)));

  CHECK_THROWS_AS(linear_fit(xs, std::vector<double>{1, 2}), ValidationError);
  CHECK_THROWS_AS(linear_fit(std::vector<double>{1, 1}, std::vector<double>{1, 2}), ValidationError);
}

TEST_CASE("Nelder-Mead minimizes the Rosenbrock function") {
  auto rosen = [](const std::vector<double>& x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  const auto r = nelder_mead(rosen, {-1.2, 1.0}, 0.5, 1e-14, 5000);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
  const auto capped = nelder_mead(rosen, {-1.2, 1.0}, 0.5, 1e-14, 20);
  CHECK_FALSE(capped.converged);
  CHECK(capped.evaluations <= 20);
}

TEST_CASE("parallel_for fills every slot and propagates exceptions") {
  std::vector<int> out(100, -1);
  parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
  std::atomic<int> ran{0};
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [&](std::size_t i) {
                                 ++ran;
                                 if (i == 4) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
  CHECK(ran == 10);
}
