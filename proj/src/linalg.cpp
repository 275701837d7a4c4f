#include "sawchan/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "sawchan/errors.hpp"

namespace sawchan {

Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m) {
  if (m.rows() != m.cols()) throw ValidationError("eigenvalues of a non-square matrix");
  if (m.rows() == 0) return Eigen::VectorXd();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolve did not converge");
  return solver.eigenvalues();
}

double entropy_bits(std::span<const double> eigenvalues) {
  double s = 0.0;
  for (double lambda : eigenvalues) {
    if (lambda < -kNegativeEigenvalueLimit) {
      throw NumericalError("negative eigenvalue " + std::to_string(lambda) +
                           " in a density spectrum");
    }
    if (lambda > kEigenvalueClip && std::abs(lambda - 1.0) > kEigenvalueClip) s -= lambda * std::log2(lambda);
  }
  return std::max(s, 0.0); // a pure spectrum can round to -1e-16

}

double entropy_bits(const Eigen::VectorXd& eigenvalues) {
  return entropy_bits(std::span<const double>(eigenvalues.data(), eigenvalues.size()));
}

double von_neumann_entropy(const CMatrix& m) { return entropy_bits(hermitian_eigenvalues(m)); }

double binary_entropy(double p) {
  double s = 0.0;
  if (p > 0.0) s -= p * std::log2(p);
  if (p < 1.0) s -= (1.0 - p) * std::log2(1.0 - p);
  return s;
}

} // namespace sawchan
