#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "sawchan/torus.hpp"

namespace sawchan {

/// Eigenvalues below this are treated as zero in entropy sums.
inline constexpr double kEigenvalueClip = 1e-12;
/// Eigenvalues below minus this mean the matrix was not PSD to begin with.
inline constexpr double kNegativeEigenvalueLimit = 1e-8;

/// Ascending eigenvalues of a Hermitian matrix (lower triangle is read).
Eigen::VectorXd hermitian_eigenvalues(const CMatrix& m);

/// -sum lambda log2 lambda over a spectrum. Eigenvalues within kEigenvalueClip
/// of 0 or 1 contribute nothing. Throws NumericalError if any eigenvalue is below
/// -kNegativeEigenvalueLimit.
double entropy_bits(std::span<const double> eigenvalues);
double entropy_bits(const Eigen::VectorXd& eigenvalues);

/// Von Neumann entropy (bits) of a Hermitian PSD matrix.
double von_neumann_entropy(const CMatrix& m);

/// Binary entropy H(p) in bits.
double binary_entropy(double p);

} // namespace sawchan
