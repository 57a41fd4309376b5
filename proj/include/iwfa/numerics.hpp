#pragma once

#include <Eigen/Dense>
#include <complex>

#include "iwfa/errors.hpp"

namespace iwfa {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using Complex = std::complex<double>;

// Relative singular-value threshold: anything below rank_tol * sigma_max is
// treated as zero. Double-precision SVD noise floor with headroom.
inline constexpr double kDefaultRankTol = 1e-10;

// Hermitian inputs may deviate from exact symmetry by at most this much
// (relative to the Frobenius norm) before being rejected.
inline constexpr double kHermitianTol = 1e-12;

struct HermitianEigen {
  RVec eigenvalues;   // ascending
  CMat eigenvectors;  // columns orthonormal
};

struct SvdFactors {
  CMat u;               // full left vectors
  RVec singular_values; // descending, nonnegative
  CMat v;               // full right vectors
};

// Eigendecomposition of a Hermitian matrix. The input is symmetrized as
// (A + A^H)/2; asymmetry beyond kHermitianTol (relative) is rejected.
HermitianEigen hermitian_eig(const CMat& a);

SvdFactors svd(const CMat& a);

// Moore-Penrose pseudoinverse; singular values below rank_tol * sigma_max
// are treated as zero.
CMat pseudoinverse(const CMat& a, double rank_tol = kDefaultRankTol);

// max{|lambda| : lambda in spectrum(a)}.
double spectral_radius(const CMat& a);

// Orthogonal projector onto the null space of `a` (identity minus the
// projector onto the row space).
CMat null_space_projector(const CMat& a, double rank_tol = kDefaultRankTol);

// Count of singular values above rank_tol * sigma_max.
int numerical_rank(const CMat& a, double rank_tol = kDefaultRankTol);

// sigma_max(a)^2 = rho(a^H a); cheaper and more accurate than forming a^H a.
double largest_squared_singular_value(const CMat& a);

}  // namespace iwfa
