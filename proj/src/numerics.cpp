#include "iwfa/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>

namespace iwfa {

HermitianEigen hermitian_eig(const CMat& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("hermitian_eig: matrix must be square");
  }
  const double scale = std::max(1.0, a.norm());
  if ((a - a.adjoint()).norm() > kHermitianTol * scale) {
    throw DomainError("hermitian_eig: input is not Hermitian within tolerance");
  }
  const CMat sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(sym);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eig: eigensolver failed to converge");
  }
  return {es.eigenvalues(), es.eigenvectors()};
}

SvdFactors svd(const CMat& a) {
  Eigen::JacobiSVD<CMat> s(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {s.matrixU(), s.singularValues(), s.matrixV()};
}

CMat pseudoinverse(const CMat& a, double rank_tol) {
  Eigen::JacobiSVD<CMat> s(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& sigma = s.singularValues();
  const double cutoff = sigma.size() > 0 ? rank_tol * sigma(0) : 0.0;
  RVec inv = RVec::Zero(sigma.size());
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff && sigma(i) > 0.0) inv(i) = 1.0 / sigma(i);
  }
  return s.matrixV() * inv.asDiagonal() * s.matrixU().adjoint();
}

double spectral_radius(const CMat& a) {
  if (a.rows() != a.cols()) {
    throw DimensionError("spectral_radius: matrix must be square");
  }
  if (a.size() == 0) return 0.0;
  Eigen::ComplexEigenSolver<CMat> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

CMat null_space_projector(const CMat& a, double rank_tol) {
  const Eigen::Index n = a.cols();
  if (a.size() == 0 || a.norm() == 0.0) return CMat::Identity(n, n);
  Eigen::JacobiSVD<CMat> s(a, Eigen::ComputeFullV);
  const RVec& sigma = s.singularValues();
  const double cutoff = rank_tol * sigma(0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) ++rank;
  }
  if (rank == n) return CMat::Zero(n, n);
  const CMat v_null = s.matrixV().rightCols(n - rank);
  return v_null * v_null.adjoint();
}

int numerical_rank(const CMat& a, double rank_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<CMat> s(a);
  const RVec& sigma = s.singularValues();
  if (sigma.size() == 0 || sigma(0) == 0.0) return 0;
  const double cutoff = rank_tol * sigma(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) ++rank;
  }
  return rank;
}

double largest_squared_singular_value(const CMat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMat> s(a);
  const double smax = s.singularValues()(0);
  return smax * smax;
}

}  // namespace iwfa
