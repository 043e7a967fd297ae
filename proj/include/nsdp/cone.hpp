#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nsdp/symmat.hpp"

// Membership, projection and the tangent/normal cones of the PSD cone.
// All membership tests are "within tol" relaxations of the exact cones.

namespace nsdp {

inline bool is_psd_dense(const Eigen::MatrixXd& a, double tol) {
  return lambda_min(a) >= -tol;
}

inline bool is_psd(const SymMat& a, double tol) {
  if (tol < 0.0) throw std::invalid_argument("is_psd: tol must be nonnegative");
  return is_psd_dense(a.dense(), tol);
}

/// Frobenius-nearest PSD matrix: eigenvalues clipped at zero.
inline SymMat project_psd(const SymMat& a) {
  const SymmetricEigen eig = jacobi_eigen(a.dense());
  const Eigen::VectorXd clipped = eig.values.cwiseMax(0.0);
  return SymMat::from_dense(eig.vectors * clipped.asDiagonal() * eig.vectors.transpose());
}

/// dist_{S^m_+}(a) = sqrt(Σ min(λ_i, 0)²).
inline double dist_psd(const SymMat& a) {
  const SymmetricEigen eig = jacobi_eigen(a.dense());
  return eig.values.cwiseMin(0.0).norm();
}

namespace detail {
inline void require_psd_decomposition(const OrderedEigenDecomposition& d, const char* who) {
  if (!d.is_psd()) {
    throw HypothesisError(std::string(who) + ": base point is not positive semidefinite");
  }
}
}  // namespace detail

/// V ∈ T(Y) iff V^P_{ωω} ⪰ 0. Interior points (ω = ∅) accept everything.
inline bool tangent_cone_contains(const OrderedEigenDecomposition& d, const SymMat& v,
                                  double tol) {
  detail::require_psd_decomposition(d, "tangent_cone_contains");
  if (d.omega.empty()) return true;
  return is_psd_dense(block(v, d, d.omega, d.omega), tol);
}

/// Y* ∈ N(Y) iff its ππ and πω blocks vanish and its ωω block is NSD.
inline bool normal_cone_contains(const OrderedEigenDecomposition& d, const SymMat& ystar,
                                 double tol) {
  detail::require_psd_decomposition(d, "normal_cone_contains");
  const Eigen::MatrixXd c = conjugate_dense(ystar, d);
  if (submatrix(c, d.pi, d.pi).norm() > tol) return false;
  if (submatrix(c, d.pi, d.omega).norm() > tol) return false;
  return lambda_max(submatrix(c, d.omega, d.omega)) <= tol;
}

/// Six log-spaced steps 1e−1 … 1e−6.
inline std::vector<double> default_tangent_t_grid() {
  return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
}

/**
 * Definition-based tangent cone test: the quotient dist(Y + tV)/t must fall
 * below max(tol, 10·t_min) at the two smallest grid steps. Independent of the
 * eigenbasis formula; meant as a test oracle.
 */
inline bool tangent_cone_contains_oracle(const SymMat& y, const SymMat& v,
                                         std::vector<double> t_grid, double tol) {
  if (y.dim() != v.dim()) throw DimensionError("tangent oracle: dimension mismatch");
  if (t_grid.size() < 2) throw std::invalid_argument("tangent oracle: need at least two steps");
  if (std::any_of(t_grid.begin(), t_grid.end(), [](double t) { return !(t > 0.0); })) {
    throw std::invalid_argument("tangent oracle: steps must be positive");
  }
  if (dist_psd(y) > std::max(tol, 1e-8 * std::max(1.0, y.norm()))) {
    throw HypothesisError("tangent oracle: base point is not positive semidefinite");
  }
  std::sort(t_grid.begin(), t_grid.end());
  const double threshold = std::max(tol, 10.0 * t_grid.front());
  for (std::size_t k = 0; k < 2; ++k) {
    const double t = t_grid[k];
    if (dist_psd(y + t * v) / t > threshold) return false;
  }
  return true;
}

}  // namespace nsdp
