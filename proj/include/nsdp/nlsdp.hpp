#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nsdp/errors.hpp"
#include "nsdp/symmat.hpp"

// Problem model for  min f(x)  s.t.  F(x) ⪰ 0  with a quadratic objective and
// an affine-quadratic matrix map, so every derivative is exact.

namespace nsdp {

/// f(x) = c + gᵀx + ½ xᵀ h x.
struct QuadraticScalar {
  double c = 0.0;
  Eigen::VectorXd g;
  Eigen::MatrixXd h;
};

/// F(x) = A0 + Σ x_i A_i + ½ Σ_ij x_i x_j B_ij with B_ij = B_ji.
class QuadraticMatrixMap {
 public:
  QuadraticMatrixMap() = default;

  /// Affine map (all B_ij zero).
  QuadraticMatrixMap(SymMat a0, std::vector<SymMat> a)
      : a0_(std::move(a0)), a_(std::move(a)) {
    const std::size_t n = a_.size();
    b_.assign(n * n, SymMat(a0_.dim()));
    validate();
  }

  /// `b` is n×n, row-major; must be symmetric in its two indices.
  QuadraticMatrixMap(SymMat a0, std::vector<SymMat> a, std::vector<std::vector<SymMat>> b)
      : a0_(std::move(a0)), a_(std::move(a)) {
    const std::size_t n = a_.size();
    if (b.size() != n) throw DimensionError("B must have n rows");
    for (const auto& row : b) {
      if (row.size() != n) throw DimensionError("B must have n columns");
      for (const auto& m : row) b_.push_back(m);
    }
    validate();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const double diff = (quad(i, j) - quad(j, i)).norm();
        if (diff > 1e-12 * std::max(1.0, quad(i, j).norm())) {
          throw std::invalid_argument("B is not symmetric in its vector indices");
        }
      }
    }
  }

  std::size_t n() const noexcept { return a_.size(); }
  std::size_t m() const noexcept { return a0_.dim(); }
  const SymMat& constant() const noexcept { return a0_; }
  const SymMat& linear(std::size_t i) const { return a_.at(i); }
  const SymMat& quad(std::size_t i, std::size_t j) const { return b_.at(i * n() + j); }
  bool is_affine() const {
    for (const auto& b : b_)
      for (double v : b.lower())
        if (v != 0.0) return false;
    return true;
  }

 private:
  void validate() const {
    for (const auto& a : a_)
      if (a.dim() != a0_.dim()) throw DimensionError("A_i must match A0 in dimension");
    for (const auto& b : b_)
      if (b.dim() != a0_.dim()) throw DimensionError("B_ij must match A0 in dimension");
  }

  SymMat a0_;
  std::vector<SymMat> a_;
  std::vector<SymMat> b_;
};

struct NlsdpProblem {
  std::size_t n = 0;
  std::size_t m = 0;
  QuadraticScalar f;
  QuadraticMatrixMap F;

  NlsdpProblem() = default;
  NlsdpProblem(QuadraticScalar f_, QuadraticMatrixMap F_)
      : n(F_.n()), m(F_.m()), f(std::move(f_)), F(std::move(F_)) {
    validate();
  }

  void validate() const {
    if (n == 0 || m == 0) throw DimensionError("problem dimensions must be positive");
    if (F.n() != n || F.m() != m) throw DimensionError("constraint map does not match (n, m)");
    if (static_cast<std::size_t>(f.g.size()) != n) throw DimensionError("g must have length n");
    if (static_cast<std::size_t>(f.h.rows()) != n || static_cast<std::size_t>(f.h.cols()) != n) {
      throw DimensionError("h must be n x n");
    }
    if (!f.g.allFinite() || !f.h.allFinite() || !std::isfinite(f.c)) {
      throw std::invalid_argument("objective has non-finite data");
    }
    if ((f.h - f.h.transpose()).norm() > 1e-12 * std::max(1.0, f.h.norm())) {
      throw std::invalid_argument("h is not symmetric");
    }
  }
};

namespace detail {
inline void require_len(const NlsdpProblem& p, const Eigen::VectorXd& x, const char* what) {
  if (static_cast<std::size_t>(x.size()) != p.n) {
    throw DimensionError(std::string(what) + " must have length n = " + std::to_string(p.n));
  }
}
}  // namespace detail

inline double eval_f(const NlsdpProblem& p, const Eigen::VectorXd& x) {
  detail::require_len(p, x, "x");
  return p.f.c + p.f.g.dot(x) + 0.5 * x.dot(p.f.h * x);
}

inline Eigen::VectorXd grad_f(const NlsdpProblem& p, const Eigen::VectorXd& x) {
  detail::require_len(p, x, "x");
  return p.f.g + p.f.h * x;
}

inline Eigen::MatrixXd hess_f(const NlsdpProblem& p) { return p.f.h; }

/// ∂F/∂x_i at x: A_i + Σ_j x_j B_ij.
inline SymMat partial_F(const NlsdpProblem& p, const Eigen::VectorXd& x, std::size_t i) {
  SymMat out = p.F.linear(i);
  for (std::size_t j = 0; j < p.n; ++j) {
    const double xj = x(static_cast<Eigen::Index>(j));
    if (xj != 0.0) out += xj * p.F.quad(i, j);
  }
  return out;
}

inline SymMat eval_F(const NlsdpProblem& p, const Eigen::VectorXd& x) {
  detail::require_len(p, x, "x");
  SymMat out = p.F.constant();
  for (std::size_t i = 0; i < p.n; ++i) {
    const double xi = x(static_cast<Eigen::Index>(i));
    if (xi == 0.0) continue;
    out += xi * p.F.linear(i);
    for (std::size_t j = 0; j < p.n; ++j) {
      const double xj = x(static_cast<Eigen::Index>(j));
      if (xj != 0.0) out += (0.5 * xi * xj) * p.F.quad(i, j);
    }
  }
  return out;
}

/// F'(x)u = Σ u_i (A_i + Σ_j x_j B_ij).
inline SymMat dF(const NlsdpProblem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  detail::require_len(p, x, "x");
  detail::require_len(p, u, "u");
  SymMat out(p.m);
  for (std::size_t i = 0; i < p.n; ++i) {
    const double ui = u(static_cast<Eigen::Index>(i));
    if (ui != 0.0) out += ui * partial_F(p, x, i);
  }
  return out;
}

/// F'(x)* Y*: component i is ⟨Y*, A_i + Σ_j x_j B_ij⟩.
inline Eigen::VectorXd adjoint_dF(const NlsdpProblem& p, const Eigen::VectorXd& x,
                                  const SymMat& ystar) {
  detail::require_len(p, x, "x");
  if (ystar.dim() != p.m) throw DimensionError("Y* must be m x m");
  Eigen::VectorXd out(static_cast<Eigen::Index>(p.n));
  for (std::size_t i = 0; i < p.n; ++i) {
    out(static_cast<Eigen::Index>(i)) = frobenius_inner(ystar, partial_F(p, x, i));
  }
  return out;
}

/// F''(x)[u, u] = Σ_ij u_i u_j B_ij (independent of x).
inline SymMat d2F(const NlsdpProblem& p, const Eigen::VectorXd& u) {
  detail::require_len(p, u, "u");
  SymMat out(p.m);
  for (std::size_t i = 0; i < p.n; ++i) {
    for (std::size_t j = 0; j < p.n; ++j) {
      const double w = u(static_cast<Eigen::Index>(i)) * u(static_cast<Eigen::Index>(j));
      if (w != 0.0) out += w * p.F.quad(i, j);
    }
  }
  return out;
}

/// ∇_x L^α(x, Y*) with L^α = α f + ⟨Y*, F⟩.
inline Eigen::VectorXd lagrangian_grad(const NlsdpProblem& p, double alpha,
                                       const Eigen::VectorXd& x, const SymMat& ystar) {
  if (alpha < 0.0) throw std::invalid_argument("lagrangian_grad: alpha must be nonnegative");
  return alpha * grad_f(p, x) + adjoint_dF(p, x, ystar);
}

/// (L^α)''_xx(x, Y*)[u, u] = α uᵀhu + Σ_ij u_i u_j ⟨Y*, B_ij⟩.
inline double lagrangian_hess_form(const NlsdpProblem& p, double alpha,
                                   const Eigen::VectorXd& x, const SymMat& ystar,
                                   const Eigen::VectorXd& u) {
  detail::require_len(p, x, "x");
  if (alpha < 0.0) throw std::invalid_argument("lagrangian_hess_form: alpha must be nonnegative");
  if (ystar.dim() != p.m) throw DimensionError("Y* must be m x m");
  return alpha * u.dot(p.f.h * u) + frobenius_inner(ystar, d2F(p, u));
}

}  // namespace nsdp
