#pragma once

// Random instance generators, fixtures and independent oracles shared by the
// unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "nsdp/nlsdp.hpp"
#include "nsdp/symmat.hpp"

namespace nsdp::testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(rows, cols);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  return g;
}

inline Eigen::MatrixXd random_orthogonal(Rng& rng, Eigen::Index m) {
  return Eigen::HouseholderQR<Eigen::MatrixXd>(gaussian(rng, m, m)).householderQ();
}

/// Entries uniform in [lo, hi].
inline SymMat random_symmat(Rng& rng, std::size_t m, double lo = -1.0, double hi = 1.0) {
  SymMat a(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= i; ++j) a.set(i, j, uniform(rng, lo, hi));
  return a;
}

/// Gᵀ G with G having `rank` rows.
inline SymMat random_gram(Rng& rng, std::size_t m, std::size_t rank) {
  if (rank == 0) return SymMat(m);
  const Eigen::MatrixXd g = gaussian(rng, static_cast<Eigen::Index>(rank), static_cast<Eigen::Index>(m));
  return SymMat::from_dense(g.transpose() * g);
}

/// Exactly-ranked PSD matrix Qᵀ diag(λ) Q with λ_i ∈ [lo, hi] for i < rank, 0 after.
struct RankedPsd {
  SymMat y;
  Eigen::MatrixXd q;  // rows are eigenvectors
  std::size_t rank = 0;
};

inline RankedPsd random_psd(Rng& rng, std::size_t m, std::size_t rank, double lo = 0.5,
                            double hi = 2.0) {
  RankedPsd out;
  out.rank = rank;
  out.q = random_orthogonal(rng, static_cast<Eigen::Index>(m));
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < rank; ++i) lam(static_cast<Eigen::Index>(i)) = uniform(rng, lo, hi);
  out.y = SymMat::from_dense(out.q.transpose() * lam.asDiagonal() * out.q);
  return out;
}

/// Embeds a |ω|×|ω| block into the trailing corner of an m×m eigenbasis matrix.
inline Eigen::MatrixXd omega_embed(const Eigen::MatrixXd& w, std::size_t m) {
  const auto mm = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(mm, mm);
  out.bottomRightCorner(w.rows(), w.cols()) = w;
  return out;
}

/**
 * (Y, Y*, V) with Y PSD, Y* ∈ N(Y), V ∈ T(Y) and ⟨Y*, V⟩ = 0: inside the
 * ω-eigenspace, W = −(PSD on the first s coordinates) and V_ωω = PSD on the
 * remaining ones, both rotated by the same random orthogonal R.
 */
struct Triple {
  SymMat y, ystar, v;
  std::size_t rank = 0;
};

inline Triple random_valid_triple(Rng& rng, std::size_t m) {
  const std::size_t rank = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(m)));
  const RankedPsd base = random_psd(rng, m, rank);
  const auto r = static_cast<Eigen::Index>(m - rank);
  const auto s = r == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(uniform_int(rng, 0, static_cast<int>(r)));

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(r, r);
  Eigen::MatrixXd vww = Eigen::MatrixXd::Zero(r, r);
  if (s > 0) {
    const Eigen::MatrixXd g = gaussian(rng, uniform_int(rng, 1, static_cast<int>(s)), s);
    w.topLeftCorner(s, s) = -(g.transpose() * g);
  }
  if (r - s > 0) {
    const Eigen::MatrixXd g = gaussian(rng, uniform_int(rng, 1, static_cast<int>(r - s)), r - s);
    vww.bottomRightCorner(r - s, r - s) = g.transpose() * g;
  }
  if (r > 0) {
    const Eigen::MatrixXd rot = random_orthogonal(rng, r);
    w = rot.transpose() * w * rot;
    vww = rot.transpose() * vww * rot;
  }

  Eigen::MatrixXd vp = random_symmat(rng, m).dense();
  vp.bottomRightCorner(r, r) = vww;
  Triple t;
  t.rank = rank;
  t.y = base.y;
  t.ystar = SymMat::from_dense(base.q.transpose() * omega_embed(w, m) * base.q);
  t.v = SymMat::from_dense(base.q.transpose() * vp * base.q);
  return t;
}

// ---------------------------------------------------------------------------
// Fixtures

/// min x₂ s.t. [[1, x₁], [x₁, x₂]] ⪰ 0; `sign` = −1 gives the negated objective.
inline NlsdpProblem fixture_p1(double sign = 1.0) {
  QuadraticScalar f;
  f.g = Eigen::Vector2d(0.0, sign);
  f.h = Eigen::Matrix2d::Zero();
  QuadraticMatrixMap F(SymMat::diagonal({1.0, 0.0}),
                       {SymMat::from_lower(2, {0.0, 1.0, 0.0}), SymMat::diagonal({0.0, 1.0})});
  return NlsdpProblem(f, F);
}

/// min x s.t. diag(x, x) ⪰ 0.
inline NlsdpProblem fixture_trivial_cone() {
  QuadraticScalar f;
  f.g = Eigen::VectorXd::Ones(1);
  f.h = Eigen::MatrixXd::Zero(1, 1);
  QuadraticMatrixMap F(SymMat(2), {SymMat::identity(2)});
  return NlsdpProblem(f, F);
}

/// Random quadratic objective and affine-quadratic constraint map.
inline NlsdpProblem random_problem(Rng& rng, std::size_t n, std::size_t m, bool quadratic = true) {
  QuadraticScalar f;
  f.c = uniform(rng, -1.0, 1.0);
  f.g = gaussian(rng, static_cast<Eigen::Index>(n), 1);
  const Eigen::MatrixXd h = gaussian(rng, static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  f.h = 0.5 * (h + h.transpose());
  std::vector<SymMat> a;
  for (std::size_t i = 0; i < n; ++i) a.push_back(random_symmat(rng, m));
  if (!quadratic) return NlsdpProblem(f, QuadraticMatrixMap(random_symmat(rng, m), a));
  std::vector<std::vector<SymMat>> b(n, std::vector<SymMat>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      b[i][j] = random_symmat(rng, m);
      b[j][i] = b[i][j];
    }
  }
  return NlsdpProblem(f, QuadraticMatrixMap(random_symmat(rng, m), a, b));
}

// ---------------------------------------------------------------------------
// Oracles

/// trace(A B) on dense copies.
inline double trace_product(const SymMat& a, const SymMat& b) {
  return (a.dense() * b.dense()).trace();
}

/// φ(x) = α f(x) + ⟨Y*, F(x)⟩ evaluated from values only.
inline double lagrangian_value(const NlsdpProblem& p, double alpha, const Eigen::VectorXd& x,
                               const SymMat& ystar) {
  return alpha * eval_f(p, x) + trace_product(ystar, eval_F(p, x));
}

inline Eigen::VectorXd fd_gradient(const NlsdpProblem& p, double alpha, const Eigen::VectorXd& x,
                                   const SymMat& ystar, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (lagrangian_value(p, alpha, xp, ystar) - lagrangian_value(p, alpha, xm, ystar)) / (2 * h);
  }
  return g;
}

inline double fd_second_directional(const NlsdpProblem& p, double alpha, const Eigen::VectorXd& x,
                                    const SymMat& ystar, const Eigen::VectorXd& u,
                                    double h = 1e-3) {
  return (lagrangian_value(p, alpha, x + h * u, ystar) - 2.0 * lagrangian_value(p, alpha, x, ystar) +
          lagrangian_value(p, alpha, x - h * u, ystar)) /
         (h * h);
}

/// Angle between two nonzero vectors.
inline double angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace nsdp::testing
