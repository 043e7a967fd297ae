#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nsdp/errors.hpp"

namespace nsdp {

using IndexSet = std::vector<std::size_t>;

/// Orthogonality tolerance on ‖P Pᵀ − I‖_F for eigen decompositions.
inline constexpr double kOrthTol = 1e-10;
/// Relative reconstruction tolerance on ‖Pᵀ M P − Y‖_F.
inline constexpr double kReconTol = 1e-8;

/**
 * Dense real symmetric matrix stored by its lower triangle (row-major,
 * diagonal included). The upper triangle is never stored, so the matrix is
 * symmetric by construction. All entries are finite.
 */
class SymMat {
 public:
  SymMat() = default;

  explicit SymMat(std::size_t m) : m_(m), lower_(m * (m + 1) / 2, 0.0) {}

  static SymMat identity(std::size_t m) {
    SymMat out(m);
    for (std::size_t i = 0; i < m; ++i) out.set(i, i, 1.0);
    return out;
  }

  static SymMat diagonal(std::span<const double> diag) {
    SymMat out(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) out.set(i, i, diag[i]);
    return out;
  }

  static SymMat diagonal(std::initializer_list<double> diag) {
    return diagonal(std::span<const double>(diag.begin(), diag.size()));
  }

  static SymMat from_lower(std::size_t m, std::vector<double> lower) {
    if (lower.size() != m * (m + 1) / 2) {
      throw DimensionError("lower triangle of a " + std::to_string(m) + "x" +
                           std::to_string(m) + " matrix needs " +
                           std::to_string(m * (m + 1) / 2) + " entries, got " +
                           std::to_string(lower.size()));
    }
    for (double v : lower) check_finite(v);
    SymMat out;
    out.m_ = m;
    out.lower_ = std::move(lower);
    return out;
  }

  /// Builds from a dense square matrix; the symmetric part (A + Aᵀ)/2 is kept.
  static SymMat from_dense(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw DimensionError("matrix is not square");
    const auto m = static_cast<std::size_t>(a.rows());
    SymMat out(m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        out.set(i, j, 0.5 * (a(ii, jj) + a(jj, ii)));
      }
    }
    return out;
  }

  std::size_t dim() const noexcept { return m_; }

  double operator()(std::size_t i, std::size_t j) const {
    return lower_[index(i, j)];
  }

  void set(std::size_t i, std::size_t j, double value) {
    check_finite(value);
    lower_[index(i, j)] = value;
  }

  std::span<const double> lower() const noexcept { return lower_; }

  Eigen::MatrixXd dense() const {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::MatrixXd out(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        out(i, j) = v;
        out(j, i) = v;
      }
    }
    return out;
  }

  double norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        const double v = (*this)(i, j);
        s += (i == j ? 1.0 : 2.0) * v * v;
      }
    }
    return std::sqrt(s);
  }

  SymMat& operator+=(const SymMat& o) {
    require_same_dim(o);
    for (std::size_t k = 0; k < lower_.size(); ++k) lower_[k] += o.lower_[k];
    return *this;
  }
  SymMat& operator-=(const SymMat& o) {
    require_same_dim(o);
    for (std::size_t k = 0; k < lower_.size(); ++k) lower_[k] -= o.lower_[k];
    return *this;
  }
  SymMat& operator*=(double s) {
    for (double& v : lower_) v *= s;
    return *this;
  }

  friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
  friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
  friend SymMat operator*(SymMat a, double s) { return a *= s; }
  friend SymMat operator*(double s, SymMat a) { return a *= s; }
  friend SymMat operator-(SymMat a) { return a *= -1.0; }
  friend bool operator==(const SymMat&, const SymMat&) = default;

 private:
  static void check_finite(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite matrix entry");
  }

  void require_same_dim(const SymMat& o) const {
    if (o.m_ != m_) throw DimensionError("matrix dimensions differ");
  }

  std::size_t index(std::size_t i, std::size_t j) const {
    if (i >= m_ || j >= m_) throw std::out_of_range("SymMat index out of range");
    if (j > i) std::swap(i, j);
    return i * (i + 1) / 2 + j;
  }

  std::size_t m_ = 0;
  std::vector<double> lower_;
};

/// trace(ab) = Σ_ij a_ij b_ij.
inline double frobenius_inner(const SymMat& a, const SymMat& b) {
  if (a.dim() != b.dim()) throw DimensionError("frobenius_inner: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      s += (i == j ? 1.0 : 2.0) * a(i, j) * b(i, j);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigensolver

struct JacobiOptions {
  /// Stop once the off-diagonal Frobenius norm is below rel_threshold·‖A‖_F.
  double rel_threshold = 1e-12;
  int max_sweeps = 100;
  /// When set, the (p, q) pivot order inside each sweep is shuffled.
  std::optional<std::uint64_t> shuffle_seed;
};

struct SymmetricEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // columns are eigenvectors, A = V diag(values) Vᵀ
  int sweeps = 0;
};

/**
 * Eigenvalues and eigenvectors of a dense symmetric matrix by cyclic Jacobi
 * rotations. Only the symmetric part of `a` is used. Output is unsorted.
 */
inline SymmetricEigen jacobi_eigen(Eigen::MatrixXd a, const JacobiOptions& opts = {}) {
  if (a.rows() != a.cols()) throw DimensionError("jacobi_eigen: matrix is not square");
  const Eigen::Index n = a.rows();
  a = (0.5 * (a + a.transpose())).eval();
  SymmetricEigen out;
  out.vectors = Eigen::MatrixXd::Identity(n, n);

  std::vector<std::pair<Eigen::Index, Eigen::Index>> pivots;
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = p + 1; q < n; ++q) pivots.emplace_back(p, q);
  std::optional<std::mt19937_64> rng;
  if (opts.shuffle_seed) rng.emplace(*opts.shuffle_seed);

  const double target = opts.rel_threshold * a.norm();
  auto off_norm = [&] {
    double s = 0.0;
    for (const auto& [p, q] : pivots) s += 2.0 * a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; off_norm() > target; ++sweep) {
    if (sweep >= opts.max_sweeps) {
      throw ConvergenceError("Jacobi eigensolver did not converge in " +
                             std::to_string(opts.max_sweeps) + " sweeps");
    }
    if (rng) std::shuffle(pivots.begin(), pivots.end(), *rng);
    for (const auto& [p, q] : pivots) {
      const double apq = a(p, q);
      if (std::abs(apq) < std::numeric_limits<double>::min()) continue;
      const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
      double t;
      if (std::abs(theta) > 1e150) {
        t = 0.5 / theta;
      } else {
        t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      }
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double akp = a(k, p);
        const double akq = a(k, q);
        a(k, p) = c * akp - s * akq;
        a(k, q) = s * akp + c * akq;
      }
      for (Eigen::Index k = 0; k < n; ++k) {
        const double apk = a(p, k);
        const double aqk = a(q, k);
        a(p, k) = c * apk - s * aqk;
        a(q, k) = s * apk + c * aqk;
      }
      a(p, q) = 0.0;
      a(q, p) = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double vkp = out.vectors(k, p);
        const double vkq = out.vectors(k, q);
        out.vectors(k, p) = c * vkp - s * vkq;
        out.vectors(k, q) = s * vkp + c * vkq;
      }
    }
  }
  out.values = a.diagonal();
  out.sweeps = sweep;
  return out;
}

/// Smallest eigenvalue of a dense symmetric matrix; +inf for an empty matrix.
inline double lambda_min(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return std::numeric_limits<double>::infinity();
  if (a.rows() == 1) return a(0, 0);
  return jacobi_eigen(a).values.minCoeff();
}

/// Largest eigenvalue of a dense symmetric matrix; −inf for an empty matrix.
inline double lambda_max(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return -std::numeric_limits<double>::infinity();
  if (a.rows() == 1) return a(0, 0);
  return jacobi_eigen(a).values.maxCoeff();
}

// ---------------------------------------------------------------------------
// Ordered eigenvalue decomposition Y = Pᵀ M P

/**
 * Ordered eigenvalue decomposition Y = Pᵀ diag(eigenvalues) P with the
 * eigenvalues non-increasing. Rows of P are eigenvectors. `pi` holds the
 * indices of eigenvalues above rank_tol, `omega` those within ±rank_tol and
 * `negative` those below −rank_tol (non-empty means Y is not PSD).
 */
struct OrderedEigenDecomposition {
  SymMat source;
  Eigen::MatrixXd p;
  Eigen::VectorXd eigenvalues;
  IndexSet pi;
  IndexSet omega;
  IndexSet negative;
  double rank_tol = 0.0;

  std::size_t dim() const noexcept { return source.dim(); }
  bool is_psd() const noexcept { return negative.empty(); }
};

/// 1e−8 · max(1, largest |eigenvalue|).
inline double default_rank_tol(const Eigen::VectorXd& eigenvalues) {
  const double scale = eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
  return 1e-8 * std::max(1.0, scale);
}

inline OrderedEigenDecomposition eigen_decompose(const SymMat& y,
                                                 std::optional<double> rank_tol = std::nullopt,
                                                 const JacobiOptions& jacobi = {}) {
  if (rank_tol && !(*rank_tol > 0.0)) {
    throw std::invalid_argument("eigen_decompose: rank_tol must be positive");
  }
  const SymmetricEigen eig = jacobi_eigen(y.dense(), jacobi);
  const auto m = static_cast<Eigen::Index>(y.dim());

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return eig.values(a) > eig.values(b);
  });

  OrderedEigenDecomposition d;
  d.source = y;
  d.p.resize(m, m);
  d.eigenvalues.resize(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index col = order[static_cast<std::size_t>(r)];
    d.eigenvalues(r) = eig.values(col);
    d.p.row(r) = eig.vectors.col(col).transpose();
  }
  d.rank_tol = rank_tol.value_or(default_rank_tol(d.eigenvalues));
  for (Eigen::Index r = 0; r < m; ++r) {
    const double lam = d.eigenvalues(r);
    const auto idx = static_cast<std::size_t>(r);
    if (lam > d.rank_tol) {
      d.pi.push_back(idx);
    } else if (lam >= -d.rank_tol) {
      d.omega.push_back(idx);
    } else {
      d.negative.push_back(idx);
    }
  }
  return d;
}

/// A^P = P A Pᵀ as a dense matrix.
inline Eigen::MatrixXd conjugate_dense(const SymMat& a, const OrderedEigenDecomposition& d) {
  if (a.dim() != d.dim()) throw DimensionError("conjugate: dimension mismatch");
  return d.p * a.dense() * d.p.transpose();
}

/// A^P = P A Pᵀ.
inline SymMat conjugate(const SymMat& a, const OrderedEigenDecomposition& d) {
  return SymMat::from_dense(conjugate_dense(a, d));
}

/// Pᵀ B P, the inverse of conjugation; `b` is given in the eigenbasis.
inline SymMat unconjugate(const Eigen::MatrixXd& b, const OrderedEigenDecomposition& d) {
  if (b.rows() != static_cast<Eigen::Index>(d.dim()) || b.cols() != b.rows()) {
    throw DimensionError("unconjugate: dimension mismatch");
  }
  return SymMat::from_dense(d.p.transpose() * b * d.p);
}

/// Submatrix of a dense matrix keeping the listed rows and columns in order.
inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& a, const IndexSet& rows,
                                 const IndexSet& cols) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (rows[i] >= static_cast<std::size_t>(a.rows()) ||
          cols[j] >= static_cast<std::size_t>(a.cols())) {
        throw std::out_of_range("block index out of range");
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          a(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(cols[j]));
    }
  }
  return out;
}

/// A^P_{rows,cols}: block of the conjugated matrix.
inline Eigen::MatrixXd block(const SymMat& a, const OrderedEigenDecomposition& d,
                             const IndexSet& rows, const IndexSet& cols) {
  return submatrix(conjugate_dense(a, d), rows, cols);
}

/// Y† = Pᵀ M† P, inverting eigenvalues in π and zeroing those in ω.
inline SymMat pseudoinverse(const OrderedEigenDecomposition& d) {
  if (!d.is_psd()) {
    throw HypothesisError("pseudoinverse: decomposition has eigenvalues below -rank_tol");
  }
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(d.eigenvalues.size());
  for (std::size_t i : d.pi) {
    const auto k = static_cast<Eigen::Index>(i);
    inv(k) = 1.0 / d.eigenvalues(k);
  }
  return unconjugate(inv.asDiagonal().toDenseMatrix(), d);
}

}  // namespace nsdp
