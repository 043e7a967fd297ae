#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nsdp/cone.hpp"
#include "nsdp/symmat.hpp"

namespace nsdp {

/// Value in R ∪ {−∞, +∞}.
class ExtendedReal {
 public:
  enum class Kind { finite, plus_infinity, minus_infinity };

  static ExtendedReal finite(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("ExtendedReal::finite needs a finite value");
    return ExtendedReal(Kind::finite, v);
  }
  static ExtendedReal plus_infinity() { return ExtendedReal(Kind::plus_infinity, 0.0); }
  static ExtendedReal minus_infinity() { return ExtendedReal(Kind::minus_infinity, 0.0); }

  Kind kind() const noexcept { return kind_; }
  bool is_finite() const noexcept { return kind_ == Kind::finite; }

  double value() const {
    if (!is_finite()) throw std::logic_error("ExtendedReal: no finite value");
    return value_;
  }

  /// As a double, mapping the infinities to ±inf.
  double as_double() const noexcept {
    switch (kind_) {
      case Kind::plus_infinity: return std::numeric_limits<double>::infinity();
      case Kind::minus_infinity: return -std::numeric_limits<double>::infinity();
      case Kind::finite: break;
    }
    return value_;
  }

  friend bool operator==(const ExtendedReal&, const ExtendedReal&) = default;

 private:
  ExtendedReal(Kind k, double v) : kind_(k), value_(v) {}
  Kind kind_;
  double value_;
};

inline std::string to_string(ExtendedReal::Kind k) {
  switch (k) {
    case ExtendedReal::Kind::finite: return "finite";
    case ExtendedReal::Kind::plus_infinity: return "plus_infinity";
    case ExtendedReal::Kind::minus_infinity: return "minus_infinity";
  }
  return "unknown";
}

/**
 * Second subderivative of the indicator of S^m_+ at (Y, Y*) in direction V.
 *
 * Returns +inf when V leaves the tangent cone or ⟨Y*, V⟩ is negative beyond
 * tol·max(1, ‖Y*‖‖V‖); otherwise the closed form −2⟨Y*, V Y† V⟩. Throws
 * HypothesisError when Y* is not in N(Y), and AnomalyError when tolerance
 * drift yields ⟨Y*, V⟩ > 0 with V tangent (impossible for exact data).
 */
inline ExtendedReal second_subderivative(const OrderedEigenDecomposition& d,
                                         const SymMat& ystar, const SymMat& v, double tol) {
  if (ystar.dim() != d.dim() || v.dim() != d.dim()) {
    throw DimensionError("second_subderivative: dimension mismatch");
  }
  if (!normal_cone_contains(d, ystar, tol)) {
    throw HypothesisError("second_subderivative: Y* is not in the normal cone of S^m_+ at Y");
  }
  if (!tangent_cone_contains(d, v, tol)) return ExtendedReal::plus_infinity();

  const double ip = frobenius_inner(ystar, v);
  const double band = tol * std::max(1.0, ystar.norm() * v.norm());
  if (ip < -band) return ExtendedReal::plus_infinity();
  if (ip > band) {
    throw AnomalyError("second_subderivative: <Y*, V> > 0 for tangent V and normal Y*");
  }
  const Eigen::MatrixXd vd = v.dense();
  const Eigen::MatrixXd curv = vd * pseudoinverse(d).dense() * vd;
  return ExtendedReal::finite(-2.0 * (ystar.dense().cwiseProduct(curv)).sum());
}

namespace detail {

struct SchurBlocks {
  Eigen::MatrixXd ww;     // (V')^P_{ωω}
  Eigen::MatrixXd wp;     // (V')^P_{ωπ}
  Eigen::MatrixXd pivot;  // M_{ππ} + t (V')^P_{ππ}
};

inline SchurBlocks schur_blocks(const OrderedEigenDecomposition& d, const SymMat& v, double t) {
  const Eigen::MatrixXd c = conjugate_dense(v, d);
  SchurBlocks b;
  b.ww = submatrix(c, d.omega, d.omega);
  b.wp = submatrix(c, d.omega, d.pi);
  const auto np = static_cast<Eigen::Index>(d.pi.size());
  b.pivot = t * submatrix(c, d.pi, d.pi);
  for (Eigen::Index k = 0; k < np; ++k) {
    b.pivot(k, k) += d.eigenvalues(static_cast<Eigen::Index>(d.pi[static_cast<std::size_t>(k)]));
  }
  if (np > 0 && !(lambda_min(b.pivot) > d.rank_tol)) {
    throw HypothesisError("pivot block M_pp + t V_pp is not positive definite; t is too large");
  }
  return b;
}

/// t · B_{ωπ} [pivot]^{-1} B_{πω}
inline Eigen::MatrixXd schur_correction(const SchurBlocks& b, double t) {
  if (b.wp.size() == 0) return Eigen::MatrixXd::Zero(b.ww.rows(), b.ww.cols());
  const Eigen::MatrixXd solved = b.pivot.llt().solve(b.wp.transpose());
  const Eigen::MatrixXd corr = t * b.wp * solved;
  return 0.5 * (corr + corr.transpose());
}

}  // namespace detail

/**
 * Schur-complement test for Y + tV' ∈ S^m_+:
 * (V')^P_{ωω} − t (V')^P_{ωπ}[M_{ππ} + t (V')^P_{ππ}]^{-1}(V')^P_{πω} ⪰ 0 within tol.
 * Throws HypothesisError when the pivot block is not positive definite.
 */
inline bool schur_feasibility(const OrderedEigenDecomposition& d, const SymMat& vprime, double t,
                              double tol) {
  detail::require_psd_decomposition(d, "schur_feasibility");
  if (!(t > 0.0)) throw std::invalid_argument("schur_feasibility: t must be positive");
  const detail::SchurBlocks b = detail::schur_blocks(d, vprime, t);
  if (d.omega.empty()) return true;
  return is_psd_dense(b.ww - detail::schur_correction(b, t), tol);
}

/**
 * Element V_t of the recovery sequence: V with its ωω block (in the
 * eigenbasis) shifted by Δ_t = t V_{ωπ}[M_{ππ} + t V_{ππ}]^{-1} V_{πω}.
 * Y + t V_t is PSD and ‖V_t − V‖ = O(t).
 */
inline SymMat recovery_sequence(const OrderedEigenDecomposition& d, const SymMat& v, double t,
                                double tol = 1e-9) {
  if (!(t > 0.0)) throw std::invalid_argument("recovery_sequence: t must be positive");
  if (!tangent_cone_contains(d, v, tol)) {
    throw HypothesisError("recovery_sequence: V is not in the tangent cone");
  }
  const detail::SchurBlocks b = detail::schur_blocks(d, v, t);
  Eigen::MatrixXd c = conjugate_dense(v, d);
  const Eigen::MatrixXd delta = detail::schur_correction(b, t);
  for (std::size_t i = 0; i < d.omega.size(); ++i) {
    for (std::size_t j = 0; j < d.omega.size(); ++j) {
      c(static_cast<Eigen::Index>(d.omega[i]), static_cast<Eigen::Index>(d.omega[j])) +=
          delta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return unconjugate(c, d);
}

// ---------------------------------------------------------------------------
// Sampling oracle

/// Eight log-spaced steps 1e−1 … 1e−5.
inline std::vector<double> default_sampling_t_grid() {
  std::vector<double> grid;
  for (int k = 0; k < 8; ++k) grid.push_back(std::pow(10.0, -1.0 - 4.0 * k / 7.0));
  return grid;
}

struct SamplingOptions {
  std::vector<double> t_grid = default_sampling_t_grid();
  double radius = 1.0;
  int n_samples = 64;
  std::uint64_t seed = 0;
  double tol = 1e-9;
  std::optional<double> rank_tol;
};

/// Per-step record of the quotient −2⟨Y*, V'⟩/t over feasible V'.
struct SamplingLevel {
  double t = 0.0;
  std::optional<double> recovery_value;  // along V_t; empty if the pivot is singular at t
  double recovery_distance = 0.0;        // ‖V_t − V‖_F
  std::optional<double> min_value;       // over every feasible sample at t
  int feasible = 0;
};

struct SamplingEstimate {
  /// Minimum over sample families feasible at the two smallest steps, each
  /// family's quotient extrapolated linearly to t = 0.
  double value = 0.0;
  /// Plain minimum over all feasible (t, V') pairs.
  double raw_min = 0.0;
  /// Recovery-sequence quotient extrapolated to t = 0.
  std::optional<double> recovery_limit;
  std::vector<SamplingLevel> levels;  // sorted by increasing t
};

namespace detail {
inline double extrapolate_to_zero(double t1, double q1, double t2, double q2) {
  return q1 - t1 * (q2 - q1) / (t2 - t1);
}

inline Eigen::MatrixXd gaussian_symmetric(std::size_t m, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const auto n = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd z(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      z(i, j) = normal(rng);
      z(j, i) = z(i, j);
    }
  }
  return z;
}
}  // namespace detail

/**
 * Sampling estimate of the liminf of −2⟨Y*, V'⟩/t over t ↓ 0, V' → V with
 * Y + tV' ∈ S^m_+. Samples V itself, the recovery sequence V_t, and V + radius·t·Z
 * for fixed Gaussian symmetric draws Z (the same draws at every t). Plain
 * samples are kept only when Y + tV' passes a strict PSD test.
 *
 * Throws HypothesisError when the cone preconditions fail and
 * std::runtime_error when no feasible sample exists on the grid.
 */
inline SamplingEstimate estimate_subderivative_sampling(const SymMat& y, const SymMat& ystar,
                                                        const SymMat& v,
                                                        const SamplingOptions& opts = {}) {
  if (ystar.dim() != y.dim() || v.dim() != y.dim()) {
    throw DimensionError("estimate_subderivative_sampling: dimension mismatch");
  }
  if (opts.t_grid.empty()) throw std::invalid_argument("sampling oracle: empty t grid");
  if (opts.n_samples < 0) throw std::invalid_argument("sampling oracle: negative sample count");
  std::vector<double> grid = opts.t_grid;
  if (std::any_of(grid.begin(), grid.end(), [](double t) { return !(t > 0.0); })) {
    throw std::invalid_argument("sampling oracle: steps must be positive");
  }
  std::sort(grid.begin(), grid.end());

  const OrderedEigenDecomposition d = eigen_decompose(y, opts.rank_tol);
  detail::require_psd_decomposition(d, "estimate_subderivative_sampling");
  if (!normal_cone_contains(d, ystar, opts.tol)) {
    throw HypothesisError("sampling oracle: Y* is not in the normal cone");
  }
  if (!tangent_cone_contains(d, v, opts.tol)) {
    throw HypothesisError("sampling oracle: V is not in the tangent cone");
  }

  std::mt19937_64 rng(opts.seed);
  std::vector<Eigen::MatrixXd> draws;
  for (int s = 0; s < opts.n_samples; ++s) draws.push_back(detail::gaussian_symmetric(y.dim(), rng));

  const Eigen::MatrixXd yd = y.dense();
  const Eigen::MatrixXd vd = v.dense();
  const Eigen::MatrixXd sd = ystar.dense();
  auto quotient = [&](const Eigen::MatrixXd& vp, double t) {
    return -2.0 * sd.cwiseProduct(vp).sum() / t;
  };
  auto feasible = [&](const Eigen::MatrixXd& vp, double t) {
    return lambda_min(yd + t * vp) >= 0.0;
  };

  // Families: 0 = V, 1..n = V + radius·t·Z_s. Recovery is tracked separately.
  const std::size_t families = draws.size() + 1;
  std::vector<std::vector<std::optional<double>>> family_values(
      families, std::vector<std::optional<double>>(grid.size()));

  SamplingEstimate est;
  est.raw_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    SamplingLevel level;
    level.t = t;
    auto record = [&](double q) {
      level.min_value = level.min_value ? std::min(*level.min_value, q) : q;
      ++level.feasible;
    };
    try {
      const SymMat vt = recovery_sequence(d, v, t, opts.tol);
      const double q = quotient(vt.dense(), t);
      level.recovery_value = q;
      level.recovery_distance = (vt - v).norm();
      record(q);
    } catch (const HypothesisError&) {
      // pivot block singular at this step
    }
    for (std::size_t f = 0; f < families; ++f) {
      const Eigen::MatrixXd vp = f == 0 ? vd : Eigen::MatrixXd(vd + opts.radius * t * draws[f - 1]);
      if (!feasible(vp, t)) continue;
      const double q = quotient(vp, t);
      family_values[f][k] = q;
      record(q);
    }
    if (level.min_value) est.raw_min = std::min(est.raw_min, *level.min_value);
    est.levels.push_back(level);
  }
  if (!std::isfinite(est.raw_min)) {
    throw std::runtime_error("sampling oracle: no feasible sample on the t grid");
  }

  auto family_limit = [&](const std::optional<double>& q1,
                          const std::optional<double>& q2) -> std::optional<double> {
    if (!q1) return std::nullopt;
    if (grid.size() < 2) return *q1;
    if (!q2) return std::nullopt;
    return detail::extrapolate_to_zero(grid[0], *q1, grid[1], *q2);
  };

  std::optional<double> best;
  auto offer = [&](std::optional<double> q) {
    if (q) best = best ? std::min(*best, *q) : *q;
  };
  est.recovery_limit = family_limit(est.levels[0].recovery_value,
                                    grid.size() > 1 ? est.levels[1].recovery_value : std::nullopt);
  offer(est.recovery_limit);
  for (std::size_t f = 0; f < families; ++f) {
    offer(family_limit(family_values[f][0],
                       grid.size() > 1 ? family_values[f][1] : std::nullopt));
  }
  // No family survives at the smallest steps: fall back to the raw minimum.
  est.value = best.value_or(est.raw_min);
  return est;
}

}  // namespace nsdp
