#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "nsdp/cone.hpp"
#include "nsdp/nlsdp.hpp"
#include "nsdp/subderivative.hpp"
#include "nsdp/symmat.hpp"

namespace nsdp {

struct SoscOptions {
  double tol = 1e-9;
  std::optional<double> rank_tol;
  double cert_tol = 1e-7;
  double margin_tol = 1e-9;
  int n_dirs = 512;
  std::uint64_t seed = 0;
  int starts = 32;
  int max_iters = 200;
};

/// Generalized multiplier (α, Y*) for one critical direction.
struct MultiplierCandidate {
  double alpha = 0.0;
  SymMat ystar;
  double stationarity_residual = 0.0;  // ‖α∇f + F'(x̄)*Y*‖
  double normal_cone_slack = 0.0;      // worst violation of Y* ∈ N(F(x̄)) ∩ {F'(x̄)u}^⊥
};

struct MultiplierSearch {
  std::optional<MultiplierCandidate> candidate;
  /// max over unit null-space vectors of min(α, λ_min(−W)); −inf when the
  /// multiplier equations have only the trivial solution.
  double best_feasibility = -std::numeric_limits<double>::infinity();
  std::size_t null_dim = 0;
  bool capped = false;
  /// Margin maximization stopped at its iteration cap.
  bool margin_capped = false;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// ---------------------------------------------------------------------------
// Critical cone

inline OrderedEigenDecomposition constraint_decomposition(const NlsdpProblem& p,
                                                          const Eigen::VectorXd& xbar,
                                                          std::optional<double> rank_tol) {
  const SymMat fx = eval_F(p, xbar);
  OrderedEigenDecomposition d = eigen_decompose(fx, rank_tol);
  if (!d.is_psd()) {
    std::ostringstream msg;
    msg << "x̄ is infeasible: dist_psd(F(x̄)) = " << dist_psd(fx);
    throw HypothesisError(msg.str());
  }
  return d;
}

inline bool critical_cone_contains(const NlsdpProblem& p, const Eigen::VectorXd& xbar,
                                   const OrderedEigenDecomposition& d, const Eigen::VectorXd& u,
                                   double tol) {
  if (grad_f(p, xbar).dot(u) > tol * std::max(1.0, u.norm())) return false;
  return tangent_cone_contains(d, dF(p, xbar, u), tol);
}

/// u ∈ C(x̄): ∇f(x̄)ᵀu ≤ 0 and F'(x̄)u ∈ T(F(x̄)), both within tol.
inline bool critical_cone_contains(const NlsdpProblem& p, const Eigen::VectorXd& xbar,
                                   const Eigen::VectorXd& u, double tol,
                                   std::optional<double> rank_tol = std::nullopt) {
  return critical_cone_contains(p, xbar, constraint_decomposition(p, xbar, rank_tol), u, tol);
}

namespace detail {

inline std::vector<Eigen::VectorXd> direction_grid(std::size_t n) {
  std::vector<Eigen::VectorXd> out;
  const double deg = std::acos(-1.0) / 180.0;
  if (n == 2) {
    for (int k = 0; k < 180; ++k) {
      Eigen::VectorXd u(2);
      u << std::cos(2.0 * k * deg), std::sin(2.0 * k * deg);
      out.push_back(u);
    }
  } else if (n == 3) {
    for (int a = 0; a <= 18; ++a) {
      const double polar = 10.0 * a * deg;
      const int az_steps = (a == 0 || a == 18) ? 1 : 36;
      for (int b = 0; b < az_steps; ++b) {
        const double az = 10.0 * b * deg;
        Eigen::VectorXd u(3);
        u << std::sin(polar) * std::cos(az), std::sin(polar) * std::sin(az), std::cos(polar);
        out.push_back(u);
      }
    }
  }
  return out;
}

}  // namespace detail

/**
 * Unit directions in C(x̄): coordinate axes first, then the angular grid
 * (n = 2: 2°, n = 3: 10°), then n_dirs rejection samples from the uniform
 * sphere distribution. Directions within 1e−3 rad of an earlier one are
 * dropped. May be empty.
 */
inline std::vector<Eigen::VectorXd> sample_critical_directions(
    const NlsdpProblem& p, const Eigen::VectorXd& xbar, const OrderedEigenDecomposition& d,
    int n_dirs, std::uint64_t seed, double tol) {
  if (n_dirs < 1) throw std::invalid_argument("sample_critical_directions: n_dirs must be >= 1");
  const auto n = static_cast<Eigen::Index>(p.n);
  std::vector<Eigen::VectorXd> pool;
  for (Eigen::Index i = 0; i < n; ++i) {
    pool.push_back(Eigen::VectorXd::Unit(n, i));
    pool.push_back(-Eigen::VectorXd::Unit(n, i));
  }
  for (auto& u : detail::direction_grid(p.n)) pool.push_back(std::move(u));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < n_dirs; ++k) {
    Eigen::VectorXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = normal(rng);
    const double len = u.norm();
    if (len == 0.0) continue;
    pool.push_back(u / len);
  }

  const double min_cos = std::cos(1e-3);
  std::vector<Eigen::VectorXd> out;
  for (const auto& u : pool) {
    if (!critical_cone_contains(p, xbar, d, u, tol)) continue;
    const bool duplicate = std::any_of(out.begin(), out.end(),
                                       [&](const Eigen::VectorXd& w) { return w.dot(u) > min_cos; });
    if (!duplicate) out.push_back(u);
  }
  return out;
}

inline std::vector<Eigen::VectorXd> sample_critical_directions(const NlsdpProblem& p,
                                                               const Eigen::VectorXd& xbar,
                                                               int n_dirs, std::uint64_t seed,
                                                               double tol) {
  return sample_critical_directions(p, xbar, constraint_decomposition(p, xbar, std::nullopt),
                                    n_dirs, seed, tol);
}

// ---------------------------------------------------------------------------
// Multiplier search

namespace detail {

/**
 * Linear model of Λ^α(x̄, u) in the unknowns z = (α, w), where w are the
 * coordinates of W ∈ S^{|ω|} in an orthonormal basis and Y* = P_ωᵀ W P_ω.
 */
class MultiplierSystem {
 public:
  MultiplierSystem(const NlsdpProblem& p, const Eigen::VectorXd& xbar,
                   const OrderedEigenDecomposition& d, const Eigen::VectorXd& u, double null_tol)
      : r_(d.omega.size()) {
    p_omega_.resize(static_cast<Eigen::Index>(r_), static_cast<Eigen::Index>(d.dim()));
    for (std::size_t a = 0; a < r_; ++a) {
      p_omega_.row(static_cast<Eigen::Index>(a)) = d.p.row(static_cast<Eigen::Index>(d.omega[a]));
    }
    for (std::size_t a = 0; a < r_; ++a)
      for (std::size_t b = a; b < r_; ++b) pairs_.emplace_back(a, b);

    const std::size_t k_count = pairs_.size();
    const auto rows = static_cast<Eigen::Index>(p.n + 1);
    const auto cols = static_cast<Eigen::Index>(k_count + 1);
    Eigen::MatrixXd eq = Eigen::MatrixXd::Zero(rows, cols);
    margin_coef_ = Eigen::VectorXd::Zero(cols);

    const Eigen::VectorXd g = grad_f(p, xbar);
    eq.col(0).head(static_cast<Eigen::Index>(p.n)) = g;
    margin_coef_(0) = u.dot(p.f.h * u);

    const SymMat gdir = dF(p, xbar, u);
    const SymMat curvature = SymMat::from_dense(gdir.dense() * pseudoinverse(d).dense() * gdir.dense());
    const SymMat second = d2F(p, u);
    std::vector<SymMat> partials;
    for (std::size_t i = 0; i < p.n; ++i) partials.push_back(partial_F(p, xbar, i));

    for (std::size_t k = 0; k < k_count; ++k) {
      Eigen::VectorXd unit = Eigen::VectorXd::Zero(cols);
      unit(static_cast<Eigen::Index>(k + 1)) = 1.0;
      const SymMat bk = ystar(unit);
      const auto c = static_cast<Eigen::Index>(k + 1);
      for (std::size_t i = 0; i < p.n; ++i) {
        eq(static_cast<Eigen::Index>(i), c) = frobenius_inner(bk, partials[i]);
      }
      eq(rows - 1, c) = frobenius_inner(bk, gdir);
      margin_coef_(c) = frobenius_inner(bk, second) - 2.0 * frobenius_inner(bk, curvature);
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(eq, Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double threshold = null_tol * std::max(1.0, sv.size() ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > threshold) ++rank;
    null_basis_ = svd.matrixV().rightCols(cols - rank);
  }

  std::size_t null_dim() const { return static_cast<std::size_t>(null_basis_.cols()); }
  const Eigen::MatrixXd& null_basis() const { return null_basis_; }

  Eigen::MatrixXd w_matrix(const Eigen::VectorXd& z) const {
    const auto r = static_cast<Eigen::Index>(r_);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(r, r);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto [a, b] = pairs_[k];
      const double v = z(static_cast<Eigen::Index>(k + 1));
      const auto ia = static_cast<Eigen::Index>(a);
      const auto ib = static_cast<Eigen::Index>(b);
      if (a == b) {
        w(ia, ia) = v;
      } else {
        w(ia, ib) = v * inv_sqrt2;
        w(ib, ia) = v * inv_sqrt2;
      }
    }
    return w;
  }

  /// Inverse of w_matrix: coordinates of (α, W).
  Eigen::VectorXd coords(double alpha, const Eigen::MatrixXd& w) const {
    Eigen::VectorXd z(static_cast<Eigen::Index>(pairs_.size() + 1));
    z(0) = alpha;
    const double sqrt2 = std::sqrt(2.0);
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto [a, b] = pairs_[k];
      const double v = w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      z(static_cast<Eigen::Index>(k + 1)) = a == b ? v : sqrt2 * v;
    }
    return z;
  }

  /// e with ⟨e, z⟩ = α − tr W; positive on every nonzero (α ≥ 0, W ⪯ 0).
  Eigen::VectorXd normalization() const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pairs_.size() + 1));
    e(0) = 1.0;
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      if (pairs_[k].first == pairs_[k].second) e(static_cast<Eigen::Index>(k + 1)) = -1.0;
    }
    return e;
  }

  SymMat ystar(const Eigen::VectorXd& z) const {
    if (r_ == 0) return SymMat(static_cast<std::size_t>(p_omega_.cols()));
    return SymMat::from_dense(p_omega_.transpose() * w_matrix(z) * p_omega_);
  }

  /// min(α, λ_min(−W)) at z.
  double feasibility(const Eigen::VectorXd& z) const {
    return std::min(z(0), -lambda_max(w_matrix(z)));
  }

  double margin(const Eigen::VectorXd& z) const { return margin_coef_.dot(z); }
  const Eigen::VectorXd& margin_coef() const { return margin_coef_; }

 private:
  std::size_t r_;
  Eigen::MatrixXd p_omega_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  Eigen::MatrixXd null_basis_;
  Eigen::VectorXd margin_coef_;
};

struct AscentResult {
  Eigen::VectorXd c;
  double value = 0.0;
  bool capped = false;
};

/**
 * Coordinate ascent on the unit sphere: each iteration draws a random
 * orthonormal frame and tries ±step along each axis, halving the step when
 * no move improves. Stops early once `good_enough` is reached.
 */
template <class Objective>
AscentResult sphere_ascent(const Objective& objective, Eigen::VectorXd c, int max_iters,
                           std::mt19937_64& rng,
                           double good_enough = std::numeric_limits<double>::infinity()) {
  const Eigen::Index dim = c.size();
  c.normalize();
  AscentResult res{c, objective(c), false};
  double step = 0.5;
  std::normal_distribution<double> normal;
  for (int it = 0; it < max_iters; ++it) {
    if (step < 1e-10 || res.value >= good_enough) return res;
    Eigen::MatrixXd g(dim, dim);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
    const Eigen::MatrixXd frame = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    bool improved = false;
    for (Eigen::Index j = 0; j < dim; ++j) {
      for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd trial = res.c + sign * step * frame.col(j);
        const double len = trial.norm();
        if (len == 0.0) continue;
        trial /= len;
        const double v = objective(trial);
        if (v > res.value) {
          res.c = trial;
          res.value = v;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  res.capped = step >= 1e-10 && res.value < good_enough;
  return res;
}

/**
 * The normalized multiplier set {z in the null space : α ≥ 0, W ⪯ 0,
 * α − tr W = 1} as the intersection of an affine set A and a compact convex
 * set K, both with closed-form projections.
 */
class NormalizedMultiplierSets {
 public:
  NormalizedMultiplierSets(const MultiplierSystem& sys) : sys_(sys), e_(sys.normalization()) {
    a_ = sys.null_basis().transpose() * e_;
  }

  /// ‖Nᵀe‖ < 1/2 rules out any unit-norm (α ≥ 0, W ⪯ 0) in the null space,
  /// since such points have ⟨e, z⟩ ≥ ‖z‖.
  bool affine_empty() const { return a_.norm() < 0.5; }

  Eigen::VectorXd project_affine(const Eigen::VectorXd& x) const {
    const Eigen::MatrixXd& basis = sys_.null_basis();
    Eigen::VectorXd c = basis.transpose() * x;
    c += (1.0 - a_.dot(c)) / a_.squaredNorm() * a_;
    return basis * c;
  }

  /// P_K(x) = P_cone(x + μe) with μ chosen so that ⟨e, P⟩ = 1.
  Eigen::VectorXd project_cone(const Eigen::VectorXd& x) const {
    const SymmetricEigen eig = jacobi_eigen(sys_.w_matrix(x));
    // ⟨e, P_cone(x + μe)⟩ = Σ_j max(μ − b_j, 0) with b = {−α, λ_1, …}.
    std::vector<double> b{-x(0)};
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) b.push_back(eig.values(i));
    std::sort(b.begin(), b.end());
    double mu = 0.0, prefix = 0.0;
    for (std::size_t k = 1; k <= b.size(); ++k) {
      prefix += b[k - 1];
      mu = (1.0 + prefix) / static_cast<double>(k);
      if (k == b.size() || mu <= b[k]) break;
    }
    Eigen::VectorXd lam = eig.values;
    for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = std::min(lam(i) - mu, 0.0);
    const Eigen::MatrixXd w = eig.vectors * lam.asDiagonal() * eig.vectors.transpose();
    return sys_.coords(std::max(x(0) + mu, 0.0), w);
  }

  /// max over K of ⟨s, z⟩, attained at (1, O) or (0, −vvᵀ).
  double support(const Eigen::VectorXd& s) const {
    const Eigen::MatrixXd w = sys_.w_matrix(s);
    return std::max(s(0), w.size() ? -lambda_min(w) : -std::numeric_limits<double>::infinity());
  }

  Eigen::VectorXd start() const { return sys_.null_basis() * (a_ / a_.squaredNorm()); }

 private:
  const MultiplierSystem& sys_;
  Eigen::VectorXd e_;
  Eigen::VectorXd a_;
};

struct FeasibilityResult {
  std::optional<Eigen::VectorXd> point;  // in the null space, unit norm
  bool infeasible = false;               // separated from K by more than the tolerance
  bool capped = false;
};

/**
 * Alternating projections between A and K. Stops at a point of A within
 * `tol` of feasibility, or when the hyperplane through the current pair
 * certifies dist(A, K) > tol.
 */
inline FeasibilityResult convex_feasibility(const MultiplierSystem& sys, int max_iters, double tol) {
  FeasibilityResult out;
  const NormalizedMultiplierSets sets(sys);
  if (sets.affine_empty()) {
    out.infeasible = true;
    return out;
  }
  Eigen::VectorXd x = sets.start();
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd y = sets.project_cone(x);
    x = sets.project_affine(y);
    const Eigen::VectorXd unit = x.normalized();
    if (sys.feasibility(unit) >= -tol) {
      out.point = unit;
      return out;
    }
    // y − x is orthogonal to A, so ⟨s, ·⟩ is constant on A; a gap below that
    // constant over all of K separates the two sets.
    const Eigen::VectorXd s = x - y;
    const double len = s.norm();
    if (len > 0.0 && (s.dot(x) - sets.support(s)) / len > tol) {
      out.infeasible = true;
      return out;
    }
  }
  out.capped = true;
  return out;
}

struct MarginResult {
  Eigen::VectorXd point;  // in the null space
  bool converged = false;
};

/// ADMM for max ⟨c, z⟩ over A ∩ K, started from a point of K.
inline MarginResult convex_margin(const MultiplierSystem& sys, const Eigen::VectorXd& start,
                                  int max_iters, double tol) {
  const NormalizedMultiplierSets sets(sys);
  const Eigen::VectorXd& coef = sys.margin_coef();
  const double scale = coef.norm();
  const Eigen::VectorXd c = scale > 0.0 ? Eigen::VectorXd(coef / scale) : coef;
  Eigen::VectorXd y = sets.project_cone(start);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(y.size());
  MarginResult out;
  out.point = sets.project_affine(y);
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd z = sets.project_affine(y - u + c);
    const Eigen::VectorXd y_prev = y;
    y = sets.project_cone(z + u);
    u += z - y;
    out.point = z;
    if ((z - y).norm() <= tol && (y - y_prev).norm() <= tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Measures how far (α, Y*) is from satisfying the directional multiplier conditions.
inline MultiplierCandidate make_candidate(const NlsdpProblem& p, const Eigen::VectorXd& xbar,
                                          const OrderedEigenDecomposition& d,
                                          const Eigen::VectorXd& u, double alpha,
                                          const SymMat& ystar) {
  MultiplierCandidate c;
  c.alpha = alpha;
  c.ystar = ystar;
  c.stationarity_residual = lagrangian_grad(p, alpha, xbar, ystar).norm();
  const Eigen::MatrixXd conj = conjugate_dense(ystar, d);
  double slack = std::abs(frobenius_inner(ystar, dF(p, xbar, u)));
  slack = std::max(slack, submatrix(conj, d.pi, d.pi).norm());
  slack = std::max(slack, submatrix(conj, d.pi, d.omega).norm());
  slack = std::max(slack, lambda_max(submatrix(conj, d.omega, d.omega)));
  c.normal_cone_slack = std::max(slack, 0.0);
  return c;
}

/**
 * Searches Λ^α(x̄, u) for a nontrivial (α, Y*) with α ≥ 0 and Y* in the normal
 * cone, preferring the largest SOSC margin among those found. The returned
 * candidate is scaled to α = 1 when α > cert_tol, otherwise to unit norm.
 */
inline MultiplierSearch find_multiplier(const NlsdpProblem& p, const Eigen::VectorXd& xbar,
                                        const OrderedEigenDecomposition& d,
                                        const Eigen::VectorXd& u, const SoscOptions& opts,
                                        std::uint64_t stream = 0) {
  MultiplierSearch out;
  const detail::MultiplierSystem sys(p, xbar, d, u, 0.1 * opts.cert_tol);
  out.null_dim = sys.null_dim();
  if (out.null_dim == 0) return out;

  const Eigen::MatrixXd& basis = sys.null_basis();
  auto feas = [&](const Eigen::VectorXd& c) { return sys.feasibility(basis * c); };
  std::mt19937_64 rng(splitmix64(opts.seed ^ splitmix64(stream)));
  const auto dim = static_cast<Eigen::Index>(out.null_dim);

  // Phase 1: find any point with min(α, λ_min(−W)) ≥ −cert_tol.
  std::optional<Eigen::VectorXd> feasible_point;
  bool any_capped = false;
  std::vector<Eigen::VectorXd> start_points;
  for (Eigen::Index j = 0; j < dim; ++j) {
    start_points.push_back(Eigen::VectorXd::Unit(dim, j));
    start_points.push_back(-Eigen::VectorXd::Unit(dim, j));
  }
  std::normal_distribution<double> normal;
  while (static_cast<int>(start_points.size()) < std::max(opts.starts, 2)) {
    Eigen::VectorXd c(dim);
    for (Eigen::Index i = 0; i < dim; ++i) c(i) = normal(rng);
    if (c.norm() > 0.0) start_points.push_back(c.normalized());
  }
  for (const auto& start : start_points) {
    detail::AscentResult r;
    if (dim == 1) {
      r = {start, feas(start), false};
    } else {
      r = detail::sphere_ascent(feas, start, opts.max_iters, rng, 0.0);
    }
    out.best_feasibility = std::max(out.best_feasibility, r.value);
    any_capped = any_capped || r.capped;
    if (r.value >= -opts.cert_tol) {
      feasible_point = r.c;
      break;
    }
  }
  if (!feasible_point) {
    // The ascent can stall at a kink; settle the question on the convex set.
    const detail::FeasibilityResult fr =
        detail::convex_feasibility(sys, 20 * opts.max_iters, opts.cert_tol);
    if (!fr.point) {
      out.capped = fr.capped;
      return out;
    }
    feasible_point = basis.transpose() * *fr.point;
    out.best_feasibility = std::max(out.best_feasibility, feas(*feasible_point));
  }

  // Phase 2: push the margin up while staying in the cone (exact penalty).
  Eigen::VectorXd best = *feasible_point;
  double best_margin = sys.margin(basis * best);
  if (dim > 1) {
    const double rho = 100.0 * (1.0 + (basis.transpose() * sys.margin_coef()).norm());
    auto penalized = [&](const Eigen::VectorXd& c) {
      const Eigen::VectorXd z = basis * c;
      return sys.margin(z) + rho * std::min(0.0, sys.feasibility(z));
    };
    std::vector<Eigen::VectorXd> phase2_starts{best};
    for (int k = 0; k < std::min(opts.starts, 4); ++k) {
      Eigen::VectorXd c(dim);
      for (Eigen::Index i = 0; i < dim; ++i) c(i) = normal(rng);
      if (c.norm() > 0.0) phase2_starts.push_back(c.normalized());
    }
    for (const auto& start : phase2_starts) {
      const detail::AscentResult r = detail::sphere_ascent(penalized, start, opts.max_iters, rng);
      const Eigen::VectorXd z = basis * r.c;
      if (sys.feasibility(z) >= -opts.cert_tol && sys.margin(z) > best_margin) {
        best = r.c;
        best_margin = sys.margin(z);
      }
    }
  }
  if (dim > 1 && best_margin <= opts.margin_tol) {
    const detail::MarginResult mr =
        detail::convex_margin(sys, basis * best, 20 * opts.max_iters, 1e-10);
    out.margin_capped = !mr.converged;
    const Eigen::VectorXd c = (basis.transpose() * mr.point).normalized();
    const Eigen::VectorXd z = basis * c;
    if (sys.feasibility(z) >= -opts.cert_tol && sys.margin(z) > best_margin) {
      best = c;
      best_margin = sys.margin(z);
    }
  }
  out.best_feasibility = std::max(out.best_feasibility, feas(best));

  const Eigen::VectorXd z = basis * best;
  const double alpha = std::max(z(0), 0.0);
  const SymMat ystar = sys.ystar(z);
  auto within = [&](const MultiplierCandidate& c) {
    return c.stationarity_residual <= opts.cert_tol && c.normal_cone_slack <= opts.cert_tol;
  };
  if (alpha > opts.cert_tol) {
    MultiplierCandidate c = make_candidate(p, xbar, d, u, 1.0, (1.0 / alpha) * ystar);
    if (within(c)) {
      out.candidate = c;
      return out;
    }
  }
  const double len = std::sqrt(alpha * alpha + ystar.norm() * ystar.norm());
  MultiplierCandidate c = make_candidate(p, xbar, d, u, alpha / len, (1.0 / len) * ystar);
  if (within(c)) out.candidate = c;
  return out;
}

inline MultiplierSearch find_multiplier(const NlsdpProblem& p, const Eigen::VectorXd& xbar,
                                        const Eigen::VectorXd& u, const SoscOptions& opts = {}) {
  const OrderedEigenDecomposition d = constraint_decomposition(p, xbar, opts.rank_tol);
  if (!critical_cone_contains(p, xbar, d, u, opts.tol)) {
    throw HypothesisError("find_multiplier: u is not a critical direction");
  }
  return find_multiplier(p, xbar, d, u, opts);
}

// ---------------------------------------------------------------------------
// SOSC margin

struct MarginRoutes {
  double hessian_form = 0.0;       // (L^α)''_xx(x̄, Y*)[u, u]
  double curvature = 0.0;          // 2⟨Y*, G F(x̄)† G⟩, G = F'(x̄)u
  double margin = 0.0;             // hessian_form − curvature
  double subderivative = 0.0;      // d²δ(F(x̄), Y*)(G)
  double margin_subderivative = 0.0;  // hessian_form + subderivative
};

/**
 * Both routes to the SOSC margin. Throws AnomalyError when the second
 * subderivative comes out infinite although the closed form is finite.
 */
inline MarginRoutes sosc_margin_routes(const NlsdpProblem& p, const Eigen::VectorXd& xbar,
                                       const OrderedEigenDecomposition& d,
                                       const Eigen::VectorXd& u, const MultiplierCandidate& cand,
                                       double tol) {
  MarginRoutes r;
  const SymMat g = dF(p, xbar, u);
  r.hessian_form = lagrangian_hess_form(p, cand.alpha, xbar, cand.ystar, u);
  const Eigen::MatrixXd gd = g.dense();
  r.curvature = 2.0 * cand.ystar.dense().cwiseProduct(gd * pseudoinverse(d).dense() * gd).sum();
  r.margin = r.hessian_form - r.curvature;

  const double sub_tol = std::max(tol, cand.normal_cone_slack * (1.0 + 1e-6));
  const ExtendedReal sub = second_subderivative(d, cand.ystar, g, sub_tol);
  if (!sub.is_finite()) {
    throw AnomalyError("second subderivative is " + to_string(sub.kind()) +
                       " while the closed-form curvature term is finite");
  }
  r.subderivative = sub.value();
  r.margin_subderivative = r.hessian_form + r.subderivative;
  return r;
}

/// (L^α)''_xx(x̄, Y*)[u, u] − 2⟨Y*, (F'(x̄)u) F(x̄)† (F'(x̄)u)⟩.
inline double sosc_margin(const NlsdpProblem& p, const Eigen::VectorXd& xbar,
                          const Eigen::VectorXd& u, const MultiplierCandidate& cand,
                          std::optional<double> rank_tol = std::nullopt) {
  const OrderedEigenDecomposition d = constraint_decomposition(p, xbar, rank_tol);
  const Eigen::MatrixXd gd = dF(p, xbar, u).dense();
  const double curvature =
      2.0 * cand.ystar.dense().cwiseProduct(gd * pseudoinverse(d).dense() * gd).sum();
  return lagrangian_hess_form(p, cand.alpha, xbar, cand.ystar, u) - curvature;
}

// ---------------------------------------------------------------------------
// Sampled SOSC check

enum class SoscVerdict { verified_sampled, failed_at_direction, critical_cone_trivial, inconclusive };

inline std::string to_string(SoscVerdict v) {
  switch (v) {
    case SoscVerdict::verified_sampled: return "VERIFIED_SAMPLED";
    case SoscVerdict::failed_at_direction: return "FAILED_AT_DIRECTION";
    case SoscVerdict::critical_cone_trivial: return "CRITICAL_CONE_TRIVIAL";
    case SoscVerdict::inconclusive: return "INCONCLUSIVE";
  }
  return "UNKNOWN";
}

enum class DirectionStatus { certified, nonpositive_margin, no_multiplier, search_capped, anomaly };

inline std::string to_string(DirectionStatus s) {
  switch (s) {
    case DirectionStatus::certified: return "certified";
    case DirectionStatus::nonpositive_margin: return "nonpositive_margin";
    case DirectionStatus::no_multiplier: return "no_multiplier";
    case DirectionStatus::search_capped: return "search_capped";
    case DirectionStatus::anomaly: return "anomaly";
  }
  return "unknown";
}

struct DirectionResult {
  Eigen::VectorXd u;
  DirectionStatus status = DirectionStatus::no_multiplier;
  std::optional<MultiplierCandidate> candidate;
  std::optional<MarginRoutes> margin;
  double best_feasibility = -std::numeric_limits<double>::infinity();
  std::size_t null_dim = 0;
  std::string note;
};

struct Certificate {
  Eigen::VectorXd u;
  MultiplierCandidate candidate;
  double margin = 0.0;
};

struct SoscReport {
  SoscVerdict verdict = SoscVerdict::inconclusive;
  std::size_t directions_checked = 0;
  /// Minimum margin over checked directions; −inf if some direction has no
  /// multiplier, +inf if there are no directions.
  double min_margin = std::numeric_limits<double>::infinity();
  Eigen::VectorXd worst_direction;
  std::vector<Certificate> certificates;
  std::vector<DirectionResult> directions;
  Eigen::VectorXd constraint_eigenvalues;
  IndexSet pi;
  IndexSet omega;
  double rank_tol = 0.0;
  std::string diagnostics;
};

namespace detail {
// Lexicographic badness: no nontrivial multiplier < none in the cone < margin.
inline std::tuple<int, double> direction_key(const DirectionResult& r) {
  if (r.margin) return {2, r.margin->margin};
  if (r.null_dim == 0) return {0, 0.0};
  return {1, r.best_feasibility};
}
}  // namespace detail

/**
 * Checks the SOSC on sampled critical directions: for each direction a
 * multiplier is searched and the margin evaluated. VERIFIED_SAMPLED is a
 * statement about the sampled directions only.
 */
inline SoscReport check_sosc(const NlsdpProblem& p, const Eigen::VectorXd& xbar,
                             const SoscOptions& opts = {}) {
  const OrderedEigenDecomposition d = constraint_decomposition(p, xbar, opts.rank_tol);
  SoscReport rep;
  rep.constraint_eigenvalues = d.eigenvalues;
  rep.pi = d.pi;
  rep.omega = d.omega;
  rep.rank_tol = d.rank_tol;

  const auto dirs = sample_critical_directions(p, xbar, d, opts.n_dirs, opts.seed, opts.tol);
  rep.directions_checked = dirs.size();
  std::ostringstream diag;
  diag << "sampled verification over " << dirs.size()
       << " critical directions; not a proof over the whole critical cone.";
  if (dirs.empty()) {
    rep.verdict = SoscVerdict::critical_cone_trivial;
    diag << " No sampled unit direction lies in C(x̄).";
    rep.diagnostics = diag.str();
    return rep;
  }

  for (std::size_t i = 0; i < dirs.size(); ++i) {
    DirectionResult res;
    res.u = dirs[i];
    const MultiplierSearch search = find_multiplier(p, xbar, d, dirs[i], opts, i);
    res.null_dim = search.null_dim;
    res.best_feasibility = search.best_feasibility;
    res.candidate = search.candidate;
    if (!search.candidate) {
      res.status = search.capped ? DirectionStatus::search_capped : DirectionStatus::no_multiplier;
    } else {
      try {
        res.margin = sosc_margin_routes(p, xbar, d, dirs[i], *search.candidate, opts.tol);
        res.status = res.margin->margin > opts.margin_tol ? DirectionStatus::certified
                     : search.margin_capped               ? DirectionStatus::search_capped
                                                          : DirectionStatus::nonpositive_margin;
        rep.certificates.push_back({dirs[i], *search.candidate, res.margin->margin});
      } catch (const AnomalyError& e) {
        res.status = DirectionStatus::anomaly;
        res.note = e.what();
      }
    }
    rep.directions.push_back(std::move(res));
  }

  const DirectionResult* worst_failure = nullptr;
  const DirectionResult* worst_any = nullptr;
  bool undecided = false;
  for (const auto& r : rep.directions) {
    const bool definitive_failure = r.status == DirectionStatus::no_multiplier ||
                                    r.status == DirectionStatus::nonpositive_margin;
    undecided = undecided || r.status == DirectionStatus::search_capped ||
                r.status == DirectionStatus::anomaly;
    if (!worst_any || detail::direction_key(r) < detail::direction_key(*worst_any)) worst_any = &r;
    if (definitive_failure &&
        (!worst_failure || detail::direction_key(r) < detail::direction_key(*worst_failure))) {
      worst_failure = &r;
    }
    rep.min_margin = std::min(rep.min_margin, r.margin ? r.margin->margin
                                                       : -std::numeric_limits<double>::infinity());
  }

  if (worst_failure) {
    rep.verdict = SoscVerdict::failed_at_direction;
    rep.worst_direction = worst_failure->u;
    diag << " Failing direction status: " << to_string(worst_failure->status) << ".";
  } else if (undecided) {
    rep.verdict = SoscVerdict::inconclusive;
    rep.worst_direction = worst_any->u;
    diag << " Multiplier search hit its caps or a tolerance anomaly occurred.";
  } else {
    rep.verdict = SoscVerdict::verified_sampled;
    rep.worst_direction = worst_any->u;
  }
  rep.diagnostics = diag.str();
  return rep;
}

// ---------------------------------------------------------------------------
// Growth condition

struct GrowthReport {
  double epsilon = 0.0;
  double beta = 0.0;
  std::size_t samples = 0;
  std::size_t violations = 0;
  /// min over samples of max(f(x) − f(x̄), dist(F(x))) / ‖x − x̄‖²
  double min_ratio = std::numeric_limits<double>::infinity();
  // Restricted to samples with dist(F(x)) ≤ tol, ratio (f(x) − f(x̄)) / ‖x − x̄‖².
  std::size_t feasible_samples = 0;
  std::size_t feasible_violations = 0;
  double feasible_min_ratio = std::numeric_limits<double>::infinity();
};

/**
 * Empirical check of max(f(x) − f(x̄), dist(F(x))) ≥ β‖x − x̄‖² on B_ε(x̄):
 * n_samples uniform points in the ball, n_samples/10 on its boundary, and
 * ±ε·{1, 1/2, 1/10, 1/100} along each axis.
 */
inline GrowthReport verify_growth(const NlsdpProblem& p, const Eigen::VectorXd& xbar,
                                  double epsilon, double beta, int n_samples, std::uint64_t seed,
                                  double tol = 1e-9) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("verify_growth: epsilon must be positive");
  if (beta < 0.0) throw std::invalid_argument("verify_growth: beta must be nonnegative");
  if (n_samples < 0) throw std::invalid_argument("verify_growth: negative sample count");
  detail::require_len(p, xbar, "x̄");
  const auto n = static_cast<Eigen::Index>(p.n);

  std::vector<Eigen::VectorXd> offsets;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (double frac : {1.0, 0.5, 0.1, 0.01}) {
      offsets.push_back(frac * epsilon * Eigen::VectorXd::Unit(n, i));
      offsets.push_back(-frac * epsilon * Eigen::VectorXd::Unit(n, i));
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto random_unit = [&] {
    Eigen::VectorXd v(n);
    do {
      for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    } while (v.norm() == 0.0);
    return Eigen::VectorXd(v.normalized());
  };
  for (int k = 0; k < n_samples; ++k) {
    const double radius = epsilon * std::pow(uniform(rng), 1.0 / static_cast<double>(n));
    offsets.push_back(radius * random_unit());
  }
  for (int k = 0; k < n_samples / 10; ++k) offsets.push_back(epsilon * random_unit());

  GrowthReport rep;
  rep.epsilon = epsilon;
  rep.beta = beta;
  const double f0 = eval_f(p, xbar);
  for (const auto& h : offsets) {
    const double sq = h.squaredNorm();
    if (sq == 0.0) continue;
    const Eigen::VectorXd x = xbar + h;
    const double gap = eval_f(p, x) - f0;
    const double dist = dist_psd(eval_F(p, x));
    const double ratio = std::max(gap, dist) / sq;
    ++rep.samples;
    rep.min_ratio = std::min(rep.min_ratio, ratio);
    if (ratio < beta) ++rep.violations;
    if (dist <= tol) {
      const double fratio = gap / sq;
      ++rep.feasible_samples;
      rep.feasible_min_ratio = std::min(rep.feasible_min_ratio, fratio);
      if (fratio < beta) ++rep.feasible_violations;
    }
  }
  return rep;
}

}  // namespace nsdp
