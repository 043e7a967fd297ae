#include <gtest/gtest.h>

#include "nsdp/nlsdp.hpp"
#include "support/instances.hpp"

using namespace nsdp;
namespace fx = nsdp::testing;
using fx::Rng;

TEST(Nlsdp, FixtureEvaluations) {
  const NlsdpProblem p = fx::fixture_p1();
  const Eigen::Vector2d x(0.5, 2.0);
  EXPECT_DOUBLE_EQ(eval_f(p, x), 2.0);
  EXPECT_TRUE(grad_f(p, x).isApprox(Eigen::Vector2d(0, 1)));
  EXPECT_TRUE(eval_F(p, x).dense().isApprox(SymMat::from_lower(2, {1, 0.5, 2}).dense()));
  EXPECT_TRUE(dF(p, x, Eigen::Vector2d(1, 0)).dense().isApprox(SymMat::from_lower(2, {0, 1, 0}).dense()));
  EXPECT_EQ(d2F(p, Eigen::Vector2d(1, 1)).norm(), 0.0);
  EXPECT_TRUE(p.F.is_affine());
}

TEST(Nlsdp, AdjointOfFixture) {
  const NlsdpProblem p = fx::fixture_p1();
  // ⟨diag(0,−1), A_1⟩ = 0, ⟨diag(0,−1), A_2⟩ = −1
  const Eigen::VectorXd adj = adjoint_dF(p, Eigen::Vector2d::Zero(), SymMat::diagonal({0, -1}));
  EXPECT_TRUE(adj.isApprox(Eigen::Vector2d(0, -1)));
  EXPECT_LE(lagrangian_grad(p, 1.0, Eigen::Vector2d::Zero(), SymMat::diagonal({0, -1})).norm(), 1e-15);
}

TEST(Nlsdp, QuadraticTermsEnterAsHalfSum) {
  QuadraticScalar f;
  f.g = Eigen::VectorXd::Zero(1);
  f.h = Eigen::MatrixXd::Constant(1, 1, 4.0);
  const QuadraticMatrixMap F(SymMat(1), {SymMat::identity(1)}, {{SymMat::diagonal({2.0})}});
  const NlsdpProblem p(f, F);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 3.0);
  EXPECT_DOUBLE_EQ(eval_f(p, x), 18.0);          // ½·4·9
  EXPECT_DOUBLE_EQ(eval_F(p, x)(0, 0), 12.0);    // 3 + ½·2·9
  EXPECT_DOUBLE_EQ(partial_F(p, x, 0)(0, 0), 7.0);
  EXPECT_DOUBLE_EQ(lagrangian_hess_form(p, 1.0, x, SymMat::diagonal({-1.0}), Eigen::VectorXd::Ones(1)),
                   2.0);
}

TEST(Nlsdp, Validation) {
  QuadraticScalar f;
  f.g = Eigen::VectorXd::Zero(2);
  f.h = Eigen::MatrixXd::Zero(1, 1);
  EXPECT_THROW(NlsdpProblem(f, QuadraticMatrixMap(SymMat(2), {SymMat(2), SymMat(2)})), DimensionError);
  f.h = (Eigen::MatrixXd(2, 2) << 0, 1, 0, 0).finished();
  EXPECT_THROW(NlsdpProblem(f, QuadraticMatrixMap(SymMat(2), {SymMat(2), SymMat(2)})),
               std::invalid_argument);
  EXPECT_THROW(QuadraticMatrixMap(SymMat(2), {SymMat(3)}), DimensionError);
  EXPECT_THROW(QuadraticMatrixMap(SymMat(1), {SymMat(1), SymMat(1)},
                                  {{SymMat(1), SymMat::identity(1)}, {SymMat(1), SymMat(1)}}),
               std::invalid_argument);
  const NlsdpProblem p = fx::fixture_p1();
  EXPECT_THROW(eval_f(p, Eigen::VectorXd::Zero(3)), DimensionError);
  EXPECT_THROW(lagrangian_grad(p, -1.0, Eigen::Vector2d::Zero(), SymMat(2)), std::invalid_argument);
}

TEST(NlsdpProperties, DerivativesMatchFiniteDifferences) {
  Rng rng(51);
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = static_cast<std::size_t>(fx::uniform_int(rng, 1, 6));
    const std::size_t m = static_cast<std::size_t>(fx::uniform_int(rng, 1, 6));
    const NlsdpProblem p = fx::random_problem(rng, n, m);
    const Eigen::VectorXd x = fx::gaussian(rng, static_cast<Eigen::Index>(n), 1);
    const Eigen::VectorXd u = fx::gaussian(rng, static_cast<Eigen::Index>(n), 1);
    const SymMat ystar = fx::random_symmat(rng, m);
    const double alpha = fx::uniform(rng, 0.0, 2.0);
    EXPECT_LE((lagrangian_grad(p, alpha, x, ystar) - fx::fd_gradient(p, alpha, x, ystar)).norm(), 1e-5);
    EXPECT_NEAR(lagrangian_hess_form(p, alpha, x, ystar, u),
                fx::fd_second_directional(p, alpha, x, ystar, u), 1e-5);
  }
}

TEST(NlsdpProperties, AdjointIdentity) {
  Rng rng(53);
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = static_cast<std::size_t>(fx::uniform_int(rng, 1, 6));
    const std::size_t m = static_cast<std::size_t>(fx::uniform_int(rng, 1, 6));
    const NlsdpProblem p = fx::random_problem(rng, n, m);
    const Eigen::VectorXd x = fx::gaussian(rng, static_cast<Eigen::Index>(n), 1);
    const Eigen::VectorXd u = fx::gaussian(rng, static_cast<Eigen::Index>(n), 1);
    const SymMat ystar = fx::random_symmat(rng, m);
    EXPECT_NEAR(frobenius_inner(ystar, dF(p, x, u)), adjoint_dF(p, x, ystar).dot(u), 1e-12);
  }
}

TEST(NlsdpProperties, SecondOrderTaylorIsExact) {
  Rng rng(57);
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = static_cast<std::size_t>(fx::uniform_int(rng, 1, 5));
    const std::size_t m = static_cast<std::size_t>(fx::uniform_int(rng, 1, 5));
    const NlsdpProblem p = fx::random_problem(rng, n, m);
    const Eigen::VectorXd x = fx::gaussian(rng, static_cast<Eigen::Index>(n), 1);
    const Eigen::VectorXd u = fx::gaussian(rng, static_cast<Eigen::Index>(n), 1);
    const SymMat taylor = eval_F(p, x) + dF(p, x, u) + 0.5 * d2F(p, u);
    EXPECT_LE((eval_F(p, x + u) - taylor).norm(), 1e-12 * std::max(1.0, taylor.norm()));
    const double f_taylor = eval_f(p, x) + grad_f(p, x).dot(u) + 0.5 * u.dot(hess_f(p) * u);
    EXPECT_NEAR(eval_f(p, x + u), f_taylor, 1e-12 * std::max(1.0, std::abs(f_taylor)));
  }
}
