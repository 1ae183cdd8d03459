#include "hinfpath/analysis.hpp"

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "support/random_systems.hpp"

namespace hinfpath {
namespace {

using test::Rng;

ClosedLoop scalar_sys(double a, double b, double c, double d) {
  return ClosedLoop(Eigen::MatrixXd::Constant(1, 1, a),
                    Eigen::MatrixXd::Constant(1, 1, b),
                    Eigen::MatrixXd::Constant(1, 1, c),
                    Eigen::MatrixXd::Constant(1, 1, d));
}

Plant example1_plant(double a = 1.0) {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
  return Plant(Eigen::MatrixXd::Constant(1, 1, a), one, one, one, one,
               Eigen::MatrixXd::Zero(1, 1), one, one);
}

Controller scalar_k(double a, double b, double c, double d) {
  return Controller{Eigen::MatrixXd::Constant(1, 1, a),
                    Eigen::MatrixXd::Constant(1, 1, b),
                    Eigen::MatrixXd::Constant(1, 1, c),
                    Eigen::MatrixXd::Constant(1, 1, d)};
}

TEST(HinfNorm, FirstOrderLag) {
  const NormResult r = hinf_norm(scalar_sys(-1.0, 1.0, 1.0, 0.0));
  EXPECT_NEAR(r.value, 1.0, 1e-6);
  EXPECT_LE(r.lo, r.value);
  EXPECT_LE(r.value, r.hi + 1e-16);
  EXPECT_LE(r.hi - r.lo, 1e-6 * std::max(1.0, r.hi));
}

TEST(HinfNorm, PureFeedthrough) {
  const NormResult r = hinf_norm(scalar_sys(-1.0, 0.0, 0.0, 2.0));
  // value is the bisection's upper bracket end, within the relative width.
  EXPECT_NEAR(r.value, 2.0, 2.0 * 1e-6 * 2.0);
  EXPECT_LE(r.lo, 2.0 + 1e-12);
}

TEST(HinfNorm, Example1MatchesGridOracle) {
  const ClosedLoop cl =
      close_loop(example1_plant(), scalar_k(-2.0, -2.0, 2.0, 0.0));
  const NormResult r = hinf_norm(cl);
  EXPECT_LT(r.value, 3.33);
  const double grid = test::hinf_grid_lower_bound(cl, 100000);
  EXPECT_GE(r.hi, grid - 1e-9);
  EXPECT_LE(r.hi, grid * (1.0 + 5e-3));
}

TEST(HinfNorm, RejectsUnstable) {
  EXPECT_THROW(hinf_norm(scalar_sys(0.5, 1.0, 1.0, 0.0)), PreconditionError);
}

TEST(HinfNorm, GridOracleAgreementRandom) {
  Rng rng(101);
  int tested = 0;
  while (tested < 15) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(tested % 5);
    const ClosedLoop sys(test::rand_stable_a(rng, n, 0.4),
                         test::rand_matrix(rng, n, 2),
                         test::rand_matrix(rng, 2, n),
                         test::rand_matrix(rng, 2, 2, 0.3));
    const NormResult r = hinf_norm(sys);
    const double grid = test::hinf_grid_lower_bound(sys, 100000);
    EXPECT_GE(r.hi, grid - 1e-9);
    EXPECT_LE(r.hi, grid * (1.0 + 5e-3));
    ++tested;
  }
}

TEST(HinfBelow, ConsistentWithNorm) {
  Rng rng(102);
  const ClosedLoop sys(test::rand_stable_a(rng, 4), test::rand_matrix(rng, 4, 1),
                       test::rand_matrix(rng, 1, 4),
                       Eigen::MatrixXd::Zero(1, 1));
  const NormResult r = hinf_norm(sys);
  EXPECT_TRUE(hinf_below(sys, r.hi * 1.01));
  EXPECT_FALSE(hinf_below(sys, r.lo * 0.99));
}

TEST(H2NormSquared, FirstOrderLag) {
  EXPECT_NEAR(h2_norm_squared(scalar_sys(-1.0, 1.0, 1.0, 0.0)), 0.5, 1e-12);
}

TEST(H2NormSquared, TwoDecoupledLags) {
  const ClosedLoop sys(-Eigen::MatrixXd::Identity(2, 2),
                       Eigen::MatrixXd::Identity(2, 2),
                       Eigen::MatrixXd::Identity(2, 2),
                       Eigen::MatrixXd::Zero(2, 2));
  EXPECT_NEAR(h2_norm_squared(sys), 1.0, 1e-12);
}

TEST(H2NormSquared, MatchesQuadratureOracle) {
  Rng rng(103);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 4;
    const ClosedLoop sys(test::rand_stable_a(rng, n, 0.4),
                         test::rand_matrix(rng, n, 2),
                         test::rand_matrix(rng, 1, n),
                         Eigen::MatrixXd::Zero(1, 2));
    const double gramian = h2_norm_squared(sys);
    const double quad = test::h2_squared_quadrature(sys);
    EXPECT_NEAR(gramian, quad, 1e-4 * std::max(1.0, gramian));
  }
}

TEST(H2NormSquared, NonzeroFeedthroughRejected) {
  EXPECT_THROW(h2_norm_squared(scalar_sys(-1.0, 1.0, 1.0, 0.5)),
               InvalidInputError);
}

TEST(InCstab, Example1Cases) {
  const Plant plant = example1_plant();
  EXPECT_TRUE(in_cstab(plant, scalar_k(-2.0, -2.0, 2.0, 0.0)));
  EXPECT_FALSE(in_cstab(plant, scalar_k(-2.0, 0.0, 0.0, 0.0)));
}

TEST(InKgamma, Example1Memberships) {
  const Plant plant = example1_plant();
  EXPECT_TRUE(in_kgamma(plant, scalar_k(-2.0, -2.0, 2.0, 0.0), 3.33));
  EXPECT_TRUE(in_kgamma(plant, scalar_k(-2.0, 2.0, -2.0, 0.0), 3.33));
  EXPECT_FALSE(in_kgamma(plant, scalar_k(-2.0, 0.0, 0.0, 0.0), 3.33));
  EXPECT_FALSE(in_kgamma(plant, scalar_k(-2.0, 0.0, 0.0, 0.0), 1e6));
}

TEST(InKgamma, MonotoneInGamma) {
  Rng rng(104);
  const Plant plant = test::rand_plant(rng, {2, 1, 1, 1, 1, true, true});
  const Controller k = test::rand_stabilizing_controller(rng, plant);
  const double norm = hinf_norm(close_loop(plant, k)).hi;
  for (double f : {1.1, 1.5, 3.0, 10.0}) {
    EXPECT_TRUE(in_kgamma(plant, k, f * norm));
  }
  EXPECT_FALSE(in_kgamma(plant, k, 0.9 * norm));
}

TEST(InKgamma, StrictlyProperFlag) {
  const Plant plant = example1_plant();
  const Controller k = scalar_k(-2.0, -2.0, 2.0, 0.1);
  EXPECT_TRUE(in_kgamma(plant, k, 10.0, false));
  EXPECT_FALSE(in_kgamma(plant, k, 10.0, true));
}

TEST(Norms, SimilarityInvariance) {
  Rng rng(105);
  const Tolerances tol;
  for (int trial = 0; trial < 5; ++trial) {
    const Plant plant = test::rand_plant(rng, {3, 1, 1, 1, 1, true, true});
    const Controller k =
        test::rand_stabilizing_controller(rng, plant, 0.3, true);
    const Eigen::MatrixXd t = test::rand_matrix(rng, 3, 3) +
                              3.0 * Eigen::MatrixXd::Identity(3, 3);
    const Controller kt = similarity_transform(k, t);
    const double n0 = hinf_norm(close_loop(plant, k)).hi;
    const double n1 = hinf_norm(close_loop(plant, kt)).hi;
    EXPECT_NEAR(n0, n1, 2.0 * tol.bisect_tol * std::max(1.0, n0));
    const double h0 = h2_norm_squared(close_loop(plant, k));
    const double h1 = h2_norm_squared(close_loop(plant, kt));
    EXPECT_NEAR(h0, h1, 1e-7 * std::max(1.0, h0));
  }
}

TEST(InLgamma, ScalarLqgMemberships) {
  const LqgWeights w{SymMatrix::identity(1), SymMatrix::identity(1),
                     SymMatrix::identity(1), SymMatrix::identity(1)};
  const Plant plant = lqg_plant(Eigen::MatrixXd::Constant(1, 1, 1.0),
                                Eigen::MatrixXd::Constant(1, 1, 1.0),
                                Eigen::MatrixXd::Constant(1, 1, 1.0), w);
  const Controller k = scalar_k(-3.0, 1.0, -4.0, 0.0);
  ASSERT_TRUE(in_cstab(plant, k));
  const double h2 = h2_norm_squared(close_loop(plant, k));
  EXPECT_TRUE(in_lgamma(plant, k, 10.0 * h2));
  EXPECT_FALSE(in_lgamma(plant, k, 0.5 * h2));
  const Controller kd = scalar_k(-3.0, 1.0, -4.0, 0.2);
  EXPECT_FALSE(in_lgamma(plant, kd, 1e9));
}

}  // namespace
}  // namespace hinfpath
