#include "hinfpath/lift.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "hinfpath/lmi.hpp"
#include "support/random_systems.hpp"

namespace hinfpath {
namespace {

using test::Rng;

Plant example1_plant() {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
  return Plant(one, one, one, one, one, Eigen::MatrixXd::Zero(1, 1), one, one);
}

Controller scalar_k(double a, double b, double c, double d) {
  return Controller{Eigen::MatrixXd::Constant(1, 1, a),
                    Eigen::MatrixXd::Constant(1, 1, b),
                    Eigen::MatrixXd::Constant(1, 1, c),
                    Eigen::MatrixXd::Constant(1, 1, d)};
}

double controller_rel_error(const Controller& a, const Controller& b) {
  auto block_err = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return (x - y).cwiseAbs().maxCoeff() / (1.0 + y.cwiseAbs().maxCoeff());
  };
  return std::max({block_err(a.A_K, b.A_K), block_err(a.B_K, b.B_K),
                   block_err(a.C_K, b.C_K), block_err(a.D_K, b.D_K)});
}

FPoint zero_fpoint(const PlantDims& d) {
  return FPoint{SymMatrix::zero(d.n_x), SymMatrix::zero(d.n_x),
                Eigen::MatrixXd::Zero(d.n_x, d.n_x),
                Eigen::MatrixXd::Zero(d.n_x, d.n_y),
                Eigen::MatrixXd::Zero(d.n_u, d.n_x),
                Eigen::MatrixXd::Zero(d.n_u, d.n_y)};
}

TEST(EvalMGamma, ZeroPointExample1) {
  const Plant plant = example1_plant();
  const Eigen::MatrixXd m = eval_M_gamma(plant, zero_fpoint(plant.dims()), 1.0);
  ASSERT_EQ(m.rows(), 4);
  // Blocks forced by substituting zeros into the scalar all-ones plant.
  EXPECT_EQ(m(0, 0), 0.0);   // M11
  EXPECT_EQ(m(0, 1), 1.0);   // M12 = A
  EXPECT_EQ(m(0, 2), 1.0);   // M13 = B1
  EXPECT_EQ(m(0, 3), 0.0);   // M14
  EXPECT_EQ(m(1, 1), 0.0);   // M22
  EXPECT_EQ(m(1, 2), 0.0);   // M23
  EXPECT_EQ(m(1, 3), 1.0);   // M24 = C1^T
  EXPECT_EQ(m(2, 2), -1.0);  // M33
  EXPECT_EQ(m(2, 3), 0.0);   // M34 = D11^T
  EXPECT_EQ(m(3, 3), -1.0);  // M44
}

TEST(EvalMGamma, SymmetricByConstruction) {
  Rng rng(60);
  const Plant plant = test::rand_plant(rng, {3, 2, 2, 1, 2, true, false});
  FPoint p = zero_fpoint(plant.dims());
  p.X = SymMatrix(test::rand_matrix(rng, 3, 3));
  p.Y = SymMatrix(test::rand_matrix(rng, 3, 3));
  p.Ahat = test::rand_matrix(rng, 3, 3);
  p.Bhat = test::rand_matrix(rng, 3, 1);
  p.Chat = test::rand_matrix(rng, 2, 3);
  p.Dhat = test::rand_matrix(rng, 2, 1);
  const Eigen::MatrixXd m = eval_M_gamma(plant, p, 2.0);
  EXPECT_EQ((m - m.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Lift, Example1RoundTripAndInvariants) {
  const Plant plant = example1_plant();
  const Controller k1 = scalar_k(-2.0, -2.0, 2.0, 0.0);
  const LiftedPoint z = lift(plant, k1, 3.33);

  const Eigen::MatrixXd coupling =
      z.Xi * z.Pi - (Eigen::MatrixXd::Identity(1, 1) - z.Y.mat() * z.X.mat());
  EXPECT_LE(coupling.cwiseAbs().maxCoeff(),
            1e-9 * (1.0 + z.Y.mat().norm() * z.X.mat().norm()));
  EXPECT_NO_THROW(check_lifted_invariants(z));
  EXPECT_TRUE(in_F_gamma(plant, z.fpoint(), 3.33));

  const Controller rt = reconstruct(plant, z);
  EXPECT_LE(controller_rel_error(rt, k1), 1e-8);
  // Strictly proper controller lifts to Dhat = D_K exactly.
  EXPECT_EQ(z.Dhat(0, 0), 0.0);
}

TEST(Lift, RefusesOutsideKGamma) {
  EXPECT_THROW(lift(example1_plant(), scalar_k(-2.0, 0.0, 0.0, 0.0), 3.33),
               PreconditionError);
}

TEST(Lift, RandomRoundTrips) {
  Rng rng(61);
  int done = 0;
  while (done < 10) {
    const Eigen::Index nx = 1 + (done % 4);
    const Plant plant = test::rand_plant(rng, {nx, 1, 1, 1, 1, true, true});
    const Controller k = test::rand_stabilizing_controller(rng, plant);
    const double gamma = 1.2 * hinf_norm(close_loop(plant, k)).hi;
    LiftedPoint z;
    try {
      z = lift(plant, k, gamma);
    } catch (const LiftError&) {
      continue;  // degenerate instance; margins unreachable by design
    }
    const Controller rt = reconstruct(plant, z);
    EXPECT_LE(controller_rel_error(rt, k), 1e-8);
    EXPECT_TRUE(in_F_gamma(plant, z.fpoint(), gamma));
    ++done;
  }
}

TEST(Lift, CongruenceIdentity) {
  const Plant plant = example1_plant();
  const Controller k1 = scalar_k(-2.0, -2.0, 2.0, 0.0);
  const double gamma = 3.33;
  const HinfCertificate cert = bounded_real_certificate(plant, k1, gamma);
  const LiftedPoint z = lift_with_witness(plant, k1, gamma, cert.P);

  // M_gamma at the lifted point is the blockdiag(T, I, I)-congruence of the
  // bounded-real matrix with T = [X, I; Pi, 0].
  const Eigen::Index n = 1;
  Eigen::MatrixXd t(2 * n, 2 * n);
  t.topLeftCorner(n, n) = z.X.mat();
  t.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  t.bottomLeftCorner(n, n) = z.Pi;
  t.bottomRightCorner(n, n).setZero();
  Eigen::MatrixXd cong = Eigen::MatrixXd::Identity(4, 4);
  cong.topLeftCorner(2, 2) = t;
  const Eigen::MatrixXd brl =
      bounded_real_matrix(cert.P, close_loop(plant, k1), gamma);
  const Eigen::MatrixXd lhs = eval_M_gamma(plant, z.fpoint(), gamma);
  const Eigen::MatrixXd rhs = cong.transpose() * brl * cong;
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(),
            1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff()));
}

TEST(Lift, DeterminantConsistency) {
  Rng rng(62);
  const Plant plant = test::rand_plant(rng, {3, 1, 1, 1, 1, true, true});
  const Controller k = test::rand_stabilizing_controller(rng, plant);
  const double gamma = 1.3 * hinf_norm(close_loop(plant, k)).hi;
  const LiftedPoint z = lift(plant, k, gamma);
  const double lhs = (z.Xi * z.Pi).determinant();
  const double rhs =
      (Eigen::MatrixXd::Identity(3, 3) - z.Y.mat() * z.X.mat()).determinant();
  EXPECT_NEAR(lhs, rhs, 1e-9 * (1.0 + std::abs(rhs)));
}

TEST(InFGamma, ZeroPointInfeasible) {
  const Plant plant = example1_plant();
  EXPECT_FALSE(in_F_gamma(plant, zero_fpoint(plant.dims()), 1.0));
}

TEST(InFGamma, ConvexCombinationStaysFeasible) {
  const Plant plant = example1_plant();
  const LiftedPoint za = lift(plant, scalar_k(-2.0, -2.0, 2.0, 0.0), 3.33);
  const LiftedPoint zb = lift(plant, scalar_k(-2.2, -1.8, 1.9, 0.0), 3.33);
  for (int i = 0; i <= 10; ++i) {
    const double a = i / 10.0;
    FPoint mix;
    mix.X = SymMatrix(a * za.X.mat() + (1 - a) * zb.X.mat());
    mix.Y = SymMatrix(a * za.Y.mat() + (1 - a) * zb.Y.mat());
    mix.Ahat = a * za.Ahat + (1 - a) * zb.Ahat;
    mix.Bhat = a * za.Bhat + (1 - a) * zb.Bhat;
    mix.Chat = a * za.Chat + (1 - a) * zb.Chat;
    mix.Dhat = a * za.Dhat + (1 - a) * zb.Dhat;
    EXPECT_TRUE(in_F_gamma(plant, mix, 3.33));
  }
}

TEST(Reconstruct, ScalarHandExpansion) {
  // n_x = 1 with X = Y = 2, Pi = 1, Xi = 1 - YX = -3 and plant A = 0,
  // B2 = C2 = 1; hats chosen nonzero and the 2x2 triangular inverses
  // expanded by hand.
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const Plant plant(Eigen::MatrixXd::Zero(1, 1), one, one, one, one,
                    Eigen::MatrixXd::Zero(1, 1), one, one);
  LiftedPoint z;
  z.X = SymMatrix(Eigen::MatrixXd::Constant(1, 1, 2.0));
  z.Y = SymMatrix(Eigen::MatrixXd::Constant(1, 1, 2.0));
  z.Ahat = Eigen::MatrixXd::Constant(1, 1, 1.0);
  z.Bhat = Eigen::MatrixXd::Constant(1, 1, 2.0);
  z.Chat = Eigen::MatrixXd::Constant(1, 1, 3.0);
  z.Dhat = Eigen::MatrixXd::Constant(1, 1, 4.0);
  z.Pi = Eigen::MatrixXd::Constant(1, 1, 1.0);
  z.Xi = Eigen::MatrixXd::Constant(1, 1, -3.0);

  // [1, 0; Y B2, Xi]^-1 = [1, 0; 2, -3]^-1 = [1, 0; 2/3, -1/3]
  // mid = [4, 3; 2, 1 - 0] = [4, 3; 2, 1]
  // [1, C2 X; 0, Pi]^-1 = [1, 2; 0, 1]^-1 = [1, -2; 0, 1]
  // Phi = [1,0;2/3,-1/3] [4,3;2,1] [1,-2;0,1]
  //     = [4, 3; 2, 5/3] [1,-2;0,1] = [4, -5; 2, -7/3]
  const Controller k = reconstruct(plant, z);
  EXPECT_NEAR(k.D_K(0, 0), 4.0, 1e-14);
  EXPECT_NEAR(k.C_K(0, 0), -5.0, 1e-14);
  EXPECT_NEAR(k.B_K(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(k.A_K(0, 0), -7.0 / 3.0, 1e-14);
}

TEST(Reconstruct, SingularFactorRejected) {
  const Plant plant = example1_plant();
  LiftedPoint z;
  z.X = SymMatrix::identity(1);
  z.Y = SymMatrix::identity(1);
  z.Ahat = Eigen::MatrixXd::Zero(1, 1);
  z.Bhat = Eigen::MatrixXd::Zero(1, 1);
  z.Chat = Eigen::MatrixXd::Zero(1, 1);
  z.Dhat = Eigen::MatrixXd::Zero(1, 1);
  z.Pi = Eigen::MatrixXd::Zero(1, 1);
  z.Xi = Eigen::MatrixXd::Zero(1, 1);
  EXPECT_THROW(reconstruct(plant, z), SingularInputError);
}

TEST(ComponentSign, DiagonalCases) {
  LiftedPoint z;
  z.X = SymMatrix::identity(2);
  z.Y = SymMatrix::identity(2);
  z.Pi = Eigen::MatrixXd::Identity(2, 2);
  z.Xi = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_EQ(component_sign(z), ComponentSign::plus);
  z.Pi(0, 0) = -1.0;
  EXPECT_EQ(component_sign(z), ComponentSign::minus);
  z.Pi(0, 0) = 0.0;
  z.Pi(1, 1) = 0.0;
  EXPECT_THROW(component_sign(z), InvalidInputError);
}

TEST(TransformLifted, IdentityAndSignFlip) {
  const Plant plant = example1_plant();
  const LiftedPoint z = lift(plant, scalar_k(-2.0, -2.0, 2.0, 0.0), 3.33);
  const LiftedPoint zi =
      transform_lifted(z, Eigen::MatrixXd::Identity(1, 1));
  EXPECT_EQ((zi.Pi - z.Pi).cwiseAbs().maxCoeff(), 0.0);

  const LiftedPoint zf =
      transform_lifted(z, Eigen::MatrixXd::Constant(1, 1, -1.0));
  EXPECT_EQ(component_sign(zf), opposite(component_sign(z)));
  EXPECT_NO_THROW(check_lifted_invariants(zf));
}

TEST(TransformLifted, CommutesWithReconstruction) {
  Rng rng(63);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index nx = 2 + (trial % 2);
    const Plant plant = test::rand_plant(rng, {nx, 1, 1, 1, 1, true, true});
    const Controller k = test::rand_stabilizing_controller(rng, plant);
    const double gamma = 1.3 * hinf_norm(close_loop(plant, k)).hi;
    LiftedPoint z;
    try {
      z = lift(plant, k, gamma);
    } catch (const LiftError&) {
      continue;
    }
    const Eigen::MatrixXd t = test::rand_matrix(rng, nx, nx) +
                              3.0 * Eigen::MatrixXd::Identity(nx, nx);
    const Controller lhs = reconstruct(plant, transform_lifted(z, t));
    const Controller rhs = similarity_transform(reconstruct(plant, z), t);
    EXPECT_LE(controller_rel_error(lhs, rhs), 1e-8);
  }
}

TEST(TransformLifted, LiftOfTransformedControllerFlipsSign) {
  Rng rng(64);
  const Plant plant = test::rand_plant(rng, {2, 1, 1, 1, 1, true, true});
  const Controller k = test::rand_stabilizing_controller(rng, plant);
  const double gamma = 1.3 * hinf_norm(close_loop(plant, k)).hi;
  const LiftedPoint z = lift(plant, k, gamma);

  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(2, 2);
  t(1, 1) = -1.0;
  const Controller kt = similarity_transform(k, t);
  const LiftedPoint zt = lift(plant, kt, gamma);
  EXPECT_EQ(component_sign(zt), opposite(component_sign(z)));
}

TEST(Reconstruct, AnyInvertibleFactorizationStaysInSet) {
  // Any feasible F-point with any invertible factorization of I - Y X maps
  // into K_gamma.
  Rng rng(65);
  for (int trial = 0; trial < 8; ++trial) {
    const Eigen::Index nx = 1 + (trial % 3);
    const Plant plant = test::rand_plant(rng, {nx, 1, 1, 1, 1, true, true});
    const Controller base = test::rand_stabilizing_controller(rng, plant);
    const double gamma = 1.4 * hinf_norm(close_loop(plant, base)).hi;
    const AffineLmi lmi = assemble_synthesis_lmi(plant, gamma, false);
    SolveOptions opts;
    opts.seed = static_cast<std::uint64_t>(trial + 1);
    const FeasibilityResult res = solve_feasibility(lmi, opts);
    ASSERT_EQ(res.status, FeasibilityStatus::feasible);
    const FPoint p = unpack_fpoint(lmi, res.z, plant.dims());

    Eigen::MatrixXd pi = test::rand_matrix(rng, nx, nx);
    if (std::abs(pi.determinant()) < 1e-3) pi += Eigen::MatrixXd::Identity(nx, nx);
    LiftedPoint z;
    z.X = p.X;
    z.Y = p.Y;
    z.Ahat = p.Ahat;
    z.Bhat = p.Bhat;
    z.Chat = p.Chat;
    z.Dhat = p.Dhat;
    z.Pi = pi;
    z.Xi = (Eigen::MatrixXd::Identity(nx, nx) - p.Y.mat() * p.X.mat()) *
           pi.inverse();
    const Controller k = reconstruct(plant, z);
    EXPECT_TRUE(in_kgamma(plant, k, gamma));
  }
}

TEST(EvalMLqg, ZeroPointScalarPlant) {
  const Plant plant = example1_plant();  // scalar plant with D11 = 0
  const H2LmiBlocks blocks =
      eval_M_lqg(plant, zero_fpoint(plant.dims()), SymMatrix::identity(1));
  Eigen::MatrixXd b1_expect(3, 3);
  b1_expect << 0, 1, 1, 1, 0, 0, 1, 0, -1;
  Eigen::MatrixXd b2_expect(3, 3);
  b2_expect << 0, 1, 0, 1, 0, 1, 0, 1, 1;
  EXPECT_EQ((blocks.block1 - b1_expect).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ((blocks.block2 - b2_expect).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(blocks.trace_gamma, 1.0);
}

TEST(EvalMLqg, RejectsNonzeroDhat) {
  const Plant plant = example1_plant();
  FPoint p = zero_fpoint(plant.dims());
  p.Dhat(0, 0) = 0.5;
  EXPECT_THROW(eval_M_lqg(plant, p, SymMatrix::identity(1)),
               InvalidInputError);
}

TEST(LiftH2, ScalarLqgRoundTrip) {
  const LqgWeights w{SymMatrix::identity(1), SymMatrix::identity(1),
                     SymMatrix::identity(1), SymMatrix::identity(1)};
  const Plant plant = lqg_plant(Eigen::MatrixXd::Constant(1, 1, 1.0),
                                Eigen::MatrixXd::Constant(1, 1, 1.0),
                                Eigen::MatrixXd::Constant(1, 1, 1.0), w);
  const Controller k = scalar_k(-3.0, 1.0, -4.0, 0.0);
  const double h2 = h2_norm_squared(close_loop(plant, k));
  const H2Lift lifted = lift_h2(plant, k, 2.0 * h2);

  EXPECT_EQ(lifted.z.Dhat.cwiseAbs().maxCoeff(), 0.0);
  const Eigen::MatrixXd coupling =
      lifted.z.Xi * lifted.z.Pi -
      (Eigen::MatrixXd::Identity(1, 1) - lifted.z.Y.mat() * lifted.z.X.mat());
  EXPECT_LE(coupling.cwiseAbs().maxCoeff(), 1e-9);

  const H2LmiBlocks blocks = eval_M_lqg(plant, lifted.z.fpoint(), lifted.Gamma);
  EXPECT_LT(max_eig_sym(SymMatrix(blocks.block1)), 0.0);
  EXPECT_GT(min_eig_sym(SymMatrix(blocks.block2)), 0.0);
  EXPECT_LT(blocks.trace_gamma, 2.0 * h2);

  const Controller rt = reconstruct(plant, lifted.z);
  EXPECT_LE(controller_rel_error(rt, k), 1e-8);
}

}  // namespace
}  // namespace hinfpath
