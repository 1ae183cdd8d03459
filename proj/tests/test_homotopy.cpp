#include "hinfpath/homotopy.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "hinfpath/lmi.hpp"
#include "support/random_systems.hpp"

namespace hinfpath {
namespace {

using test::Rng;

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

// A stable 2-state plant on which the zero controller and its 1-state
// reduced version are feasible; used for the bridge scenarios.
Plant bridge_plant() {
  Eigen::MatrixXd a(2, 2);
  a << -1.0, 0.5, 0.0, -2.0;
  Eigen::MatrixXd b1(2, 1), b2(2, 1);
  b1 << 1.0, 0.5;
  b2 << 1.0, 1.0;
  Eigen::MatrixXd c1(1, 2), c2(1, 2);
  c1 << 1.0, 0.0;
  c2 << 0.5, 1.0;
  return Plant(a, b1, b2, c1, c2, Eigen::MatrixXd::Zero(1, 1),
               Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1));
}

TEST(GlPath, SpdSegmentMidpoint) {
  const Eigen::MatrixXd m =
      gl_path(Eigen::MatrixXd::Identity(2, 2),
              2.0 * Eigen::MatrixXd::Identity(2, 2), 0.5);
  EXPECT_LT((m - 1.5 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(),
            1e-12);
}

TEST(GlPath, RotationMidpoint) {
  const double th = 0.8;
  Eigen::MatrixXd rot(2, 2), half(2, 2);
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  half << std::cos(th / 2), -std::sin(th / 2), std::sin(th / 2),
      std::cos(th / 2);
  const Eigen::MatrixXd m =
      gl_path(Eigen::MatrixXd::Identity(2, 2), rot, 0.5);
  EXPECT_LT((m - half).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GlPath, DeterminantSignConstant) {
  Rng rng(80);
  for (bool negative : {false, true}) {
    Eigen::MatrixXd m0 = test::rand_matrix(rng, 4, 4);
    Eigen::MatrixXd m1 = test::rand_matrix(rng, 4, 4);
    auto fix_sign = [negative](Eigen::MatrixXd& m) {
      if ((m.determinant() < 0.0) != negative) m.col(0) *= -1.0;
    };
    fix_sign(m0);
    fix_sign(m1);
    double min_abs_det = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 100; ++k) {
      const double det = gl_path(m0, m1, k / 100.0).determinant();
      EXPECT_EQ(det < 0.0, negative);
      min_abs_det = std::min(min_abs_det, std::abs(det));
    }
    EXPECT_GT(min_abs_det, 0.0);
    EXPECT_LT((gl_path(m0, m1, 0.0) - m0).cwiseAbs().maxCoeff(),
              1e-9 * (1.0 + m0.cwiseAbs().maxCoeff()));
    EXPECT_LT((gl_path(m0, m1, 1.0) - m1).cwiseAbs().maxCoeff(),
              1e-9 * (1.0 + m1.cwiseAbs().maxCoeff()));
  }
}

TEST(GlPath, OppositeSignsRejected) {
  Eigen::MatrixXd refl = Eigen::MatrixXd::Identity(2, 2);
  refl(0, 0) = -1.0;
  EXPECT_THROW(gl_path(Eigen::MatrixXd::Identity(2, 2), refl, 0.5),
               InvalidInputError);
}

TEST(Connect, Example1ControllersLieInDifferentComponents) {
  const Plant plant = example1_plant();
  const Controller k1 = scalar_k(-2.0, -2.0, 2.0, 0.0);
  const Controller k2 = scalar_k(-2.0, 2.0, -2.0, 0.0);
  const PathResult r = connect(plant, k1, k2, 3.33);
  EXPECT_EQ(r.status, PathStatus::different_components);
  ASSERT_TRUE(r.witness_T.has_value());
  EXPECT_DOUBLE_EQ((*r.witness_T)(0, 0), -1.0);
}

TEST(Connect, CoincidentEndpoints) {
  const Plant plant = example1_plant();
  const Controller k1 = scalar_k(-2.0, -2.0, 2.0, 0.0);
  ConnectOptions opts;
  opts.n_samples = 20;
  const PathResult r = connect(plant, k1, k1, 3.33, opts);
  ASSERT_EQ(r.status, PathStatus::connected);
  ASSERT_EQ(r.samples.size(), 21u);
  for (const auto& s : r.samples) {
    EXPECT_LT((s.k.A_K - k1.A_K).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((s.k.C_K - k1.C_K).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(s.hinf_value, 3.33);
  }
}

TEST(Connect, SameComponentPairVerifies) {
  const Plant plant = example1_plant();
  const Controller k1 = scalar_k(-2.0, -2.0, 2.0, 0.0);
  // T = [-1] maps K2 into K1's component.
  const Controller k2m = similarity_transform(
      scalar_k(-2.0, 2.0, -2.0, 0.0), Eigen::MatrixXd::Constant(1, 1, -1.0));
  ConnectOptions opts;
  opts.n_samples = 40;
  const PathResult r = connect(plant, k1, k2m, 3.33, opts);
  ASSERT_EQ(r.status, PathStatus::connected);
  ASSERT_EQ(r.samples.size(), 41u);
  EXPECT_LE(r.endpoint_errors[0], 1e-8);
  EXPECT_LE(r.endpoint_errors[1], 1e-8);
  EXPECT_GT(r.norm_margin, 0.0);
  const ComponentSign sign0 = r.samples.front().sign;
  for (const auto& s : r.samples) {
    EXPECT_LT(s.hinf_value, 3.33);
    EXPECT_EQ(s.sign, sign0);  // sign continuity along the segment
    EXPECT_TRUE(s.k.strictly_proper());
  }
}

TEST(Connect, InterpolatedFPointStaysBelowEndpointEigenvalues) {
  const Plant plant = example1_plant();
  const Controller k1 = scalar_k(-2.0, -2.0, 2.0, 0.0);
  const Controller k2m = similarity_transform(
      scalar_k(-2.0, 2.0, -2.0, 0.0), Eigen::MatrixXd::Constant(1, 1, -1.0));
  const LiftedPoint z0 = lift(plant, k1, 3.33);
  const LiftedPoint z1 = lift(plant, k2m, 3.33);
  const double end_max = std::max(
      max_eig_sym(SymMatrix(eval_M_gamma(plant, z0.fpoint(), 3.33))),
      max_eig_sym(SymMatrix(eval_M_gamma(plant, z1.fpoint(), 3.33))));
  for (int i = 0; i <= 10; ++i) {
    const double a = i / 10.0;
    FPoint mix;
    mix.X = SymMatrix(a * z1.X.mat() + (1 - a) * z0.X.mat());
    mix.Y = SymMatrix(a * z1.Y.mat() + (1 - a) * z0.Y.mat());
    mix.Ahat = a * z1.Ahat + (1 - a) * z0.Ahat;
    mix.Bhat = a * z1.Bhat + (1 - a) * z0.Bhat;
    mix.Chat = a * z1.Chat + (1 - a) * z0.Chat;
    mix.Dhat = a * z1.Dhat + (1 - a) * z0.Dhat;
    EXPECT_LE(max_eig_sym(SymMatrix(eval_M_gamma(plant, mix, 3.33))),
              end_max + 1e-9);
  }
}

TEST(Connect, TransformedEndpointSameOrientationConnects) {
  Rng rng(81);
  const Plant plant = test::rand_plant(rng, {2, 1, 1, 1, 1, true, true});
  const Controller k0 = test::rand_stabilizing_controller(rng, plant);
  Eigen::MatrixXd t = test::rand_matrix(rng, 2, 2);
  if (t.determinant() < 0.0) t.col(0) *= -1.0;
  t += 2.0 * Eigen::MatrixXd::Identity(2, 2);
  if (t.determinant() < 0.0) t = -t;  // keep det > 0
  const Controller k1 = similarity_transform(k0, t);
  const double gamma = 1.4 * hinf_norm(close_loop(plant, k0)).hi;
  ConnectOptions opts;
  opts.n_samples = 30;
  const PathResult r = connect(plant, k0, k1, gamma, opts);
  ASSERT_EQ(r.status, PathStatus::connected);
  for (const auto& s : r.samples) EXPECT_LT(s.hinf_value, gamma);
}

TEST(Connect, EndpointOutsideSetRejected) {
  const Plant plant = example1_plant();
  EXPECT_THROW(connect(plant, scalar_k(-2.0, -2.0, 2.0, 0.0),
                       scalar_k(-2.0, 0.0, 0.0, 0.0), 3.33),
               PreconditionError);
}

TEST(DualLiftFixedPoint, AugmentedControllerBridges) {
  const Plant plant = bridge_plant();
  const Controller k_red = scalar_k(-1.0, 0.0, 0.0, 0.0);
  const Controller k_aug = augment_reduced(k_red);
  const double gamma =
      1.3 * hinf_norm(close_loop(plant, k_aug)).hi;
  const auto [z_plus, z_minus] = dual_lift_fixed_point(plant, k_aug, gamma);
  EXPECT_EQ(component_sign(z_plus), ComponentSign::plus);
  EXPECT_EQ(component_sign(z_minus), ComponentSign::minus);
  const Controller r_plus = reconstruct(plant, z_plus);
  const Controller r_minus = reconstruct(plant, z_minus);
  EXPECT_LT((r_plus.A_K - k_aug.A_K).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_LT((r_minus.A_K - k_aug.A_K).cwiseAbs().maxCoeff(), 1e-7);
}

TEST(DualLiftFixedPoint, GenericControllerIsNotABridge) {
  Rng rng(82);
  const Plant plant = bridge_plant();
  const Controller k = test::rand_stabilizing_controller(rng, plant);
  const double gamma = 1.3 * hinf_norm(close_loop(plant, k)).hi;
  EXPECT_THROW(dual_lift_fixed_point(plant, k, gamma), BridgeError);
}

TEST(ConnectViaBridge, JoinsOppositeComponents) {
  const Plant plant = bridge_plant();
  const Controller k_red = scalar_k(-1.0, 0.0, 0.0, 0.0);
  const double gamma =
      1.5 * hinf_norm(close_loop(plant, augment_reduced(k_red))).hi;

  const Controller k0 = synthesize(plant, gamma, true, 1);
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(2, 2);
  t(1, 1) = -1.0;
  const Controller k1 = similarity_transform(k0, t);

  // The pair straddles the two components.
  const PathResult direct = connect(plant, k0, k1, gamma);
  ASSERT_EQ(direct.status, PathStatus::different_components);

  ConnectOptions opts;
  opts.n_samples = 40;
  const PathResult r = connect_via_bridge(plant, k0, k1, gamma, k_red, opts);
  ASSERT_EQ(r.status, PathStatus::bridged);
  EXPECT_LE(r.endpoint_errors[0], 1e-8);
  EXPECT_LE(r.endpoint_errors[1], 1e-8);
  for (const auto& s : r.samples) EXPECT_LT(s.hinf_value, gamma);
}

TEST(ConnectViaBridge, ConstantWhenAllCoincide) {
  const Plant plant = bridge_plant();
  const Controller k_red = scalar_k(-1.0, 0.0, 0.0, 0.0);
  const Controller k_aug = augment_reduced(k_red);
  const double gamma = 1.5 * hinf_norm(close_loop(plant, k_aug)).hi;
  ConnectOptions opts;
  opts.n_samples = 10;
  const PathResult r =
      connect_via_bridge(plant, k_aug, k_aug, gamma, k_red, opts);
  ASSERT_EQ(r.status, PathStatus::bridged);
  for (const auto& s : r.samples) {
    EXPECT_LT((s.k.A_K - k_aug.A_K).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(ConnectViaBridge, InfeasibleBridgeRejected) {
  const Plant plant = bridge_plant();
  const Controller k_red = scalar_k(-1.0, 0.0, 0.0, 0.0);
  const Controller k_aug = augment_reduced(k_red);
  const double bridge_norm = hinf_norm(close_loop(plant, k_aug)).hi;

  // Pick gamma above the endpoints' norms but below the bridge's norm.
  const Controller k0 = synthesize(plant, 0.9 * bridge_norm, true, 3);
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(2, 2);
  t(1, 1) = -1.0;
  const Controller k1 = similarity_transform(k0, t);
  const double gamma =
      0.5 * (bridge_norm + hinf_norm(close_loop(plant, k0)).hi);
  ASSERT_LT(hinf_norm(close_loop(plant, k0)).hi, gamma);
  ASSERT_GT(bridge_norm, gamma);
  EXPECT_THROW(connect_via_bridge(plant, k0, k1, gamma, k_red),
               BridgeError);
}

}  // namespace
}  // namespace hinfpath
