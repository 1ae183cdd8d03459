#pragma once

#include <cstdint>

#include "hinfpath/certify.hpp"
#include "hinfpath/model.hpp"
#include "hinfpath/numerics.hpp"

namespace hinfpath {

// Transformed synthesis variables (X, Y, A-hat, B-hat, C-hat, D-hat).
struct FPoint {
  SymMatrix X;            // n_x
  SymMatrix Y;            // n_x
  Eigen::MatrixXd Ahat;   // n_x x n_x
  Eigen::MatrixXd Bhat;   // n_x x n_y
  Eigen::MatrixXd Chat;   // n_u x n_x
  Eigen::MatrixXd Dhat;   // n_u x n_y
};

// FPoint plus an invertible factorization Xi * Pi = I - Y X.
struct LiftedPoint {
  SymMatrix X;
  SymMatrix Y;
  Eigen::MatrixXd Ahat;
  Eigen::MatrixXd Bhat;
  Eigen::MatrixXd Chat;
  Eigen::MatrixXd Dhat;
  Eigen::MatrixXd Pi;  // n_x x n_x, invertible
  Eigen::MatrixXd Xi;  // n_x x n_x, invertible

  FPoint fpoint() const { return FPoint{X, Y, Ahat, Bhat, Chat, Dhat}; }
};

// The 4x4 symmetric block matrix of the synthesis inequality at level gamma.
Eigen::MatrixXd eval_M_gamma(const Plant& plant, const FPoint& p, double gamma);

// Strict feasibility of the synthesis inequalities:
// [X, I; I, Y] > 0 and M_gamma < 0 with relative margin lmi_margin
// (and D-hat = 0 when strictly_proper).
bool in_F_gamma(const Plant& plant, const FPoint& p, double gamma,
                bool strictly_proper = false, const Tolerances& tol = {});

struct LiftOptions {
  std::uint64_t seed = 0;     // drives the Xi-perturbation fallback
  bool center = true;         // analytic-centering polish of the witness P
  int max_perturbations = 20;
};

// Lifts a controller in K_gamma to a point of the factorized feasible set:
// obtains a bounded-real witness P, partitions P = [Y, Xi; Xi^T, *] and
// P^-1 = [X, Pi^T; Pi, *], and applies the change of variables for
// (A-hat, B-hat, C-hat, D-hat). The result reconstructs back to the input
// controller.
LiftedPoint lift(const Plant& plant, const Controller& k, double gamma,
                 const Tolerances& tol = {}, const LiftOptions& opts = {});

// Testing overload: lift through a caller-supplied bounded-real witness.
LiftedPoint lift_with_witness(const Plant& plant, const Controller& k,
                              double gamma, const SymMatrix& p,
                              const Tolerances& tol = {});

// Reconstruction map: solves the two block-triangular systems of
//   [I, 0; Y B2, Xi]^-1 [Dhat, Chat; Bhat, Ahat - Y A X] [I, C2 X; 0, Pi]^-1
// by forward/back substitution on the block structure.
Controller reconstruct(const Plant& plant, const LiftedPoint& z,
                       const Tolerances& tol = {});

enum class ComponentSign { plus, minus };

// Sign of det(Pi); labels the path-connected component of the lifted set.
ComponentSign component_sign(const LiftedPoint& z, const Tolerances& tol = {});

ComponentSign opposite(ComponentSign s);

// (Pi, Xi) -> (T Pi, Xi T^-1); the other fields are unchanged and the
// coupling identity is preserved exactly.
LiftedPoint transform_lifted(const LiftedPoint& z, const Eigen::MatrixXd& t,
                             const Tolerances& tol = {});

// Consistency checks on a lifted point: coupling residual, [X, I; I, Y]
// strictness, and invertibility of Pi and Xi. Throws InvalidInputError.
void check_lifted_invariants(const LiftedPoint& z, const Tolerances& tol = {});

struct H2LmiBlocks {
  Eigen::MatrixXd block1;  // required < 0
  Eigen::MatrixXd block2;  // required > 0
  double trace_gamma = 0.0;
};

// The two block matrices of the H2 synthesis inequality (strictly proper
// variables, D-hat must be zero).
H2LmiBlocks eval_M_lqg(const Plant& plant, const FPoint& p,
                       const SymMatrix& gamma_mat);

struct H2Lift {
  LiftedPoint z;    // Dhat = 0
  SymMatrix Gamma;  // n_z
};

// H2 analogue of lift: routes through the H2 certificate (P, Gamma) and the
// same partition / change of variables with D_K = 0.
H2Lift lift_h2(const Plant& plant, const Controller& k, double gamma,
               const Tolerances& tol = {}, const LiftOptions& opts = {});

}  // namespace hinfpath
