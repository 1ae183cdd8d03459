#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "hinfpath/numerics.hpp"

namespace hinfpath {

struct PlantDims {
  Eigen::Index n_x = 0;  // state
  Eigen::Index n_w = 0;  // disturbance input
  Eigen::Index n_u = 0;  // control input
  Eigen::Index n_y = 0;  // measured output
  Eigen::Index n_z = 0;  // performance output

  bool operator==(const PlantDims&) const = default;
};

// Open-loop LTI plant
//   x' = A x + B1 w + B2 u
//   z  = C1 x + D11 w + D12 u
//   y  = C2 x + D21 w
class Plant {
 public:
  Plant(Eigen::MatrixXd a, Eigen::MatrixXd b1, Eigen::MatrixXd b2,
        Eigen::MatrixXd c1, Eigen::MatrixXd c2, Eigen::MatrixXd d11,
        Eigen::MatrixXd d12, Eigen::MatrixXd d21);

  const Eigen::MatrixXd& A() const { return a_; }
  const Eigen::MatrixXd& B1() const { return b1_; }
  const Eigen::MatrixXd& B2() const { return b2_; }
  const Eigen::MatrixXd& C1() const { return c1_; }
  const Eigen::MatrixXd& C2() const { return c2_; }
  const Eigen::MatrixXd& D11() const { return d11_; }
  const Eigen::MatrixXd& D12() const { return d12_; }
  const Eigen::MatrixXd& D21() const { return d21_; }
  const PlantDims& dims() const { return dims_; }

 private:
  Eigen::MatrixXd a_, b1_, b2_, c1_, c2_, d11_, d12_, d21_;
  PlantDims dims_;
};

// Full-order dynamic output-feedback controller
//   xi' = A_K xi + B_K y
//   u   = C_K xi + D_K y
struct Controller {
  Eigen::MatrixXd A_K;
  Eigen::MatrixXd B_K;
  Eigen::MatrixXd C_K;
  Eigen::MatrixXd D_K;

  Eigen::Index order() const { return A_K.rows(); }
  Eigen::Index n_u() const { return C_K.rows(); }
  Eigen::Index n_y() const { return B_K.cols(); }
  bool strictly_proper(double tol = 1e-12) const;
  void validate() const;
  void validate_for(const Plant& plant) const;

  static Controller zero(const PlantDims& dims);
};

// Closed-loop interconnection (state dimension 2 n_x):
//   zeta' = A zeta + B w,  z = C zeta + D w.
struct ClosedLoop {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd D;

  ClosedLoop(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c,
             Eigen::MatrixXd d);
};

ClosedLoop close_loop(const Plant& plant, const Controller& k);

// Controller state change of coordinates:
// (A_K, B_K, C_K, D_K) -> (T A_K T^-1, T B_K, C_K T^-1, D_K).
Controller similarity_transform(const Controller& k, const Eigen::MatrixXd& t,
                                const Tolerances& tol = {});

struct ModeTest {
  std::complex<double> eigenvalue;
  double sigma_min_ctrb = 0.0;  // smallest singular value of [A - l I, B2]
  double sigma_min_obsv = 0.0;  // smallest singular value of [A - l I; C2]
  bool controllable = false;
  bool observable = false;
};

// PBH rank tests over the closed right half plane modes of A.
struct StabilizabilityReport {
  std::vector<ModeTest> unstable_modes;
  bool stabilizable = true;
  bool detectable = true;
};

StabilizabilityReport check_stabilizable_detectable(const Plant& plant,
                                                    const Tolerances& tol = {});

struct LqgWeights {
  SymMatrix W;  // process noise covariance (n_x), >= 0
  SymMatrix V;  // measurement noise covariance (n_y), > 0
  SymMatrix Q;  // state cost (n_x), >= 0
  SymMatrix R;  // input cost (n_u), > 0
};

// Builds the plant whose H2 problem is the LQG problem with the given
// weights: B1 = [W^1/2, 0], C1 = [Q^1/2; 0], D11 = 0, D12 = [0; R^1/2],
// D21 = [0, V^1/2].
Plant lqg_plant(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                const Eigen::MatrixXd& c, const LqgWeights& weights,
                const Tolerances& tol = {});

// Principal square root of a positive semidefinite matrix. Eigenvalues in
// [-eig_tol, 0] are clamped to zero; anything below -eig_tol is rejected.
Eigen::MatrixXd psd_sqrt(const SymMatrix& m, const Tolerances& tol = {});

// True iff (A_K, B_K) is controllable and (C_K, A_K) is observable (PBH
// tests with threshold eig_tol * ||A_K||_2).
bool is_minimal(const Controller& k, const Tolerances& tol = {});

// Appends one decoupled stable state (eigenvalue `appended_pole`) to a
// reduced-order controller. The result K satisfies T K T^-1-style
// similarity invariance for T = diag(I, -1) and is never minimal.
Controller augment_reduced(const Controller& k_red,
                           double appended_pole = -1.0);

}  // namespace hinfpath
