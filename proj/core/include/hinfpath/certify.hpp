#pragma once

#include "hinfpath/analysis.hpp"
#include "hinfpath/model.hpp"
#include "hinfpath/numerics.hpp"

namespace hinfpath {

// Positive definite witness P for the bounded real inequality at level gamma.
struct HinfCertificate {
  SymMatrix P;  // 2 n_x
  double gamma = 0.0;
  double lmi_margin_achieved = 0.0;  // relative, > 0
  double pos_def_margin = 0.0;       // min eigenvalue of P, > 0
};

// Assembles the 3x3 bounded-real block matrix
//   [A^T P + P A,  P B,      C^T ]
//   [B^T P,        -gamma I, D^T ]
//   [C,            D,        -gamma I].
Eigen::MatrixXd bounded_real_matrix(const SymMatrix& p, const ClosedLoop& sys,
                                    double gamma);

// Max eigenvalue of the bounded-real matrix and min eigenvalue of P. The
// caller interprets signs.
std::pair<double, double> verify_bounded_real(const SymMatrix& p,
                                              const ClosedLoop& sys,
                                              double gamma);

// Stabilizing solution of the bounded-real Riccati equation for the closed
// loop with the output augmented by eps*I rows, scaled so that the result
// satisfies the bounded-real inequality at level gamma. Throws
// NoStabilizingSolutionError when gamma is not above the augmented norm.
SymMatrix bounded_real_riccati(const ClosedLoop& sys, double gamma, double eps,
                               const Tolerances& tol = {});

// Constructs a strict certificate by the eps-regularized Riccati solve,
// halving eps while the Riccati is unsolvable and then sweeping eps upward
// to maximize the achieved relative margin. Requires the controller to be
// in K_gamma; throws CertificateError when the margins cannot be met.
HinfCertificate bounded_real_certificate(const Plant& plant,
                                         const Controller& k, double gamma,
                                         const Tolerances& tol = {});
HinfCertificate bounded_real_certificate(const ClosedLoop& sys, double gamma,
                                         const Tolerances& tol = {});

// (P, Gamma) witness for the H2 sublevel inequality at level gamma:
//   [A^T P + P A, P B; B^T P, -I] < 0,
//   [P, C^T; C, Gamma] > 0,  trace(Gamma) < gamma.
struct H2Certificate {
  SymMatrix P;      // 2 n_x
  SymMatrix Gamma;  // n_z
  double gamma = 0.0;
  double lmi_margin_achieved = 0.0;
  double pos_def_margin = 0.0;
};

struct H2Margins {
  double block1_max_eig = 0.0;
  double block2_min_eig = 0.0;
  double trace_gamma = 0.0;
};

H2Margins verify_h2(const SymMatrix& p, const SymMatrix& gamma_mat,
                    const ClosedLoop& sys, double gamma);

// Inverse of the eps-regularized controllability Gramian:
// solves A W + W A^T + eps^2 W^2 + B B^T + eps^2 I = 0 (stable branch of the
// dual Hamiltonian) and returns W. P = W^-1 then satisfies
// A^T P + P A + P B B^T P = -eps^2 (I + P^2) < 0.
SymMatrix h2_gramian_riccati(const ClosedLoop& sys, double eps,
                             const Tolerances& tol = {});

H2Certificate h2_certificate(const Plant& plant, const Controller& k,
                             double gamma, const Tolerances& tol = {});
H2Certificate h2_certificate(const ClosedLoop& sys, double gamma,
                             const Tolerances& tol = {});

}  // namespace hinfpath
