#pragma once

#include <Eigen/Core>

#include "hinfpath/errors.hpp"

namespace hinfpath {

// Numerical knobs shared across the library. All values must be positive.
struct Tolerances {
  double eig_tol = 1e-9;           // numerical-rank / imaginary-axis threshold
  double lmi_margin = 1e-8;        // relative strictness margin for LMI checks
  double bisect_tol = 1e-6;        // relative bracket width for norm bisection
  double stability_margin = 1e-8;  // Hurwitz means spectral abscissa < -this

  void validate() const;
};

// Real symmetric matrix. The constructor symmetrizes its argument, so the
// stored matrix satisfies M == M^T exactly up to round-off of (M + M^T)/2.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(const Eigen::MatrixXd& m);

  static SymMatrix identity(Eigen::Index n);
  static SymMatrix zero(Eigen::Index n);

  const Eigen::MatrixXd& mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Eigen::MatrixXd m_;
};

// Smallest eigenvalue of a symmetric matrix.
double min_eig_sym(const SymMatrix& m);
double max_eig_sym(const SymMatrix& m);

// Largest real part over the eigenvalues of a general square matrix.
double spectral_abscissa(const Eigen::MatrixXd& a);

bool is_hurwitz(const Eigen::MatrixXd& a, const Tolerances& tol = {});

// Relative strictness test for M < 0 (negative definite):
// max_eig(M) < -lmi_margin * (1 + max|M_ij|).
bool is_negative_definite_strict(const Eigen::MatrixXd& m, double lmi_margin);

// Solves A^T P + P A + Q = 0 for Hurwitz A (Bartels-Stewart on the real
// Schur form of A). Throws PreconditionError when A is not Hurwitz.
SymMatrix solve_lyapunov(const Eigen::MatrixXd& a, const SymMatrix& q,
                         const Tolerances& tol = {});

// Stabilizing solution of A^T P + P A - P B R^-1 B^T P + Q = 0 with R > 0,
// by ordered real Schur decomposition of the 2n x 2n Hamiltonian. The
// closed loop A - B R^-1 B^T P is Hurwitz. Throws
// NoStabilizingSolutionError when the Hamiltonian has eigenvalues within
// eig_tol (relative) of the imaginary axis.
SymMatrix solve_care(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                     const SymMatrix& q, const SymMatrix& r,
                     const Tolerances& tol = {});

// Stable invariant subspace solve shared by all Riccati-type constructions:
// given a 2n x 2n Hamiltonian-like H with an n-dimensional stable invariant
// subspace spanned by [U1; U2], returns U2 * U1^-1 (symmetrized).
Eigen::MatrixXd hamiltonian_stable_solution(const Eigen::MatrixXd& h,
                                            const Tolerances& tol = {});

// Real Schur form with the stable (Re < 0) eigenvalues moved to the leading
// block. Returns the number of stable eigenvalues. t and u are overwritten
// with the reordered factors, a = u t u^T.
Eigen::Index ordered_real_schur(const Eigen::MatrixXd& a, Eigen::MatrixXd* t,
                                Eigen::MatrixXd* u);

struct PolarDecomposition {
  Eigen::MatrixXd q;  // orthogonal, det(q) = sign(det(input))
  SymMatrix s;        // symmetric positive definite
};

// M = Q S with Q orthogonal and S > 0. Requires |det M| > eig_tol.
PolarDecomposition polar_decompose(const Eigen::MatrixXd& m,
                                   const Tolerances& tol = {});

// Point on the rotation geodesic from q0 to q1 (both orthogonal with
// det +1): Q(t) = q0 * exp(t * log(q0^T q1)) using the principal real
// logarithm. An eigenvalue -1 of q0^T q1 is handled by a fixed deterministic
// pairing of the -1 entries into rotation-by-pi planes.
Eigen::MatrixXd special_orthogonal_path(const Eigen::MatrixXd& q0,
                                        const Eigen::MatrixXd& q1, double t,
                                        const Tolerances& tol = {});

}  // namespace hinfpath
