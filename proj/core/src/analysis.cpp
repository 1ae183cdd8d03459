#include "hinfpath/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace hinfpath {

namespace {

double sigma_max(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

// Level-gamma Hamiltonian for the bounded real test. Requires
// sigma_max(D) < gamma.
Eigen::MatrixXd bounded_real_hamiltonian(const ClosedLoop& sys, double gamma) {
  const Eigen::Index n = sys.A.rows();
  const Eigen::Index nw = sys.B.cols();
  const Eigen::Index nz = sys.C.rows();
  const Eigen::MatrixXd r =
      gamma * gamma * Eigen::MatrixXd::Identity(nw, nw) -
      sys.D.transpose() * sys.D;
  const Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("bounded_real_hamiltonian: gamma^2 I - D^T D not "
                         "positive definite");
  }
  const Eigen::MatrixXd ri_bt = llt.solve(sys.B.transpose());
  const Eigen::MatrixXd ri_dtc = llt.solve(sys.D.transpose() * sys.C);
  const Eigen::MatrixXd a_shift = sys.A + sys.B * ri_dtc;

  Eigen::MatrixXd h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = a_shift;
  h.topRightCorner(n, n) = sys.B * ri_bt;
  h.bottomLeftCorner(n, n) =
      -sys.C.transpose() *
      (Eigen::MatrixXd::Identity(nz, nz) + sys.D * llt.solve(sys.D.transpose())) *
      sys.C;
  h.bottomRightCorner(n, n) = -a_shift.transpose();
  return h;
}

bool hamiltonian_clear_of_axis(const Eigen::MatrixXd& h, double eig_tol) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(h, /*computeEigenvectors=*/false);
  const auto& ev = es.eigenvalues();
  const double max_abs = ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev(i).real()) <= eig_tol * (1.0 + max_abs)) return false;
  }
  return true;
}

// Coarse log-spaced frequency sweep (lower bound on the norm).
double frequency_sweep_max(const ClosedLoop& sys, int points) {
  const Eigen::Index n = sys.A.rows();
  double best = sigma_max(sys.D);
  const Eigen::MatrixXcd ac = sys.A.cast<std::complex<double>>();
  const Eigen::MatrixXcd bc = sys.B.cast<std::complex<double>>();
  const Eigen::MatrixXcd cc = sys.C.cast<std::complex<double>>();
  const Eigen::MatrixXcd dc = sys.D.cast<std::complex<double>>();
  const double scale = 1.0 + sys.A.cwiseAbs().maxCoeff();
  for (int i = -1; i < points; ++i) {
    // i == -1 is omega = 0; the rest are log-spaced over [1e-4, 1e4] * scale
    double omega = 0.0;
    if (i >= 0) {
      const double f = static_cast<double>(i) / std::max(1, points - 1);
      omega = scale * std::pow(10.0, -4.0 + 8.0 * f);
    }
    const Eigen::MatrixXcd resolvent =
        (std::complex<double>(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) -
         ac)
            .partialPivLu()
            .solve(bc);
    const Eigen::MatrixXcd tf = cc * resolvent + dc;
    best = std::max(best,
                    Eigen::JacobiSVD<Eigen::MatrixXcd>(tf).singularValues()(0));
  }
  return best;
}

}  // namespace

bool hinf_below(const ClosedLoop& sys, double gamma, const Tolerances& tol) {
  tol.validate();
  if (!(gamma > 0.0)) return false;
  if (!is_hurwitz(sys.A, tol)) return false;
  if (sigma_max(sys.D) >= gamma) return false;
  return hamiltonian_clear_of_axis(bounded_real_hamiltonian(sys, gamma),
                                   tol.eig_tol);
}

NormResult hinf_norm(const ClosedLoop& sys, const Tolerances& tol) {
  tol.validate();
  if (!is_hurwitz(sys.A, tol)) {
    throw PreconditionError("hinf_norm: system is not Hurwitz-stable");
  }
  const double smax_d = sigma_max(sys.D);
  const double sweep = frequency_sweep_max(sys, 200);

  double lo = std::max(smax_d, sweep * (1.0 - 1e-12));
  double hi = 2.0 * sweep + smax_d + 1e-9;
  auto upper_ok = [&](double g) {
    return smax_d < g &&
           hamiltonian_clear_of_axis(bounded_real_hamiltonian(sys, g),
                                     tol.eig_tol);
  };
  int doublings = 0;
  while (!upper_ok(hi)) {
    hi *= 2.0;
    if (++doublings > 60) {
      throw NumericalError("hinf_norm: no valid upper bound after doubling");
    }
  }

  int iters = 0;
  while (hi - lo > tol.bisect_tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    // Near-critical levels resolve toward "has imaginary eigenvalue", which
    // bisects upward and keeps hi a certified upper bound.
    if (upper_ok(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (++iters > 200) {
      throw NumericalError("hinf_norm: bisection failed to converge");
    }
  }
  return NormResult{hi, lo, hi, NormMethod::hamiltonian_bisection};
}

double h2_norm_squared(const ClosedLoop& sys, const Tolerances& tol) {
  tol.validate();
  if (!is_hurwitz(sys.A, tol)) {
    throw PreconditionError("h2_norm_squared: system is not Hurwitz-stable");
  }
  if (sys.D.cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidInputError(
        "h2_norm_squared: D != 0, the H2 norm is infinite");
  }
  const SymMatrix gram_obs =
      solve_lyapunov(sys.A, SymMatrix(sys.C.transpose() * sys.C), tol);
  return (sys.B.transpose() * gram_obs.mat() * sys.B).trace();
}

bool in_cstab(const Plant& plant, const Controller& k, const Tolerances& tol) {
  tol.validate();
  return is_hurwitz(close_loop(plant, k).A, tol);
}

bool in_kgamma(const Plant& plant, const Controller& k, double gamma,
               bool strictly_proper, const Tolerances& tol) {
  tol.validate();
  if (!(gamma > 0.0)) {
    throw InvalidInputError("in_kgamma: gamma must be positive");
  }
  if (strictly_proper && !k.strictly_proper()) return false;
  const ClosedLoop cl = close_loop(plant, k);
  if (!is_hurwitz(cl.A, tol)) return false;
  return hinf_norm(cl, tol).hi < gamma;
}

bool in_lgamma(const Plant& plant, const Controller& k, double gamma,
               const Tolerances& tol) {
  tol.validate();
  if (!(gamma > 0.0)) {
    throw InvalidInputError("in_lgamma: gamma must be positive");
  }
  if (!k.strictly_proper()) return false;
  const ClosedLoop cl = close_loop(plant, k);
  if (!is_hurwitz(cl.A, tol)) return false;
  if (cl.D.cwiseAbs().maxCoeff() > 1e-12) return false;
  return h2_norm_squared(cl, tol) < gamma;
}

}  // namespace hinfpath
