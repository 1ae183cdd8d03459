#include "hinfpath/certify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>

namespace hinfpath {

namespace {

constexpr double kEpsFloor = 1e-14;
constexpr int kMaxUpSweeps = 30;

double rel_neg_margin(const Eigen::MatrixXd& m) {
  const SymMatrix s(m);
  return -max_eig_sym(s) / (1.0 + s.mat().cwiseAbs().maxCoeff());
}

}  // namespace

Eigen::MatrixXd bounded_real_matrix(const SymMatrix& p, const ClosedLoop& sys,
                                    double gamma) {
  const Eigen::Index n = sys.A.rows();
  const Eigen::Index nw = sys.B.cols();
  const Eigen::Index nz = sys.C.rows();
  if (p.dim() != n) {
    throw InvalidInputError("bounded_real_matrix: P has wrong dimension");
  }
  Eigen::MatrixXd m(n + nw + nz, n + nw + nz);
  m.topLeftCorner(n, n) =
      sys.A.transpose() * p.mat() + p.mat() * sys.A;
  m.block(0, n, n, nw) = p.mat() * sys.B;
  m.block(0, n + nw, n, nz) = sys.C.transpose();
  m.block(n, 0, nw, n) = sys.B.transpose() * p.mat();
  m.block(n, n, nw, nw) = -gamma * Eigen::MatrixXd::Identity(nw, nw);
  m.block(n, n + nw, nw, nz) = sys.D.transpose();
  m.block(n + nw, 0, nz, n) = sys.C;
  m.block(n + nw, n, nz, nw) = sys.D;
  m.block(n + nw, n + nw, nz, nz) =
      -gamma * Eigen::MatrixXd::Identity(nz, nz);
  return m;
}

std::pair<double, double> verify_bounded_real(const SymMatrix& p,
                                              const ClosedLoop& sys,
                                              double gamma) {
  const SymMatrix m(bounded_real_matrix(p, sys, gamma));
  return {max_eig_sym(m), min_eig_sym(p)};
}

SymMatrix bounded_real_riccati(const ClosedLoop& sys, double gamma, double eps,
                               const Tolerances& tol) {
  tol.validate();
  const Eigen::Index n = sys.A.rows();
  const Eigen::Index nw = sys.B.cols();
  const Eigen::MatrixXd r =
      gamma * gamma * Eigen::MatrixXd::Identity(nw, nw) -
      sys.D.transpose() * sys.D;
  const Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) {
    throw CertificateError(
        "bounded_real_riccati: gamma <= sigma_max(D), no certificate exists");
  }

  // Augmented output [C; eps I], feedthrough [D; 0]:
  //   Q = C^T C + eps^2 I,  S = C^T D,  and the Riccati
  //   A^T X + X A + Q + (X B + S) R^-1 (B^T X + S^T) = 0.
  const Eigen::MatrixXd s = sys.C.transpose() * sys.D;
  const Eigen::MatrixXd q =
      sys.C.transpose() * sys.C +
      eps * eps * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd a_shift = sys.A + sys.B * llt.solve(s.transpose());
  const Eigen::MatrixXd q_shift = q + s * llt.solve(s.transpose());

  Eigen::MatrixXd h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = a_shift;
  h.topRightCorner(n, n) = sys.B * llt.solve(sys.B.transpose());
  h.bottomLeftCorner(n, n) = -q_shift;
  h.bottomRightCorner(n, n) = -a_shift.transpose();

  const Eigen::MatrixXd x = hamiltonian_stable_solution(h, tol);
  return SymMatrix(x / gamma);
}

HinfCertificate bounded_real_certificate(const ClosedLoop& sys, double gamma,
                                         const Tolerances& tol) {
  tol.validate();
  if (!is_hurwitz(sys.A, tol)) {
    throw PreconditionError(
        "bounded_real_certificate: closed loop is not stable");
  }

  const double c_norm =
      Eigen::JacobiSVD<Eigen::MatrixXd>(sys.C).singularValues()(0);
  double eps = 1e-4 * (1.0 + c_norm);

  std::optional<SymMatrix> p;
  while (eps > kEpsFloor) {
    try {
      p = bounded_real_riccati(sys, gamma, eps, tol);
      break;
    } catch (const NumericalError&) {
      eps *= 0.5;
    }
  }
  if (!p) {
    throw CertificateError(
        "bounded_real_certificate: epsilon underflow, gamma is too close to "
        "the closed-loop norm for the configured tolerances");
  }

  auto margins = [&](const SymMatrix& cand) {
    const Eigen::MatrixXd m = bounded_real_matrix(cand, sys, gamma);
    return std::pair<double, double>(rel_neg_margin(m), min_eig_sym(cand));
  };

  auto [best_margin, best_pmin] = margins(*p);
  SymMatrix best_p = *p;
  double e2 = eps;
  for (int k = 0; k < kMaxUpSweeps; ++k) {
    e2 *= 2.0;
    SymMatrix cand;
    try {
      cand = bounded_real_riccati(sys, gamma, e2, tol);
    } catch (const NumericalError&) {
      break;
    }
    const auto [m2, pm2] = margins(cand);
    if (m2 > best_margin) {
      best_margin = m2;
      best_pmin = pm2;
      best_p = cand;
    }
  }

  if (best_margin < tol.lmi_margin || best_pmin <= 0.0) {
    throw CertificateError(
        "bounded_real_certificate: strict margins unreachable (achieved "
        "relative margin " +
        std::to_string(best_margin) + ")");
  }
  return HinfCertificate{best_p, gamma, best_margin, best_pmin};
}

HinfCertificate bounded_real_certificate(const Plant& plant,
                                         const Controller& k, double gamma,
                                         const Tolerances& tol) {
  tol.validate();
  if (!in_kgamma(plant, k, gamma, /*strictly_proper=*/false, tol)) {
    throw PreconditionError(
        "bounded_real_certificate: controller is not in K_gamma");
  }
  return bounded_real_certificate(close_loop(plant, k), gamma, tol);
}

namespace {

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> h2_witness_blocks(
    const SymMatrix& p, const SymMatrix& gamma_mat, const ClosedLoop& sys) {
  const Eigen::Index n = sys.A.rows();
  const Eigen::Index nw = sys.B.cols();
  const Eigen::Index nz = sys.C.rows();

  Eigen::MatrixXd blk1(n + nw, n + nw);
  blk1.topLeftCorner(n, n) = sys.A.transpose() * p.mat() + p.mat() * sys.A;
  blk1.topRightCorner(n, nw) = p.mat() * sys.B;
  blk1.bottomLeftCorner(nw, n) = sys.B.transpose() * p.mat();
  blk1.bottomRightCorner(nw, nw) = -Eigen::MatrixXd::Identity(nw, nw);

  Eigen::MatrixXd blk2(n + nz, n + nz);
  blk2.topLeftCorner(n, n) = p.mat();
  blk2.topRightCorner(n, nz) = sys.C.transpose();
  blk2.bottomLeftCorner(nz, n) = sys.C;
  blk2.bottomRightCorner(nz, nz) = gamma_mat.mat();
  return {std::move(blk1), std::move(blk2)};
}

}  // namespace

H2Margins verify_h2(const SymMatrix& p, const SymMatrix& gamma_mat,
                    const ClosedLoop& sys, double gamma) {
  (void)gamma;
  const auto [blk1, blk2] = h2_witness_blocks(p, gamma_mat, sys);
  return H2Margins{max_eig_sym(SymMatrix(blk1)), min_eig_sym(SymMatrix(blk2)),
                   gamma_mat.mat().trace()};
}

SymMatrix h2_gramian_riccati(const ClosedLoop& sys, double eps,
                             const Tolerances& tol) {
  tol.validate();
  const Eigen::Index n = sys.A.rows();
  Eigen::MatrixXd h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = sys.A.transpose();
  h.topRightCorner(n, n) = eps * eps * Eigen::MatrixXd::Identity(n, n);
  h.bottomLeftCorner(n, n) =
      -(sys.B * sys.B.transpose() +
        eps * eps * Eigen::MatrixXd::Identity(n, n));
  h.bottomRightCorner(n, n) = -sys.A;
  return SymMatrix(hamiltonian_stable_solution(h, tol));
}

H2Certificate h2_certificate(const ClosedLoop& sys, double gamma,
                             const Tolerances& tol) {
  tol.validate();
  if (!is_hurwitz(sys.A, tol)) {
    throw PreconditionError("h2_certificate: closed loop is not stable");
  }
  if (sys.D.cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidInputError("h2_certificate: D != 0");
  }
  const Eigen::Index nz = sys.C.rows();
  const double b_norm =
      Eigen::JacobiSVD<Eigen::MatrixXd>(sys.B).singularValues()(0);

  double delta = 1e-2;
  double best_overall = -1.0;
  while (delta > 1e-13) {
    double eps = 1e-4 * (1.0 + b_norm);
    std::optional<SymMatrix> w;
    while (eps > kEpsFloor) {
      try {
        w = h2_gramian_riccati(sys, eps, tol);
        break;
      } catch (const NumericalError&) {
        eps *= 0.5;
      }
    }
    if (!w) break;

    std::optional<H2Certificate> best;
    double e2 = eps;
    for (int k = 0; k <= kMaxUpSweeps; ++k) {
      if (k > 0) {
        e2 *= 2.0;
        try {
          w = h2_gramian_riccati(sys, e2, tol);
        } catch (const NumericalError&) {
          break;
        }
      }
      if (min_eig_sym(*w) <= 0.0) continue;
      const Eigen::MatrixXd p_mat = w->mat().inverse();
      const SymMatrix p(p_mat);
      const Eigen::MatrixXd g0 = sys.C * w->mat() * sys.C.transpose();
      const double slack = gamma - (1.0 + delta) * g0.trace();
      if (slack <= 0.0) continue;
      // Ridge on Gamma budgeted by the remaining trace slack; it provides
      // the strict [P, C^T; C, Gamma] > 0 margin when C is rank-deficient.
      const double ridge =
          std::min(delta * (1.0 + g0.cwiseAbs().maxCoeff()),
                   0.25 * slack / static_cast<double>(nz));
      const SymMatrix gam(
          (1.0 + delta) * g0 +
          ridge * Eigen::MatrixXd::Identity(nz, nz));
      const auto [blk1, blk2] = h2_witness_blocks(p, gam, sys);
      const double m1 = rel_neg_margin(blk1);
      const double m2 = rel_neg_margin(-blk2);
      const double score = std::min(m1, m2);
      if (gam.mat().trace() < gamma && score > 0.0 &&
          (!best || score > best->lmi_margin_achieved)) {
        best = H2Certificate{p, gam, gamma, score, min_eig_sym(p)};
      }
    }
    if (best && best->lmi_margin_achieved >= tol.lmi_margin) {
      return *best;
    }
    if (best) best_overall = std::max(best_overall, best->lmi_margin_achieved);
    delta *= 0.5;
  }
  throw CertificateError(
      "h2_certificate: strict margins unreachable (best relative margin " +
      std::to_string(best_overall) + ")");
}

H2Certificate h2_certificate(const Plant& plant, const Controller& k,
                             double gamma, const Tolerances& tol) {
  tol.validate();
  if (!in_lgamma(plant, k, gamma, tol)) {
    throw PreconditionError("h2_certificate: controller is not in L_gamma");
  }
  return h2_certificate(close_loop(plant, k), gamma, tol);
}

}  // namespace hinfpath
