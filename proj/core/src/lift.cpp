#include "hinfpath/lift.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "hinfpath/analysis.hpp"
#include "hinfpath/lmi.hpp"

namespace hinfpath {

namespace {

double rel_neg_margin(const Eigen::MatrixXd& m) {
  const SymMatrix s(m);
  return -max_eig_sym(s) / (1.0 + s.mat().cwiseAbs().maxCoeff());
}

Eigen::MatrixXd coupling_block(const SymMatrix& x, const SymMatrix& y) {
  const Eigen::Index n = x.dim();
  Eigen::MatrixXd xy(2 * n, 2 * n);
  xy.topLeftCorner(n, n) = x.mat();
  xy.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  xy.bottomLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  xy.bottomRightCorner(n, n) = y.mat();
  return xy;
}

// Partition a bounded-real witness P = [Y, Xi; Xi^T, *] and its inverse
// P^-1 = [X, Pi^T; Pi, *], then apply the change of variables.
LiftedPoint lifted_from_witness(const Plant& plant, const Controller& k,
                                const Eigen::MatrixXd& p) {
  const Eigen::Index n = plant.dims().n_x;
  const Eigen::MatrixXd pinv =
      p.llt().solve(Eigen::MatrixXd::Identity(2 * n, 2 * n));

  LiftedPoint z;
  z.Y = SymMatrix(p.topLeftCorner(n, n));
  z.Xi = p.topRightCorner(n, n);
  z.X = SymMatrix(pinv.topLeftCorner(n, n));
  z.Pi = pinv.bottomLeftCorner(n, n);

  const Eigen::MatrixXd& a = plant.A();
  const Eigen::MatrixXd& b2 = plant.B2();
  const Eigen::MatrixXd& c2 = plant.C2();
  z.Ahat = z.Y.mat() * (a + b2 * k.D_K * c2) * z.X.mat() +
           z.Xi * k.B_K * c2 * z.X.mat() + z.Y.mat() * b2 * k.C_K * z.Pi +
           z.Xi * k.A_K * z.Pi;
  z.Bhat = z.Y.mat() * b2 * k.D_K + z.Xi * k.B_K;
  z.Chat = k.D_K * c2 * z.X.mat() + k.C_K * z.Pi;
  z.Dhat = k.D_K;
  return z;
}

struct ScoredLift {
  double score;
  LiftedPoint z;
  Eigen::MatrixXd p;
};

// Minimum of the relative strictness margins a valid lifted point needs:
// the bounded-real inequality at P, the coupling block [X, I; I, Y], and
// M_gamma at the lifted variables. Factorization near-singularity maps to
// a large negative score.
double lift_score(const Plant& plant, double gamma, const ClosedLoop& cl,
                  const LiftedPoint& z, const Eigen::MatrixXd& p,
                  const Tolerances& tol) {
  const double det_xi = std::abs(Eigen::FullPivLU<Eigen::MatrixXd>(z.Xi)
                                     .determinant());
  const double det_pi = std::abs(Eigen::FullPivLU<Eigen::MatrixXd>(z.Pi)
                                     .determinant());
  if (det_xi <= tol.eig_tol || det_pi <= tol.eig_tol) return -1.0;

  const double m_brl = rel_neg_margin(bounded_real_matrix(SymMatrix(p), cl, gamma));
  const Eigen::MatrixXd xy = coupling_block(z.X, z.Y);
  const double m_xy = min_eig_sym(SymMatrix(xy)) /
                      (1.0 + xy.cwiseAbs().maxCoeff());
  const double m_lmi = rel_neg_margin(eval_M_gamma(plant, z.fpoint(), gamma));
  return std::min({m_brl, m_xy, m_lmi});
}

// Analytic centering of P inside {Eq.7 < 0, 0 < P < tau I}.
Eigen::MatrixXd center_witness(const ClosedLoop& cl, double gamma,
                               const Eigen::MatrixXd& p0) {
  const Eigen::Index n = p0.rows();
  const Eigen::Index nsym = n * (n + 1) / 2;
  const double tau = 100.0 * (1.0 + p0.cwiseAbs().maxCoeff());

  std::vector<VariableSlice> layout{{"P", 0, n, n, true}};
  AffineLmi helper(nsym, {}, layout);
  auto p_of = [helper](const Eigen::VectorXd& z) {
    return helper.unpack("P", z);
  };
  std::vector<std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>> evals;
  evals.emplace_back([p_of, cl, gamma](const Eigen::VectorXd& z) {
    return bounded_real_matrix(SymMatrix(p_of(z)), cl, gamma);
  });
  evals.emplace_back([p_of](const Eigen::VectorXd& z) {
    return (-p_of(z)).eval();
  });
  evals.emplace_back([p_of, tau, n](const Eigen::VectorXd& z) {
    return (p_of(z) - tau * Eigen::MatrixXd::Identity(n, n)).eval();
  });
  const AffineLmi lmi = AffineLmi::from_probes(nsym, evals, layout);

  Eigen::VectorXd z0(nsym);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) z0(idx++) = p0(i, j);
  }
  const Eigen::VectorXd zc = analytic_center(lmi, z0, 40);
  return lmi.unpack("P", zc);
}

}  // namespace

Eigen::MatrixXd eval_M_gamma(const Plant& plant, const FPoint& p,
                             double gamma) {
  const Eigen::Index nx = plant.dims().n_x;
  const Eigen::Index nw = plant.dims().n_w;
  const Eigen::Index nz = plant.dims().n_z;
  const Eigen::Index nu = plant.dims().n_u;
  const Eigen::Index ny = plant.dims().n_y;
  if (p.X.dim() != nx || p.Y.dim() != nx || p.Ahat.rows() != nx ||
      p.Ahat.cols() != nx || p.Bhat.rows() != nx || p.Bhat.cols() != ny ||
      p.Chat.rows() != nu || p.Chat.cols() != nx || p.Dhat.rows() != nu ||
      p.Dhat.cols() != ny) {
    throw InvalidInputError("eval_M_gamma: dimension mismatch");
  }
  const Eigen::MatrixXd& a = plant.A();
  const Eigen::MatrixXd& b1 = plant.B1();
  const Eigen::MatrixXd& b2 = plant.B2();
  const Eigen::MatrixXd& c1 = plant.C1();
  const Eigen::MatrixXd& c2 = plant.C2();
  const Eigen::MatrixXd& d11 = plant.D11();
  const Eigen::MatrixXd& d12 = plant.D12();
  const Eigen::MatrixXd& d21 = plant.D21();

  // Diagonal blocks are assembled as S + S^T so the result is symmetric to
  // the bit, not merely to round-off.
  const Eigen::MatrixXd s11 = a * p.X.mat() + b2 * p.Chat;
  const Eigen::MatrixXd s22 = a.transpose() * p.Y.mat() + p.Bhat * c2;

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * nx + nw + nz, 2 * nx + nw + nz);
  auto set_sym = [&m](Eigen::Index r, Eigen::Index c,
                      const Eigen::MatrixXd& blk) {
    m.block(r, c, blk.rows(), blk.cols()) = blk;
    if (r != c) {
      m.block(c, r, blk.cols(), blk.rows()) = blk.transpose();
    }
  };
  set_sym(0, 0, (s11 + s11.transpose()).eval());
  set_sym(0, nx, (p.Ahat.transpose() + (a + b2 * p.Dhat * c2)).eval());
  set_sym(0, 2 * nx, (b1 + b2 * p.Dhat * d21).eval());
  set_sym(0, 2 * nx + nw, (c1 * p.X.mat() + d12 * p.Chat).transpose().eval());
  set_sym(nx, nx, (s22 + s22.transpose()).eval());
  set_sym(nx, 2 * nx, (p.Y.mat() * b1 + p.Bhat * d21).eval());
  set_sym(nx, 2 * nx + nw, (c1 + d12 * p.Dhat * c2).transpose().eval());
  set_sym(2 * nx, 2 * nx,
          (-gamma * Eigen::MatrixXd::Identity(nw, nw)).eval());
  set_sym(2 * nx, 2 * nx + nw,
          (d11 + d12 * p.Dhat * d21).transpose().eval());
  set_sym(2 * nx + nw, 2 * nx + nw,
          (-gamma * Eigen::MatrixXd::Identity(nz, nz)).eval());
  return m;
}

bool in_F_gamma(const Plant& plant, const FPoint& p, double gamma,
                bool strictly_proper, const Tolerances& tol) {
  tol.validate();
  if (strictly_proper && p.Dhat.cwiseAbs().maxCoeff() > 1e-12) return false;
  const Eigen::MatrixXd xy = coupling_block(p.X, p.Y);
  const double xy_scale = 1.0 + xy.cwiseAbs().maxCoeff();
  if (min_eig_sym(SymMatrix(xy)) <= tol.lmi_margin * xy_scale) return false;
  return is_negative_definite_strict(eval_M_gamma(plant, p, gamma),
                                     tol.lmi_margin);
}

LiftedPoint lift_with_witness(const Plant& plant, const Controller& k,
                              double gamma, const SymMatrix& p,
                              const Tolerances& tol) {
  tol.validate();
  k.validate_for(plant);
  if (p.dim() != 2 * plant.dims().n_x) {
    throw InvalidInputError("lift_with_witness: P has wrong dimension");
  }
  const ClosedLoop cl = close_loop(plant, k);
  const auto [lmi_max, p_min] = verify_bounded_real(p, cl, gamma);
  if (lmi_max >= 0.0 || p_min <= 0.0) {
    throw InvalidInputError(
        "lift_with_witness: P is not a bounded-real witness at this gamma");
  }
  LiftedPoint z = lifted_from_witness(plant, k, p.mat());
  check_lifted_invariants(z, tol);
  return z;
}

LiftedPoint lift(const Plant& plant, const Controller& k, double gamma,
                 const Tolerances& tol, const LiftOptions& opts) {
  tol.validate();
  if (!in_kgamma(plant, k, gamma, /*strictly_proper=*/false, tol)) {
    throw PreconditionError("lift: controller is not in K_gamma");
  }
  const ClosedLoop cl = close_loop(plant, k);

  // Epsilon ladder: halve until the regularized Riccati solves, then sweep
  // upward and keep the witness with the best lifted margins.
  const double c_norm =
      Eigen::JacobiSVD<Eigen::MatrixXd>(cl.C).singularValues()(0);
  double eps = 1e-4 * (1.0 + c_norm);
  std::optional<Eigen::MatrixXd> p0;
  while (eps > 1e-14) {
    try {
      p0 = bounded_real_riccati(cl, gamma, eps, tol).mat();
      break;
    } catch (const NumericalError&) {
      eps *= 0.5;
    }
  }
  if (!p0) {
    throw LiftError("lift: certificate epsilon underflow at gamma " +
                    std::to_string(gamma));
  }

  std::optional<ScoredLift> best;
  // Track the witness with the fattest bounded-real margin separately; the
  // perturbation fallback needs room in Eq. 7, not a good factorization.
  Eigen::MatrixXd fattest_p;
  double fattest_margin = -1.0;
  auto consider = [&](const Eigen::MatrixXd& p) {
    if (min_eig_sym(SymMatrix(p)) <= 0.0) return;
    const double eq7 =
        rel_neg_margin(bounded_real_matrix(SymMatrix(p), cl, gamma));
    if (eq7 > fattest_margin) {
      fattest_margin = eq7;
      fattest_p = p;
    }
    LiftedPoint z = lifted_from_witness(plant, k, p);
    const double s = lift_score(plant, gamma, cl, z, p, tol);
    if (!best || s > best->score) best = ScoredLift{s, std::move(z), p};
  };

  consider(*p0);
  double e2 = eps;
  for (int step = 0; step < 30; ++step) {
    e2 *= 2.0;
    try {
      consider(bounded_real_riccati(cl, gamma, e2, tol).mat());
    } catch (const NumericalError&) {
      break;
    }
  }

  if (opts.center && fattest_margin > 0.0) {
    try {
      consider(center_witness(cl, gamma, fattest_p));
    } catch (const Error&) {
      // centering is a polish step; keep the ladder result
    }
  }

  // Perturbation fallback for a near-singular Xi block: P + delta [0 E; E' 0]
  // stays a witness for small delta thanks to the strict inequality.
  if (best && best->score < tol.lmi_margin && fattest_margin > 0.0) {
    const Eigen::Index n = plant.dims().n_x;
    const Eigen::MatrixXd base_p = fattest_p;
    std::mt19937_64 rng(opts.seed + 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int draw = 0; draw < opts.max_perturbations; ++draw) {
      Eigen::MatrixXd e(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) e(i, j) = normal(rng);
      }
      e /= e.cwiseAbs().maxCoeff();
      // The perturbation must clear the det(Xi) guard, so it starts well
      // above lmi_margin and halves while it violates the strict inequality.
      double delta = 1e-3 * (1.0 + best->p.cwiseAbs().maxCoeff());
      for (int halving = 0; halving < 40; ++halving) {
        Eigen::MatrixXd p = base_p;
        p.topRightCorner(n, n) += delta * e;
        p.bottomLeftCorner(n, n) += delta * e.transpose();
        if (rel_neg_margin(bounded_real_matrix(SymMatrix(p), cl, gamma)) > 0.0 &&
            min_eig_sym(SymMatrix(p)) > 0.0) {
          consider(p);
          break;
        }
        delta *= 0.5;
      }
      if (best->score >= tol.lmi_margin) break;
    }
  }

  if (!best || best->score < tol.lmi_margin) {
    throw LiftError(
        "lift: no witness reached the required strictness margins (best " +
        std::to_string(best ? best->score : -1.0) +
        "); consider a smaller lmi_margin");
  }
  check_lifted_invariants(best->z, tol);
  return best->z;
}

Controller reconstruct(const Plant& plant, const LiftedPoint& z,
                       const Tolerances& tol) {
  tol.validate();
  const Eigen::Index n = plant.dims().n_x;
  const Eigen::Index nu = plant.dims().n_u;
  const Eigen::Index ny = plant.dims().n_y;
  if (z.X.dim() != n || z.Pi.rows() != n || z.Xi.rows() != n) {
    throw InvalidInputError("reconstruct: lifted point has wrong dimensions");
  }

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu_xi(z.Xi);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu_pi(z.Pi);
  if (std::abs(Eigen::FullPivLU<Eigen::MatrixXd>(z.Xi).determinant()) <=
          tol.eig_tol ||
      std::abs(Eigen::FullPivLU<Eigen::MatrixXd>(z.Pi).determinant()) <=
          tol.eig_tol) {
    throw SingularInputError("reconstruct: Pi or Xi is near-singular");
  }

  // Middle factor [Dhat, Chat; Bhat, Ahat - Y A X].
  const Eigen::MatrixXd mid_br =
      z.Ahat - z.Y.mat() * plant.A() * z.X.mat();

  // Forward substitution with the left factor [I, 0; Y B2, Xi].
  const Eigen::MatrixXd yb2 = z.Y.mat() * plant.B2();
  const Eigen::MatrixXd w_top_l = z.Dhat;
  const Eigen::MatrixXd w_top_r = z.Chat;
  const Eigen::MatrixXd w_bot_l = lu_xi.solve(z.Bhat - yb2 * w_top_l);
  const Eigen::MatrixXd w_bot_r = lu_xi.solve(mid_br - yb2 * w_top_r);

  // Back substitution with the right factor [I, C2 X; 0, Pi].
  const Eigen::MatrixXd c2x = plant.C2() * z.X.mat();
  auto solve_right = [&lu_pi](const Eigen::MatrixXd& rhs) {
    // Solves G Pi = rhs for G.
    const Eigen::MatrixXd gt = lu_pi.transpose().solve(rhs.transpose());
    return gt.transpose().eval();
  };
  Controller k;
  k.D_K = w_top_l;
  k.B_K = w_bot_l;
  k.C_K = solve_right(w_top_r - k.D_K * c2x);
  k.A_K = solve_right(w_bot_r - k.B_K * c2x);
  (void)nu;
  (void)ny;
  return k;
}

ComponentSign component_sign(const LiftedPoint& z, const Tolerances& tol) {
  tol.validate();
  const double det = Eigen::FullPivLU<Eigen::MatrixXd>(z.Pi).determinant();
  if (std::abs(det) <= tol.eig_tol) {
    throw InvalidInputError(
        "component_sign: det(Pi) is degenerate (invariant violation)");
  }
  return det > 0.0 ? ComponentSign::plus : ComponentSign::minus;
}

ComponentSign opposite(ComponentSign s) {
  return s == ComponentSign::plus ? ComponentSign::minus
                                  : ComponentSign::plus;
}

LiftedPoint transform_lifted(const LiftedPoint& z, const Eigen::MatrixXd& t,
                             const Tolerances& tol) {
  tol.validate();
  if (t.rows() != t.cols() || t.rows() != z.Pi.rows()) {
    throw InvalidInputError("transform_lifted: T has wrong dimensions");
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(t);
  if (std::abs(lu.determinant()) <= tol.eig_tol) {
    throw SingularInputError("transform_lifted: T is near-singular");
  }
  LiftedPoint out = z;
  out.Pi = t * z.Pi;
  // Xi T^-1 computed as the solution of (T^T) (Xi')^T = Xi^T.
  const Eigen::MatrixXd xit = lu.transpose().solve(z.Xi.transpose());
  out.Xi = xit.transpose();
  return out;
}

void check_lifted_invariants(const LiftedPoint& z, const Tolerances& tol) {
  tol.validate();
  const Eigen::Index n = z.X.dim();
  const double xnorm =
      Eigen::JacobiSVD<Eigen::MatrixXd>(z.X.mat()).singularValues()(0);
  const double ynorm =
      Eigen::JacobiSVD<Eigen::MatrixXd>(z.Y.mat()).singularValues()(0);
  const Eigen::MatrixXd resid =
      z.Xi * z.Pi -
      (Eigen::MatrixXd::Identity(n, n) - z.Y.mat() * z.X.mat());
  if (resid.cwiseAbs().maxCoeff() > 1e-9 * (1.0 + ynorm * xnorm)) {
    throw InvalidInputError(
        "LiftedPoint: coupling identity Xi Pi = I - Y X violated");
  }
  const Eigen::MatrixXd xy = coupling_block(z.X, z.Y);
  if (min_eig_sym(SymMatrix(xy)) <=
      tol.lmi_margin * (1.0 + xy.cwiseAbs().maxCoeff())) {
    throw InvalidInputError("LiftedPoint: [X, I; I, Y] is not strictly "
                            "positive definite");
  }
  if (std::abs(Eigen::FullPivLU<Eigen::MatrixXd>(z.Pi).determinant()) <=
          tol.eig_tol ||
      std::abs(Eigen::FullPivLU<Eigen::MatrixXd>(z.Xi).determinant()) <=
          tol.eig_tol) {
    throw InvalidInputError("LiftedPoint: Pi or Xi is near-singular");
  }
}

H2LmiBlocks eval_M_lqg(const Plant& plant, const FPoint& p,
                       const SymMatrix& gamma_mat) {
  const Eigen::Index nx = plant.dims().n_x;
  const Eigen::Index nw = plant.dims().n_w;
  const Eigen::Index nz = plant.dims().n_z;
  if (p.Dhat.size() > 0 && p.Dhat.cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidInputError("eval_M_lqg: Dhat must be zero");
  }
  if (gamma_mat.dim() != nz) {
    throw InvalidInputError("eval_M_lqg: Gamma has wrong dimension");
  }
  const Eigen::MatrixXd& a = plant.A();
  const Eigen::MatrixXd& b1 = plant.B1();
  const Eigen::MatrixXd& b2 = plant.B2();
  const Eigen::MatrixXd& c1 = plant.C1();
  const Eigen::MatrixXd& c2 = plant.C2();
  const Eigen::MatrixXd& d12 = plant.D12();
  const Eigen::MatrixXd& d21 = plant.D21();

  const Eigen::MatrixXd s11 = a * p.X.mat() + b2 * p.Chat;
  const Eigen::MatrixXd s22 = a.transpose() * p.Y.mat() + p.Bhat * c2;
  const Eigen::MatrixXd m11 = s11 + s11.transpose();
  const Eigen::MatrixXd m22 = s22 + s22.transpose();
  const Eigen::MatrixXd yb1 = p.Y.mat() * b1 + p.Bhat * d21;

  H2LmiBlocks out;
  out.block1.resize(2 * nx + nw, 2 * nx + nw);
  out.block1.topLeftCorner(nx, nx) = m11;
  out.block1.block(0, nx, nx, nx) = p.Ahat.transpose() + a;
  out.block1.block(0, 2 * nx, nx, nw) = b1;
  out.block1.block(nx, 0, nx, nx) = p.Ahat + a.transpose();
  out.block1.block(nx, nx, nx, nx) = m22;
  out.block1.block(nx, 2 * nx, nx, nw) = yb1;
  out.block1.block(2 * nx, 0, nw, nx) = b1.transpose();
  out.block1.block(2 * nx, nx, nw, nx) = yb1.transpose();
  out.block1.block(2 * nx, 2 * nx, nw, nw) =
      -Eigen::MatrixXd::Identity(nw, nw);

  const Eigen::MatrixXd c1x = c1 * p.X.mat() + d12 * p.Chat;
  out.block2.resize(2 * nx + nz, 2 * nx + nz);
  out.block2.topLeftCorner(nx, nx) = p.X.mat();
  out.block2.block(0, nx, nx, nx) = Eigen::MatrixXd::Identity(nx, nx);
  out.block2.block(0, 2 * nx, nx, nz) = c1x.transpose();
  out.block2.block(nx, 0, nx, nx) = Eigen::MatrixXd::Identity(nx, nx);
  out.block2.block(nx, nx, nx, nx) = p.Y.mat();
  out.block2.block(nx, 2 * nx, nx, nz) = c1.transpose();
  out.block2.block(2 * nx, 0, nz, nx) = c1x;
  out.block2.block(2 * nx, nx, nz, nx) = c1;
  out.block2.block(2 * nx, 2 * nx, nz, nz) = gamma_mat.mat();

  out.trace_gamma = gamma_mat.mat().trace();
  return out;
}

H2Lift lift_h2(const Plant& plant, const Controller& k, double gamma,
               const Tolerances& tol, const LiftOptions& opts) {
  tol.validate();
  if (!in_lgamma(plant, k, gamma, tol)) {
    throw PreconditionError("lift_h2: controller is not in L_gamma");
  }
  const H2Certificate cert = h2_certificate(plant, k, gamma, tol);

  LiftedPoint z = lifted_from_witness(plant, k, cert.P.mat());

  // Perturbation fallback mirrors lift(): nudge the off-diagonal block of P
  // if the factorization is degenerate.
  const Eigen::Index n = plant.dims().n_x;
  const ClosedLoop cl = close_loop(plant, k);
  auto h2_ok = [&](const Eigen::MatrixXd& p) {
    const H2Margins m = verify_h2(SymMatrix(p), cert.Gamma, cl, gamma);
    return m.block1_max_eig < 0.0 && m.block2_min_eig > 0.0 &&
           min_eig_sym(SymMatrix(p)) > 0.0;
  };
  bool ok = false;
  try {
    check_lifted_invariants(z, tol);
    ok = true;
  } catch (const InvalidInputError&) {
  }
  if (!ok) {
    std::mt19937_64 rng(opts.seed + 0x2545f4914f6cdd1dULL);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int draw = 0; draw < opts.max_perturbations && !ok; ++draw) {
      Eigen::MatrixXd e(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) e(i, j) = normal(rng);
      }
      e /= e.cwiseAbs().maxCoeff();
      double delta =
          0.1 * tol.lmi_margin * (1.0 + cert.P.mat().cwiseAbs().maxCoeff());
      for (int halving = 0; halving < 20; ++halving) {
        Eigen::MatrixXd p = cert.P.mat();
        p.topRightCorner(n, n) += delta * e;
        p.bottomLeftCorner(n, n) += delta * e.transpose();
        if (h2_ok(p)) {
          z = lifted_from_witness(plant, k, p);
          try {
            check_lifted_invariants(z, tol);
            ok = true;
          } catch (const InvalidInputError&) {
          }
          break;
        }
        delta *= 0.5;
      }
    }
    if (!ok) {
      throw LiftError("lift_h2: factorization invariants unreachable");
    }
  }
  return H2Lift{std::move(z), cert.Gamma};
}

}  // namespace hinfpath
