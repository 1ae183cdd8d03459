#include "hinfpath/numerics.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <vector>

namespace hinfpath {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidInputError(std::string(what) + ": non-finite entries");
  }
}

void require_square(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw InvalidInputError(std::string(what) + ": matrix is not square");
  }
}

// Eigenvalues of the diagonal blocks of a real quasi-triangular matrix.
std::vector<std::complex<double>> quasi_triangular_eigenvalues(
    const Eigen::MatrixXd& t) {
  std::vector<std::complex<double>> ev;
  const Eigen::Index n = t.rows();
  Eigen::Index i = 0;
  while (i < n) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      const double re = 0.5 * (t(i, i) + t(i + 1, i + 1));
      const double disc = t(i, i + 1) * t(i + 1, i) -
                          0.25 * (t(i, i) - t(i + 1, i + 1)) *
                              (t(i, i) - t(i + 1, i + 1));
      const double im = std::sqrt(std::max(0.0, -disc));
      ev.emplace_back(re, im);
      ev.emplace_back(re, -im);
      i += 2;
    } else {
      ev.emplace_back(t(i, i), 0.0);
      i += 1;
    }
  }
  return ev;
}

struct SchurBlock {
  Eigen::Index start;
  Eigen::Index size;  // 1 or 2
  double re;          // real part of the block's eigenvalue(s)
};

std::vector<SchurBlock> schur_blocks(const Eigen::MatrixXd& t) {
  std::vector<SchurBlock> blocks;
  const Eigen::Index n = t.rows();
  Eigen::Index i = 0;
  while (i < n) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      blocks.push_back({i, 2, 0.5 * (t(i, i) + t(i + 1, i + 1))});
      i += 2;
    } else {
      blocks.push_back({i, 1, t(i, i)});
      i += 1;
    }
  }
  return blocks;
}

// Direct swap of two adjacent diagonal blocks of a real Schur form
// (Bai-Demmel): solve the small Sylvester equation A11 X - X A22 = -A12,
// orthogonalize [X; I], and apply the resulting rotation to t and u.
void swap_adjacent_blocks(Eigen::MatrixXd* t, Eigen::MatrixXd* u,
                          Eigen::Index i, Eigen::Index p, Eigen::Index q) {
  const Eigen::Index n = t->rows();
  const Eigen::MatrixXd a11 = t->block(i, i, p, p);
  const Eigen::MatrixXd a12 = t->block(i, i + p, p, q);
  const Eigen::MatrixXd a22 = t->block(i + p, i + p, q, q);

  // Kronecker system (I_q (x) A11 - A22^T (x) I_p) vec(X) = -vec(A12).
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(p * q, p * q);
  Eigen::VectorXd rhs(p * q);
  for (Eigen::Index cj = 0; cj < q; ++cj) {
    for (Eigen::Index ri = 0; ri < p; ++ri) {
      const Eigen::Index row = cj * p + ri;
      rhs(row) = -a12(ri, cj);
      for (Eigen::Index k = 0; k < p; ++k) {
        sys(row, cj * p + k) += a11(ri, k);
      }
      for (Eigen::Index k = 0; k < q; ++k) {
        sys(row, k * p + ri) -= a22(k, cj);
      }
    }
  }
  const Eigen::VectorXd xv = sys.fullPivLu().solve(rhs);
  Eigen::MatrixXd x(p, q);
  for (Eigen::Index cj = 0; cj < q; ++cj) {
    x.col(cj) = xv.segment(cj * p, p);
  }

  Eigen::MatrixXd stacked(p + q, q);
  stacked.topRows(p) = x;
  stacked.bottomRows(q) = Eigen::MatrixXd::Identity(q, q);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
  const Eigen::MatrixXd qrot = qr.householderQ();

  t->block(i, 0, p + q, n) = qrot.transpose() * t->block(i, 0, p + q, n);
  t->block(0, i, n, p + q) = t->block(0, i, n, p + q) * qrot;
  u->block(0, i, n, p + q) = u->block(0, i, n, p + q) * qrot;

  // The subdiagonal coupling of the swapped pair is zero in exact
  // arithmetic; enforce it so downstream block detection stays consistent.
  t->block(i + q, i, p, q).setZero();
}

}  // namespace

void Tolerances::validate() const {
  if (!(eig_tol > 0.0) || !(lmi_margin > 0.0) || !(bisect_tol > 0.0) ||
      !(stability_margin > 0.0)) {
    throw InvalidInputError("Tolerances: all fields must be strictly positive");
  }
}

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  require_square(m, "SymMatrix");
  require_finite(m, "SymMatrix");
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::identity(Eigen::Index n) {
  return SymMatrix(Eigen::MatrixXd::Identity(n, n));
}

SymMatrix SymMatrix::zero(Eigen::Index n) {
  return SymMatrix(Eigen::MatrixXd::Zero(n, n));
}

double min_eig_sym(const SymMatrix& m) {
  if (m.dim() == 0) throw InvalidInputError("min_eig_sym: empty matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat(),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eig_sym(const SymMatrix& m) {
  if (m.dim() == 0) throw InvalidInputError("max_eig_sym: empty matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat(),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double spectral_abscissa(const Eigen::MatrixXd& a) {
  require_square(a, "spectral_abscissa");
  require_finite(a, "spectral_abscissa");
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

bool is_hurwitz(const Eigen::MatrixXd& a, const Tolerances& tol) {
  return spectral_abscissa(a) < -tol.stability_margin;
}

bool is_negative_definite_strict(const Eigen::MatrixXd& m, double lmi_margin) {
  const SymMatrix s(m);
  const double scale = 1.0 + s.mat().cwiseAbs().maxCoeff();
  return max_eig_sym(s) < -lmi_margin * scale;
}

Eigen::Index ordered_real_schur(const Eigen::MatrixXd& a, Eigen::MatrixXd* t,
                                Eigen::MatrixXd* u) {
  require_square(a, "ordered_real_schur");
  require_finite(a, "ordered_real_schur");
  Eigen::RealSchur<Eigen::MatrixXd> schur(a);
  if (schur.info() != Eigen::Success) {
    throw NumericalError("ordered_real_schur: Schur iteration failed");
  }
  *t = schur.matrixT();
  *u = schur.matrixU();

  // Bubble every stable block above every unstable one.
  bool moved = true;
  while (moved) {
    moved = false;
    const auto blocks = schur_blocks(*t);
    for (std::size_t k = 0; k + 1 < blocks.size(); ++k) {
      if (blocks[k].re >= 0.0 && blocks[k + 1].re < 0.0) {
        swap_adjacent_blocks(t, u, blocks[k].start, blocks[k].size,
                             blocks[k + 1].size);
        moved = true;
        break;
      }
    }
  }

  Eigen::Index n_stable = 0;
  for (const auto& b : schur_blocks(*t)) {
    if (b.re < 0.0) n_stable += b.size;
  }
  return n_stable;
}

Eigen::MatrixXd hamiltonian_stable_solution(const Eigen::MatrixXd& h,
                                            const Tolerances& tol) {
  tol.validate();
  require_square(h, "hamiltonian_stable_solution");
  if (h.rows() % 2 != 0) {
    throw InvalidInputError("hamiltonian_stable_solution: odd dimension");
  }
  const Eigen::Index n = h.rows() / 2;

  Eigen::MatrixXd t, u;
  const Eigen::Index n_stable = ordered_real_schur(h, &t, &u);

  const auto ev = quasi_triangular_eigenvalues(t);
  double max_abs = 0.0;
  for (const auto& l : ev) max_abs = std::max(max_abs, std::abs(l));
  for (const auto& l : ev) {
    if (std::abs(l.real()) <= tol.eig_tol * (1.0 + max_abs)) {
      throw NoStabilizingSolutionError(
          "hamiltonian_stable_solution: eigenvalue within eig_tol of the "
          "imaginary axis");
    }
  }
  if (n_stable != n) {
    throw NoStabilizingSolutionError(
        "hamiltonian_stable_solution: stable invariant subspace has wrong "
        "dimension");
  }

  const Eigen::MatrixXd u1 = u.topLeftCorner(n, n);
  const Eigen::MatrixXd u2 = u.bottomLeftCorner(n, n);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(u1);
  if (!lu.isInvertible()) {
    throw NoStabilizingSolutionError(
        "hamiltonian_stable_solution: singular U1 block");
  }
  // P = U2 U1^-1, computed as the solution of U1^T P^T = U2^T.
  const Eigen::MatrixXd pt = lu.transpose().solve(u2.transpose());
  return 0.5 * (pt.transpose() + pt);
}

SymMatrix solve_lyapunov(const Eigen::MatrixXd& a, const SymMatrix& q,
                         const Tolerances& tol) {
  tol.validate();
  require_square(a, "solve_lyapunov");
  require_finite(a, "solve_lyapunov");
  if (a.rows() != q.dim()) {
    throw InvalidInputError("solve_lyapunov: dimension mismatch");
  }
  if (!is_hurwitz(a, tol)) {
    throw PreconditionError("solve_lyapunov: A is not Hurwitz");
  }
  const Eigen::Index n = a.rows();

  Eigen::RealSchur<Eigen::MatrixXd> schur(a);
  if (schur.info() != Eigen::Success) {
    throw NumericalError("solve_lyapunov: Schur iteration failed");
  }
  const Eigen::MatrixXd& t = schur.matrixT();
  const Eigen::MatrixXd& u = schur.matrixU();
  const Eigen::MatrixXd qt = u.transpose() * q.mat() * u;

  // T^T P + P T + Qt = 0, solved block-column by block-column.
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  const auto blocks = schur_blocks(t);
  for (const auto& blk : blocks) {
    const Eigen::Index j = blk.start;
    const Eigen::Index w = blk.size;
    Eigen::MatrixXd rhs = -qt.middleCols(j, w);
    if (j > 0) {
      rhs.noalias() -= p.leftCols(j) * t.block(0, j, j, w);
    }
    // (I_w (x) T^T + T_jj^T (x) I_n) vec(Pj) = vec(rhs)
    const Eigen::MatrixXd tjj = t.block(j, j, w, w);
    Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(n * w, n * w);
    Eigen::VectorXd rv(n * w);
    for (Eigen::Index c = 0; c < w; ++c) {
      rv.segment(c * n, n) = rhs.col(c);
      sys.block(c * n, c * n, n, n) += t.transpose();
      for (Eigen::Index c2 = 0; c2 < w; ++c2) {
        sys.block(c * n, c2 * n, n, n).diagonal().array() += tjj(c2, c);
      }
    }
    const Eigen::VectorXd pv = sys.partialPivLu().solve(rv);
    for (Eigen::Index c = 0; c < w; ++c) {
      p.col(j + c) = pv.segment(c * n, n);
    }
  }

  return SymMatrix(u * p * u.transpose());
}

SymMatrix solve_care(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                     const SymMatrix& q, const SymMatrix& r,
                     const Tolerances& tol) {
  tol.validate();
  require_square(a, "solve_care");
  require_finite(a, "solve_care");
  require_finite(b, "solve_care");
  const Eigen::Index n = a.rows();
  if (b.rows() != n || q.dim() != n || r.dim() != b.cols()) {
    throw InvalidInputError("solve_care: dimension mismatch");
  }
  if (min_eig_sym(r) <= 0.0) {
    throw InvalidInputError("solve_care: R is not positive definite");
  }

  const Eigen::MatrixXd rinv_bt = r.mat().llt().solve(b.transpose());
  Eigen::MatrixXd h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = a;
  h.topRightCorner(n, n) = -b * rinv_bt;
  h.bottomLeftCorner(n, n) = -q.mat();
  h.bottomRightCorner(n, n) = -a.transpose();

  const Eigen::MatrixXd p = hamiltonian_stable_solution(h, tol);
  return SymMatrix(p);
}

PolarDecomposition polar_decompose(const Eigen::MatrixXd& m,
                                   const Tolerances& tol) {
  tol.validate();
  require_square(m, "polar_decompose");
  require_finite(m, "polar_decompose");
  if (std::abs(m.determinant()) <= tol.eig_tol) {
    throw SingularInputError("polar_decompose: matrix is near-singular");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd q = svd.matrixU() * svd.matrixV().transpose();
  const Eigen::MatrixXd s = svd.matrixV() *
                            svd.singularValues().asDiagonal() *
                            svd.matrixV().transpose();
  return {q, SymMatrix(s)};
}

namespace {

struct RotationPlane {
  Eigen::Index i;
  Eigen::Index j;
  double angle;
};

// Decomposes an orthogonal matrix with det +1 into planar rotations:
// r = w * blockdiag(rot(theta_k), 1, ...) * w^T.
void rotation_planes(const Eigen::MatrixXd& r, Eigen::MatrixXd* w,
                     std::vector<RotationPlane>* planes) {
  Eigen::RealSchur<Eigen::MatrixXd> schur(r);
  if (schur.info() != Eigen::Success) {
    throw NumericalError("special_orthogonal_path: Schur iteration failed");
  }
  const Eigen::MatrixXd& t = schur.matrixT();
  *w = schur.matrixU();
  planes->clear();

  std::vector<Eigen::Index> minus_ones;
  const Eigen::Index n = t.rows();
  Eigen::Index i = 0;
  while (i < n) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      const double c = 0.5 * (t(i, i) + t(i + 1, i + 1));
      const double s = t(i + 1, i);
      planes->push_back({i, i + 1, std::atan2(s, c)});
      i += 2;
    } else {
      if (t(i, i) < 0.0) minus_ones.push_back(i);
      i += 1;
    }
  }
  if (minus_ones.size() % 2 != 0) {
    throw InvalidInputError(
        "special_orthogonal_path: relative rotation has det -1");
  }
  // Fixed branch choice: pair the -1 eigendirections in Schur order into
  // rotation-by-pi planes.
  for (std::size_t k = 0; k + 1 < minus_ones.size(); k += 2) {
    planes->push_back(
        {minus_ones[k], minus_ones[k + 1], std::acos(-1.0)});
  }
}

void require_rotation(const Eigen::MatrixXd& q, const char* what) {
  require_square(q, what);
  require_finite(q, what);
  const Eigen::Index n = q.rows();
  const double orth =
      (q.transpose() * q - Eigen::MatrixXd::Identity(n, n))
          .cwiseAbs()
          .maxCoeff();
  if (orth > 1e-7) {
    throw InvalidInputError(std::string(what) + ": matrix is not orthogonal");
  }
  if (q.determinant() < 0.0) {
    throw InvalidInputError(std::string(what) + ": determinant is negative");
  }
}

}  // namespace

Eigen::MatrixXd special_orthogonal_path(const Eigen::MatrixXd& q0,
                                        const Eigen::MatrixXd& q1, double t,
                                        const Tolerances& tol) {
  tol.validate();
  require_rotation(q0, "special_orthogonal_path: q0");
  require_rotation(q1, "special_orthogonal_path: q1");
  if (q0.rows() != q1.rows()) {
    throw InvalidInputError("special_orthogonal_path: dimension mismatch");
  }
  const Eigen::Index n = q0.rows();

  Eigen::MatrixXd w;
  std::vector<RotationPlane> planes;
  rotation_planes(q0.transpose() * q1, &w, &planes);

  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
  for (const auto& pl : planes) {
    const double c = std::cos(t * pl.angle);
    const double s = std::sin(t * pl.angle);
    g(pl.i, pl.i) = c;
    g(pl.j, pl.j) = c;
    g(pl.i, pl.j) = -s;
    g(pl.j, pl.i) = s;
  }
  return q0 * (w * g * w.transpose());
}

}  // namespace hinfpath
