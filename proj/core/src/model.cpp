#include "hinfpath/model.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <string>

namespace hinfpath {

namespace {

void check_finite(const Eigen::MatrixXd& m, const char* name) {
  if (!m.allFinite()) {
    throw InvalidInputError(std::string("Plant: ") + name +
                            " has non-finite entries");
  }
}

double smin(const Eigen::MatrixXcd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues().minCoeff();
}

}  // namespace

Plant::Plant(Eigen::MatrixXd a, Eigen::MatrixXd b1, Eigen::MatrixXd b2,
             Eigen::MatrixXd c1, Eigen::MatrixXd c2, Eigen::MatrixXd d11,
             Eigen::MatrixXd d12, Eigen::MatrixXd d21)
    : a_(std::move(a)),
      b1_(std::move(b1)),
      b2_(std::move(b2)),
      c1_(std::move(c1)),
      c2_(std::move(c2)),
      d11_(std::move(d11)),
      d12_(std::move(d12)),
      d21_(std::move(d21)) {
  dims_.n_x = a_.rows();
  dims_.n_w = b1_.cols();
  dims_.n_u = b2_.cols();
  dims_.n_y = c2_.rows();
  dims_.n_z = c1_.rows();
  if (dims_.n_x < 1 || dims_.n_w < 1 || dims_.n_u < 1 || dims_.n_y < 1 ||
      dims_.n_z < 1) {
    throw InvalidInputError("Plant: all dimensions must be at least 1");
  }
  if (a_.cols() != dims_.n_x || b1_.rows() != dims_.n_x ||
      b2_.rows() != dims_.n_x || c1_.cols() != dims_.n_x ||
      c2_.cols() != dims_.n_x || d11_.rows() != dims_.n_z ||
      d11_.cols() != dims_.n_w || d12_.rows() != dims_.n_z ||
      d12_.cols() != dims_.n_u || d21_.rows() != dims_.n_y ||
      d21_.cols() != dims_.n_w) {
    throw InvalidInputError("Plant: inconsistent block dimensions");
  }
  check_finite(a_, "A");
  check_finite(b1_, "B1");
  check_finite(b2_, "B2");
  check_finite(c1_, "C1");
  check_finite(c2_, "C2");
  check_finite(d11_, "D11");
  check_finite(d12_, "D12");
  check_finite(d21_, "D21");
}

bool Controller::strictly_proper(double tol) const {
  return D_K.size() == 0 || D_K.cwiseAbs().maxCoeff() <= tol;
}

void Controller::validate() const {
  const Eigen::Index n = A_K.rows();
  if (A_K.cols() != n || B_K.rows() != n || C_K.cols() != n ||
      D_K.rows() != C_K.rows() || D_K.cols() != B_K.cols()) {
    throw InvalidInputError("Controller: inconsistent block dimensions");
  }
  if (!A_K.allFinite() || !B_K.allFinite() || !C_K.allFinite() ||
      !D_K.allFinite()) {
    throw InvalidInputError("Controller: non-finite entries");
  }
}

void Controller::validate_for(const Plant& plant) const {
  validate();
  if (order() != plant.dims().n_x) {
    throw InvalidInputError(
        "Controller: state dimension does not match the plant (full-order "
        "controllers only)");
  }
  if (n_u() != plant.dims().n_u || n_y() != plant.dims().n_y) {
    throw InvalidInputError("Controller: input/output dimension mismatch");
  }
}

Controller Controller::zero(const PlantDims& dims) {
  return Controller{Eigen::MatrixXd::Zero(dims.n_x, dims.n_x),
                    Eigen::MatrixXd::Zero(dims.n_x, dims.n_y),
                    Eigen::MatrixXd::Zero(dims.n_u, dims.n_x),
                    Eigen::MatrixXd::Zero(dims.n_u, dims.n_y)};
}

ClosedLoop::ClosedLoop(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c,
                       Eigen::MatrixXd d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  if (A.rows() != A.cols() || B.rows() != A.rows() || C.cols() != A.rows() ||
      D.rows() != C.rows() || D.cols() != B.cols()) {
    throw InvalidInputError("ClosedLoop: inconsistent dimensions");
  }
  if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !D.allFinite()) {
    throw InvalidInputError("ClosedLoop: non-finite entries");
  }
}

ClosedLoop close_loop(const Plant& plant, const Controller& k) {
  k.validate_for(plant);
  const Eigen::Index n = plant.dims().n_x;
  const Eigen::Index nw = plant.dims().n_w;
  const Eigen::Index nz = plant.dims().n_z;

  Eigen::MatrixXd a(2 * n, 2 * n);
  a.topLeftCorner(n, n) = plant.A() + plant.B2() * k.D_K * plant.C2();
  a.topRightCorner(n, n) = plant.B2() * k.C_K;
  a.bottomLeftCorner(n, n) = k.B_K * plant.C2();
  a.bottomRightCorner(n, n) = k.A_K;

  Eigen::MatrixXd b(2 * n, nw);
  b.topRows(n) = plant.B1() + plant.B2() * k.D_K * plant.D21();
  b.bottomRows(n) = k.B_K * plant.D21();

  Eigen::MatrixXd c(nz, 2 * n);
  c.leftCols(n) = plant.C1() + plant.D12() * k.D_K * plant.C2();
  c.rightCols(n) = plant.D12() * k.C_K;

  Eigen::MatrixXd d = plant.D11() + plant.D12() * k.D_K * plant.D21();
  return ClosedLoop(std::move(a), std::move(b), std::move(c), std::move(d));
}

Controller similarity_transform(const Controller& k, const Eigen::MatrixXd& t,
                                const Tolerances& tol) {
  tol.validate();
  k.validate();
  if (t.rows() != t.cols() || t.rows() != k.order()) {
    throw InvalidInputError("similarity_transform: T has wrong dimensions");
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(t);
  if (std::abs(lu.determinant()) <= tol.eig_tol) {
    throw SingularInputError("similarity_transform: T is near-singular");
  }
  // Right-multiplications by T^-1 via LU solves on the transposed system.
  const Eigen::MatrixXd ak_tinv_t = lu.transpose().solve(k.A_K.transpose());
  const Eigen::MatrixXd ck_tinv_t = lu.transpose().solve(k.C_K.transpose());
  return Controller{t * ak_tinv_t.transpose(), t * k.B_K,
                    ck_tinv_t.transpose(), k.D_K};
}

StabilizabilityReport check_stabilizable_detectable(const Plant& plant,
                                                    const Tolerances& tol) {
  tol.validate();
  const Eigen::Index n = plant.dims().n_x;
  const double scale =
      std::max(1.0, plant.A().cwiseAbs().maxCoeff() * static_cast<double>(n));

  Eigen::EigenSolver<Eigen::MatrixXd> es(plant.A());
  StabilizabilityReport report;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lambda = es.eigenvalues()(i);
    if (lambda.real() < -tol.stability_margin) continue;

    Eigen::MatrixXcd pbh_c(n, n + plant.dims().n_u);
    pbh_c.leftCols(n) =
        plant.A().cast<std::complex<double>>() -
        lambda * Eigen::MatrixXcd::Identity(n, n);
    pbh_c.rightCols(plant.dims().n_u) = plant.B2().cast<std::complex<double>>();

    Eigen::MatrixXcd pbh_o(n + plant.dims().n_y, n);
    pbh_o.topRows(n) = plant.A().cast<std::complex<double>>() -
                       lambda * Eigen::MatrixXcd::Identity(n, n);
    pbh_o.bottomRows(plant.dims().n_y) =
        plant.C2().cast<std::complex<double>>();

    ModeTest mode;
    mode.eigenvalue = lambda;
    mode.sigma_min_ctrb = smin(pbh_c);
    mode.sigma_min_obsv = smin(pbh_o);
    mode.controllable = mode.sigma_min_ctrb > tol.eig_tol * scale;
    mode.observable = mode.sigma_min_obsv > tol.eig_tol * scale;
    report.stabilizable = report.stabilizable && mode.controllable;
    report.detectable = report.detectable && mode.observable;
    report.unstable_modes.push_back(mode);
  }
  return report;
}

Eigen::MatrixXd psd_sqrt(const SymMatrix& m, const Tolerances& tol) {
  tol.validate();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat());
  Eigen::VectorXd ev = es.eigenvalues();
  const double scale = 1.0 + ev.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -tol.eig_tol * scale) {
      throw InvalidInputError("psd_sqrt: matrix has a negative eigenvalue");
    }
    ev(i) = std::sqrt(std::max(0.0, ev(i)));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Plant lqg_plant(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                const Eigen::MatrixXd& c, const LqgWeights& weights,
                const Tolerances& tol) {
  tol.validate();
  const Eigen::Index nx = a.rows();
  const Eigen::Index nu = b.cols();
  const Eigen::Index ny = c.rows();
  if (a.cols() != nx || b.rows() != nx || c.cols() != nx) {
    throw InvalidInputError("lqg_plant: inconsistent (A, B, C) dimensions");
  }
  if (weights.W.dim() != nx || weights.Q.dim() != nx ||
      weights.R.dim() != nu || weights.V.dim() != ny) {
    throw InvalidInputError("lqg_plant: weight dimensions do not match");
  }
  if (min_eig_sym(weights.R) <= 0.0 || min_eig_sym(weights.V) <= 0.0) {
    throw InvalidInputError("lqg_plant: R and V must be positive definite");
  }

  const Eigen::MatrixXd w_half = psd_sqrt(weights.W, tol);
  const Eigen::MatrixXd q_half = psd_sqrt(weights.Q, tol);
  const Eigen::MatrixXd r_half = psd_sqrt(weights.R, tol);
  const Eigen::MatrixXd v_half = psd_sqrt(weights.V, tol);

  Eigen::MatrixXd b1(nx, nx + ny);
  b1 << w_half, Eigen::MatrixXd::Zero(nx, ny);
  Eigen::MatrixXd c1(nx + nu, nx);
  c1 << q_half, Eigen::MatrixXd::Zero(nu, nx);
  Eigen::MatrixXd d11 = Eigen::MatrixXd::Zero(nx + nu, nx + ny);
  Eigen::MatrixXd d12(nx + nu, nu);
  d12 << Eigen::MatrixXd::Zero(nx, nu), r_half;
  Eigen::MatrixXd d21(ny, nx + ny);
  d21 << Eigen::MatrixXd::Zero(ny, nx), v_half;

  return Plant(a, b1, b, c1, c, d11, d12, d21);
}

bool is_minimal(const Controller& k, const Tolerances& tol) {
  tol.validate();
  k.validate();
  const Eigen::Index n = k.order();
  if (n == 0) return true;
  const double a_norm =
      Eigen::JacobiSVD<Eigen::MatrixXd>(k.A_K).singularValues()(0);
  const double threshold = tol.eig_tol * std::max(1.0, a_norm);

  Eigen::EigenSolver<Eigen::MatrixXd> es(k.A_K);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::complex<double> lambda = es.eigenvalues()(i);
    const Eigen::MatrixXcd shifted =
        k.A_K.cast<std::complex<double>>() -
        lambda * Eigen::MatrixXcd::Identity(n, n);

    Eigen::MatrixXcd pbh_c(n, n + k.n_y());
    pbh_c.leftCols(n) = shifted;
    pbh_c.rightCols(k.n_y()) = k.B_K.cast<std::complex<double>>();
    if (smin(pbh_c) <= threshold) return false;

    Eigen::MatrixXcd pbh_o(n + k.n_u(), n);
    pbh_o.topRows(n) = shifted;
    pbh_o.bottomRows(k.n_u()) = k.C_K.cast<std::complex<double>>();
    if (smin(pbh_o) <= threshold) return false;
  }
  return true;
}

Controller augment_reduced(const Controller& k_red, double appended_pole) {
  k_red.validate();
  if (appended_pole >= 0.0) {
    throw InvalidInputError("augment_reduced: appended pole must be stable");
  }
  const Eigen::Index n = k_red.order() + 1;
  const Eigen::Index nu = k_red.n_u();
  const Eigen::Index ny = k_red.n_y();

  Controller k;
  k.A_K = Eigen::MatrixXd::Zero(n, n);
  k.A_K.topLeftCorner(n - 1, n - 1) = k_red.A_K;
  k.A_K(n - 1, n - 1) = appended_pole;
  k.B_K = Eigen::MatrixXd::Zero(n, ny);
  k.B_K.topRows(n - 1) = k_red.B_K;
  k.C_K = Eigen::MatrixXd::Zero(nu, n);
  k.C_K.leftCols(n - 1) = k_red.C_K;
  k.D_K = k_red.D_K;
  return k;
}

}  // namespace hinfpath
