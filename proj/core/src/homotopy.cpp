#include "hinfpath/homotopy.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace hinfpath {

namespace {

double controller_rel_error(const Controller& a, const Controller& b) {
  auto block_err = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    const double scale = 1.0 + y.cwiseAbs().maxCoeff();
    return (x - y).cwiseAbs().maxCoeff() / scale;
  };
  return std::max({block_err(a.A_K, b.A_K), block_err(a.B_K, b.B_K),
                   block_err(a.C_K, b.C_K), block_err(a.D_K, b.D_K)});
}

Eigen::MatrixXd orientation_witness(Eigen::Index n) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(n, n);
  t(n - 1, n - 1) = -1.0;
  return t;
}

struct SegmentSpec {
  const LiftedPoint* z0;
  const LiftedPoint* z1;
  double t_begin;       // output parameter of the first sample
  double t_end;         // output parameter of the last sample
  int n_samples;        // emits n_samples + 1 samples
  bool include_first;   // drop the first sample when concatenating
};

// Samples one convex segment of the lifted set. Returns false (and sets
// failed_t) as soon as a sample fails verification.
bool sample_segment(const Plant& plant, double gamma, bool strictly_proper,
                    const SegmentSpec& seg, const Tolerances& tol,
                    std::vector<PathSample>* out,
                    std::optional<double>* failed_t) {
  const Eigen::Index n = plant.dims().n_x;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k <= seg.n_samples; ++k) {
    if (k == 0 && !seg.include_first) continue;
    const double s = static_cast<double>(k) / seg.n_samples;
    const double t_out = seg.t_begin + s * (seg.t_end - seg.t_begin);

    LiftedPoint z;
    z.X = SymMatrix((1.0 - s) * seg.z0->X.mat() + s * seg.z1->X.mat());
    z.Y = SymMatrix((1.0 - s) * seg.z0->Y.mat() + s * seg.z1->Y.mat());
    z.Ahat = (1.0 - s) * seg.z0->Ahat + s * seg.z1->Ahat;
    z.Bhat = (1.0 - s) * seg.z0->Bhat + s * seg.z1->Bhat;
    z.Chat = (1.0 - s) * seg.z0->Chat + s * seg.z1->Chat;
    z.Dhat = (1.0 - s) * seg.z0->Dhat + s * seg.z1->Dhat;
    z.Pi = gl_path(seg.z0->Pi, seg.z1->Pi, s, tol);
    // Recomputing Xi keeps the coupling identity exact along the path.
    z.Xi = (eye - z.Y.mat() * z.X.mat()) * z.Pi.inverse();

    PathSample sample;
    sample.t = t_out;
    sample.sign = component_sign(z, tol);
    sample.k = reconstruct(plant, z, tol);
    const ClosedLoop cl = close_loop(plant, sample.k);
    if (!is_hurwitz(cl.A, tol) ||
        (strictly_proper && !sample.k.strictly_proper())) {
      sample.hinf_value = std::numeric_limits<double>::infinity();
      out->push_back(std::move(sample));
      *failed_t = t_out;
      return false;
    }
    sample.hinf_value = hinf_norm(cl, tol).hi;
    const bool member = sample.hinf_value < gamma;
    out->push_back(std::move(sample));
    if (!member) {
      *failed_t = t_out;
      return false;
    }
  }
  return true;
}

void refine_pass(const Plant& plant, double gamma, const Tolerances& tol,
                 std::vector<PathSample>* samples) {
  std::vector<PathSample> refined;
  refined.reserve(samples->size());
  double max_h = 0.0;
  for (const auto& s : *samples) max_h = std::max(max_h, s.hinf_value);
  const double slack = gamma - max_h;
  for (std::size_t i = 0; i < samples->size(); ++i) {
    refined.push_back((*samples)[i]);
    if (i + 1 == samples->size()) break;
    const auto& a = (*samples)[i];
    const auto& b = (*samples)[i + 1];
    if (std::abs(a.hinf_value - b.hinf_value) <= 0.1 * slack) continue;
    // Verify the midpoint controller between suspicious neighbours.
    PathSample mid;
    mid.t = 0.5 * (a.t + b.t);
    mid.k = Controller{0.5 * (a.k.A_K + b.k.A_K), 0.5 * (a.k.B_K + b.k.B_K),
                       0.5 * (a.k.C_K + b.k.C_K), 0.5 * (a.k.D_K + b.k.D_K)};
    const ClosedLoop cl = close_loop(plant, mid.k);
    if (!is_hurwitz(cl.A, tol)) continue;  // midpoint of controllers is
                                           // diagnostic only
    mid.hinf_value = hinf_norm(cl, tol).hi;
    mid.sign = a.sign;
    refined.push_back(std::move(mid));
  }
  *samples = std::move(refined);
}

}  // namespace

Eigen::MatrixXd gl_path(const Eigen::MatrixXd& m0, const Eigen::MatrixXd& m1,
                        double t, const Tolerances& tol) {
  tol.validate();
  if (m0.rows() != m0.cols() || m1.rows() != m1.cols() ||
      m0.rows() != m1.rows()) {
    throw InvalidInputError("gl_path: dimension mismatch");
  }
  const double d0 = m0.determinant();
  const double d1 = m1.determinant();
  if (std::abs(d0) <= tol.eig_tol || std::abs(d1) <= tol.eig_tol) {
    throw InvalidInputError("gl_path: endpoint is near-singular");
  }
  if ((d0 > 0.0) != (d1 > 0.0)) {
    throw InvalidInputError("gl_path: endpoints have opposite determinant "
                            "signs");
  }
  const Eigen::Index n = m0.rows();
  Eigen::MatrixXd refl = Eigen::MatrixXd::Identity(n, n);
  if (d0 < 0.0) refl(0, 0) = -1.0;

  const PolarDecomposition p0 = polar_decompose(refl * m0, tol);
  const PolarDecomposition p1 = polar_decompose(refl * m1, tol);
  const Eigen::MatrixXd qt = special_orthogonal_path(p0.q, p1.q, t, tol);
  const Eigen::MatrixXd st = (1.0 - t) * p0.s.mat() + t * p1.s.mat();
  return refl * (qt * st);
}

PathResult connect(const Plant& plant, const Controller& k0,
                   const Controller& k1, double gamma,
                   const ConnectOptions& opts, const Tolerances& tol) {
  tol.validate();
  const bool strictly_proper = k0.strictly_proper() && k1.strictly_proper();
  if (!in_kgamma(plant, k0, gamma, strictly_proper, tol) ||
      !in_kgamma(plant, k1, gamma, strictly_proper, tol)) {
    throw PreconditionError("connect: an endpoint is not in K_gamma");
  }

  LiftOptions lift_opts;
  lift_opts.seed = opts.seed;
  const LiftedPoint z0 = lift(plant, k0, gamma, tol, lift_opts);
  lift_opts.seed = opts.seed + 1;
  const LiftedPoint z1 = lift(plant, k1, gamma, tol, lift_opts);

  PathResult result;
  const ComponentSign s0 = component_sign(z0, tol);
  const ComponentSign s1 = component_sign(z1, tol);
  if (s0 != s1) {
    result.status = PathStatus::different_components;
    result.witness_T = orientation_witness(plant.dims().n_x);
    PathSample a{0.0, k0, hinf_norm(close_loop(plant, k0), tol).hi, s0};
    PathSample b{1.0, k1, hinf_norm(close_loop(plant, k1), tol).hi, s1};
    result.samples = {std::move(a), std::move(b)};
    result.norm_margin =
        gamma - std::max(result.samples[0].hinf_value,
                         result.samples[1].hinf_value);
    return result;
  }

  SegmentSpec seg{&z0, &z1, 0.0, 1.0, opts.n_samples, true};
  const bool ok = sample_segment(plant, gamma, strictly_proper, seg, tol,
                                 &result.samples, &result.failed_t);
  if (!ok) {
    result.status = PathStatus::failed;
    return result;
  }
  if (opts.refine) refine_pass(plant, gamma, tol, &result.samples);

  result.endpoint_errors = {controller_rel_error(result.samples.front().k, k0),
                            controller_rel_error(result.samples.back().k, k1)};
  double max_h = 0.0;
  for (const auto& s : result.samples) max_h = std::max(max_h, s.hinf_value);
  result.norm_margin = gamma - max_h;
  result.status = (result.endpoint_errors[0] <= 1e-8 &&
                   result.endpoint_errors[1] <= 1e-8)
                      ? PathStatus::connected
                      : PathStatus::failed;
  return result;
}

std::pair<LiftedPoint, LiftedPoint> dual_lift_fixed_point(
    const Plant& plant, const Controller& k_aug, double gamma,
    const Tolerances& tol, const LiftOptions& lift_opts) {
  tol.validate();
  k_aug.validate_for(plant);
  const Eigen::Index n = k_aug.order();
  const Eigen::MatrixXd t = orientation_witness(n);
  const Controller transformed = similarity_transform(k_aug, t, tol);
  if (controller_rel_error(transformed, k_aug) > 1e-10) {
    throw BridgeError(
        "dual_lift_fixed_point: controller is not fixed by diag(I, -1); "
        "not a bridge");
  }
  if (!in_kgamma(plant, k_aug, gamma, /*strictly_proper=*/false, tol)) {
    throw PreconditionError("dual_lift_fixed_point: controller not in "
                            "K_gamma");
  }

  LiftedPoint z_plus = lift(plant, k_aug, gamma, tol, lift_opts);
  LiftedPoint z_minus = transform_lifted(z_plus, t, tol);
  if (component_sign(z_plus, tol) == ComponentSign::minus) {
    std::swap(z_plus, z_minus);
  }

  for (const LiftedPoint* z : {&z_plus, &z_minus}) {
    const Controller rt = reconstruct(plant, *z, tol);
    if (controller_rel_error(rt, k_aug) > 1e-8) {
      throw NumericalError(
          "dual_lift_fixed_point: reconstruction drifted from the bridge");
    }
  }
  return {std::move(z_plus), std::move(z_minus)};
}

PathResult connect_via_bridge(const Plant& plant, const Controller& k0,
                              const Controller& k1, double gamma,
                              const Controller& k_red,
                              const ConnectOptions& opts,
                              const Tolerances& tol) {
  tol.validate();
  const bool strictly_proper = k0.strictly_proper() && k1.strictly_proper() &&
                               k_red.strictly_proper();
  if (!in_kgamma(plant, k0, gamma, strictly_proper, tol) ||
      !in_kgamma(plant, k1, gamma, strictly_proper, tol)) {
    throw PreconditionError("connect_via_bridge: an endpoint is not in "
                            "K_gamma");
  }
  const Controller k_aug = augment_reduced(k_red);
  if (k_aug.order() != plant.dims().n_x) {
    throw InvalidInputError(
        "connect_via_bridge: reduced controller must have order n_x - 1");
  }
  if (!in_kgamma(plant, k_aug, gamma, /*strictly_proper=*/false, tol)) {
    throw BridgeError(
        "connect_via_bridge: augmented bridge controller is not in K_gamma");
  }

  LiftOptions lift_opts;
  lift_opts.seed = opts.seed + 17;
  const auto [z_bridge_plus, z_bridge_minus] =
      dual_lift_fixed_point(plant, k_aug, gamma, tol, lift_opts);

  lift_opts.seed = opts.seed;
  const LiftedPoint z0 = lift(plant, k0, gamma, tol, lift_opts);
  lift_opts.seed = opts.seed + 1;
  const LiftedPoint z1 = lift(plant, k1, gamma, tol, lift_opts);

  const LiftedPoint& bridge_for_k0 =
      component_sign(z0, tol) == ComponentSign::plus ? z_bridge_plus
                                                     : z_bridge_minus;
  const LiftedPoint& bridge_for_k1 =
      component_sign(z1, tol) == ComponentSign::plus ? z_bridge_plus
                                                     : z_bridge_minus;

  PathResult result;
  const int half = std::max(1, opts.n_samples / 2);
  const SegmentSpec seg1{&z0, &bridge_for_k0, 0.0, 0.5, half, true};
  if (!sample_segment(plant, gamma, strictly_proper, seg1, tol,
                      &result.samples, &result.failed_t)) {
    result.status = PathStatus::failed;
    return result;
  }
  const SegmentSpec seg2{&bridge_for_k1, &z1, 0.5, 1.0, half, false};
  if (!sample_segment(plant, gamma, strictly_proper, seg2, tol,
                      &result.samples, &result.failed_t)) {
    result.status = PathStatus::failed;
    return result;
  }
  if (opts.refine) refine_pass(plant, gamma, tol, &result.samples);

  result.endpoint_errors = {controller_rel_error(result.samples.front().k, k0),
                            controller_rel_error(result.samples.back().k, k1)};
  double max_h = 0.0;
  for (const auto& s : result.samples) max_h = std::max(max_h, s.hinf_value);
  result.norm_margin = gamma - max_h;
  result.status = (result.endpoint_errors[0] <= 1e-8 &&
                   result.endpoint_errors[1] <= 1e-8)
                      ? PathStatus::bridged
                      : PathStatus::failed;
  return result;
}

}  // namespace hinfpath
