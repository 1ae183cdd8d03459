#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hinfpath/analysis.hpp"
#include "hinfpath/lift.hpp"
#include "hinfpath/model.hpp"

namespace hinfpath {

// Path between two invertible matrices of the same determinant sign that
// stays invertible: rotation geodesic times linear interpolation of the
// symmetric polar factors. For negative determinants a fixed reflection
// R = diag(-1, 1, ..., 1) is factored out on the left.
Eigen::MatrixXd gl_path(const Eigen::MatrixXd& m0, const Eigen::MatrixXd& m1,
                        double t, const Tolerances& tol = {});

enum class PathStatus { connected, different_components, bridged, failed };

struct PathSample {
  double t = 0.0;
  Controller k;
  double hinf_value = 0.0;
  ComponentSign sign = ComponentSign::plus;
};

struct PathResult {
  PathStatus status = PathStatus::failed;
  std::vector<PathSample> samples;
  std::optional<Eigen::MatrixXd> witness_T;  // present for different-components
  std::array<double, 2> endpoint_errors{0.0, 0.0};
  std::optional<double> failed_t;
  double norm_margin = 0.0;  // gamma - max over samples of hinf
};

struct ConnectOptions {
  int n_samples = 101;   // emits n_samples + 1 samples
  std::uint64_t seed = 0;
  bool refine = false;   // insert midpoints where hinf jumps exceed 10% of
                         // the slack to gamma
};

// Connects two members of K_gamma. Lifts both endpoints; when their
// component signs differ the result is different-components together with
// the similarity-transform witness T = diag(1, ..., 1, -1). Otherwise the
// path interpolates the transformed variables linearly, moves Pi along a
// gl_path, recomputes Xi = (I - Y X) Pi^-1, and maps every sample back
// through the reconstruction; each sample is verified in K_gamma.
PathResult connect(const Plant& plant, const Controller& k0,
                   const Controller& k1, double gamma,
                   const ConnectOptions& opts = {}, const Tolerances& tol = {});

// For a controller fixed by the similarity transform T = diag(I, -1),
// returns lifted points in both components that reconstruct to it.
std::pair<LiftedPoint, LiftedPoint> dual_lift_fixed_point(
    const Plant& plant, const Controller& k_aug, double gamma,
    const Tolerances& tol = {}, const LiftOptions& lift_opts = {});

// Joins two controllers through the augmentation of a reduced-order
// controller, which lives in both components; works across component signs.
PathResult connect_via_bridge(const Plant& plant, const Controller& k0,
                              const Controller& k1, double gamma,
                              const Controller& k_red,
                              const ConnectOptions& opts = {},
                              const Tolerances& tol = {});

}  // namespace hinfpath
