#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hinfpath/lift.hpp"
#include "hinfpath/model.hpp"
#include "hinfpath/numerics.hpp"

namespace hinfpath {

// One affine matrix constraint F(z) = F0 + sum_i z_i Fi, required < 0.
struct LmiConstraint {
  Eigen::MatrixXd F0;
  std::vector<Eigen::MatrixXd> coeffs;

  Eigen::MatrixXd eval(const Eigen::VectorXd& z) const;
};

// Maps a slice of the decision vector to a named matrix variable.
// Symmetric variables are packed as the lower triangle, row by row.
struct VariableSlice {
  std::string name;
  Eigen::Index offset = 0;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  bool symmetric = false;
};

class AffineLmi {
 public:
  AffineLmi(Eigen::Index dim, std::vector<LmiConstraint> constraints,
            std::vector<VariableSlice> layout);

  // Builds the affine representation by probing an evaluation callback at
  // the origin and at the unit decision vectors.
  static AffineLmi from_probes(
      Eigen::Index dim,
      const std::vector<std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>>&
          constraint_evals,
      std::vector<VariableSlice> layout);

  Eigen::Index dim() const { return dim_; }
  const std::vector<LmiConstraint>& constraints() const { return constraints_; }
  const std::vector<VariableSlice>& layout() const { return layout_; }

  Eigen::MatrixXd eval(std::size_t c, const Eigen::VectorXd& z) const;

  // min over constraints of the relative negative-definiteness margin
  // -max_eig(F_c(z)) / (1 + max|F_c(z)|); positive iff z is strictly inside.
  double worst_relative_margin(const Eigen::VectorXd& z) const;

  // min over constraints of -max_eig(F_c(z)) (absolute margin).
  double worst_absolute_margin(const Eigen::VectorXd& z) const;

  Eigen::MatrixXd unpack(const std::string& name,
                         const Eigen::VectorXd& z) const;

 private:
  Eigen::Index dim_;
  std::vector<LmiConstraint> constraints_;
  std::vector<VariableSlice> layout_;
};

enum class FeasibilityStatus { feasible, infeasible_within_budget };

struct FeasibilityResult {
  FeasibilityStatus status = FeasibilityStatus::infeasible_within_budget;
  Eigen::VectorXd z;
  double margin = 0.0;  // min over constraints of -max_eig(F_c(z))
  int iterations = 0;
};

struct SolveOptions {
  int budget = 2000;          // subgradient iteration cap
  std::uint64_t seed = 0;     // jitters the start point
  int newton_outer_max = 400; // method-of-centers level updates
  std::optional<Eigen::VectorXd> warm_start;
};

// Strict feasibility by nonsmooth max-eigenvalue minimization: a Polyak
// target-level subgradient phase followed, if needed, by a method-of-centers
// phase (damped Newton on the log-det barrier of the level-shifted
// constraints). Deterministic given the seed. An infeasible-within-budget
// status is not an infeasibility certificate.
FeasibilityResult solve_feasibility(const AffineLmi& lmi,
                                    const SolveOptions& opts = {},
                                    const Tolerances& tol = {});

// Damped-Newton analytic centering of {z : F_c(z) < 0} from a strictly
// feasible start point (used to balance certificate witnesses).
Eigen::VectorXd analytic_center(const AffineLmi& lmi, Eigen::VectorXd z0,
                                int max_steps = 40);

// Decision variables (X, Y, Ahat, Bhat, Chat[, Dhat]) against
// [X, I; I, Y] > 0 and M_gamma < 0. Dhat is omitted when strictly_proper.
AffineLmi assemble_synthesis_lmi(const Plant& plant, double gamma,
                                 bool strictly_proper = false,
                                 const Tolerances& tol = {});

FPoint unpack_fpoint(const AffineLmi& lmi, const Eigen::VectorXd& z,
                     const PlantDims& dims);

// Solves the synthesis LMI at level gamma and reconstructs a controller
// through the canonical factorization Pi = I, Xi = I - Y X. The result is
// verified to be in K_gamma.
Controller synthesize(const Plant& plant, double gamma,
                      bool strictly_proper = false, std::uint64_t seed = 0,
                      const Tolerances& tol = {}, int budget = 2000);

struct GammaStarResult {
  double lo = 0.0;  // infeasible within budget at this level
  double hi = 0.0;  // feasible, witness retained
  bool budget_exhausted = false;
  Controller witness;
};

// Brackets the optimal level gamma* by geometric bisection with the LMI
// feasibility solver as oracle (warm-started across levels). lo is a
// numerical lower estimate, not a proof of infeasibility.
GammaStarResult gamma_star(const Plant& plant, double rel_tol = 0.01,
                           int budget = 2000, std::uint64_t seed = 0,
                           const Tolerances& tol = {});

}  // namespace hinfpath
