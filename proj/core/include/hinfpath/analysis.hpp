#pragma once

#include "hinfpath/model.hpp"
#include "hinfpath/numerics.hpp"

namespace hinfpath {

enum class NormMethod { hamiltonian_bisection, gramian };

struct NormResult {
  double value = 0.0;  // usable strict upper bound (equals hi)
  double lo = 0.0;
  double hi = 0.0;
  NormMethod method = NormMethod::hamiltonian_bisection;
};

// H-infinity norm of a stable system by gamma-bisection on the Hamiltonian
// imaginary-axis test. The returned bracket satisfies
// hi - lo <= bisect_tol * max(1, hi) and lo <= true norm <= hi.
NormResult hinf_norm(const ClosedLoop& sys, const Tolerances& tol = {});

// True iff the system is stable, sigma_max(D) < gamma, and the level-gamma
// Hamiltonian has no eigenvalue within eig_tol of the imaginary axis, i.e.
// ||T||_inf < gamma. This is the bisection's oracle at a single level.
bool hinf_below(const ClosedLoop& sys, double gamma,
                const Tolerances& tol = {});

// Squared H2 norm via the observability Gramian. Requires a stable system
// with D = 0 (within 1e-12); a nonzero D means the H2 norm is infinite.
double h2_norm_squared(const ClosedLoop& sys, const Tolerances& tol = {});

// Membership predicates for the stabilizing set and the H-infinity /
// H2-sublevel feasible sets.
bool in_cstab(const Plant& plant, const Controller& k,
              const Tolerances& tol = {});
bool in_kgamma(const Plant& plant, const Controller& k, double gamma,
               bool strictly_proper = false, const Tolerances& tol = {});
bool in_lgamma(const Plant& plant, const Controller& k, double gamma,
               const Tolerances& tol = {});

}  // namespace hinfpath
