#include "hinfpath/lmi.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

#include "hinfpath/analysis.hpp"

namespace hinfpath {

namespace {

double rel_margin_of(const Eigen::MatrixXd& f) {
  const SymMatrix s(f);
  return -max_eig_sym(s) / (1.0 + s.mat().cwiseAbs().maxCoeff());
}

struct PhiEval {
  double value = 0.0;           // max over scaled constraints
  Eigen::VectorXd subgradient;  // of the active constraint
};

PhiEval eval_phi(const AffineLmi& lmi, const std::vector<double>& scales,
                 const Eigen::VectorXd& z) {
  PhiEval out;
  bool first = true;
  for (std::size_t c = 0; c < lmi.constraints().size(); ++c) {
    const Eigen::MatrixXd f = lmi.eval(c, z);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (f + f.transpose()));
    const Eigen::Index top = f.rows() - 1;
    const double val = es.eigenvalues()(top) / scales[c];
    if (first || val > out.value) {
      first = false;
      out.value = val;
      const Eigen::VectorXd v = es.eigenvectors().col(top);
      Eigen::VectorXd g(lmi.dim());
      for (Eigen::Index i = 0; i < lmi.dim(); ++i) {
        g(i) = v.dot(lmi.constraints()[c].coeffs[i] * v) / scales[c];
      }
      out.subgradient = std::move(g);
    }
  }
  return out;
}

std::vector<double> constraint_scales(const AffineLmi& lmi) {
  std::vector<double> s;
  s.reserve(lmi.constraints().size());
  for (const auto& c : lmi.constraints()) {
    s.push_back(1.0 + c.F0.cwiseAbs().maxCoeff());
  }
  return s;
}

// Polyak target-level subgradient descent (Goffin-Kiewiel level control).
int subgradient_phase(const AffineLmi& lmi, const std::vector<double>& scales,
                      double target, int budget, Eigen::VectorXd* z,
                      double* phi_best) {
  Eigen::VectorXd zz = *z;
  Eigen::VectorXd z_best = zz;
  double f_best = std::numeric_limits<double>::infinity();
  double delta = 1.0;
  double path = 0.0;
  const double path_cap = 100.0 * (1.0 + std::sqrt(double(lmi.dim())));
  int it = 0;
  for (; it < budget; ++it) {
    const PhiEval e = eval_phi(lmi, scales, zz);
    if (e.value < f_best) {
      f_best = e.value;
      z_best = zz;
    }
    if (f_best <= target) break;
    const double gn2 = e.subgradient.squaredNorm();
    if (gn2 < 1e-300) break;
    const double level = f_best - delta;
    const double step = (e.value - level) / gn2;
    zz -= step * e.subgradient;
    path += step * std::sqrt(gn2);
    if (path > path_cap) {
      delta *= 0.5;
      path = 0.0;
      if (delta < 1e-14) break;
    }
  }
  *z = z_best;
  *phi_best = f_best;
  return it;
}

// One analytic-centering pass at level t: damped Newton on
// sum_c -logdet(t * s_c * I - F_c(z)) plus, when rho > 0, a box barrier
// -sum_i [log(rho - z_i) + log(rho + z_i)] that keeps the iterate bounded
// (the level-shifted set need not be).
bool center_at_level(const AffineLmi& lmi, const std::vector<double>& scales,
                     double t, double rho, Eigen::VectorXd* z, int max_inner) {
  const Eigen::Index d = lmi.dim();
  const std::size_t nc = lmi.constraints().size();

  auto strictly_inside = [&](const Eigen::VectorXd& zz) {
    if (rho > 0.0 && zz.cwiseAbs().maxCoeff() >= rho) return false;
    for (std::size_t c = 0; c < nc; ++c) {
      const Eigen::MatrixXd f = lmi.eval(c, zz);
      const Eigen::MatrixXd sm =
          t * scales[c] * Eigen::MatrixXd::Identity(f.rows(), f.rows()) - f;
      if (Eigen::LLT<Eigen::MatrixXd>(0.5 * (sm + sm.transpose())).info() !=
          Eigen::Success) {
        return false;
      }
    }
    return true;
  };
  if (!strictly_inside(*z)) return false;

  for (int inner = 0; inner < max_inner; ++inner) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t c = 0; c < nc; ++c) {
      const Eigen::MatrixXd f = lmi.eval(c, *z);
      const Eigen::MatrixXd sm =
          t * scales[c] * Eigen::MatrixXd::Identity(f.rows(), f.rows()) - f;
      const Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (sm + sm.transpose()));
      if (llt.info() != Eigen::Success) return true;  // boundary round-off
      std::vector<Eigen::MatrixXd> si_fk(d);
      for (Eigen::Index i = 0; i < d; ++i) {
        si_fk[i] = llt.solve(lmi.constraints()[c].coeffs[i]);
        grad(i) += si_fk[i].trace();
      }
      for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
          hess(i, j) += si_fk[i].cwiseProduct(si_fk[j].transpose()).sum();
        }
      }
    }
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i + 1; j < d; ++j) {
        hess(i, j) = hess(j, i);
      }
    }
    if (rho > 0.0) {
      for (Eigen::Index i = 0; i < d; ++i) {
        const double up = rho - (*z)(i);
        const double dn = rho + (*z)(i);
        grad(i) += 1.0 / up - 1.0 / dn;
        hess(i, i) += 1.0 / (up * up) + 1.0 / (dn * dn);
      }
    }
    hess.diagonal().array() += 1e-13 * (1.0 + hess.trace() / double(d));
    const Eigen::VectorXd dz = hess.ldlt().solve(-grad);
    const double lambda2 = -grad.dot(dz);
    double step = 1.0;
    while (step > 1e-14 && !strictly_inside(*z + step * dz)) step *= 0.5;
    if (step <= 1e-14) return true;
    *z += step * dz;
    if (lambda2 < 1e-10) return true;
  }
  return true;
}

Eigen::VectorXd default_start(const AffineLmi& lmi) {
  // [X, I; I, Y]-type constraints are strictly feasible at X = Y = 2 I.
  Eigen::VectorXd z = Eigen::VectorXd::Zero(lmi.dim());
  for (const auto& slice : lmi.layout()) {
    if (slice.symmetric && (slice.name == "X" || slice.name == "Y")) {
      Eigen::Index k = slice.offset;
      for (Eigen::Index i = 0; i < slice.rows; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
          if (i == j) z(k) = 2.0;
          ++k;
        }
      }
    }
  }
  return z;
}

}  // namespace

Eigen::MatrixXd LmiConstraint::eval(const Eigen::VectorXd& z) const {
  Eigen::MatrixXd f = F0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (z(i) != 0.0) f.noalias() += z(i) * coeffs[static_cast<std::size_t>(i)];
  }
  return f;
}

AffineLmi::AffineLmi(Eigen::Index dim, std::vector<LmiConstraint> constraints,
                     std::vector<VariableSlice> layout)
    : dim_(dim),
      constraints_(std::move(constraints)),
      layout_(std::move(layout)) {
  for (const auto& c : constraints_) {
    if (static_cast<Eigen::Index>(c.coeffs.size()) != dim_) {
      throw InvalidInputError("AffineLmi: coefficient count != dimension");
    }
    if (c.F0.rows() != c.F0.cols()) {
      throw InvalidInputError("AffineLmi: constraint blocks must be square");
    }
  }
}

AffineLmi AffineLmi::from_probes(
    Eigen::Index dim,
    const std::vector<std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>>&
        constraint_evals,
    std::vector<VariableSlice> layout) {
  std::vector<LmiConstraint> constraints;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
  for (const auto& f : constraint_evals) {
    LmiConstraint c;
    c.F0 = f(zero);
    c.F0 = 0.5 * (c.F0 + c.F0.transpose()).eval();
    c.coeffs.reserve(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      Eigen::VectorXd e = zero;
      e(i) = 1.0;
      Eigen::MatrixXd fi = f(e) - c.F0;
      c.coeffs.push_back(0.5 * (fi + fi.transpose()));
    }
    constraints.push_back(std::move(c));
  }
  return AffineLmi(dim, std::move(constraints), std::move(layout));
}

Eigen::MatrixXd AffineLmi::eval(std::size_t c, const Eigen::VectorXd& z) const {
  return constraints_.at(c).eval(z);
}

double AffineLmi::worst_relative_margin(const Eigen::VectorXd& z) const {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < constraints_.size(); ++c) {
    worst = std::min(worst, rel_margin_of(eval(c, z)));
  }
  return worst;
}

double AffineLmi::worst_absolute_margin(const Eigen::VectorXd& z) const {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < constraints_.size(); ++c) {
    worst = std::min(worst, -max_eig_sym(SymMatrix(eval(c, z))));
  }
  return worst;
}

Eigen::MatrixXd AffineLmi::unpack(const std::string& name,
                                  const Eigen::VectorXd& z) const {
  for (const auto& slice : layout_) {
    if (slice.name != name) continue;
    Eigen::MatrixXd m(slice.rows, slice.cols);
    if (slice.symmetric) {
      Eigen::Index k = slice.offset;
      for (Eigen::Index i = 0; i < slice.rows; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
          m(i, j) = z(k);
          m(j, i) = z(k);
          ++k;
        }
      }
    } else {
      Eigen::Index k = slice.offset;
      for (Eigen::Index i = 0; i < slice.rows; ++i) {
        for (Eigen::Index j = 0; j < slice.cols; ++j) {
          m(i, j) = z(k++);
        }
      }
    }
    return m;
  }
  throw InvalidInputError("AffineLmi::unpack: unknown variable " + name);
}

FeasibilityResult solve_feasibility(const AffineLmi& lmi,
                                    const SolveOptions& opts,
                                    const Tolerances& tol) {
  tol.validate();
  const auto scales = constraint_scales(lmi);

  Eigen::VectorXd z =
      opts.warm_start ? *opts.warm_start : default_start(lmi);
  if (opts.seed != 0) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const double jitter = 1e-3 * (1.0 + z.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) += jitter * unif(rng);
  }

  double target = -2.0 * tol.lmi_margin;
  int iterations = 0;
  for (int round = 0; round < 4; ++round) {
    double phi = 0.0;
    iterations += subgradient_phase(lmi, scales, target, opts.budget, &z, &phi);

    if (phi > target) {
      // Method-of-centers phase: shrink the level t toward the target. The
      // box keeps the centering step away from the unbounded directions of
      // the level-shifted set (huge iterates reconstruct badly); it grows
      // only when feasibility genuinely needs more room.
      double rho = 1e2 * (1.0 + z.cwiseAbs().maxCoeff());
      for (int round_box = 0; round_box < 3 && phi > target; ++round_box) {
        Eigen::VectorXd z_try = z;
        double t = eval_phi(lmi, scales, z_try).value + 1.0;
        for (int outer = 0; outer < opts.newton_outer_max; ++outer) {
          if (!center_at_level(lmi, scales, t, rho, &z_try, 12)) break;
          ++iterations;
          const double phi_try = eval_phi(lmi, scales, z_try).value;
          if (phi_try <= target) break;
          const double tn = phi_try + 0.25 * (t - phi_try);
          if (t - tn < 1e-16 * std::max(1.0, std::abs(t))) break;
          t = tn;
        }
        const double phi_try = eval_phi(lmi, scales, z_try).value;
        if (phi_try < phi) {
          phi = phi_try;
          z = z_try;
        }
        rho *= 100.0;
      }
    }

    const double rel = lmi.worst_relative_margin(z);
    if (rel >= tol.lmi_margin) {
      return FeasibilityResult{FeasibilityStatus::feasible, z,
                               lmi.worst_absolute_margin(z), iterations};
    }
    if (phi > target) break;  // solver stalled above the target level
    target *= 4.0;            // met the scaled target but not the margins
  }
  return FeasibilityResult{FeasibilityStatus::infeasible_within_budget, z,
                           lmi.worst_absolute_margin(z), iterations};
}

Eigen::VectorXd analytic_center(const AffineLmi& lmi, Eigen::VectorXd z0,
                                int max_steps) {
  const auto scales = constraint_scales(lmi);
  // t = 0: center of {F_c(z) < 0} itself (no box; callers bound their sets).
  center_at_level(lmi, scales, 0.0, /*rho=*/-1.0, &z0, max_steps);
  return z0;
}

AffineLmi assemble_synthesis_lmi(const Plant& plant, double gamma,
                                 bool strictly_proper, const Tolerances& tol) {
  tol.validate();
  if (!(gamma > 0.0)) {
    throw InvalidInputError("assemble_synthesis_lmi: gamma must be positive");
  }
  const Eigen::Index nx = plant.dims().n_x;
  const Eigen::Index ny = plant.dims().n_y;
  const Eigen::Index nu = plant.dims().n_u;
  const Eigen::Index nsym = nx * (nx + 1) / 2;

  std::vector<VariableSlice> layout;
  Eigen::Index off = 0;
  layout.push_back({"X", off, nx, nx, true});
  off += nsym;
  layout.push_back({"Y", off, nx, nx, true});
  off += nsym;
  layout.push_back({"Ahat", off, nx, nx, false});
  off += nx * nx;
  layout.push_back({"Bhat", off, nx, ny, false});
  off += nx * ny;
  layout.push_back({"Chat", off, nu, nx, false});
  off += nu * nx;
  if (!strictly_proper) {
    layout.push_back({"Dhat", off, nu, ny, false});
    off += nu * ny;
  }
  const Eigen::Index dim = off;

  AffineLmi probe_helper(dim, {}, layout);  // reuse unpack for the closures
  auto fpoint_of = [probe_helper, nx, ny, nu,
                    strictly_proper](const Eigen::VectorXd& z) {
    FPoint p;
    p.X = SymMatrix(probe_helper.unpack("X", z));
    p.Y = SymMatrix(probe_helper.unpack("Y", z));
    p.Ahat = probe_helper.unpack("Ahat", z);
    p.Bhat = probe_helper.unpack("Bhat", z);
    p.Chat = probe_helper.unpack("Chat", z);
    p.Dhat = strictly_proper ? Eigen::MatrixXd::Zero(nu, ny)
                             : probe_helper.unpack("Dhat", z);
    return p;
  };

  std::vector<std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>> evals;
  const double shift = tol.lmi_margin;
  evals.emplace_back([fpoint_of, nx, shift](const Eigen::VectorXd& z) {
    const FPoint p = fpoint_of(z);
    Eigen::MatrixXd xy(2 * nx, 2 * nx);
    xy.topLeftCorner(nx, nx) = p.X.mat();
    xy.topRightCorner(nx, nx) = Eigen::MatrixXd::Identity(nx, nx);
    xy.bottomLeftCorner(nx, nx) = Eigen::MatrixXd::Identity(nx, nx);
    xy.bottomRightCorner(nx, nx) = p.Y.mat();
    return (shift * Eigen::MatrixXd::Identity(2 * nx, 2 * nx) - xy).eval();
  });
  const Plant plant_copy = plant;
  evals.emplace_back([fpoint_of, plant_copy, gamma](const Eigen::VectorXd& z) {
    return eval_M_gamma(plant_copy, fpoint_of(z), gamma);
  });

  return AffineLmi::from_probes(dim, evals, layout);
}

FPoint unpack_fpoint(const AffineLmi& lmi, const Eigen::VectorXd& z,
                     const PlantDims& dims) {
  FPoint p;
  p.X = SymMatrix(lmi.unpack("X", z));
  p.Y = SymMatrix(lmi.unpack("Y", z));
  p.Ahat = lmi.unpack("Ahat", z);
  p.Bhat = lmi.unpack("Bhat", z);
  p.Chat = lmi.unpack("Chat", z);
  bool has_dhat = false;
  for (const auto& s : lmi.layout()) has_dhat = has_dhat || s.name == "Dhat";
  p.Dhat = has_dhat ? lmi.unpack("Dhat", z)
                    : Eigen::MatrixXd::Zero(dims.n_u, dims.n_y);
  return p;
}

Controller synthesize(const Plant& plant, double gamma, bool strictly_proper,
                      std::uint64_t seed, const Tolerances& tol, int budget) {
  tol.validate();
  const AffineLmi lmi = assemble_synthesis_lmi(plant, gamma, strictly_proper, tol);
  SolveOptions opts;
  opts.budget = budget;
  opts.seed = seed;
  const FeasibilityResult res = solve_feasibility(lmi, opts, tol);
  if (res.status != FeasibilityStatus::feasible) {
    throw SynthesisError("synthesize: LMI infeasible within budget at gamma " +
                         std::to_string(gamma));
  }
  const FPoint p = unpack_fpoint(lmi, res.z, plant.dims());

  // Canonical factorization Pi = I, Xi = I - Y X (always invertible when
  // [X, I; I, Y] > 0); pins the synthesized controller to one component.
  const Eigen::Index nx = plant.dims().n_x;
  LiftedPoint z;
  z.X = p.X;
  z.Y = p.Y;
  z.Ahat = p.Ahat;
  z.Bhat = p.Bhat;
  z.Chat = p.Chat;
  z.Dhat = p.Dhat;
  z.Pi = Eigen::MatrixXd::Identity(nx, nx);
  z.Xi = Eigen::MatrixXd::Identity(nx, nx) - p.Y.mat() * p.X.mat();
  const Controller k = reconstruct(plant, z, tol);

  if (!in_kgamma(plant, k, gamma, strictly_proper, tol)) {
    throw SynthesisError(
        "synthesize: reconstructed controller failed independent "
        "verification");
  }
  return k;
}

GammaStarResult gamma_star(const Plant& plant, double rel_tol, int budget,
                           std::uint64_t seed, const Tolerances& tol) {
  tol.validate();
  if (!(rel_tol > 0.0)) {
    throw InvalidInputError("gamma_star: rel_tol must be positive");
  }
  const StabilizabilityReport rpt = check_stabilizable_detectable(plant, tol);
  if (!rpt.stabilizable || !rpt.detectable) {
    throw PreconditionError(
        "gamma_star: plant is not stabilizable and detectable");
  }

  struct Level {
    bool feasible;
    Eigen::VectorXd z;
  };
  std::optional<Eigen::VectorXd> warm;
  auto probe = [&](double g) {
    const AffineLmi lmi = assemble_synthesis_lmi(plant, g, false, tol);
    SolveOptions opts;
    opts.budget = budget;
    opts.seed = seed;
    opts.warm_start = warm;
    const FeasibilityResult res = solve_feasibility(lmi, opts, tol);
    const bool ok = res.status == FeasibilityStatus::feasible;
    if (ok) warm = res.z;
    return Level{ok, res.z};
  };

  double hi = std::max(1.0, 2.0 * plant.D11().cwiseAbs().maxCoeff());
  Level hi_level = probe(hi);
  int doublings = 0;
  while (!hi_level.feasible) {
    hi *= 2.0;
    if (hi > 1e9) {
      throw NumericalError(
          "gamma_star: no feasible level found up to 1e9; Assumption 1 "
          "violated numerically");
    }
    hi_level = probe(hi);
    ++doublings;
  }
  Eigen::VectorXd z_hi = hi_level.z;

  bool budget_flag = false;
  double lo = hi / 2.0;
  int halvings = 0;
  while (true) {
    const Level l = probe(lo);
    if (!l.feasible) break;
    hi = lo;
    z_hi = l.z;
    lo /= 2.0;
    if (++halvings > 60) {
      budget_flag = true;
      break;
    }
  }

  int iters = 0;
  while (hi / lo > 1.0 + rel_tol) {
    const double mid = std::sqrt(lo * hi);
    const Level l = probe(mid);
    if (l.feasible) {
      hi = mid;
      z_hi = l.z;
    } else {
      lo = mid;
    }
    if (++iters > 200) {
      budget_flag = true;
      break;
    }
  }

  // Reconstruct the witness retained at the feasible upper level; if the
  // reconstruction is too close to the boundary to re-verify, resolve at hi
  // with a stiffer margin requirement.
  auto rebuild = [&](const Eigen::VectorXd& z,
                     const AffineLmi& lmi_at_hi) {
    const FPoint p = unpack_fpoint(lmi_at_hi, z, plant.dims());
    const Eigen::Index nx = plant.dims().n_x;
    LiftedPoint zl;
    zl.X = p.X;
    zl.Y = p.Y;
    zl.Ahat = p.Ahat;
    zl.Bhat = p.Bhat;
    zl.Chat = p.Chat;
    zl.Dhat = p.Dhat;
    zl.Pi = Eigen::MatrixXd::Identity(nx, nx);
    zl.Xi = Eigen::MatrixXd::Identity(nx, nx) - p.Y.mat() * p.X.mat();
    return reconstruct(plant, zl, tol);
  };
  const AffineLmi lmi_hi = assemble_synthesis_lmi(plant, hi, false, tol);
  Controller witness = rebuild(z_hi, lmi_hi);
  if (!in_kgamma(plant, witness, hi, false, tol)) {
    // Warm-started iterates can drift toward the boundary across levels;
    // re-solve the final level from the default start.
    SolveOptions opts;
    opts.budget = budget;
    opts.seed = seed;
    const FeasibilityResult res = solve_feasibility(lmi_hi, opts, tol);
    if (res.status == FeasibilityStatus::feasible) {
      witness = rebuild(res.z, lmi_hi);
    }
    if (!in_kgamma(plant, witness, hi, false, tol)) {
      throw NumericalError(
          "gamma_star: could not produce a verifiable witness at the "
          "feasible level");
    }
  }

  return GammaStarResult{lo, hi, budget_flag, witness};
}

}  // namespace hinfpath
