// Command-line front end: norms, membership checks, certificates, lifting,
// synthesis, gamma* bracketing, path construction, and membership grid scans
// over JSON/CSV files.

#include <cstdint>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hinfpath/analysis.hpp"
#include "hinfpath/certify.hpp"
#include "hinfpath/homotopy.hpp"
#include "hinfpath/io.hpp"
#include "hinfpath/lift.hpp"
#include "hinfpath/lmi.hpp"
#include "hinfpath/model.hpp"
#include "hinfpath/scan.hpp"

namespace {

using nlohmann::json;
using namespace hinfpath;

constexpr int kExitParse = 2;
constexpr int kExitPrecondition = 3;
constexpr int kExitNumerical = 4;

struct GlobalOpts {
  Tolerances tol;
  std::uint64_t seed = 0;
  bool strictly_proper = false;
  std::string out;
};

void emit(const GlobalOpts& g, const json& j) {
  if (g.out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    save_json_file(g.out, j);
  }
}

Plant load_plant(const std::string& path) {
  return plant_from_json(load_json_file(path));
}

Controller load_controller(const std::string& path) {
  return controller_from_json(load_json_file(path));
}

Plant example1_plant(double a_value = 1.0) {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 1.0);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Constant(1, 1, a_value);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(1, 1);
  return Plant(a, one, one, one, one, zero, one, one);
}

Controller scalar_controller(double a_k, double b_k, double c_k, double d_k) {
  Controller k;
  k.A_K = Eigen::MatrixXd::Constant(1, 1, a_k);
  k.B_K = Eigen::MatrixXd::Constant(1, 1, b_k);
  k.C_K = Eigen::MatrixXd::Constant(1, 1, c_k);
  k.D_K = Eigen::MatrixXd::Constant(1, 1, d_k);
  return k;
}

int cmd_example1(const GlobalOpts& g) {
  const Plant plant = example1_plant();
  const Controller k1 = scalar_controller(-2.0, -2.0, 2.0, 0.0);
  const Controller k2 = scalar_controller(-2.0, 2.0, -2.0, 0.0);
  const Controller mid = scalar_controller(-2.0, 0.0, 0.0, 0.0);
  const double gamma = 3.33;

  bool ok = true;
  const NormResult n1 = hinf_norm(close_loop(plant, k1), g.tol);
  const NormResult n2 = hinf_norm(close_loop(plant, k2), g.tol);
  const bool k1_in = in_kgamma(plant, k1, gamma, false, g.tol);
  const bool k2_in = in_kgamma(plant, k2, gamma, false, g.tol);
  const double mid_abscissa = spectral_abscissa(close_loop(plant, mid).A);
  const bool mid_unstable = !in_cstab(plant, mid, g.tol);

  std::cout << "K1 closed-loop Hinf norm: " << format_real(n1.value)
            << "  (in K_3.33: " << (k1_in ? "yes" : "NO") << ")\n";
  std::cout << "K2 closed-loop Hinf norm: " << format_real(n2.value)
            << "  (in K_3.33: " << (k2_in ? "yes" : "NO") << ")\n";
  std::cout << "midpoint spectral abscissa: " << format_real(mid_abscissa)
            << "  (stabilizing: " << (mid_unstable ? "no" : "YES") << ")\n";
  ok = k1_in && k2_in && mid_unstable;
  std::cout << (ok ? "all assertions hold\n" : "ASSERTION FAILURE\n");
  if (!g.out.empty()) {
    emit(g, json{{"k1_norm", to_json(n1)},
                 {"k2_norm", to_json(n2)},
                 {"midpoint_abscissa", format_real(mid_abscissa)},
                 {"pass", ok}});
  }
  return ok ? 0 : 1;
}

int cmd_norm(const GlobalOpts& g, const std::string& plant_path,
             const std::string& k_path, bool h2) {
  const Plant plant = load_plant(plant_path);
  const Controller k = load_controller(k_path);
  const ClosedLoop cl = close_loop(plant, k);
  if (h2) {
    const double value = h2_norm_squared(cl, g.tol);
    emit(g, json{{"h2_squared", format_real(value)}, {"method", "gramian"}});
  } else {
    emit(g, to_json(hinf_norm(cl, g.tol)));
  }
  return 0;
}

int cmd_check(const GlobalOpts& g, const std::string& plant_path,
              const std::string& k_path, const std::string& set, double gamma) {
  const Plant plant = load_plant(plant_path);
  const Controller k = load_controller(k_path);
  bool member = false;
  if (set == "cstab") {
    member = in_cstab(plant, k, g.tol);
  } else if (set == "kgamma") {
    member = in_kgamma(plant, k, gamma, g.strictly_proper, g.tol);
  } else if (set == "lgamma") {
    member = in_lgamma(plant, k, gamma, g.tol);
  } else {
    throw ParseError("unknown set '" + set + "'");
  }
  emit(g, json{{"set", set},
               {"gamma", format_real(gamma)},
               {"member", member}});
  return 0;
}

int cmd_certify(const GlobalOpts& g, const std::string& plant_path,
                const std::string& k_path, double gamma, bool h2) {
  const Plant plant = load_plant(plant_path);
  const Controller k = load_controller(k_path);
  if (h2) {
    emit(g, to_json(h2_certificate(plant, k, gamma, g.tol)));
  } else {
    emit(g, to_json(bounded_real_certificate(plant, k, gamma, g.tol)));
  }
  return 0;
}

int cmd_lift(const GlobalOpts& g, const std::string& plant_path,
             const std::string& k_path, double gamma, bool h2) {
  const Plant plant = load_plant(plant_path);
  const Controller k = load_controller(k_path);
  LiftOptions opts;
  opts.seed = g.seed;
  if (h2) {
    const H2Lift lifted = lift_h2(plant, k, gamma, g.tol, opts);
    json j = to_json(lifted.z);
    j["Gamma"] = matrix_to_json(lifted.Gamma.mat());
    j["component_sign"] =
        component_sign(lifted.z, g.tol) == ComponentSign::plus ? "plus"
                                                               : "minus";
    emit(g, j);
  } else {
    const LiftedPoint z = lift(plant, k, gamma, g.tol, opts);
    json j = to_json(z);
    j["component_sign"] =
        component_sign(z, g.tol) == ComponentSign::plus ? "plus" : "minus";
    emit(g, j);
  }
  return 0;
}

int cmd_reconstruct(const GlobalOpts& g, const std::string& plant_path,
                    const std::string& lifted_path) {
  const Plant plant = load_plant(plant_path);
  const LiftedPoint z = lifted_from_json(load_json_file(lifted_path));
  emit(g, to_json(reconstruct(plant, z, g.tol)));
  return 0;
}

int cmd_synthesize(const GlobalOpts& g, const std::string& plant_path,
                   double gamma, int budget) {
  const Plant plant = load_plant(plant_path);
  emit(g, to_json(synthesize(plant, gamma, g.strictly_proper, g.seed, g.tol,
                             budget)));
  return 0;
}

int cmd_gamma_star(const GlobalOpts& g, const std::string& plant_path,
                   double rel_tol, int budget) {
  const Plant plant = load_plant(plant_path);
  const GammaStarResult r = gamma_star(plant, rel_tol, budget, g.seed, g.tol);
  emit(g, json{{"lo", format_real(r.lo)},
               {"hi", format_real(r.hi)},
               {"budget_exhausted", r.budget_exhausted},
               {"witness", to_json(r.witness)}});
  return 0;
}

void write_path_csv(const std::string& path, const PathResult& r) {
  std::ostringstream os;
  os << "t,hinf,sign\n";
  for (const auto& s : r.samples) {
    os << format_real(s.t) << ',' << format_real(s.hinf_value) << ','
       << (s.sign == ComponentSign::plus ? "plus" : "minus") << '\n';
  }
  write_text_file(path, os.str());
}

int cmd_path(const GlobalOpts& g, const std::string& plant_path,
             const std::string& k0_path, const std::string& k1_path,
             double gamma, int n_samples, const std::string& bridge_path,
             bool refine, const std::string& csv_path) {
  const Plant plant = load_plant(plant_path);
  const Controller k0 = load_controller(k0_path);
  const Controller k1 = load_controller(k1_path);
  ConnectOptions opts;
  opts.n_samples = n_samples;
  opts.seed = g.seed;
  opts.refine = refine;
  PathResult r;
  if (bridge_path.empty()) {
    r = connect(plant, k0, k1, gamma, opts, g.tol);
  } else {
    const Controller k_red = load_controller(bridge_path);
    r = connect_via_bridge(plant, k0, k1, gamma, k_red, opts, g.tol);
  }
  emit(g, to_json(r));
  if (!csv_path.empty()) write_path_csv(csv_path, r);
  return 0;
}

int cmd_scan(const GlobalOpts& g, const std::string& plant_path, double gamma,
             const ScanAxis& x_axis, const ScanAxis& y_axis,
             const std::vector<std::string>& fixed_specs, bool proper,
             const std::string& out_csv, int threads) {
  const Plant plant = load_plant(plant_path);
  std::map<std::string, double> fixed;
  for (const auto& spec : fixed_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
      throw ParseError("--fix expects name=value, got '" + spec + "'");
    }
    fixed[spec.substr(0, eq)] = std::stod(spec.substr(eq + 1));
  }
  const ScanGrid grid = run_scan(plant, gamma, x_axis, y_axis, fixed,
                                 /*strictly_proper=*/!proper, g.tol, threads);
  std::ostringstream csv;
  write_scan_csv(csv, grid);
  write_text_file(out_csv, csv.str());
  save_json_file(out_csv + ".json", scan_sidecar_json(grid));
  std::cout << "component_count: " << grid.component_count << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology toolkit for H-infinity-constrained dynamic "
               "output-feedback controller sets"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOpts g;
  app.add_option("--tol-eig", g.tol.eig_tol, "eigenvalue/rank tolerance");
  app.add_option("--tol-lmi", g.tol.lmi_margin, "relative LMI margin");
  app.add_option("--tol-bisect", g.tol.bisect_tol,
                 "relative bisection bracket width");
  app.add_option("--tol-stab", g.tol.stability_margin, "Hurwitz margin");
  app.add_option("--seed", g.seed, "seed for randomized internals");
  app.add_flag("--strictly-proper", g.strictly_proper,
               "restrict to strictly proper controllers (D_K = 0)");
  app.add_option("--out", g.out, "write the JSON result to this file");

  auto* c_example1 = app.add_subcommand(
      "example1", "Reproduce the two-controller scalar example");

  std::string plant_path, k_path, k1_path, lifted_path, bridge_path, set_name;
  double gamma = 0.0, rel_tol = 0.01;
  int budget = 2000, n_samples = 101, threads = 0;
  bool h2 = false, proper = false, refine = false;

  auto* c_norm = app.add_subcommand("norm", "Closed-loop Hinf (or H2^2) norm");
  c_norm->add_option("--plant", plant_path)->required();
  c_norm->add_option("--controller", k_path)->required();
  c_norm->add_flag("--h2", h2, "squared H2 norm instead of Hinf");

  auto* c_check = app.add_subcommand("check", "Membership test");
  c_check->add_option("--plant", plant_path)->required();
  c_check->add_option("--controller", k_path)->required();
  c_check->add_option("--set", set_name, "cstab | kgamma | lgamma")
      ->default_val("kgamma");
  c_check->add_option("--gamma", gamma);

  auto* c_certify = app.add_subcommand("certify", "LMI certificate");
  c_certify->add_option("--plant", plant_path)->required();
  c_certify->add_option("--controller", k_path)->required();
  c_certify->add_option("--gamma", gamma)->required();
  c_certify->add_flag("--h2", h2);

  auto* c_lift = app.add_subcommand("lift", "Lift a controller");
  c_lift->add_option("--plant", plant_path)->required();
  c_lift->add_option("--controller", k_path)->required();
  c_lift->add_option("--gamma", gamma)->required();
  c_lift->add_flag("--h2", h2);

  auto* c_rec = app.add_subcommand("reconstruct", "Reconstruct a controller");
  c_rec->add_option("--plant", plant_path)->required();
  c_rec->add_option("--lifted", lifted_path)->required();

  auto* c_synth = app.add_subcommand("synthesize", "Feasible controller");
  c_synth->add_option("--plant", plant_path)->required();
  c_synth->add_option("--gamma", gamma)->required();
  c_synth->add_option("--budget", budget);

  auto* c_gs = app.add_subcommand("gamma-star", "Bracket the optimal level");
  c_gs->add_option("--plant", plant_path)->required();
  c_gs->add_option("--rel-tol", rel_tol);
  c_gs->add_option("--budget", budget);

  auto* c_path = app.add_subcommand("path", "Connect two controllers");
  c_path->add_option("--plant", plant_path)->required();
  c_path->add_option("--k0", k_path)->required();
  c_path->add_option("--k1", k1_path)->required();
  c_path->add_option("--gamma", gamma)->required();
  c_path->add_option("--n-samples", n_samples);
  c_path->add_option("--bridge", bridge_path,
                     "reduced-order bridge controller (order n_x - 1)");
  c_path->add_flag("--refine", refine);
  std::string path_csv;
  c_path->add_option("--out-csv", path_csv,
                     "also write the samples (t, hinf, sign) as CSV");

  ScanAxis x_axis{"C_K", -10.0, 10.0, 201};
  ScanAxis y_axis{"B_K", -10.0, 10.0, 201};
  std::vector<std::string> fixed_specs;
  std::string out_csv;
  auto* c_scan = app.add_subcommand("scan", "Membership grid scan");
  c_scan->add_option("--plant", plant_path)->required();
  c_scan->add_option("--gamma", gamma)->required();
  c_scan->add_option("--x-param", x_axis.param);
  c_scan->add_option("--x-min", x_axis.min);
  c_scan->add_option("--x-max", x_axis.max);
  c_scan->add_option("--x-count", x_axis.count);
  c_scan->add_option("--y-param", y_axis.param);
  c_scan->add_option("--y-min", y_axis.min);
  c_scan->add_option("--y-max", y_axis.max);
  c_scan->add_option("--y-count", y_axis.count);
  c_scan->add_option("--fix", fixed_specs, "fixed parameter name=value")
      ->take_all();
  c_scan->add_flag("--proper", proper, "allow nonzero D_K cells");
  c_scan->add_option("--out-csv", out_csv)->required();
  c_scan->add_option("--threads", threads);

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_example1->parsed()) return cmd_example1(g);
    if (c_norm->parsed()) return cmd_norm(g, plant_path, k_path, h2);
    if (c_check->parsed()) {
      if (set_name != "cstab" && !(gamma > 0.0)) {
        throw ParseError("check: --gamma is required for kgamma/lgamma");
      }
      return cmd_check(g, plant_path, k_path, set_name, gamma);
    }
    if (c_certify->parsed())
      return cmd_certify(g, plant_path, k_path, gamma, h2);
    if (c_lift->parsed()) return cmd_lift(g, plant_path, k_path, gamma, h2);
    if (c_rec->parsed()) return cmd_reconstruct(g, plant_path, lifted_path);
    if (c_synth->parsed()) return cmd_synthesize(g, plant_path, gamma, budget);
    if (c_gs->parsed()) return cmd_gamma_star(g, plant_path, rel_tol, budget);
    if (c_path->parsed())
      return cmd_path(g, plant_path, k_path, k1_path, gamma, n_samples,
                      bridge_path, refine, path_csv);
    if (c_scan->parsed())
      return cmd_scan(g, plant_path, gamma, x_axis, y_axis, fixed_specs,
                      proper, out_csv, threads);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const InvalidInputError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition violation: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const SingularInputError& e) {
    std::cerr << "singular input: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
