#pragma once

#include <map>
#include <string>

#include <Eigen/Core>

#include "hinfpath/model.hpp"

namespace hinfpath {

struct ScanAxis {
  std::string param;  // "A_K", "B_K(0,1)", ...
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};

// Boolean membership grid over two controller parameters plus its
// 4-neighbour connected-component count.
struct ScanGrid {
  ScanAxis x_axis;
  ScanAxis y_axis;
  std::map<std::string, double> fixed;
  double gamma = 0.0;
  bool strictly_proper = true;
  Eigen::MatrixXi membership;  // y_axis.count rows, x_axis.count cols, {0,1}
  int component_count = 0;
};

// Reference to a single controller entry, parsed from "A_K" or "A_K(i,j)".
struct ControllerParamRef {
  enum class Block { A_K, B_K, C_K, D_K } block = Block::A_K;
  Eigen::Index row = 0;
  Eigen::Index col = 0;
};

ControllerParamRef parse_controller_param(const std::string& name);
void set_controller_param(Controller* k, const ControllerParamRef& ref,
                          double value);

// Evaluates K_gamma membership on the grid. Cells are processed
// concurrently (row blocks) with a deterministic result layout.
ScanGrid run_scan(const Plant& plant, double gamma, const ScanAxis& x_axis,
                  const ScanAxis& y_axis,
                  const std::map<std::string, double>& fixed,
                  bool strictly_proper = true, const Tolerances& tol = {},
                  int n_threads = 0);

// 4-neighbour connected components of the true cells.
int count_components_4(const Eigen::MatrixXi& grid);

}  // namespace hinfpath
