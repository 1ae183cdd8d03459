#include "hinfpath/scan.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

#include "hinfpath/analysis.hpp"

namespace hinfpath {

ControllerParamRef parse_controller_param(const std::string& name) {
  ControllerParamRef ref;
  std::string base = name;
  const auto paren = name.find('(');
  if (paren != std::string::npos) {
    base = name.substr(0, paren);
    const auto close = name.find(')', paren);
    const auto comma = name.find(',', paren);
    if (close == std::string::npos || comma == std::string::npos ||
        comma > close) {
      throw InvalidInputError("scan: malformed parameter index in '" + name +
                              "'");
    }
    ref.row = std::stol(name.substr(paren + 1, comma - paren - 1));
    ref.col = std::stol(name.substr(comma + 1, close - comma - 1));
  }
  if (base == "A_K") {
    ref.block = ControllerParamRef::Block::A_K;
  } else if (base == "B_K") {
    ref.block = ControllerParamRef::Block::B_K;
  } else if (base == "C_K") {
    ref.block = ControllerParamRef::Block::C_K;
  } else if (base == "D_K") {
    ref.block = ControllerParamRef::Block::D_K;
  } else {
    throw InvalidInputError("scan: unknown controller parameter '" + name +
                            "'");
  }
  return ref;
}

void set_controller_param(Controller* k, const ControllerParamRef& ref,
                          double value) {
  Eigen::MatrixXd* block = nullptr;
  switch (ref.block) {
    case ControllerParamRef::Block::A_K: block = &k->A_K; break;
    case ControllerParamRef::Block::B_K: block = &k->B_K; break;
    case ControllerParamRef::Block::C_K: block = &k->C_K; break;
    case ControllerParamRef::Block::D_K: block = &k->D_K; break;
  }
  if (ref.row >= block->rows() || ref.col >= block->cols()) {
    throw InvalidInputError("scan: parameter index out of range");
  }
  (*block)(ref.row, ref.col) = value;
}

namespace {

double axis_value(const ScanAxis& axis, int i) {
  if (axis.count == 1) return axis.min;
  return axis.min + (axis.max - axis.min) * static_cast<double>(i) /
                        static_cast<double>(axis.count - 1);
}

}  // namespace

ScanGrid run_scan(const Plant& plant, double gamma, const ScanAxis& x_axis,
                  const ScanAxis& y_axis,
                  const std::map<std::string, double>& fixed,
                  bool strictly_proper, const Tolerances& tol, int n_threads) {
  tol.validate();
  if (x_axis.count < 1 || y_axis.count < 1) {
    throw InvalidInputError("scan: axis count must be at least 1");
  }
  if (!(gamma > 0.0)) {
    throw InvalidInputError("scan: gamma must be positive");
  }
  const ControllerParamRef x_ref = parse_controller_param(x_axis.param);
  const ControllerParamRef y_ref = parse_controller_param(y_axis.param);

  Controller base = Controller::zero(plant.dims());
  for (const auto& [name, value] : fixed) {
    set_controller_param(&base, parse_controller_param(name), value);
  }
  if (strictly_proper && !base.strictly_proper()) {
    throw InvalidInputError(
        "scan: strictly proper scan cannot fix D_K entries to nonzero "
        "values");
  }

  ScanGrid grid;
  grid.x_axis = x_axis;
  grid.y_axis = y_axis;
  grid.fixed = fixed;
  grid.gamma = gamma;
  grid.strictly_proper = strictly_proper;
  grid.membership = Eigen::MatrixXi::Zero(y_axis.count, x_axis.count);

  int hw = n_threads > 0 ? n_threads
                         : static_cast<int>(std::thread::hardware_concurrency());
  hw = std::max(1, std::min<int>(hw, y_axis.count));

  std::atomic<int> next_row{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next_row.fetch_add(1);
      if (i >= y_axis.count) break;
      Controller k = base;
      set_controller_param(&k, y_ref, axis_value(y_axis, i));
      for (int j = 0; j < x_axis.count; ++j) {
        set_controller_param(&k, x_ref, axis_value(x_axis, j));
        grid.membership(i, j) =
            in_kgamma(plant, k, gamma, strictly_proper, tol) ? 1 : 0;
      }
    }
  };
  if (hw == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(hw);
    for (int t = 0; t < hw; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  grid.component_count = count_components_4(grid.membership);
  return grid;
}

int count_components_4(const Eigen::MatrixXi& grid) {
  const Eigen::Index rows = grid.rows();
  const Eigen::Index cols = grid.cols();
  Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(rows, cols);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> stack;
  int count = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (grid(i, j) == 0 || seen(i, j)) continue;
      ++count;
      seen(i, j) = 1;
      stack.push_back({i, j});
      while (!stack.empty()) {
        const auto [r, c] = stack.back();
        stack.pop_back();
        const Eigen::Index dr[] = {1, -1, 0, 0};
        const Eigen::Index dc[] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
          const Eigen::Index rr = r + dr[d];
          const Eigen::Index cc = c + dc[d];
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          if (grid(rr, cc) == 0 || seen(rr, cc)) continue;
          seen(rr, cc) = 1;
          stack.push_back({rr, cc});
        }
      }
    }
  }
  return count;
}

}  // namespace hinfpath
