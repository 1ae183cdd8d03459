#include "hinfpath/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hinfpath {

using nlohmann::json;

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_real(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) {
    throw ParseError("expected a decimal string or number");
  }
  const std::string s = j.get<std::string>();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || (end && *end != '\0')) {
    throw ParseError("malformed real value '" + s + "'");
  }
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(format_real(m(i, j)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ParseError("matrix must be a non-empty array of arrays");
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() ||
        static_cast<Eigen::Index>(j[i].size()) != cols) {
      throw ParseError("matrix rows have inconsistent lengths");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(i, c) = parse_real(j[i][c]);
    }
  }
  return m;
}

namespace {

const json& field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) {
    throw ParseError(std::string("missing field '") + name + "'");
  }
  return *it;
}

}  // namespace

json to_json(const Plant& plant) {
  const PlantDims& d = plant.dims();
  return json{{"dims",
               {{"n_x", d.n_x},
                {"n_w", d.n_w},
                {"n_u", d.n_u},
                {"n_y", d.n_y},
                {"n_z", d.n_z}}},
              {"A", matrix_to_json(plant.A())},
              {"B1", matrix_to_json(plant.B1())},
              {"B2", matrix_to_json(plant.B2())},
              {"C1", matrix_to_json(plant.C1())},
              {"C2", matrix_to_json(plant.C2())},
              {"D11", matrix_to_json(plant.D11())},
              {"D12", matrix_to_json(plant.D12())},
              {"D21", matrix_to_json(plant.D21())}};
}

Plant plant_from_json(const json& j) {
  try {
    Plant plant(matrix_from_json(field(j, "A")),
                matrix_from_json(field(j, "B1")),
                matrix_from_json(field(j, "B2")),
                matrix_from_json(field(j, "C1")),
                matrix_from_json(field(j, "C2")),
                matrix_from_json(field(j, "D11")),
                matrix_from_json(field(j, "D12")),
                matrix_from_json(field(j, "D21")));
    if (j.contains("dims")) {
      const json& d = field(j, "dims");
      const PlantDims expect{d.at("n_x").get<Eigen::Index>(),
                             d.at("n_w").get<Eigen::Index>(),
                             d.at("n_u").get<Eigen::Index>(),
                             d.at("n_y").get<Eigen::Index>(),
                             d.at("n_z").get<Eigen::Index>()};
      if (!(expect == plant.dims())) {
        throw ParseError("plant dims record contradicts block shapes");
      }
    }
    return plant;
  } catch (const InvalidInputError& e) {
    throw ParseError(std::string("invalid plant: ") + e.what());
  }
}

json to_json(const Controller& k) {
  return json{{"A_K", matrix_to_json(k.A_K)},
              {"B_K", matrix_to_json(k.B_K)},
              {"C_K", matrix_to_json(k.C_K)},
              {"D_K", matrix_to_json(k.D_K)}};
}

Controller controller_from_json(const json& j) {
  Controller k{matrix_from_json(field(j, "A_K")),
               matrix_from_json(field(j, "B_K")),
               matrix_from_json(field(j, "C_K")),
               matrix_from_json(field(j, "D_K"))};
  try {
    k.validate();
  } catch (const InvalidInputError& e) {
    throw ParseError(std::string("invalid controller: ") + e.what());
  }
  return k;
}

json to_json(const LiftedPoint& z) {
  return json{{"X", matrix_to_json(z.X.mat())},
              {"Y", matrix_to_json(z.Y.mat())},
              {"Ahat", matrix_to_json(z.Ahat)},
              {"Bhat", matrix_to_json(z.Bhat)},
              {"Chat", matrix_to_json(z.Chat)},
              {"Dhat", matrix_to_json(z.Dhat)},
              {"Pi", matrix_to_json(z.Pi)},
              {"Xi", matrix_to_json(z.Xi)}};
}

LiftedPoint lifted_from_json(const json& j) {
  LiftedPoint z;
  z.X = SymMatrix(matrix_from_json(field(j, "X")));
  z.Y = SymMatrix(matrix_from_json(field(j, "Y")));
  z.Ahat = matrix_from_json(field(j, "Ahat"));
  z.Bhat = matrix_from_json(field(j, "Bhat"));
  z.Chat = matrix_from_json(field(j, "Chat"));
  z.Dhat = matrix_from_json(field(j, "Dhat"));
  z.Pi = matrix_from_json(field(j, "Pi"));
  z.Xi = matrix_from_json(field(j, "Xi"));
  return z;
}

json to_json(const HinfCertificate& cert) {
  return json{{"type", "hinf"},
              {"P", matrix_to_json(cert.P.mat())},
              {"gamma", format_real(cert.gamma)},
              {"lmi_margin_achieved", format_real(cert.lmi_margin_achieved)},
              {"pos_def_margin", format_real(cert.pos_def_margin)}};
}

HinfCertificate hinf_certificate_from_json(const json& j) {
  HinfCertificate cert;
  cert.P = SymMatrix(matrix_from_json(field(j, "P")));
  cert.gamma = parse_real(field(j, "gamma"));
  cert.lmi_margin_achieved = parse_real(field(j, "lmi_margin_achieved"));
  cert.pos_def_margin = parse_real(field(j, "pos_def_margin"));
  return cert;
}

json to_json(const H2Certificate& cert) {
  return json{{"type", "h2"},
              {"P", matrix_to_json(cert.P.mat())},
              {"Gamma", matrix_to_json(cert.Gamma.mat())},
              {"gamma", format_real(cert.gamma)},
              {"lmi_margin_achieved", format_real(cert.lmi_margin_achieved)},
              {"pos_def_margin", format_real(cert.pos_def_margin)}};
}

json to_json(const NormResult& r) {
  return json{{"value", format_real(r.value)},
              {"lo", format_real(r.lo)},
              {"hi", format_real(r.hi)},
              {"method", r.method == NormMethod::hamiltonian_bisection
                             ? "hamiltonian-bisection"
                             : "gramian"}};
}

namespace {

const char* status_name(PathStatus s) {
  switch (s) {
    case PathStatus::connected: return "connected";
    case PathStatus::different_components: return "different-components";
    case PathStatus::bridged: return "bridged";
    case PathStatus::failed: return "failed";
  }
  return "failed";
}

}  // namespace

json to_json(const PathResult& r) {
  json samples = json::array();
  for (const auto& s : r.samples) {
    samples.push_back(
        json{{"t", format_real(s.t)},
             {"hinf", format_real(s.hinf_value)},
             {"sign", s.sign == ComponentSign::plus ? "plus" : "minus"},
             {"controller", to_json(s.k)}});
  }
  json out{{"status", status_name(r.status)},
           {"samples", std::move(samples)},
           {"endpoint_errors",
            json::array({format_real(r.endpoint_errors[0]),
                         format_real(r.endpoint_errors[1])})},
           {"norm_margin", format_real(r.norm_margin)}};
  out["witness_T"] =
      r.witness_T ? matrix_to_json(*r.witness_T) : json(nullptr);
  out["failed_t"] = r.failed_t ? json(format_real(*r.failed_t)) : json(nullptr);
  return out;
}

json scan_sidecar_json(const ScanGrid& grid) {
  auto axis_json = [](const ScanAxis& a) {
    return json{{"param", a.param},
                {"min", format_real(a.min)},
                {"max", format_real(a.max)},
                {"count", a.count}};
  };
  json fixed = json::object();
  for (const auto& [name, value] : grid.fixed) {
    fixed[name] = format_real(value);
  }
  return json{{"gamma", format_real(grid.gamma)},
              {"component_count", grid.component_count},
              {"strictly_proper", grid.strictly_proper},
              {"axes", {{"x", axis_json(grid.x_axis)},
                        {"y", axis_json(grid.y_axis)}}},
              {"fixed", std::move(fixed)}};
}

void write_scan_csv(std::ostream& os, const ScanGrid& grid) {
  os << "";
  for (int j = 0; j < grid.x_axis.count; ++j) {
    const double x =
        grid.x_axis.count == 1
            ? grid.x_axis.min
            : grid.x_axis.min + (grid.x_axis.max - grid.x_axis.min) * j /
                                    (grid.x_axis.count - 1);
    os << ',' << format_real(x);
  }
  os << '\n';
  for (int i = 0; i < grid.y_axis.count; ++i) {
    const double y =
        grid.y_axis.count == 1
            ? grid.y_axis.min
            : grid.y_axis.min + (grid.y_axis.max - grid.y_axis.min) * i /
                                    (grid.y_axis.count - 1);
    os << format_real(y);
    for (int j = 0; j < grid.x_axis.count; ++j) {
      os << ',' << grid.membership(i, j);
    }
    os << '\n';
  }
}

Eigen::MatrixXi read_scan_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) {
    throw ParseError("scan csv: missing header row");
  }
  Eigen::Index cols = 0;
  for (char c : line) {
    if (c == ',') ++cols;
  }
  std::vector<std::vector<int>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<int> row;
    std::stringstream ss(line);
    std::string cell;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      if (first) {
        first = false;  // y-axis value column
        continue;
      }
      if (cell != "0" && cell != "1") {
        throw ParseError("scan csv: cells must be 0 or 1");
      }
      row.push_back(cell == "1" ? 1 : 0);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError("scan csv: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXi m(static_cast<Eigen::Index>(rows.size()), cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open file '" + path + "'");
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("json parse error in '" + path + "': " + e.what());
  }
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write file '" + path + "'");
  }
  out << j.dump(2) << '\n';
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open file '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot write file '" + path + "'");
  }
  out << content;
}

}  // namespace hinfpath
