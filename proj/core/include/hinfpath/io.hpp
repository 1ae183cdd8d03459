#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "hinfpath/certify.hpp"
#include "hinfpath/homotopy.hpp"
#include "hinfpath/lift.hpp"
#include "hinfpath/model.hpp"
#include "hinfpath/scan.hpp"

namespace hinfpath {

// Parse failures (malformed JSON, schema violations) throw ParseError so the
// CLI can map them to their own exit code.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Reals are serialized as decimal strings with 17 significant digits, which
// round-trips doubles bit-exactly and is locale-independent.
std::string format_real(double v);
double parse_real(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Plant& plant);
Plant plant_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Controller& k);
Controller controller_from_json(const nlohmann::json& j);

nlohmann::json to_json(const LiftedPoint& z);
LiftedPoint lifted_from_json(const nlohmann::json& j);

nlohmann::json to_json(const HinfCertificate& cert);
HinfCertificate hinf_certificate_from_json(const nlohmann::json& j);

nlohmann::json to_json(const H2Certificate& cert);

nlohmann::json to_json(const NormResult& r);
nlohmann::json to_json(const PathResult& r);

nlohmann::json scan_sidecar_json(const ScanGrid& grid);

// CSV layout: first row is the x-axis values (leading cell empty), each
// following row starts with its y-axis value followed by 0/1 cells.
void write_scan_csv(std::ostream& os, const ScanGrid& grid);
Eigen::MatrixXi read_scan_csv(std::istream& is);

nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& j);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace hinfpath
