#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "intkit/error.hpp"
#include "intkit/expr.hpp"
#include "intkit/region.hpp"
#include "intkit/trajectory.hpp"

namespace intkit::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

/// Bad flags or values that are not expressions; exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Report {
  std::string command;
  Json inputs = Json::object();
  std::string status = "pass";
  std::optional<double> max_residual, tolerance;
  Json values = Json::object();
  Json diagnostics = Json::object();
  std::optional<Trajectory> trajectory;

  /// Takes status, residual, tolerance and diagnostics from a check.
  void absorb(const CheckReport& r);
  /// Records a secondary check under values.checks.<name>; a failure fails the report.
  void secondary(const std::string& name, const CheckReport& r);
  void error(const std::string& kind, const std::string& message);

  Json to_json() const;
};

/// Compact JSON, doubles as %.17g, non-finite as null, key order preserved.
std::string dump(const Json& j);

Json number(double v);
Json complex_json(Complex z);
/// Plain number when the imaginary part is exactly zero.
Json maybe_real(Complex z);
Json vector_json(std::span<const double> v);

}  // namespace intkit::cli
