#include "report.hpp"

#include <cmath>
#include <cstdio>

namespace intkit::cli {

namespace {

void write(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        write(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ',';
        write(j[k], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        break;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      break;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string dump(const Json& j) {
  std::string out;
  write(j, out);
  return out;
}

Json number(double v) { return Json(v); }

Json complex_json(Complex z) {
  Json j = Json::object();
  j["re"] = z.real();
  j["im"] = z.imag();
  return j;
}

Json maybe_real(Complex z) { return z.imag() == 0.0 ? Json(z.real()) : complex_json(z); }

Json vector_json(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

void Report::absorb(const CheckReport& r) {
  status = r.passed ? "pass" : "fail";
  max_residual = r.max_residual;
  tolerance = r.tolerance;
  if (!r.components.empty()) {
    Json c = Json::object();
    for (const auto& [name, value] : r.components) c[name] = value;
    values["components"] = c;
  }
  diagnostics["worst_point"] = vector_json(r.worst_point);
  diagnostics["samples"] = r.samples_used;
  if (!r.warnings.empty()) diagnostics["warnings"] = r.warnings;
}

void Report::secondary(const std::string& name, const CheckReport& r) {
  Json c = Json::object();
  c["status"] = r.status();
  c["max_residual"] = r.max_residual;
  c["tolerance"] = r.tolerance;
  values["checks"][name] = c;
  if (!r.passed && status == "pass") status = "fail";
}

void Report::error(const std::string& kind, const std::string& message) {
  status = "error";
  diagnostics["error"] = kind;
  diagnostics["message"] = message;
}

Json Report::to_json() const {
  Json j = Json::object();
  j["command"] = command;
  j["inputs"] = inputs;
  j["status"] = status;
  j["max_residual"] = max_residual ? Json(*max_residual) : Json(nullptr);
  j["tolerance"] = tolerance ? Json(*tolerance) : Json(nullptr);
  j["values"] = values;
  j["diagnostics"] = diagnostics;
  j["version"] = kVersion;
  return j;
}

}  // namespace intkit::cli
