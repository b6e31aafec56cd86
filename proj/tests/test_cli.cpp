#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cli.hpp"
#include "intkit/btlax.hpp"
#include "intkit/cplx.hpp"
#include "intkit/flow.hpp"
#include "intkit/odesys.hpp"
#include "intkit/realfield.hpp"
#include "report.hpp"

using namespace intkit;
using cli::Json;

namespace {

struct Result {
  int code = -1;
  std::string text;
  Json json;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  Result r;
  r.code = cli::run(args, out, err);
  r.text = out.str();
  r.json = Json::parse(r.text);
  return r;
}

std::string write_task(const std::string& name, const std::string& body) {
  const std::string path = "/tmp/intkit_test_" + name + ".task";
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_CASE("worked command lines") {
  auto r = call({"exact-check", "--P", "y", "--Q", "x", "--region", "-2,2,-2,2"});
  CHECK(r.code == 0);
  CHECK(r.json["status"] == "pass");

  r = call({"contour", "--f", "1/(z-0)", "--circle", "0,0,1", "--orient", "ccw"});
  CHECK(r.code == 0);
  CHECK(r.json["values"]["integral"]["im"].get<double>() == 6.283185307179586);
  CHECK(std::fabs(r.json["values"]["integral"]["re"].get<double>()) < 1e-15);

  r = call({"eigen", "--A", "1,2;4,3"});
  CHECK(r.code == 0);
  const auto& ev = r.json["values"]["eigenvalues"];
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].is_number());
  CHECK(ev[0].get<double>() == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(ev[1].get<double>() == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("report schema and key order") {
  const auto r = call({"exact-check", "--P", "y", "--Q", "x", "--region", "-2,2,-2,2"});
  std::vector<std::string> keys;
  for (auto it = r.json.begin(); it != r.json.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"command", "inputs", "status", "max_residual", "tolerance", "values",
                                         "diagnostics", "version"});
  CHECK(r.json["command"] == "exact-check");
  CHECK(r.json["inputs"]["P"] == "y");
  CHECK(r.json["inputs"]["grid"] == "41");
  CHECK(r.json["diagnostics"]["samples"] == 1681);
  CHECK(r.json["version"] == cli::kVersion);
  CHECK(r.text.back() == '\n');
}

TEST_CASE("serialization uses 17 significant digits") {
  Json j = Json::object();
  j["a"] = 0.1;
  j["b"] = std::nan("");
  j["c"] = 3;
  j["d"] = std::numbers::pi;
  j["e"] = Json::array({1.0, -0.0});
  CHECK(cli::dump(j) == R"({"a":0.10000000000000001,"b":null,"c":3,"d":3.1415926535897931,"e":[1,-0]})");
  CHECK(cli::dump(cli::maybe_real({2.0, 0.0})) == "2");
  CHECK(cli::dump(cli::maybe_real({2.0, 1.0})) == R"({"re":2,"im":1})");
}

TEST_CASE("identical inputs give byte-identical output") {
  const std::vector<std::vector<std::string>> cases = {
      {"exact-check", "--P", "y", "--Q", "x", "--region", "-2,2,-2,2"},
      {"contour", "--f", "exp(z)/(z-0.3)", "--polygon", "-1,-1;1,-1;1,1;-1,1"},
      {"drift", "--f", "x;y", "--phi", "(x-y)*exp(-t)", "--x0", "1,0.5", "--T", "2"},
      {"eigen", "--A", "2,1,0;0,2,0;0,0,3"},
      {"flow", "--V", "y;-sin(x)", "--x0", "0.5,0", "--t", "0.3"},
      {"pde-solve", "--P", "1", "--Q", "1", "--x0", "s", "--y0", "0", "--z0", "s^2", "--s-range", "-2,2", "--at",
       "1,0.5"},
      {"kdv-lax", "--kappa", "1"},
      {"maxwell-wave", "--k", "0.6,0.8,0", "--wavelength", "2"},
  };
  for (const auto& args : cases) {
    const auto a = call(args), b = call(args);
    CHECK(a.text == b.text);
    CHECK(a.code == b.code);
  }
}

TEST_CASE("reported values equal direct library calls") {
  SUBCASE("line integral") {
    const auto r = call({"line-integral", "--P", "-y", "--Q", "x", "--circle", "0,0,2", "--orient", "cw"});
    const auto field = VectorField::parse({"x", "y"}, {"-y", "x"});
    Path p;
    p.pieces.push_back(ParametricCurve::circle(0, 0, 2, false));
    CHECK(r.json["values"]["integral"].get<double>() == realfield::line_integral(field, p).value);
  }
  SUBCASE("potential") {
    const auto r = call({"potential", "--P", "2*x*y", "--Q", "x^2+cos(y)", "--base", "0,0", "--at", "1.5,-0.7"});
    const auto field = VectorField::parse({"x", "y"}, {"2*x*y", "x^2+cos(y)"});
    const double base[2] = {0, 0}, at[2] = {1.5, -0.7};
    CHECK(r.json["values"]["potential"][0].get<double>() == realfield::potential_reconstruct(field, base, at));
  }
  SUBCASE("contour") {
    const auto r = call({"contour", "--f", "z^2/(z-0.2)", "--circle", "0.1,0,1", "--nodes", "128"});
    const auto v = cplx::contour_integral(cplx::ComplexFunction::parse_z("z^2/(z-0.2)"),
                                          cplx::Contour::circle({0.1, 0}, 1, true), 128);
    CHECK(r.json["values"]["integral"]["re"].get<double>() == v.real());
    CHECK(r.json["values"]["integral"]["im"].get<double>() == v.imag());
  }
  SUBCASE("drift") {
    const auto r = call({"drift", "--f", "x;y", "--phi", "(x+y)*exp(-t)", "--x0", "1,0.5", "--T", "3", "--h", "0.01"});
    const auto sys = odesys::AutonomousSystem::parse({"x", "y"}, {"x", "y"}, "t");
    const double x0[2] = {1, 0.5};
    const auto rep = odesys::first_integral_drift(parse("(x+y)*exp(-t)"), sys, x0, 3, 0.01);
    CHECK(r.json["max_residual"].get<double>() == rep.max_residual);
    CHECK(r.json["tolerance"].get<double>() == rep.tolerance);
    CHECK(r.json["diagnostics"]["samples"].get<std::size_t>() == rep.samples_used);
  }
  SUBCASE("matexp") {
    const auto r = call({"matexp", "--A", "0,1;-2,-3", "--t", "0.7"});
    const auto m = odesys::matrix_exp(odesys::parse_numeric_matrix("0,1;-2,-3"), 0.7);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(r.json["values"]["matrix"][i][j].get<double>() == m(i, j).real());
  }
  SUBCASE("flow") {
    const auto r = call({"flow", "--V", "y;-x", "--x0", "1,0", "--t", "0.4", "--order", "8"});
    flow::LieSeriesConfig cfg;
    cfg.order = 8;
    const double x0[2] = {1, 0};
    const auto f = flow::lie_series_flow(VectorField::parse({"x", "y"}, {"y", "-x"}), x0, 0.4, cfg);
    CHECK(r.json["values"]["point"][0].get<double>() == f.point[0]);
    CHECK(r.json["values"]["point"][1].get<double>() == f.point[1]);
    CHECK(r.json["values"]["tail"].get<double>() == f.tail);
  }
  SUBCASE("kdv-lax") {
    const auto r = call({"kdv-lax", "--kappa", "0.8", "--dx", "0.1", "--dt", "0.1"});
    btlax::LaxOptions o;
    o.dx = o.dt = 0.1;
    CHECK(r.json["values"]["deviation"].get<double>() ==
          btlax::lax_commuting_flow(btlax::kdv_soliton(0.8), o).deviation);
  }
  SUBCASE("maxwell-wave") {
    const auto r = call({"maxwell-wave", "--k", "0,0,1", "--omega", "3", "--E0", "2"});
    btlax::PlaneWaveSpec spec;
    spec.omega = 3;
    spec.e0 = 2;
    const auto w = btlax::maxwell_plane_wave(spec);
    CHECK(r.json["values"]["E"][0] == render(w.E[0]));
    CHECK(r.json["values"]["B0"][1].get<double>() == w.b0[1]);
  }
}

TEST_CASE("exit codes") {
  CHECK(call({"exact-check", "--P", "y", "--Q", "-x", "--region", "-1,1,-1,1"}).code == 1);
  CHECK(call({"kdv-lax", "--u", "x", "--x0", "1"}).code == 1);

  auto r = call({"exact-check", "--P", "y+", "--Q", "x", "--region", "-1,1,-1,1"});
  CHECK(r.code == 2);
  CHECK(r.json["status"] == "error");
  CHECK(r.json["diagnostics"]["error"] == "syntax");

  CHECK(call({"eigen", "--A", "1,a;0,1"}).code == 2);
  CHECK(call({"exact-check", "--P", "y", "--Q", "x"}).code == 2);
  CHECK(call({"no-such-command"}).code == 2);
  CHECK(call({"exact-check", "--P", "y", "--Q", "x", "--region", "-1,1,-1"}).code == 2);
  CHECK(call({"rk4", "--f", "y;-x", "--x0", "1,0", "--extra", "1"}).code == 2);
  CHECK(call({"cr-check", "--u", "foo(x)", "--v", "y"}).code == 2);

  r = call({"equilibrium", "--V", "x;1", "--seed", "0,0"});
  CHECK(r.code == 3);
  CHECK(r.json["diagnostics"]["error"] == "convergence");
  r = call({"cauchy", "--f", "z", "--z0", "3,0", "--circle", "0,0,1"});
  CHECK(r.code == 3);
  CHECK(r.json["diagnostics"]["error"] == "precondition");
  r = call({"bt-check", "--system", "liouville", "--u", "-2*ln(5-(x+t)/sqrt(2))", "--region", "3,5,3,5"});
  CHECK(r.code == 3);
  CHECK(r.json["diagnostics"]["error"] == "domain");
}

TEST_CASE("every command is registered") {
  const auto& n = cli::command_names();
  CHECK(n.size() == 28);
  for (const char* c : {"exact-check", "line-integral", "potential", "path-probe", "cr-check", "contour", "cauchy",
                        "laurent", "conjugate", "ode-exact", "ode-mu", "energy", "rk4", "drift", "eigen",
                        "linsolve", "matexp", "lie", "flow", "equilibrium", "pde-char", "pde-solve",
                        "pde-residual", "bt-check", "sg-kink", "kdv-lax", "maxwell-wave", "maxwell-check"})
    CHECK(std::find(n.begin(), n.end(), c) != n.end());
}

TEST_CASE("task files") {
  const auto direct = call({"exact-check", "--P", "y", "--Q", "x", "--region", "-2,2,-2,2", "--tol", "1e-12"});
  const auto path = write_task("ok", "# comment\nkind = exact-check\nP = y\n\nQ = x\nregion = -2,2,-2,2\ntol = 1e-12\n");
  const auto viatask = call({"run", "--task", path});
  CHECK(viatask.code == 0);
  CHECK(viatask.text == direct.text);

  auto r = call({"run", "--task", write_task("unknown", "kind = exact-check\nP = y\nQ = x\nregion = 0,1,0,1\nfoo = 1\n")});
  CHECK(r.code == 2);
  CHECK(r.json["diagnostics"]["message"].get<std::string>().find("foo") != std::string::npos);

  CHECK(call({"run", "--task", write_task("nokind", "P = y\nQ = x\n")}).code == 2);
  CHECK(call({"run", "--task", write_task("noeq", "kind = eigen\nA 1,2;3,4\n")}).code == 2);
  CHECK(call({"run", "--task", write_task("badexpr", "kind = lie\nV = y;-x\nf = x*(\n")}).code == 2);
  CHECK(call({"run", "--task", "/nonexistent/file.task"}).code == 2);

  r = call({"run", "--task", write_task("flag", "kind = flow\nV = y;-x\nx0 = 1,0\ninfinitesimal = true\n")});
  CHECK(r.code == 0);
  CHECK(r.json["values"].contains("infinitesimal"));
}

TEST_CASE("trajectory CSV dump") {
  const std::string path = "/tmp/intkit_test_rk4.csv";
  const auto r = call({"rk4", "--f", "y;-x", "--x0", "1,0", "--t1", "0.5", "--h", "0.1", "--dump-csv", path});
  CHECK(r.code == 0);
  std::ifstream f(path);
  std::string header, line;
  std::getline(f, header);
  CHECK(header == "t,x1,x2");
  std::size_t rows = 0;
  while (std::getline(f, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 2);
  }
  CHECK(rows == r.json["values"]["samples"].get<std::size_t>());
  CHECK(call({"eigen", "--A", "1", "--dump-csv", path}).code == 2);
}

TEST_CASE("pretty summary goes to stderr only") {
  std::ostringstream out1, err1, out2, err2;
  cli::run({"eigen", "--A", "1,2;4,3"}, out1, err1);
  cli::run({"eigen", "--A", "1,2;4,3", "--pretty"}, out2, err2);
  CHECK(err1.str().empty());
  CHECK(err2.str().find("eigen: pass") == 0);
  // only the echoed inputs would differ, and --pretty is not echoed
  CHECK(out1.str() == out2.str());
}
