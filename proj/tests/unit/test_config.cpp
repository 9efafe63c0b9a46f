#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <hhomog/config.hpp>
#include <hhomog/errors.hpp>

using namespace hhomog;

namespace {

std::string error_of(const std::string& json_text, bool validate = true) {
  try {
    const RunConfig cfg = parse_run_config(json_text);
    if (validate) validate_run_config(cfg);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

bool starts_with(const std::string& s, const std::string& prefix) { return s.rfind(prefix, 0) == 0; }

}  // namespace

TEST_CASE("defaults and canonical round trip") {
  const RunConfig d = parse_run_config("{}");
  CHECK(d.schema == 1);
  CHECK(d.command == "verify");
  CHECK(d.k_list == std::vector<int>{1, 2, 3, 4});
  CHECK(d.M == 4);
  const std::string once = to_json(d);
  CHECK(to_json(parse_run_config(once)) == once);

  RunConfig c;
  c.command = "stochastic";
  c.integrand.type = "matrix_p";
  c.integrand.exponent = 3.0;
  c.integrand.matrix = {2.0, 0.5, 0.5, 1.0};
  c.integrand.coefficient.type = "smooth_expr";
  c.integrand.coefficient.expr = "2 + sin(x1)";
  c.integrand.coefficient.a_min = 1.0;
  c.integrand.coefficient.a_max = 3.0;
  c.q = {0.125, -3.0};
  c.x0 = {0.1, 0.2, 0.3};
  c.stochastic.law = ValueLaw::uniform(1.0, 2.0);
  c.stochastic.base_seed = 18446744073709551557ull;
  c.solver.method = SolverMethod::LBFGS;
  c.solver.kernel_probe = true;
  c.output = {"out.json", "json"};
  c.threads = 3;
  const std::string text = to_json(c);
  const RunConfig back = parse_run_config(text);
  CHECK(to_json(back) == text);
  CHECK(back.stochastic.base_seed == c.stochastic.base_seed);
  CHECK(back.integrand.matrix == c.integrand.matrix);
  CHECK(back.solver.method == SolverMethod::LBFGS);
  CHECK(back.q == c.q);
}

TEST_CASE("parse errors name the field") {
  CHECK(starts_with(error_of("{\"bogus\": 1}", false), "bogus"));
  CHECK(starts_with(error_of("{\"solver\": {\"tolerance\": 1}}", false), "solver.tolerance"));
  CHECK(starts_with(error_of("{\"M\": \"four\"}", false), "M"));
  CHECK(starts_with(error_of("{\"schema\": 2}", false), "schema"));
  CHECK(starts_with(error_of("{\"solver\": {\"method\": \"newton\"}}", false), "solver.method"));
  CHECK(!error_of("{ not json", false).empty());
  CHECK(starts_with(error_of("{\"integrand\": {\"type\": \"power\", \"coefficient\": {\"type\": \"stripes\"}}}", false),
                    "integrand.coefficient.type"));
}

TEST_CASE("validation errors name the field") {
  const std::string alpha =
      error_of(R"({"command": "effective", "integrand": {"type": "power", "alpha": 0.5}})");
  CHECK(starts_with(alpha, "integrand.alpha"));
  CHECK(alpha.find("growth") != std::string::npos);

  CHECK(starts_with(error_of(R"({"command": "effective", "k_list": [2, 1]})"), "k_list"));
  CHECK(starts_with(error_of(R"({"command": "effective", "q": [1, 0, 0]})"), "q"));
  CHECK(starts_with(error_of(R"({"command": "ultimo", "t": 1.3})"), "t"));
  CHECK(starts_with(error_of(R"({"command": "recover", "rho_list": [0.25, 0.5]})"), "rho_list"));
  CHECK(starts_with(error_of(R"({"command": "sweep", "q_grid": {"points": 0}})"), "q_grid.points"));
  CHECK(starts_with(error_of(R"({"output": {"format": "xml"}})"), "output.format"));
  CHECK(starts_with(error_of(R"({"command": "frobnicate"})"), "command"));
  CHECK(starts_with(error_of(R"({"command": "effective", "integrand": {"coefficient": {"type": "constant", "value": -1}}})"),
                    "integrand.coefficient.value"));
  CHECK(starts_with(
      error_of(R"({"command": "effective", "integrand": {"type": "matrix_p", "p": 2, "matrix": [1, 0, 0]}})"),
      "integrand.matrix"));
  CHECK(error_of(R"({"command": "effective"})").empty());
  CHECK(error_of(R"({"command": "ultimo", "t": 2, "rho": 0.5})").empty());
}

TEST_CASE("integrands built from specs") {
  IntegrandSpec s;
  s.coefficient.type = "checkerboard";
  const Integrand f = build_integrand(s, 1);
  CHECK(f.growth().c1 == 1.0);
  CHECK(f.growth().c2 == 4.0);
  CHECK(f.flags().h_periodic);
  CHECK(f.is_quadratic());

  IntegrandSpec r;
  r.coefficient.type = "random_tiles";
  CHECK(build_integrand(r, 1).flags().random);
  CHECK_FALSE(build_integrand(r, 1).flags().h_periodic);

  CHECK(to_horizontal({1.0, 2.0}) == HorizontalVector{1.0, 2.0});
  CHECK(origin_or({}, 1) == GroupPoint(1));
  CHECK(origin_or({1, 2, 3}, 1) == GroupPoint(1, 2, 3));
}

TEST_CASE("atomic file output") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "hhomog_config_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "out.csv").string();
  write_file_atomic(path, "a\n");
  write_file_atomic(path, "b,c\n");
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == "b,c\n");
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  CHECK_THROWS_AS(write_file_atomic((dir / "missing" / "x.csv").string(), "x"), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("config files") {
  CHECK_THROWS_AS(load_run_config("/nonexistent/cfg.json"), ConfigError);
}
