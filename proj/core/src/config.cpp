#include "hhomog/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hhomog/errors.hpp"
#include "hhomog/expression.hpp"

namespace hhomog {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw ConfigError(field + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& path, std::set<std::string> known) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!known.count(it.key())) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
  }
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double read_number(const json& obj, const std::string& key, const std::string& path, double def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(join(path, key), "must be finite");
  return d;
}

int read_int(const json& obj, const std::string& key, const std::string& path, int def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
  const auto i = v.get<std::int64_t>();
  if (i < -1000000000 || i > 1000000000) fail(join(path, key), "integer out of range");
  return static_cast<int>(i);
}

std::uint64_t read_u64(const json& obj, const std::string& key, const std::string& path,
                       std::uint64_t def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  fail(join(path, key), "expected a non-negative integer");
}

bool read_bool(const json& obj, const std::string& key, const std::string& path, bool def) {
  if (!obj.contains(key)) return def;
  if (!obj.at(key).is_boolean()) fail(join(path, key), "expected true or false");
  return obj.at(key).get<bool>();
}

std::string read_string(const json& obj, const std::string& key, const std::string& path,
                        const std::string& def) {
  if (!obj.contains(key)) return def;
  if (!obj.at(key).is_string()) fail(join(path, key), "expected a string");
  return obj.at(key).get<std::string>();
}

std::vector<double> read_numbers(const json& obj, const std::string& key, const std::string& path,
                                 std::vector<double> def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_array()) fail(join(path, key), "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
    if (!std::isfinite(out.back())) fail(join(path, key), "entries must be finite");
  }
  return out;
}

std::vector<int> read_ints(const json& obj, const std::string& key, const std::string& path,
                           std::vector<int> def) {
  if (!obj.contains(key)) return def;
  const json& v = obj.at(key);
  if (!v.is_array()) fail(join(path, key), "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) {
      fail(join(path, key) + "[" + std::to_string(i) + "]", "expected an integer");
    }
    out.push_back(static_cast<int>(v[i].get<std::int64_t>()));
  }
  return out;
}

ValueLaw parse_law(const json& obj, const std::string& path, const ValueLaw& def) {
  reject_unknown(obj, path, {"type", "a", "b", "a_min", "a_max", "prob"});
  const std::string type = read_string(obj, "type", path, "two_point");
  try {
    if (type == "uniform") {
      return ValueLaw::uniform(read_number(obj, "a_min", path, def.a),
                               read_number(obj, "a_max", path, def.b));
    }
    if (type == "two_point") {
      return ValueLaw::two_point(read_number(obj, "a", path, def.a),
                                 read_number(obj, "b", path, def.b),
                                 read_number(obj, "prob", path, def.prob));
    }
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
  fail(join(path, "type"), "unknown law '" + type + "' (expected uniform or two_point)");
}

json law_to_json(const ValueLaw& law) {
  if (law.kind == ValueLaw::Kind::Uniform) {
    return json{{"type", "uniform"}, {"a_min", law.a}, {"a_max", law.b}};
  }
  return json{{"type", "two_point"}, {"a", law.a}, {"b", law.b}, {"prob", law.prob}};
}

CoefficientSpec parse_coefficient(const json& obj, const std::string& path) {
  reject_unknown(obj, path, {"type", "value", "even", "odd", "divisions", "values", "expr",
                             "a_min", "a_max", "law", "seed"});
  CoefficientSpec c;
  c.type = read_string(obj, "type", path, c.type);
  c.value = read_number(obj, "value", path, c.value);
  c.even = read_number(obj, "even", path, c.even);
  c.odd = read_number(obj, "odd", path, c.odd);
  c.divisions = read_int(obj, "divisions", path, c.divisions);
  c.values = read_numbers(obj, "values", path, c.values);
  c.expr = read_string(obj, "expr", path, c.expr);
  c.a_min = read_number(obj, "a_min", path, c.a_min);
  c.a_max = read_number(obj, "a_max", path, c.a_max);
  if (obj.contains("law")) c.law = parse_law(obj.at("law"), join(path, "law"), c.law);
  c.seed = read_u64(obj, "seed", path, c.seed);
  static const std::set<std::string> types{"constant", "checkerboard", "cell_table",
                                           "smooth_expr", "random_tiles"};
  if (!types.count(c.type)) fail(join(path, "type"), "unknown coefficient type '" + c.type + "'");
  return c;
}

IntegrandSpec parse_integrand(const json& obj, const std::string& path) {
  reject_unknown(obj, path, {"type", "alpha", "p", "matrix", "coefficient"});
  IntegrandSpec s;
  s.type = read_string(obj, "type", path, s.type);
  if (s.type == "power") {
    if (obj.contains("p")) fail(join(path, "p"), "power integrand takes 'alpha', not 'p'");
    s.exponent = read_number(obj, "alpha", path, s.exponent);
  } else if (s.type == "matrix_p") {
    if (obj.contains("alpha")) fail(join(path, "alpha"), "matrix_p integrand takes 'p', not 'alpha'");
    s.exponent = read_number(obj, "p", path, s.exponent);
    s.matrix = read_numbers(obj, "matrix", path, s.matrix);
  } else {
    fail(join(path, "type"), "unknown integrand type '" + s.type + "' (expected power or matrix_p)");
  }
  if (obj.contains("coefficient")) {
    s.coefficient = parse_coefficient(obj.at("coefficient"), join(path, "coefficient"));
  }
  return s;
}

json coefficient_to_json(const CoefficientSpec& c) {
  json j{{"type", c.type}};
  if (c.type == "constant") {
    j["value"] = c.value;
  } else if (c.type == "checkerboard") {
    j["even"] = c.even;
    j["odd"] = c.odd;
  } else if (c.type == "cell_table") {
    j["divisions"] = c.divisions;
    j["values"] = c.values;
  } else if (c.type == "smooth_expr") {
    j["expr"] = c.expr;
    j["a_min"] = c.a_min;
    j["a_max"] = c.a_max;
  } else if (c.type == "random_tiles") {
    j["law"] = law_to_json(c.law);
    j["seed"] = c.seed;
  }
  return j;
}

json integrand_to_json(const IntegrandSpec& s) {
  json j{{"type", s.type}};
  if (s.type == "matrix_p") {
    j["p"] = s.exponent;
    j["matrix"] = s.matrix;
  } else {
    j["alpha"] = s.exponent;
  }
  j["coefficient"] = coefficient_to_json(s.coefficient);
  return j;
}

CoefficientField build_coefficient(const CoefficientSpec& c, int n, const std::string& path) {
  try {
    if (c.type == "constant") {
      if (!(c.value > 0.0)) fail(join(path, "value"), "coefficient must be positive");
      return CoefficientField::constant(c.value);
    }
    if (c.type == "checkerboard") {
      if (!(c.even > 0.0)) fail(join(path, "even"), "coefficient must be positive");
      if (!(c.odd > 0.0)) fail(join(path, "odd"), "coefficient must be positive");
      return CoefficientField::checkerboard(n, c.even, c.odd);
    }
    if (c.type == "cell_table") {
      for (double v : c.values) {
        if (!(v > 0.0)) fail(join(path, "values"), "coefficients must be positive");
      }
      return CoefficientField::cell_table(n, c.divisions, c.values);
    }
    if (c.type == "smooth_expr") {
      if (c.expr.empty()) fail(join(path, "expr"), "expression must not be empty");
      if (!(c.a_min > 0.0)) fail(join(path, "a_min"), "lower bound must be positive");
      if (!(c.a_max >= c.a_min)) fail(join(path, "a_max"), "must be >= a_min");
      return CoefficientField::smooth(compile_expression(c.expr, n), c.a_min, c.a_max, c.expr);
    }
    if (c.type == "random_tiles") return RandomTileField(c.seed, c.law, n).coefficient();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    fail(path, msg);
  }
  fail(join(path, "type"), "unknown coefficient type '" + c.type + "'");
}

}  // namespace

HorizontalVector to_horizontal(const std::vector<double>& v) {
  return HorizontalVector::from_span(v);
}

GroupPoint origin_or(const std::vector<double>& x0, int n) {
  if (x0.empty()) return GroupPoint(n);
  return GroupPoint::from_coords(x0);
}

Integrand build_integrand(const IntegrandSpec& spec, int n) {
  const std::string path = "integrand";
  GroupParams::checked(n);
  const CoefficientField coef = build_coefficient(spec.coefficient, n, join(path, "coefficient"));
  if (spec.type == "power") {
    try {
      return power_integrand(coef, spec.exponent, n);
    } catch (const ConfigError& e) {
      fail(join(path, "alpha"), e.what());
    }
  }
  if (spec.type == "matrix_p") {
    const int m = 2 * n;
    SmallMatrix a = SmallMatrix::identity(m);
    if (!spec.matrix.empty()) {
      if (spec.matrix.size() != static_cast<std::size_t>(m * m)) {
        fail(join(path, "matrix"), "expected " + std::to_string(m * m) + " entries (row-major 2n x 2n)");
      }
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) a(r, c) = spec.matrix[r * m + c];
    }
    MatrixField field = MatrixField::constant(a);
    try {
      field = spec.coefficient.type == "constant" && spec.coefficient.value == 1.0
                  ? MatrixField::constant(a)
                  : MatrixField::scaled(coef, a);
    } catch (const ConfigError& e) {
      fail(join(path, "matrix"), e.what());
    }
    try {
      return matrix_p_integrand(field, spec.exponent, n);
    } catch (const ConfigError& e) {
      fail(join(path, "p"), e.what());
    }
  }
  fail(join(path, "type"), "unknown integrand type '" + spec.type + "'");
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<json>: invalid JSON: ") + e.what());
  }
  reject_unknown(root, "", {"schema", "command", "integrand", "q", "k_list", "t", "rho",
                            "rho_list", "x0", "M", "n", "q_grid", "stochastic", "solver",
                            "output", "threads"});
  RunConfig cfg;
  cfg.schema = read_int(root, "schema", "", cfg.schema);
  if (cfg.schema != kConfigSchema) {
    fail("schema", "unsupported schema " + std::to_string(cfg.schema) + " (expected 1)");
  }
  cfg.command = read_string(root, "command", "", cfg.command);
  if (root.contains("integrand")) cfg.integrand = parse_integrand(root.at("integrand"), "integrand");
  cfg.q = read_numbers(root, "q", "", cfg.q);
  cfg.k_list = read_ints(root, "k_list", "", cfg.k_list);
  cfg.t = read_number(root, "t", "", cfg.t);
  cfg.rho = read_number(root, "rho", "", cfg.rho);
  cfg.rho_list = read_numbers(root, "rho_list", "", cfg.rho_list);
  cfg.x0 = read_numbers(root, "x0", "", cfg.x0);
  cfg.M = read_int(root, "M", "", cfg.M);
  cfg.n = read_int(root, "n", "", cfg.n);
  cfg.threads = read_int(root, "threads", "", cfg.threads);

  if (root.contains("q_grid")) {
    const json& g = root.at("q_grid");
    reject_unknown(g, "q_grid", {"lo", "hi", "points"});
    cfg.q_grid.lo = read_number(g, "lo", "q_grid", cfg.q_grid.lo);
    cfg.q_grid.hi = read_number(g, "hi", "q_grid", cfg.q_grid.hi);
    cfg.q_grid.points = read_int(g, "points", "q_grid", cfg.q_grid.points);
  }
  if (root.contains("stochastic")) {
    const json& s = root.at("stochastic");
    reject_unknown(s, "stochastic", {"law", "n_samples", "base_seed", "k_list", "delta"});
    if (s.contains("law")) cfg.stochastic.law = parse_law(s.at("law"), "stochastic.law", cfg.stochastic.law);
    cfg.stochastic.n_samples = read_int(s, "n_samples", "stochastic", cfg.stochastic.n_samples);
    cfg.stochastic.base_seed = read_u64(s, "base_seed", "stochastic", cfg.stochastic.base_seed);
    cfg.stochastic.k_list = read_ints(s, "k_list", "stochastic", cfg.stochastic.k_list);
    cfg.stochastic.delta = read_number(s, "delta", "stochastic", cfg.stochastic.delta);
  }
  if (root.contains("solver")) {
    const json& s = root.at("solver");
    reject_unknown(s, "solver", {"tol_rel_energy", "tol_grad", "max_iter", "method", "tikhonov",
                                 "kernel_probe", "probe_seed"});
    cfg.solver.tol_rel_energy = read_number(s, "tol_rel_energy", "solver", cfg.solver.tol_rel_energy);
    cfg.solver.tol_grad = read_number(s, "tol_grad", "solver", cfg.solver.tol_grad);
    cfg.solver.max_iter = read_int(s, "max_iter", "solver", cfg.solver.max_iter);
    try {
      cfg.solver.method =
          solver_method_from_string(read_string(s, "method", "solver", to_string(cfg.solver.method)));
    } catch (const ConfigError& e) {
      fail("solver.method", e.what());
    }
    cfg.solver.tikhonov = read_number(s, "tikhonov", "solver", cfg.solver.tikhonov);
    cfg.solver.kernel_probe = read_bool(s, "kernel_probe", "solver", cfg.solver.kernel_probe);
    cfg.solver.probe_seed = read_u64(s, "probe_seed", "solver", cfg.solver.probe_seed);
  }
  if (root.contains("output")) {
    const json& o = root.at("output");
    reject_unknown(o, "output", {"path", "format"});
    cfg.output.path = read_string(o, "path", "output", cfg.output.path);
    cfg.output.format = read_string(o, "format", "output", cfg.output.format);
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_json(const RunConfig& cfg) {
  json j;
  j["schema"] = cfg.schema;
  j["command"] = cfg.command;
  j["integrand"] = integrand_to_json(cfg.integrand);
  j["q"] = cfg.q;
  j["k_list"] = cfg.k_list;
  j["t"] = cfg.t;
  j["rho"] = cfg.rho;
  j["rho_list"] = cfg.rho_list;
  j["x0"] = cfg.x0;
  j["M"] = cfg.M;
  j["n"] = cfg.n;
  j["q_grid"] = json{{"lo", cfg.q_grid.lo}, {"hi", cfg.q_grid.hi}, {"points", cfg.q_grid.points}};
  j["stochastic"] = json{{"law", law_to_json(cfg.stochastic.law)},
                         {"n_samples", cfg.stochastic.n_samples},
                         {"base_seed", cfg.stochastic.base_seed},
                         {"k_list", cfg.stochastic.k_list},
                         {"delta", cfg.stochastic.delta}};
  j["solver"] = json{{"tol_rel_energy", cfg.solver.tol_rel_energy},
                     {"tol_grad", cfg.solver.tol_grad},
                     {"max_iter", cfg.solver.max_iter},
                     {"method", to_string(cfg.solver.method)},
                     {"tikhonov", cfg.solver.tikhonov},
                     {"kernel_probe", cfg.solver.kernel_probe},
                     {"probe_seed", cfg.solver.probe_seed}};
  j["output"] = json{{"path", cfg.output.path}, {"format", cfg.output.format}};
  j["threads"] = cfg.threads;
  return j.dump(2);
}

void validate_run_config(const RunConfig& cfg) {
  static const std::set<std::string> commands{"verify", "cell",  "effective", "sweep",
                                              "stochastic", "ultimo", "recover"};
  if (!commands.count(cfg.command)) {
    fail("command", "unknown command '" + cfg.command +
                        "' (expected verify, cell, effective, sweep, stochastic, ultimo or recover)");
  }
  if (cfg.n < 1 || cfg.n > kMaxN) fail("n", "must be in [1, " + std::to_string(kMaxN) + "]");
  if (cfg.M < 1) fail("M", "must be >= 1");
  if (cfg.threads < 1) fail("threads", "must be >= 1");
  if (cfg.output.format != "csv" && cfg.output.format != "json") {
    fail("output.format", "must be csv or json");
  }
  if (!(cfg.solver.tol_grad > 0.0)) fail("solver.tol_grad", "must be positive");
  if (!(cfg.solver.tol_rel_energy > 0.0)) fail("solver.tol_rel_energy", "must be positive");
  if (cfg.solver.max_iter < 0) fail("solver.max_iter", "must be non-negative");
  if (cfg.solver.tikhonov < 0.0) fail("solver.tikhonov", "must be non-negative");
  if (cfg.command == "verify") return;

  (void)build_integrand(cfg.integrand, cfg.n);
  if (cfg.command != "stochastic" && cfg.q.size() != static_cast<std::size_t>(2 * cfg.n)) {
    fail("q", "expected " + std::to_string(2 * cfg.n) + " components");
  }
  auto check_ladder = [](const std::vector<int>& ks, const std::string& field) {
    if (ks.empty()) fail(field, "must not be empty");
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (ks[i] < 1) fail(field, "entries must be >= 1");
      if (i > 0 && ks[i] <= ks[i - 1]) fail(field, "must be strictly increasing");
    }
  };
  auto check_scale = [&](double t, const std::string& field) {
    if (!(t > 0.0)) fail(field, "must be positive");
    const double iv = 2.0 * t * cfg.M;
    if (std::abs(iv - std::round(iv)) > 1e-9 * std::max(1.0, iv)) {
      fail(field, "2*t*M must be an integer");
    }
  };
  if (cfg.command == "cell") check_scale(cfg.t, "t");
  if (cfg.command == "effective" || cfg.command == "sweep") check_ladder(cfg.k_list, "k_list");
  if (cfg.command == "sweep") {
    if (cfg.q_grid.points < 1) fail("q_grid.points", "must be >= 1");
    if (!(cfg.q_grid.hi >= cfg.q_grid.lo)) fail("q_grid.hi", "must be >= q_grid.lo");
  }
  if (cfg.command == "ultimo") {
    check_scale(cfg.t, "t");
    if (!(cfg.rho > 0.0)) fail("rho", "must be positive");
    for (double iv : {2.0 * cfg.t * cfg.rho * cfg.M, 2.0 * cfg.t * cfg.t * cfg.rho * cfg.M}) {
      if (iv < 1.0 || std::abs(iv - std::round(iv)) > 1e-9 * std::max(1.0, iv)) {
        fail("rho", "2*t*rho*M and 2*t^2*rho*M must be positive integers");
      }
    }
  }
  if (cfg.command == "recover") {
    if (cfg.rho_list.empty()) fail("rho_list", "must not be empty");
    for (std::size_t i = 0; i < cfg.rho_list.size(); ++i) {
      if (!(cfg.rho_list[i] > 0.0)) fail("rho_list", "entries must be positive");
      if (i > 0 && !(cfg.rho_list[i] < cfg.rho_list[i - 1])) {
        fail("rho_list", "must be strictly decreasing");
      }
    }
    if (!cfg.x0.empty() && cfg.x0.size() != static_cast<std::size_t>(2 * cfg.n + 1)) {
      fail("x0", "expected " + std::to_string(2 * cfg.n + 1) + " coordinates");
    }
  }
  if (cfg.command == "stochastic") {
    if (cfg.q.size() != static_cast<std::size_t>(2 * cfg.n)) {
      fail("q", "expected " + std::to_string(2 * cfg.n) + " components");
    }
    if (cfg.integrand.type != "power") fail("integrand.type", "stochastic runs use the power integrand");
    if (!(cfg.integrand.exponent > 1.0)) {
      fail("integrand.alpha", "random integrand requires alpha > 1 (growth condition)");
    }
    if (cfg.stochastic.n_samples < 1) fail("stochastic.n_samples", "must be >= 1");
    if (!(cfg.stochastic.delta >= 0.0)) fail("stochastic.delta", "must be non-negative");
    check_ladder(cfg.stochastic.k_list, "stochastic.k_list");
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("--out: cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw ConfigError("--out: write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw ConfigError("--out: cannot rename onto '" + path + "': " + ec.message());
  }
}

}  // namespace hhomog
