#include "kernelconv/config.hpp"

#include <initializer_list>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kernelconv/io.hpp"

namespace kernelconv {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ValidationError(path + ": " + msg);
}

const json& member(const json& obj, const std::string& path, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path, std::string("missing required key \"") + key + "\"");
  return *it;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known) fail(path, "unknown key \"" + item.key() + "\"");
  }
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

long as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<long>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Expr as_expr(const json& j, const std::string& path) {
  if (j.is_number()) return Expr::constant(j.get<double>());
  if (!j.is_string()) fail(path, "expected an expression string or a number");
  try {
    return Expr::parse(j.get<std::string>());
  } catch (const ParseError& e) {
    fail(path, std::string("bad expression: ") + e.what());
  }
}

Point as_point(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [x, y]");
  return {as_number(j[0], path + "/0"), as_number(j[1], path + "/1")};
}

ShapeSpec as_shape(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected a shape object");
  std::string kind = as_string(member(j, path, "kind"), path + "/kind");

  ShapeSpec shape;
  if (kind == "disc") {
    check_keys(j, path, {"kind", "center", "radius"});
    const json& c = member(j, path, "center");
    if (!c.is_array() || c.size() != 2) fail(path + "/center", "expected [x, y]");
    shape = DiscShape{as_expr(c[0], path + "/center/0"), as_expr(c[1], path + "/center/1"),
                      as_expr(member(j, path, "radius"), path + "/radius")};
  } else if (kind == "rect") {
    check_keys(j, path, {"kind", "center", "half_width", "half_height"});
    const json& c = member(j, path, "center");
    if (!c.is_array() || c.size() != 2) fail(path + "/center", "expected [x, y]");
    shape = RectShape{as_expr(c[0], path + "/center/0"), as_expr(c[1], path + "/center/1"),
                      as_expr(member(j, path, "half_width"), path + "/half_width"),
                      as_expr(member(j, path, "half_height"), path + "/half_height")};
  } else if (kind == "slit_disc") {
    check_keys(j, path, {"kind", "index"});
    Expr index = j.contains("index") ? as_expr(j["index"], path + "/index") : Expr::parse("j");
    shape = SlitDiscShape{std::move(index)};
  } else if (kind == "graph") {
    check_keys(j, path, {"kind", "phi"});
    shape = HalfspaceGraphShape{as_expr(member(j, path, "phi"), path + "/phi")};
  } else if (kind == "sublevel") {
    check_keys(j, path, {"kind", "psi"});
    shape = SublevelShape{as_expr(member(j, path, "psi"), path + "/psi")};
  } else {
    fail(path + "/kind", "unknown shape kind \"" + kind + "\"");
  }

  try {
    validate_shape(shape, path);
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }
  return shape;
}

TailRule as_tail(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected a tail object");
  std::string kind = as_string(member(j, path, "kind"), path + "/kind");
  if (kind == "constant") {
    check_keys(j, path, {"kind", "shape"});
    return ConstantTail{as_shape(member(j, path, "shape"), path + "/shape")};
  }
  if (kind == "periodic") {
    check_keys(j, path, {"kind", "shapes"});
    const json& arr = member(j, path, "shapes");
    if (!arr.is_array() || arr.empty()) fail(path + "/shapes", "expected a nonempty array");
    PeriodicTail tail;
    for (std::size_t i = 0; i < arr.size(); ++i)
      tail.shapes.push_back(as_shape(arr[i], path + "/shapes/" + std::to_string(i)));
    return tail;
  }
  if (kind == "functional") {
    check_keys(j, path, {"kind", "shape", "j0", "j_max", "window"});
    FunctionalTail tail{as_shape(member(j, path, "shape"), path + "/shape"), 1, 512, 5};
    if (j.contains("j0")) tail.j0 = as_integer(j["j0"], path + "/j0");
    if (j.contains("j_max")) tail.j_max = as_integer(j["j_max"], path + "/j_max");
    if (j.contains("window"))
      tail.window = static_cast<int>(as_integer(j["window"], path + "/window"));
    return tail;
  }
  fail(path + "/kind", "unknown tail kind \"" + kind + "\"");
}

DomainSequenceSpec as_sequence(const json& j, const std::string& path, const GridSpec& grid) {
  check_keys(j, path, {"prefix", "tail", "track", "limit"});
  std::vector<ShapeSpec> prefix;
  if (j.contains("prefix")) {
    const json& arr = j["prefix"];
    if (!arr.is_array()) fail(path + "/prefix", "expected an array of shapes");
    for (std::size_t i = 0; i < arr.size(); ++i)
      prefix.push_back(as_shape(arr[i], path + "/prefix/" + std::to_string(i)));
  }
  TailRule tail = as_tail(member(j, path, "tail"), path + "/tail");
  const json& tr = member(j, path, "track");
  check_keys(tr, path + "/track", {"x", "y"});
  Expr tx = as_expr(member(tr, path + "/track", "x"), path + "/track/x");
  Expr ty = as_expr(member(tr, path + "/track", "y"), path + "/track/y");
  Point limit = as_point(member(j, path, "limit"), path + "/limit");
  try {
    return DomainSequenceSpec::make(grid, std::move(prefix), std::move(tail), std::move(tx),
                                    std::move(ty), limit);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

ScalarFieldSeq as_field(const json& j, const std::string& path) {
  check_keys(j, path, {"expr", "j0", "j_max", "window", "hint"});
  Expr expr = as_expr(member(j, path, "expr"), path + "/expr");
  long j0 = j.contains("j0") ? as_integer(j["j0"], path + "/j0") : 1;
  long j_max = j.contains("j_max") ? as_integer(j["j_max"], path + "/j_max") : 512;
  int window = j.contains("window") ? static_cast<int>(as_integer(j["window"], path + "/window")) : 5;
  MonotoneHint hint = MonotoneHint::None;
  if (j.contains("hint")) {
    std::string h = as_string(j["hint"], path + "/hint");
    if (h == "none")
      hint = MonotoneHint::None;
    else if (h == "increasing")
      hint = MonotoneHint::Increasing;
    else if (h == "decreasing")
      hint = MonotoneHint::Decreasing;
    else
      fail(path + "/hint", "expected \"none\", \"increasing\", or \"decreasing\"");
  }
  try {
    return ScalarFieldSeq::make(std::move(expr), j0, j_max, window, hint);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

std::vector<long> as_index_list(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of indices");
  std::vector<long> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    long v = as_integer(j[i], path + "/" + std::to_string(i));
    if (v < 1) fail(path + "/" + std::to_string(i), "indices are 1-based");
    out.push_back(v);
  }
  return out;
}

RunParams as_params(const json& j, const std::string& path) {
  check_keys(j, path,
             {"band", "trials", "seed", "monotone_budget", "eps_sup", "boundary_delta",
              "hausdorff_js", "render_js", "reference_shape", "candidate_shape"});
  RunParams p;
  if (j.contains("band")) {
    p.band = static_cast<int>(as_integer(j["band"], path + "/band"));
    if (p.band < 0) fail(path + "/band", "band must be nonnegative");
  }
  if (j.contains("trials")) {
    p.trials = static_cast<int>(as_integer(j["trials"], path + "/trials"));
    if (p.trials < 0) fail(path + "/trials", "trials must be nonnegative");
  }
  if (j.contains("seed")) {
    const json& s = j["seed"];
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0))
      fail(path + "/seed", "expected a nonnegative integer");
    p.seed = s.get<std::uint64_t>();
  }
  if (j.contains("monotone_budget")) {
    p.monotone_budget = as_integer(j["monotone_budget"], path + "/monotone_budget");
    if (p.monotone_budget < 1) fail(path + "/monotone_budget", "budget must be at least 1");
  }
  if (j.contains("eps_sup")) {
    p.eps_sup = as_number(j["eps_sup"], path + "/eps_sup");
    if (!(p.eps_sup > 0)) fail(path + "/eps_sup", "eps_sup must be positive");
  }
  if (j.contains("boundary_delta")) {
    p.boundary_delta = as_number(j["boundary_delta"], path + "/boundary_delta");
    if (p.boundary_delta < 0) fail(path + "/boundary_delta", "boundary_delta must be nonnegative");
  }
  if (j.contains("hausdorff_js")) p.hausdorff_js = as_index_list(j["hausdorff_js"], path + "/hausdorff_js");
  if (j.contains("render_js")) p.render_js = as_index_list(j["render_js"], path + "/render_js");
  if (j.contains("reference_shape"))
    p.reference_shape = as_shape(j["reference_shape"], path + "/reference_shape");
  if (j.contains("candidate_shape"))
    p.candidate_shape = as_shape(j["candidate_shape"], path + "/candidate_shape");
  return p;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& path) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("/: expected a JSON object");
  check_keys(root, "/", {"grid", "sequence", "field", "field_point", "params"});

  RunConfig cfg;
  cfg.digest = fnv1a_hex(text);
  cfg.source_path = path;

  const json& g = member(root, "/", "grid");
  check_keys(g, "/grid", {"origin", "extent", "nx", "ny"});
  Point origin = as_point(member(g, "/grid", "origin"), "/grid/origin");
  Point extent = as_point(member(g, "/grid", "extent"), "/grid/extent");
  long nx = as_integer(member(g, "/grid", "nx"), "/grid/nx");
  long ny = as_integer(member(g, "/grid", "ny"), "/grid/ny");
  try {
    cfg.grid = GridSpec::make(origin, extent, static_cast<int>(nx), static_cast<int>(ny));
  } catch (const Error& e) {
    fail("/grid", e.what());
  }

  if (root.contains("sequence")) cfg.sequence = as_sequence(root["sequence"], "/sequence", cfg.grid);
  if (root.contains("field")) cfg.field = as_field(root["field"], "/field");
  if (root.contains("field_point"))
    cfg.field_point = as_point(root["field_point"], "/field_point");
  if (root.contains("params")) cfg.params = as_params(root["params"], "/params");
  return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path), path); }

}  // namespace kernelconv
