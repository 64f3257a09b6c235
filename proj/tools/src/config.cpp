#include "polykam_cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace polykam::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ConfigError, path + ": " + what);
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double number(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail(join(path, key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(join(path, key), "must be finite");
  return d;
}

double positive(const json& obj, const std::string& path, const char* key, double fallback) {
  const double d = number(obj, path, key, fallback);
  if (!(d > 0.0)) fail(join(path, key), "must be > 0");
  return d;
}

std::int64_t integer(const json& obj, const std::string& path, const char* key, std::int64_t fallback,
                     std::int64_t min_value) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
  const std::int64_t i = v.get<std::int64_t>();
  if (i < min_value) fail(join(path, key), "must be >= " + std::to_string(min_value));
  return i;
}

std::vector<double> number_list(const json& obj, const std::string& path, const char* key) {
  std::vector<double> out;
  if (!obj.contains(key)) return out;
  const json& v = obj.at(key);
  if (!v.is_array()) fail(join(path, key), "expected an array of numbers");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

TwistGenerator generator(const json& g, const std::string& path) {
  if (!g.is_object()) fail(path, "expected an object");
  if (!g.contains("type") || !g.at("type").is_string()) fail(join(path, "type"), "expected a string");
  const std::string type = g.at("type").get<std::string>();
  if (type == "pure_twist") {
    only_keys(g, path, {"type"});
    return TwistGenerator::pure_twist();
  }
  if (type == "standard") {
    only_keys(g, path, {"type", "k"});
    const double k = number(g, path, "k", 0.0);
    if (k < 0.0) fail(join(path, "k"), "must be >= 0");
    return TwistGenerator::standard(k);
  }
  if (type == "fourier") {
    only_keys(g, path, {"type", "constant", "cos", "sin"});
    FourierPotential pot;
    pot.constant = number(g, path, "constant", 0.0);
    pot.cos_coeffs = number_list(g, path, "cos");
    pot.sin_coeffs = number_list(g, path, "sin");
    return TwistGenerator::fourier(std::move(pot));
  }
  fail(join(path, "type"), "unknown generator type '" + type + "'");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("<root>", std::string("not valid JSON: ") + e.what());
  }
  only_keys(doc, "", {"family", "grid", "tolerances", "mechanism", "seeds", "catalog"});
  RunConfig cfg;

  if (!doc.contains("family")) fail("family", "required");
  const json& fam = doc.at("family");
  if (!fam.is_array() || fam.empty()) fail("family", "must be a non-empty array");
  for (std::size_t i = 0; i < fam.size(); ++i) {
    const std::string path = "family[" + std::to_string(i) + "]";
    try {
      cfg.family.push_back(generator(fam[i], path));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      fail(path, e.what());
    }
  }

  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    only_keys(g, "grid", {"n", "lift_k"});
    cfg.grid.n = static_cast<std::size_t>(integer(g, "grid", "n", 256, 8));
    cfg.grid.lift_k = static_cast<int>(integer(g, "grid", "lift_k", 2, 1));
  }

  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    only_keys(t, "tolerances", {"tol_fix", "tol_orbit", "tol_argmin", "dedupe_tol"});
    cfg.tol_fix = positive(t, "tolerances", "tol_fix", cfg.tol_fix);
    cfg.tol_orbit = positive(t, "tolerances", "tol_orbit", cfg.tol_orbit);
    cfg.tol_argmin = positive(t, "tolerances", "tol_argmin", cfg.tol_argmin);
    cfg.dedupe_tol = positive(t, "tolerances", "dedupe_tol", cfg.dedupe_tol);
  }

  if (doc.contains("mechanism")) {
    const json& m = doc.at("mechanism");
    only_keys(m, "mechanism", {"eps_step", "delta_min", "gap_min", "transient", "window"});
    cfg.eps_step = positive(m, "mechanism", "eps_step", cfg.eps_step);
    cfg.delta_min = positive(m, "mechanism", "delta_min", cfg.delta_min);
    if (cfg.delta_min > cfg.eps_step) fail("mechanism.delta_min", "must not exceed eps_step");
    cfg.gap_min = static_cast<std::size_t>(integer(m, "mechanism", "gap_min", 0, 4));
    cfg.transient = integer(m, "mechanism", "transient", 0, 1);
    cfg.window = integer(m, "mechanism", "window", 0, 1);
  }

  if (doc.contains("seeds")) {
    const json& s = doc.at("seeds");
    only_keys(s, "seeds", {"count", "rng_seed"});
    cfg.seed_count = static_cast<std::size_t>(integer(s, "seeds", "count", 5, 1));
    cfg.rng_seed = static_cast<std::uint64_t>(integer(s, "seeds", "rng_seed", 1, 0));
  }

  if (doc.contains("catalog")) {
    const json& c = doc.at("catalog");
    if (!c.is_array()) fail("catalog", "expected an array of word strings");
    for (std::size_t i = 0; i < c.size(); ++i) {
      const std::string path = "catalog[" + std::to_string(i) + "]";
      if (!c[i].is_string()) fail(path, "expected a string");
      try {
        OperatorWord w = OperatorWord::parse(c[i].get<std::string>());
        if (w.max_leaf() >= static_cast<int>(cfg.family.size())) fail(path, "leaf index outside the family");
        cfg.catalog.push_back(std::move(w));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        fail(path, e.what());
      }
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

const char* config_schema() {
  return R"schema({
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "polykam run configuration",
  "type": "object",
  "additionalProperties": false,
  "required": ["family"],
  "properties": {
    "family": {
      "type": "array",
      "minItems": 1,
      "items": {
        "oneOf": [
          {"type": "object", "additionalProperties": false, "required": ["type"],
           "properties": {"type": {"const": "pure_twist"}}},
          {"type": "object", "additionalProperties": false, "required": ["type"],
           "properties": {"type": {"const": "standard"}, "k": {"type": "number", "minimum": 0, "default": 0}}},
          {"type": "object", "additionalProperties": false, "required": ["type"],
           "properties": {"type": {"const": "fourier"},
                          "constant": {"type": "number", "default": 0},
                          "cos": {"type": "array", "items": {"type": "number"}},
                          "sin": {"type": "array", "items": {"type": "number"}}}}
        ]
      }
    },
    "grid": {
      "type": "object", "additionalProperties": false,
      "properties": {
        "n": {"type": "integer", "minimum": 8, "default": 256},
        "lift_k": {"type": "integer", "minimum": 1, "default": 2}
      }
    },
    "tolerances": {
      "type": "object", "additionalProperties": false,
      "properties": {
        "tol_fix": {"type": "number", "exclusiveMinimum": 0, "default": 1e-8},
        "tol_orbit": {"type": "number", "exclusiveMinimum": 0, "default": 1e-3},
        "tol_argmin": {"type": "number", "exclusiveMinimum": 0, "default": 1e-9},
        "dedupe_tol": {"type": "number", "exclusiveMinimum": 0, "default": 1e-6}
      }
    },
    "mechanism": {
      "type": "object", "additionalProperties": false,
      "properties": {
        "eps_step": {"type": "number", "exclusiveMinimum": 0, "default": 0.05},
        "delta_min": {"type": "number", "exclusiveMinimum": 0, "default": 1e-4},
        "gap_min": {"type": "integer", "minimum": 4, "description": "default max(4, n/32)"},
        "transient": {"type": "integer", "minimum": 1, "description": "default 4n"},
        "window": {"type": "integer", "minimum": 1, "description": "default 2n"}
      }
    },
    "seeds": {
      "type": "object", "additionalProperties": false,
      "properties": {
        "count": {"type": "integer", "minimum": 1, "default": 5},
        "rng_seed": {"type": "integer", "minimum": 0, "default": 1}
      }
    },
    "catalog": {"type": "array", "items": {"type": "string"},
                "description": "operator words such as \"compose(h0,h1)\"; default: all pairs, their closures, singletons"}
  }
}
)schema";
}

}  // namespace polykam::cli
