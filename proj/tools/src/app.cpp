#include "polykam_cli/app.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "polykam_cli/svg.hpp"

namespace polykam::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const json& doc) { write_file(path, doc.dump(2) + "\n"); }

json values(const GridFunction& u) { return json(std::vector<double>(u.values().begin(), u.values().end())); }

json points_json(const std::vector<PhasePoint>& pts) {
  json a = json::array();
  for (const PhasePoint& z : pts) a.push_back({z.x, z.p});
  return a;
}

std::vector<GridFunction> seeds_for(const RunConfig& cfg) {
  return default_seeds(cfg.grid.n, cfg.seed_count, cfg.rng_seed);
}

const std::vector<OperatorWord>& catalog_for(const RunConfig& cfg, std::vector<OperatorWord>& storage) {
  if (!cfg.catalog.empty()) return cfg.catalog;
  storage = default_catalog(cfg.family.size());
  return storage;
}

json circle_json(const CircleResult& r) {
  return {{"u", values(r.circle.u)},
          {"forward_residuals", r.forward_residuals},
          {"backward_residuals", r.backward_residuals},
          {"iterations", r.iterations},
          {"seed_index", r.seed_index}};
}

json report_json(const RSpaceReport& r) {
  json j;
  j["verdict"] = r.verdict == RVerdict::Trivial ? "trivial" : "full";
  if (r.witness) {
    j["witness"] = {{"word", r.witness->word.to_string()},
                    {"gap", {{"start", r.witness->arc.start}, {"length", r.witness->arc.length}}},
                    {"set", r.witness->set.members},
                    {"u", values(r.witness->g.u)}};
  }
  if (r.circle) j["circle"] = circle_json(*r.circle);
  return j;
}

json orbit_json(const PolyOrbit& o) {
  return {{"points", points_json(o.points)}, {"labels", o.labels}, {"residuals", o.residuals}};
}

}  // namespace

// ------------------------------------------------------------------ options

SolveOptions solve_options(const RunConfig& cfg) {
  SolveOptions o;
  o.tol_fix = cfg.tol_fix;
  o.dedupe_tol = cfg.dedupe_tol;
  o.tol_argmin = cfg.tol_argmin;
  o.closure.transient = cfg.transient;
  o.closure.window = cfg.window;
  return o;
}

CircleOptions circle_options(const RunConfig& cfg) {
  CircleOptions o;
  o.tol_fix = cfg.tol_fix;
  o.closure.transient = cfg.transient;
  o.closure.window = cfg.window;
  return o;
}

ProbeOptions probe_options(const RunConfig& cfg) {
  ProbeOptions o;
  o.circle = circle_options(cfg);
  o.solve = solve_options(cfg);
  o.gap_min = cfg.gap_min;
  return o;
}

DiffuseOptions diffuse_options(const RunConfig& cfg) {
  DiffuseOptions o;
  o.mechanism.eps_step = cfg.eps_step;
  o.mechanism.delta_min = cfg.delta_min;
  o.mechanism.gap_min = cfg.gap_min;
  o.mechanism.tol_argmin = cfg.tol_argmin;
  o.probe = probe_options(cfg);
  o.catalog = cfg.catalog;
  o.seed_count = cfg.seed_count;
  o.rng_seed = cfg.rng_seed;
  o.tol_orbit = cfg.tol_orbit;
  return o;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Blocked:
    case ErrorCode::NoGap:
    case ErrorCode::Unresolved:
    case ErrorCode::DiffusionStalled: return kNegative;
    default: return kFailure;
  }
}

// --------------------------------------------------------------------- CSV

std::string orbit_to_csv(const PolyOrbit& orbit) {
  std::string s = "step,x,p,label,residual\r\n";
  for (std::size_t k = 0; k < orbit.points.size(); ++k) {
    s += std::to_string(k) + "," + fmt(orbit.points[k].x) + "," + fmt(orbit.points[k].p) + ",";
    if (k < orbit.labels.size()) {
      s += std::to_string(orbit.labels[k]) + ",";
      s += k < orbit.residuals.size() ? fmt(orbit.residuals[k]) : "";
    } else {
      s += ",";
    }
    s += "\r\n";
  }
  return s;
}

PolyOrbit orbit_from_csv(const std::string& text) {
  PolyOrbit o;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      if (line != "step,x,p,label,residual") throw Error(ErrorCode::InvalidArgument, "orbit CSV header mismatch");
      header = false;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (line.back() == ',') f.emplace_back();
    if (f.size() != 5) throw Error(ErrorCode::InvalidArgument, "orbit CSV row " + std::to_string(row) + " needs 5 fields");
    try {
      o.points.push_back({std::stod(f[1]), std::stod(f[2])});
      if (!f[3].empty()) {
        o.labels.push_back(std::stoi(f[3]));
        o.residuals.push_back(f[4].empty() ? 0.0 : std::stod(f[4]));
      }
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidArgument, "orbit CSV row " + std::to_string(row) + " is not numeric");
    }
    ++row;
  }
  return o;
}

// ---------------------------------------------------------------- commands

int cmd_alpha(const RunConfig& cfg, const fs::path& out, double c_min, double c_max, int steps, std::ostream& log) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "--steps must be >= 1");
  std::vector<double> cs(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) cs[static_cast<std::size_t>(i)] = steps == 1 ? c_min : c_min + (c_max - c_min) * i / (steps - 1);
  std::vector<std::vector<AlphaPoint>> curves;
  for (const TwistGenerator& g : cfg.family) curves.push_back(alpha_curve(g, cs, cfg.grid));

  std::string csv = "c";
  if (cfg.family.size() == 1) {
    csv += ",alpha";
  } else {
    for (std::size_t g = 0; g < cfg.family.size(); ++g) csv += ",alpha_h" + std::to_string(g);
  }
  csv += "\r\n";
  for (std::size_t i = 0; i < cs.size(); ++i) {
    csv += fmt(cs[i]);
    for (const auto& curve : curves) csv += "," + fmt(curve[i].alpha);
    csv += "\r\n";
  }
  write_file(out / "alpha.csv", csv);

  std::vector<Series> series;
  for (std::size_t g = 0; g < curves.size(); ++g) {
    Series s{"h" + std::to_string(g) + " " + cfg.family[g].name(), cs, {}, false};
    for (const AlphaPoint& a : curves[g]) s.y.push_back(a.alpha);
    series.push_back(std::move(s));
  }
  write_file(out / "alpha.svg", svg_plot("alpha(c)", "c", "alpha", series));
  log << "alpha: " << cs.size() << " rows -> " << (out / "alpha.csv").string() << "\n";
  return kSuccess;
}

int cmd_solve(const RunConfig& cfg, const fs::path& out, double c, const std::string& word, std::ostream& log) {
  const std::vector<CostMatrix> costs = family_costs(cfg.family, c, cfg.grid);
  const std::vector<GridFunction> seeds = seeds_for(cfg);
  std::vector<OperatorWord> words;
  if (!word.empty()) {
    words.push_back(OperatorWord::parse(word));
  } else {
    for (std::size_t g = 0; g < cfg.family.size(); ++g) words.push_back(OperatorWord::leaf(static_cast<int>(g)));
  }
  json doc;
  doc["c"] = c;
  doc["n"] = cfg.grid.n;
  doc["entries"] = json::array();
  std::size_t total = 0;
  for (const OperatorWord& w : words) {
    const SolveResult r = weak_kam_solutions(w, costs, c, seeds, solve_options(cfg));
    json e{{"word", w.to_string()}, {"alpha", r.alpha}, {"dropped", r.dropped}, {"solutions", json::array()}};
    for (std::size_t k = 0; k < r.solutions.size(); ++k) {
      e["solutions"].push_back({{"u", values(r.solutions[k].u)}, {"residual", r.residuals[k]}});
    }
    total += r.solutions.size();
    log << "solve: " << w.to_string() << " alpha " << fmt(r.alpha) << ", " << r.solutions.size() << " solution(s), "
        << r.dropped << " dropped\n";
    doc["entries"].push_back(std::move(e));
  }
  write_json(out / "solutions.json", doc);
  return total > 0 ? kSuccess : kNegative;
}

int cmd_aubry(const RunConfig& cfg, const fs::path& out, double c, std::ostream& log) {
  const std::vector<GridFunction> seeds = seeds_for(cfg);
  const SolveOptions opts = solve_options(cfg);
  json doc{{"c", c}, {"n", cfg.grid.n}, {"generators", json::array()}};
  std::vector<Series> series;
  for (std::size_t g = 0; g < cfg.family.size(); ++g) {
    const CostMatrix a = build_cost_twist(cfg.family[g], c, cfg.grid);
    const SolveResult sol = weak_kam_solutions(a, c, seeds, opts);
    json e{{"generator", g}, {"name", cfg.family[g].name()}, {"alpha", sol.alpha}, {"sets", json::array()}};
    for (std::size_t k = 0; k < sol.solutions.size(); ++k) {
      const AubryResult ar = aubry_set(a, sol.solutions[k], opts);
      e["sets"].push_back({{"indices", ar.set.members}, {"points", points_json(ar.points)}});
      Series s{"h" + std::to_string(g) + " solution " + std::to_string(k), {}, {}, true};
      for (const PhasePoint& z : ar.points) {
        s.x.push_back(z.x);
        s.y.push_back(z.p);
      }
      series.push_back(std::move(s));
      log << "aubry: h" << g << " solution " << k << ": " << ar.set.size() << " of " << cfg.grid.n << " indices\n";
    }
    doc["generators"].push_back(std::move(e));
  }
  write_json(out / "aubry.json", doc);
  write_file(out / "aubry.svg", svg_plot("Aubry sets at c = " + fmt(c), "x", "p", series));
  return kSuccess;
}

int cmd_circles(const RunConfig& cfg, const fs::path& out, double c, std::ostream& log) {
  const std::vector<CostMatrix> costs = family_costs(cfg.family, c, cfg.grid);
  json doc{{"c", c}, {"n", cfg.grid.n}};
  int code = kSuccess;
  try {
    const auto r = detect_common_circle(costs, c, seeds_for(cfg), circle_options(cfg));
    doc["found"] = r.has_value();
    doc["unresolved"] = false;
    if (r) {
      doc["circle"] = circle_json(*r);
      log << "circles: common circle accepted at c = " << fmt(c) << "\n";
    } else {
      log << "circles: none found at c = " << fmt(c) << "\n";
      code = kNegative;
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unresolved) throw;
    doc["found"] = false;
    doc["unresolved"] = true;
    doc["message"] = e.what();
    log << e.what() << "\n";
    code = kNegative;
  }
  write_json(out / "circles.json", doc);
  return code;
}

int cmd_rspace(const RunConfig& cfg, const fs::path& out, double c, std::ostream& log) {
  const std::vector<CostMatrix> costs = family_costs(cfg.family, c, cfg.grid);
  std::vector<OperatorWord> storage;
  const auto& catalog = catalog_for(cfg, storage);
  json doc{{"c", c}, {"n", cfg.grid.n}};
  int code = kSuccess;
  try {
    const RSpaceReport r = r_space_probe(costs, c, catalog, seeds_for(cfg), probe_options(cfg));
    doc.update(report_json(r));
    log << "rspace: " << doc["verdict"].get<std::string>();
    if (r.witness) log << " via " << r.witness->word.to_string() << ", gap of " << r.witness->arc.length;
    log << "\n";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unresolved) throw;
    doc["verdict"] = "unresolved";
    doc["message"] = e.what();
    log << e.what() << "\n";
    code = kNegative;
  }
  write_json(out / "rspace.json", doc);
  return code;
}

int cmd_diffuse(const RunConfig& cfg, const fs::path& out, double c_from, double c_to, std::ostream& log) {
  json doc{{"c_start", c_from}, {"c_end", c_to}, {"n", cfg.grid.n}};
  DiffuseResult res;
  try {
    res = diffuse(cfg.family, c_from, c_to, cfg.grid, diffuse_options(cfg));
  } catch (const Blocked& e) {
    doc["verdict"] = "blocked";
    doc["blocked_at"] = e.c();
    doc["probe"] = report_json(e.report());
    write_json(out / "orbit.json", doc);
    log << e.what() << "\n";
    return kNegative;
  } catch (const DiffusionStalled& e) {
    doc["verdict"] = "stalled";
    doc["message"] = e.what();
    doc["blocking"] = {{"c", e.blocking().c}, {"u", values(e.blocking().u)}};
    doc["steps"] = e.trail().size();
    write_json(out / "orbit.json", doc);
    log << e.what() << "\n";
    return kNegative;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unresolved) throw;
    doc["verdict"] = "unresolved";
    doc["message"] = e.what();
    write_json(out / "orbit.json", doc);
    log << e.what() << "\n";
    return kNegative;
  }

  write_file(out / "orbit.csv", orbit_to_csv(res.orbit));
  write_file(out / "orbit_raw.csv", orbit_to_csv(res.raw_orbit));
  doc["verdict"] = "verified";
  doc["refined"] = res.refined;
  doc["max_residual"] = res.report.max_residual;
  doc["raw_max_residual"] = res.raw_report.max_residual;
  doc["refine_defect"] = res.refine_defect;
  doc["shadow_distance"] = res.shadow_distance;
  doc["relaxations"] = res.relaxations;
  doc["terminal_index"] = res.terminal_index;
  if (!res.orbit.points.empty()) {
    doc["first_p"] = res.orbit.points.front().p;
    doc["last_p"] = res.orbit.points.back().p;
  }
  double bump_total = 0.0;
  json trail = json::array();
  for (const MechanismStep& s : res.trail) {
    bump_total += s.bump.integral;
    trail.push_back({{"c_before", s.g_before.c},
                     {"c_after", s.g_after.c},
                     {"word", s.word.to_string()},
                     {"gap", {{"start", s.gap.start}, {"length", s.gap.length}}},
                     {"bump", {{"start", s.bump.support.start}, {"length", s.bump.support.length}, {"integral", s.bump.integral}}},
                     {"halvings", s.halvings},
                     {"support_hits", s.support_hits}});
  }
  doc["bump_total"] = bump_total;
  doc["trail"] = std::move(trail);
  json probes = json::array();
  for (const auto& [c, r] : res.probes) {
    json p = report_json(r);
    p["c"] = c;
    probes.push_back(std::move(p));
  }
  doc["probes"] = std::move(probes);
  doc["orbit"] = orbit_json(res.orbit);
  write_json(out / "orbit.json", doc);

  Series ps{"p (refined orbit)", {}, {}, false};
  Series raw{"p (grid chain)", {}, {}, true};
  for (std::size_t k = 0; k < res.orbit.points.size(); ++k) {
    ps.x.push_back(static_cast<double>(k));
    ps.y.push_back(res.orbit.points[k].p);
  }
  for (std::size_t k = 0; k < res.raw_orbit.points.size(); ++k) {
    raw.x.push_back(static_cast<double>(k));
    raw.y.push_back(res.raw_orbit.points[k].p);
  }
  write_file(out / "orbit.svg", svg_plot("momentum along the polyorbit", "step", "p", {ps, raw}));
  log << "diffuse: verified polyorbit with " << res.orbit.points.size() << " points, max residual "
      << fmt(res.report.max_residual) << " (grid chain " << fmt(res.raw_report.max_residual) << ")\n";
  return kSuccess;
}

int cmd_verify(const RunConfig& cfg, const fs::path& orbit_csv, std::ostream& log) {
  std::ifstream in(orbit_csv, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read '" + orbit_csv.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const PolyOrbit orbit = orbit_from_csv(ss.str());
  const OrbitReport r = verify_polyorbit(cfg.family, orbit, cfg.tol_orbit);
  log << "verify: " << orbit.points.size() << " points, max residual " << fmt(r.max_residual) << ", "
      << (r.verified ? "verified" : "NOT verified") << " at tol " << fmt(cfg.tol_orbit) << "\n";
  return r.verified ? kSuccess : kNegative;
}

int cmd_selftest(std::ostream& log) {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    log << (ok ? "PASS " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };
  const CostMatrix toy{{1, 4}, {2, 0}};
  check("eigenvalue of the 2x2 toy cost is 0", std::abs(tropical_eigenvalue(toy)) <= 1e-15);
  const PeierlsClosure pc = peierls_closure(toy);
  check("closure of the 2x2 toy cost", pc.h.same_entries(CostMatrix{{6, 4}, {2, 0}}));
  check("weak-KAM solution of the toy cost", weak_kam_from_barrier(pc, GridFunction{0, 0}) == GridFunction({2, 0}));
  const PhasePoint z = apply_map(TwistGenerator::standard(2.0), {0.25, 0.0});
  check("standard map k=2 at (0.25, 0)", std::abs(z.x - (0.25 + 1 / std::numbers::pi)) <= 1e-12 &&
                                             std::abs(z.p - 1 / std::numbers::pi) <= 1e-12);
  const double alpha = tropical_eigenvalue(build_cost_twist(TwistGenerator::pure_twist(), 0.5, {64, 2}));
  check("pure twist alpha(0.5) = 1/8", std::abs(alpha - 0.125) <= 1e-12);
  return failures == 0 ? kSuccess : kFailure;
}

// --------------------------------------------------------------------- run

int run(int argc, char** argv) {
  CLI::App app{"polykam: weak-KAM toolkit for polysystems of twist maps"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory");

  double c_min = 0, c_max = 1, c = 0, c_from = 0, c_to = 1;
  int steps = 21;
  std::string word, orbit_path;

  auto* alpha = app.add_subcommand("alpha", "alpha curve of every generator -> alpha.csv");
  alpha->add_option("--c-min", c_min);
  alpha->add_option("--c-max", c_max);
  alpha->add_option("--steps", steps);
  auto* solve = app.add_subcommand("solve", "weak-KAM solutions -> solutions.json");
  solve->add_option("--c", c);
  solve->add_option("--word", word, "operator word, e.g. compose(h0,h1); default: each generator");
  auto* aubry = app.add_subcommand("aubry", "Aubry sets -> aubry.json");
  aubry->add_option("--c", c);
  auto* circles = app.add_subcommand("circles", "common invariant circle detection -> circles.json");
  circles->add_option("--c", c);
  auto* rspace = app.add_subcommand("rspace", "R(c) probe -> rspace.json");
  rspace->add_option("--c", c);
  auto* diff = app.add_subcommand("diffuse", "drifting polyorbit -> orbit.csv, orbit.json");
  diff->add_option("--from", c_from);
  diff->add_option("--to", c_to);
  auto* verify = app.add_subcommand("verify", "re-check an orbit CSV against the family maps");
  verify->add_option("--orbit", orbit_path, "orbit CSV (default <out>/orbit.csv)");
  auto* selftest = app.add_subcommand("selftest", "built-in oracle checks");
  auto* schema = app.add_subcommand("schema", "print the configuration JSON schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kSuccess : kFailure;
  }

  try {
    if (selftest->parsed()) return cmd_selftest(std::cout);
    if (schema->parsed()) {
      std::cout << config_schema();
      return kSuccess;
    }
    if (config_path.empty()) throw Error(ErrorCode::ConfigError, "--config is required");
    const RunConfig cfg = load_config(config_path);
    const fs::path out(out_dir);
    if (alpha->parsed()) return cmd_alpha(cfg, out, c_min, c_max, steps, std::cout);
    if (solve->parsed()) return cmd_solve(cfg, out, c, word, std::cout);
    if (aubry->parsed()) return cmd_aubry(cfg, out, c, std::cout);
    if (circles->parsed()) return cmd_circles(cfg, out, c, std::cout);
    if (rspace->parsed()) return cmd_rspace(cfg, out, c, std::cout);
    if (diff->parsed()) return cmd_diffuse(cfg, out, c_from, c_to, std::cout);
    if (verify->parsed()) return cmd_verify(cfg, orbit_path.empty() ? out / "orbit.csv" : fs::path(orbit_path), std::cout);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace polykam::cli
