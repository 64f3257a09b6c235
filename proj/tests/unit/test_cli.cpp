#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "json.hpp"
#include "polykam_cli/app.hpp"
#include "polykam_cli/svg.hpp"

using namespace polykam;
using namespace polykam::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("polykam_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p;
}

int run_args(std::vector<std::string> args) {
  args.insert(args.begin(), "polykam");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

std::string config_error_path(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
    const std::string what = e.what();
    const std::string prefix = "cli.ConfigError: ";
    const std::string rest = what.substr(what.find(prefix) == 0 ? prefix.size() : 0);
    return rest.substr(0, rest.find(':'));
  }
  return "<no error>";
}

const char* kPure = R"j({"family": [{"type": "pure_twist"}], "grid": {"n": 64}})j";
const char* kPair = R"j({"family": [{"type": "pure_twist"}, {"type": "standard", "k": 2.0}], "grid": {"n": 64}})j";

}  // namespace

TEST(Config, MinimalDefaults) {
  const RunConfig cfg = parse_config(R"j({"family": [{"type": "pure_twist"}]})j");
  ASSERT_EQ(cfg.family.size(), 1u);
  EXPECT_EQ(cfg.family[0].kind(), GeneratorKind::PureTwist);
  EXPECT_EQ(cfg.grid.n, 256u);
  EXPECT_EQ(cfg.grid.lift_k, 2);
  EXPECT_EQ(cfg.tol_fix, 1e-8);
  EXPECT_EQ(cfg.tol_orbit, 1e-3);
  EXPECT_EQ(cfg.eps_step, 0.05);
  EXPECT_EQ(cfg.delta_min, 1e-4);
  EXPECT_EQ(cfg.seed_count, 5u);
  EXPECT_TRUE(cfg.catalog.empty());
}

TEST(Config, PartialGrid) {
  const RunConfig cfg = parse_config(R"j({"family": [{"type": "standard", "k": 2.0}], "grid": {"n": 128}})j");
  EXPECT_EQ(cfg.grid.n, 128u);
  EXPECT_EQ(cfg.grid.lift_k, 2);
  EXPECT_EQ(cfg.family[0].kind(), GeneratorKind::Standard);
  EXPECT_EQ(cfg.family[0].k(), 2.0);
}

TEST(Config, FullDocument) {
  const RunConfig cfg = parse_config(R"j({
    "family": [{"type": "fourier", "constant": 0.1, "cos": [-0.05, 0.01], "sin": [0.02]}, {"type": "pure_twist"}],
    "grid": {"n": 32, "lift_k": 3},
    "tolerances": {"tol_fix": 1e-7, "tol_orbit": 2e-3, "tol_argmin": 1e-8, "dedupe_tol": 1e-5},
    "mechanism": {"eps_step": 0.02, "delta_min": 1e-3, "gap_min": 6, "transient": 100, "window": 50},
    "seeds": {"count": 3, "rng_seed": 42},
    "catalog": ["compose(h0,h1)", "h1"]
  })j");
  EXPECT_EQ(cfg.family[0].kind(), GeneratorKind::Fourier);
  EXPECT_EQ(cfg.family[0].potential().cos_coeffs.size(), 2u);
  EXPECT_EQ(cfg.grid.lift_k, 3);
  EXPECT_EQ(cfg.tol_argmin, 1e-8);
  EXPECT_EQ(cfg.gap_min, 6u);
  EXPECT_EQ(cfg.transient, 100);
  EXPECT_EQ(cfg.rng_seed, 42u);
  ASSERT_EQ(cfg.catalog.size(), 2u);
  EXPECT_EQ(cfg.catalog[0].to_string(), "compose(h0,h1)");
}

TEST(Config, ErrorsNameKeyPath) {
  EXPECT_EQ(config_error_path(R"j({"family": []})j"), "family");
  EXPECT_EQ(config_error_path(R"j({})j"), "family");
  EXPECT_EQ(config_error_path(R"j({"family": [{"type": "pure_twist"}], "grid": {"n": 4}})j"), "grid.n");
  EXPECT_EQ(config_error_path(R"j({"family": [{"type": "pure_twist"}], "grid": {"m": 4}})j"), "grid.m");
  EXPECT_EQ(config_error_path(R"j({"family": [{"type": "standard", "k": -1}]})j"), "family[0].k");
  EXPECT_EQ(config_error_path(R"j({"family": [{"type": "pure_twist"}, {"type": "nope"}]})j"), "family[1].type");
  EXPECT_EQ(config_error_path(R"j({"family": [{"type": "pure_twist"}], "tolerances": {"tol_fix": 0}})j"),
            "tolerances.tol_fix");
  EXPECT_EQ(config_error_path(R"j({"family": [{"type": "pure_twist"}], "catalog": ["compose(h0,h1)"]})j"), "catalog[0]");
  EXPECT_EQ(config_error_path(R"j({"family": [{"type": "pure_twist"}], "extra": 1})j"), "extra");
  EXPECT_EQ(config_error_path("{not json"), "<root>");
}

TEST(Config, SchemaIsJson) {
  const auto schema = nlohmann::json::parse(config_schema());
  EXPECT_EQ(schema["type"], "object");
  EXPECT_TRUE(schema["properties"].contains("family"));
}

TEST(OrbitCsv, RoundTripIsExact) {
  PolyOrbit o;
  o.points = {{0.1, 0.0}, {0.30000000000000004, 1.0 / 3}, {0.999, -2.5e-17}};
  o.labels = {1, 0};
  o.residuals = {1e-15, 0.0};
  const std::string csv = orbit_to_csv(o);
  EXPECT_EQ(csv.substr(0, csv.find('\r')), "step,x,p,label,residual");
  const PolyOrbit back = orbit_from_csv(csv);
  ASSERT_EQ(back.points.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(back.points[k].x, o.points[k].x);
    EXPECT_EQ(back.points[k].p, o.points[k].p);
  }
  EXPECT_EQ(back.labels, o.labels);
  EXPECT_EQ(back.residuals, o.residuals);
  EXPECT_POLYKAM_ERROR(orbit_from_csv("a,b\r\n"), ErrorCode::InvalidArgument);
  EXPECT_POLYKAM_ERROR(orbit_from_csv("step,x,p,label,residual\r\n0,x,1,,\r\n"), ErrorCode::InvalidArgument);
}

TEST(ExitCodes, Taxonomy) {
  EXPECT_EQ(exit_code_for(ErrorCode::Blocked), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::NoGap), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::Unresolved), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::DiffusionStalled), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::ConfigError), 1);
  EXPECT_EQ(exit_code_for(ErrorCode::NotStabilized), 1);
}

TEST(Commands, AlphaCsv) {
  const fs::path dir = scratch("alpha");
  const fs::path cfg = write_config(dir, R"j({"family": [{"type": "pure_twist"}]})j");
  ASSERT_EQ(run_args({"--config", cfg.string(), "--out", dir.string(), "alpha", "--c-min", "0", "--c-max", "1",
                      "--steps", "21"}),
            0);
  std::istringstream csv(slurp(dir / "alpha.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "c,alpha\r");
  int rows = 0;
  bool saw_half = false;
  while (std::getline(csv, line)) {
    if (line == "\r" || line.empty()) continue;
    ++rows;
    const double c = std::stod(line.substr(0, line.find(',')));
    const double a = std::stod(line.substr(line.find(',') + 1));
    if (std::abs(c - 0.5) < 1e-12) {
      saw_half = true;
      EXPECT_NEAR(a, 0.125, 1e-3);
    }
  }
  EXPECT_EQ(rows, 21);
  EXPECT_TRUE(saw_half);
  EXPECT_TRUE(fs::exists(dir / "alpha.svg"));
}

TEST(Commands, CirclesOnPureTwist) {
  const fs::path dir = scratch("circles");
  const fs::path cfg = write_config(dir, kPure);
  EXPECT_EQ(run_args({"--config", cfg.string(), "--out", dir.string(), "circles", "--c", "0.0"}), 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "circles.json"));
  EXPECT_TRUE(doc["found"].get<bool>());
  EXPECT_TRUE(doc.contains("circle"));
}

TEST(Commands, CirclesNoneIsNegative) {
  const fs::path dir = scratch("circles_none");
  const fs::path cfg = write_config(dir, kPair);
  EXPECT_EQ(run_args({"--config", cfg.string(), "--out", dir.string(), "circles", "--c", "0.0"}), 2);
}

TEST(Commands, DiffuseBlockedOnPureTwist) {
  const fs::path dir = scratch("blocked");
  const fs::path cfg = write_config(dir, kPure);
  EXPECT_EQ(run_args({"--config", cfg.string(), "--out", dir.string(), "diffuse", "--from", "0", "--to", "1"}), 2);
  const auto doc = nlohmann::json::parse(slurp(dir / "orbit.json"));
  EXPECT_EQ(doc["verdict"], "blocked");
}

TEST(Commands, DiffuseAndVerify) {
  const fs::path dir = scratch("diffuse");
  const fs::path cfg = write_config(dir, kPair);
  ASSERT_EQ(run_args({"--config", cfg.string(), "--out", dir.string(), "diffuse", "--from", "0", "--to", "1"}), 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "orbit.json"));
  EXPECT_EQ(doc["verdict"], "verified");
  EXPECT_NEAR(doc["bump_total"].get<double>(), 1.0, 1e-10);
  EXPECT_EQ(run_args({"--config", cfg.string(), "--out", dir.string(), "verify"}), 0);
  EXPECT_TRUE(fs::exists(dir / "orbit.svg"));

  // A tampered point fails verification with the negative exit code.
  const PolyOrbit o = orbit_from_csv(slurp(dir / "orbit.csv"));
  PolyOrbit bad = o;
  bad.points[bad.points.size() / 2].p += 0.1;
  std::ofstream(dir / "bad.csv", std::ios::binary) << orbit_to_csv(bad);
  EXPECT_EQ(run_args({"--config", cfg.string(), "verify", "--orbit", (dir / "bad.csv").string()}), 2);
}

TEST(Commands, OutputsAreDeterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const fs::path cfg = write_config(a, kPair);
  for (const fs::path& dir : {a, b}) {
    ASSERT_EQ(run_args({"--config", cfg.string(), "--out", dir.string(), "alpha", "--steps", "5"}), 0);
    ASSERT_EQ(run_args({"--config", cfg.string(), "--out", dir.string(), "solve", "--c", "0.2"}), 0);
    ASSERT_EQ(run_args({"--config", cfg.string(), "--out", dir.string(), "aubry", "--c", "0.2"}), 0);
    ASSERT_EQ(run_args({"--config", cfg.string(), "--out", dir.string(), "rspace", "--c", "0.0"}), 0);
    ASSERT_EQ(run_args({"--config", cfg.string(), "--out", dir.string(), "diffuse", "--from", "0", "--to", "0.5"}), 0);
  }
  for (const char* f : {"alpha.csv", "solutions.json", "aubry.json", "rspace.json", "orbit.csv", "orbit.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_FALSE(slurp(a / f).empty()) << f;
  }
}

TEST(Commands, ErrorsMapToExitCodes) {
  const fs::path dir = scratch("errors");
  EXPECT_EQ(run_args({"alpha"}), 1);
  const fs::path bad = write_config(dir, R"j({"family": []})j");
  EXPECT_EQ(run_args({"--config", bad.string(), "alpha"}), 1);
  const fs::path cfg = write_config(dir, kPure);
  EXPECT_EQ(run_args({"--config", cfg.string(), "--out", dir.string(), "solve", "--word", "compose(h0,h3)"}), 1);
  EXPECT_EQ(run_args({"selftest"}), 0);
}

TEST(Svg, Escapes) {
  const std::string svg = svg_plot("a<b", "x", "y", {Series{"s&t", {0, 1}, {0, 1}, false}});
  EXPECT_NE(svg.find("a&lt;b"), std::string::npos);
  EXPECT_NE(svg.find("s&amp;t"), std::string::npos);
  EXPECT_EQ(svg.rfind("</svg>\n"), svg.size() - 7);
}
