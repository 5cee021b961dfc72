#include "cxeuler/cli.hpp"
#include "cxeuler/manifold.hpp"
#include "cxeuler/spectral.hpp"

#include <doctest.h>

#include <filesystem>
#include <set>
#include <fstream>
#include <sstream>

using namespace cxeuler;
using cli::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("cxeuler_cli_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Invocation {
  int code;
  std::string out, err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "cxeuler");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

Invocation invoke_config(const json& config, const std::filesystem::path& dir, std::vector<std::string> extra = {}) {
  const auto path = dir / "config.json";
  std::ofstream(path) << config.dump();
  extra.insert(extra.begin(), {"--config", path.string()});
  return invoke(extra);
}

cli::RunConfig config_of(const std::string& experiment, json params = json::object()) {
  cli::RunConfig c;
  c.experiment = experiment;
  c.params = std::move(params);
  return c;
}

std::string config_error(const cli::RunConfig& c) {
  try {
    cli::validate(c);
  } catch (const cli::ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("config parsing") {
  const auto c = cli::parse_config(R"({"experiment":"euler2d-growth","params":{"T":2},"output_dir":"x","seed":7})");
  CHECK(c.experiment == "euler2d-growth");
  CHECK(c.params["T"] == 2);
  CHECK(c.output_dir == "x");
  CHECK(c.seed == 7);
  CHECK_THROWS_AS(cli::parse_config("{"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config("[]"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config(R"({"params":{}})"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config(R"({"experiment":"x","seed":-1})"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_config(R"({"experiment":"x","colour":1})"), cli::ConfigError);
}

TEST_CASE("every experiment validates with its defaults") {
  CHECK(cli::experiment_names().size() == 8);
  for (const auto& name : cli::experiment_names()) {
    CAPTURE(name);
    CHECK(cli::validate(config_of(name)) == "ok");
  }
}

TEST_CASE("resolved params carry the defaults") {
  const auto p = cli::resolve_params(config_of("euler2d-conserve", {{"K", 32}}));
  CHECK(p["K"] == 32);
  CHECK(p["dt"] == doctest::Approx(1e-3));
  CHECK(p["T"] == doctest::Approx(1.0));
  const auto q = cli::resolve_params(config_of("shear-inflation"));
  CHECK(q["k"].get<int>() > 0);
}

TEST_CASE("validation names the offending field") {
  CHECK(config_error(config_of("nope")).find("unknown name 'nope'") != std::string::npos);
  CHECK(config_error(config_of("euler2d-conserve", {{"dt", -1e-3}})).find("params.dt") == 0);
  CHECK(config_error(config_of("euler2d-growth", {{"dt", "fast"}})).find("params.dt") == 0);
  CHECK(config_error(config_of("euler2d-growth", {{"k", {0, 0}}})).find("params.k") == 0);
  CHECK(config_error(config_of("euler2d-conserve", {{"bogus", 1}})) == "params.bogus: unknown parameter");
  CHECK(config_error(config_of("shear-analyticity", {{"K", 2}})).find("params.K") == 0);
  CHECK(config_error(config_of("manifold-illposed", {{"t", -0.123}})).find("params.t") == 0);
  CHECK(config_error(config_of("manifold-picard", {{"system", 3}})).find("params.system") == 0);
}

TEST_CASE("manifold gates") {
  const auto gamma = config_error(config_of("manifold-picard", {{"gamma", 1.6}}));
  CHECK(gamma.find("params.gamma") == 0);
  CHECK(gamma.find("m0/2") != std::string::npos);
  const auto eps = config_error(config_of("manifold-picard", {{"amplitude", 1.0}}));
  CHECK(eps.find("precondition") == 0);
  CHECK(eps.find("eps0") != std::string::npos);
  CHECK(config_error(config_of("manifold-scatter", {{"gamma", 1.0}})).find("params.gamma") == 0);
  CHECK(config_error(config_of("manifold-picard", {{"band_delta", 0.3}})).find("params.band_delta") == 0);
}

TEST_CASE("inline system objects") {
  const json sys = json::parse(manifold::system_to_json(manifold::burgers_system()));
  CHECK(cli::validate(config_of("manifold-picard", {{"system", sys}})) == "ok");
  json bad = sys;
  bad["A_p"] = json::array();
  CHECK(config_error(config_of("manifold-picard", {{"system", bad}})).find("params.system") == 0);
}

TEST_CASE("flags") {
  const auto list = invoke({"--list-experiments"});
  CHECK(list.code == 0);
  CHECK(list.out.find("manifold-scatter\n") != std::string::npos);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"--frobnicate"}).code == 2);
  CHECK(invoke({"--config", "/nonexistent/cfg.json"}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("exit status 2 for usage errors") {
  const auto dir = scratch("usage");
  const auto unknown = invoke_config({{"experiment", "warp-drive"}}, dir);
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("warp-drive") != std::string::npos);
  const auto eps = invoke_config({{"experiment", "manifold-picard"}, {"params", {{"amplitude", 1.0}}}}, dir);
  CHECK(eps.code == 2);
  CHECK(eps.err.find("precondition") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(dir / "out" / "manifest.json"));
}

TEST_CASE("validate-only does no compute") {
  const auto dir = scratch("validate");
  const auto out = dir / "out";
  const auto ok = invoke_config({{"experiment", "euler2d-conserve"}, {"output_dir", out.string()}}, dir, {"--validate-only"});
  CHECK(ok.code == 0);
  CHECK(ok.out == "ok\n");
  CHECK_FALSE(std::filesystem::exists(out));
  const auto bad = invoke_config({{"experiment", "euler2d-conserve"}, {"params", {{"dt", -1.0}}}}, dir, {"--validate-only"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("params.dt") != std::string::npos);
}

TEST_CASE("shear-inflation end to end") {
  const auto dir = scratch("inflation");
  const auto r = invoke_config({{"experiment", "shear-inflation"}}, dir, {"--out", (dir / "out").string()});
  CHECK(r.code == 0);
  const auto m = json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(m["passed"] == true);
  CHECK(m["experiment"] == "shear-inflation");
  CHECK(m["library_version"] == cli::kVersion);
  CHECK(m["params"]["eps"] == doctest::Approx(0.1));
  CHECK(m["measured"]["t0"].is_number());
  CHECK(m["measured"]["t0"].get<double>() <= 5.0 * m["measured"]["predicted_t0"].get<double>());
  CHECK(m["criteria"].size() == 4);
  for (const auto& f : m["artifacts"]) CHECK(std::filesystem::exists(dir / "out" / f.get<std::string>()));
  CHECK(slurp(dir / "out" / "inflation.csv").rfind("t,q,energy,hs_norm\n", 0) == 0);
}

TEST_CASE("failing criterion exits 1 and is named") {
  // Horizon too short for the crossing.
  const auto dir = scratch("fail");
  const auto r = invoke_config(
      {{"experiment", "shear-inflation"}, {"params", {{"k", 400}, {"doublings", 0}, {"T", 0.01}}}, {"output_dir", (dir / "out").string()}},
      dir);
  CHECK(r.code == 1);
  CHECK(r.err.find("criterion failed: norm_crosses_threshold") != std::string::npos);
  CHECK(json::parse(slurp(dir / "out" / "manifest.json"))["passed"] == false);
}

TEST_CASE("reruns are bitwise identical") {
  auto c = config_of("euler2d-conserve", {{"K", 16}, {"T", 0.05}, {"dt", 1e-2}, {"samples", 2}});
  c.seed = 42;
  const auto a = cli::run(c), b = cli::run(c);
  REQUIRE(a.files.size() == 1);
  CHECK(a.files == b.files);
  CHECK(a.measured == b.measured);
  c.seed = 43;
  CHECK(cli::run(c).files != a.files);

  const auto h = config_of("burgers-hyperbolic", {{"samples", 50}});
  CHECK(cli::run(h).files == cli::run(h).files);
}

TEST_CASE("manifest numbers are labelled") {
  auto c = config_of("burgers-hyperbolic", {{"samples", 20}});
  const auto r = cli::run(c);
  const auto m = cli::manifest(c, r);
  std::set<std::string> keys;
  for (auto it = m.begin(); it != m.end(); ++it) keys.insert(it.key());
  CHECK(keys == std::set<std::string>{"experiment", "seed", "library_version", "timestamp", "params", "measured",
                                      "criteria", "passed", "artifacts"});
  for (const auto& crit : m["criteria"]) {
    CHECK(crit["name"].is_string());
    CHECK(crit.contains("value"));
    CHECK(crit.contains("threshold"));
  }
  CHECK(m["params"]["samples"] == 20);
  CHECK(m["passed"] == true);
}

TEST_CASE("random analytic state") {
  const auto s = cli::random_analytic_state(16, 0.1, 3, 5);
  s.validate();
  CHECK(s.omega.cutoff() == 16);
  CHECK(std::abs(s.omega.at({0, 0})) == 0.0);
  CHECK(std::abs(s.omega.at({4, 0})) == 0.0);
  CHECK(std::abs(s.omega.at({3, -3})) > 0.0);
  const auto t = cli::random_analytic_state(16, 0.1, 3, 5);
  CHECK(s.omega.at({1, 2}) == t.omega.at({1, 2}));
  CHECK(s.mean_u == t.mean_u);
}

TEST_CASE("cheap experiments pass with defaults") {
  for (const char* name : {"euler2d-growth", "burgers-hyperbolic", "manifold-picard"}) {
    CAPTURE(name);
    const auto r = cli::run(config_of(name));
    CHECK(r.passed());
    CHECK(r.exit_code() == 0);
    CHECK_FALSE(r.files.empty());
  }
}
