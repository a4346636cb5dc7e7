#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cuspforge/cli.hpp"
#include "cuspforge/entropy.hpp"

using namespace cuspforge;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = CUSPFORGE_FIXTURES;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cuspforge_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "cuspforge");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int rc = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return rc;
}

std::string golden() { return (kFixtures / "golden.json").string(); }

}  // namespace

TEST_CASE("config parsing and validation") {
  const RunConfig c = load_config(kFixtures / "golden.json");
  CHECK(c.n == 4);
  CHECK(c.eps == 0.1);
  CHECK(c.core_volume == 100.0);
  REQUIRE(c.lattice_files.size() == 1);
  CHECK(fs::exists(c.lattice_files[0]));
  CHECK(c.volume_bound == 200.0);

  const std::string base = R"("core_volume": 10, "lattices": ["golden_torus.lat"])";
  CHECK_NOTHROW(parse_config("{" + base + "}", kFixtures));
  CHECK_THROWS(parse_config(R"({"dimension": 2, )" + base + "}", kFixtures));
  CHECK_THROWS(parse_config(R"({"eps": 2, )" + base + "}", kFixtures));
  CHECK_THROWS(parse_config(R"({"eps": 0, )" + base + "}", kFixtures));
  CHECK_THROWS(parse_config(R"({"colour": 1, )" + base + "}", kFixtures));
  CHECK_THROWS(parse_config(R"({"core_volume": 10, "lattices": ["missing.lat"]})", kFixtures));
  CHECK_THROWS(parse_config("{not json", kFixtures));
}

TEST_CASE("cutoff command writes deterministic, in-range output") {
  const fs::path a = scratch("cutoff_a"), b = scratch("cutoff_b");
  CHECK(cli({"cutoff", "--eps", "0.1", "--dim", "4", "--out", a.string()}) == kExitPass);
  CHECK(cli({"cutoff", "--eps", "0.1", "--dim", "4", "--out", b.string()}) == kExitPass);
  for (const char* f : {"cutoff.csv", "profile.csv", "profile.svg", "curvature.svg"}) {
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }
  CHECK(slurp(a / "profile.csv").rfind("t,s,s',s'',c,c',c'',K_t_phi,K_t_U,K_phi_U,K_U_V\n", 0) == 0);
  CHECK(cli({"cutoff", "--eps", "2"}) == kExitError);
  CHECK(cli({"cutoff"}) == kExitError);
}

TEST_CASE("assemble: golden fixture passes and is reproducible") {
  const fs::path a = scratch("asm_a"), b = scratch("asm_b");
  CHECK(cli({"assemble", "--config", golden(), "--out", a.string()}) == kExitPass);
  CHECK(cli({"assemble", "--config", golden(), "--out", b.string()}) == kExitPass);
  const std::string report = slurp(a / "report.json");
  CHECK(report == slurp(b / "report.json"));
  const Json j = Json::parse(report);
  CHECK(j["verdict"] == "pass");
  CHECK(j["config"]["dimension"] == 4);
  CHECK(j["config"]["seed"] == 42);
  CHECK(j["entropy"]["mc_samples"].get<long>() > 0);
  CHECK(fs::exists(a / "regions.csv"));
  CHECK(fs::exists(a / "entropy_chain.txt"));
}

TEST_CASE("assemble: rank-deficient lattice is an operational error") {
  std::string text;
  CHECK(cli({"assemble", "--config", (kFixtures / "rank_deficient.json").string(), "--out",
             scratch("rank").string()},
            &text) == kExitError);
  CHECK(text.find("error") != std::string::npos);
}

TEST_CASE("close and double reports differ and are self-consistent") {
  RunConfig c = load_config(kFixtures / "golden.json");
  c.samples = 5000;
  const AssembleRun close = run_pipeline(c);
  c.mode = RunMode::doubling;
  c.volume_bound = 400.0;  // two copies of the core
  const AssembleRun dbl = run_pipeline(c);
  CHECK(close.report.dump() != dbl.report.dump());
  for (const AssembleRun* r : {&close, &dbl}) {
    CHECK(r->pass);
    const ManifoldAssembly& a = r->assembly;
    CHECK(a.total_volume == doctest::Approx(a.core_volume * a.core_copies + a.region_volume_sum).epsilon(1e-12));
    CHECK(r->report["entropy"]["bound_after"] == r->entropy.bound_after);
  }
  CHECK(dbl.report["config"]["mode"] == "double");
}

TEST_CASE("sweep: eps_bar decreases, singleton agrees with assemble, empty list rejected") {
  RunConfig c = load_config(kFixtures / "golden.json");
  c.samples = 5000;
  const std::vector<SweepRow> rows = run_sweep(c, {0.2, 0.1, 0.05});
  REQUIRE(rows.size() == 3);
  CHECK(rows[1].eps_bar < rows[0].eps_bar);
  CHECK(rows[2].eps_bar < rows[1].eps_bar);
  CHECK(rows[2].r_eps >= rows[0].r_eps);

  const std::vector<SweepRow> one = run_sweep(c, {0.1});
  const AssembleRun run = run_pipeline(c);
  CHECK(one[0].bound_after == run.entropy.bound_after);
  CHECK(one[0].w_fraction == run.assembly.w_fraction);
  CHECK(one[0].t0[0] == run.assembly.tubes[0].t0);

  const fs::path out = scratch("sweep");
  CHECK(cli({"sweep", "--config", golden(), "--eps-list", "0.2,0.1", "--samples", "2000", "--out",
             out.string()}) == kExitPass);
  const std::string csv = slurp(out / "sweep.csv");
  CHECK(csv.rfind("eps,r_eps,t0,region_volumes,W_fraction,bound_after,eps_bar,verdict\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK_THROWS(run_sweep(c, {}));
}

TEST_CASE("CUSPFORGE_OUT overrides --out") {
  const fs::path env = scratch("env"), flag = scratch("flag");
  ::setenv("CUSPFORGE_OUT", env.string().c_str(), 1);
  const int rc = cli({"cutoff", "--eps", "0.5", "--out", flag.string()});
  ::unsetenv("CUSPFORGE_OUT");
  CHECK(rc == kExitPass);
  CHECK(fs::exists(env / "profile.csv"));
  CHECK_FALSE(fs::exists(flag));
}

TEST_CASE("entropy and oracle-check subcommands") {
  std::string text;
  CHECK(cli({"entropy", "--dim", "4", "--radius", "30"}, &text) == kExitPass);
  CHECK(text.find("2.99") != std::string::npos);
  CHECK(cli({"oracle-check"}, &text) == kExitPass);
  const OracleCheck r = run_oracle_check(100, 7);
  CHECK(r.pass);
  CHECK(r.max_abs_error < 1e-5);
  CHECK(cli({"frobnicate"}) == kExitError);
}
