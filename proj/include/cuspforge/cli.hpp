#pragma once

// Command-line front end. Exit codes: 0 pass, 2 verdict fail, 1 operational error.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cuspforge/assembly.hpp"
#include "cuspforge/report.hpp"

namespace cuspforge {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitVerdictFail = 2;

enum class RunMode { close, doubling, cutoff_only, entropy_only };

struct RunConfig {
  int n = 4;
  double eps = 0.1;
  RunMode mode = RunMode::close;
  double core_volume = 0.0;
  std::vector<std::filesystem::path> lattice_files;  // resolved against the config dir
  std::optional<double> volume_bound;
  std::optional<double> cut_height;
  long samples = 100000;
  std::uint64_t seed = 42;
  bool allow_dim3 = false;
  bool literal_swap = false;  // --paper-generator-swap
  double pinch_tol = 1e-6;
  double pinch_grid_step = 2.5e-4;
  double quad_step = 1e-3;
  double glue_tol = 1e-9;
  double r_ceiling = 650.0;
  std::vector<double> sweep_eps;
  std::filesystem::path output_dir = "cuspforge_out";

  AssemblyOptions assembly_options() const;
  Json to_json() const;
};

/// Parses the JSON config; throws ConfigError on invalid fields or missing files.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);

struct CutoffRun {
  double r_eps = 0.0;
  bool pass = false;
  std::vector<std::filesystem::path> files;
};

CutoffRun cmd_cutoff(double eps, int n, const std::filesystem::path& out_dir, std::ostream& log);

struct AssembleRun {
  ManifoldAssembly assembly;
  EntropyCertificate entropy;
  Json report;
  bool pass = false;
};

AssembleRun run_pipeline(const RunConfig& cfg);
int cmd_assemble(const RunConfig& cfg, std::ostream& log);

struct SweepRow {
  double eps = 0.0;
  double r_eps = 0.0;
  std::vector<double> t0;
  std::vector<double> region_volumes;
  double w_fraction = 0.0;
  double bound_after = 0.0;
  double eps_bar = 0.0;
  bool pass = false;
};

std::vector<SweepRow> run_sweep(const RunConfig& cfg, const std::vector<double>& eps_list);
std::string sweep_csv(const std::vector<SweepRow>& rows);
int cmd_sweep(const RunConfig& cfg, const std::vector<double>& eps_list, std::ostream& log);

struct OracleCheck {
  int samples = 0;
  double max_abs_error = 0.0;
  bool pass = false;
};

/// Closed-form vs finite-difference sectional curvatures on random planes
/// across the sinh/cosh, e^t/2 and designed tube profiles.
OracleCheck run_oracle_check(int samples, std::uint64_t seed, double tol = 1e-5);

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace cuspforge
