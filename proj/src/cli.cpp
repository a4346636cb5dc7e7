#include "cuspforge/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "cuspforge/entropy.hpp"
#include "cuspforge/error.hpp"
#include "cuspforge/metric_oracle.hpp"

namespace cuspforge {

namespace fs = std::filesystem;

namespace {

std::string mode_name(RunMode m) {
  switch (m) {
    case RunMode::close:
      return "close";
    case RunMode::doubling:
      return "double";
    case RunMode::cutoff_only:
      return "cutoff-only";
    case RunMode::entropy_only:
      return "entropy-only";
  }
  return "close";
}

RunMode parse_mode(const std::string& s) {
  if (s == "close") return RunMode::close;
  if (s == "double") return RunMode::doubling;
  if (s == "cutoff-only") return RunMode::cutoff_only;
  if (s == "entropy-only") return RunMode::entropy_only;
  throw ConfigError("unknown mode '" + s + "' (close|double|cutoff-only|entropy-only)");
}

void validate(const RunConfig& c) {
  if (c.n < 3) throw ConfigError("dimension must be at least 3");
  if (!(c.eps > 0.0) || c.eps > 1.0) throw ConfigError("eps must lie in (0, 1]");
  if (c.samples < 1) throw ConfigError("samples must be positive");
  if ((c.mode == RunMode::close || c.mode == RunMode::doubling) && !(c.core_volume > 0.0))
    throw ConfigError("core_volume must be positive");
  for (const fs::path& p : c.lattice_files)
    if (!fs::exists(p)) throw ConfigError("lattice file not found: " + p.string());
}

std::vector<double> read_column(const std::string& csv, std::size_t col) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<double> out;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    for (std::size_t i = 0; i <= col; ++i) std::getline(ls, cell, ',');
    if (!cell.empty()) out.push_back(std::stod(cell));
  }
  return out;
}

fs::path resolve_out(const fs::path& requested) {
  if (const char* env = std::getenv("CUSPFORGE_OUT"); env && *env) return fs::path(env);
  return requested;
}

}  // namespace

AssemblyOptions RunConfig::assembly_options() const {
  AssemblyOptions o;
  o.allow_dim3 = allow_dim3;
  o.swap_form = literal_swap ? SwapForm::literal : SwapForm::unimodular;
  o.cutoff.r_ceiling = r_ceiling;
  o.cutoff.grid_step = pinch_grid_step;
  o.cutoff.tolerance = pinch_tol;
  o.pinch_grid_step = pinch_grid_step;
  o.pinch_tol = pinch_tol;
  o.quad_step = quad_step;
  o.glue_tol = glue_tol;
  o.volume_bound = volume_bound;
  o.cut_height = cut_height;
  return o;
}

Json RunConfig::to_json() const {
  Json j;
  j["dimension"] = n;
  j["eps"] = eps;
  j["mode"] = mode_name(mode);
  j["core_volume"] = core_volume;
  Json files = Json::array();
  for (const fs::path& p : lattice_files) files.push_back(p.generic_string());
  j["lattices"] = files;
  j["volume_bound"] = volume_bound ? Json(*volume_bound) : Json(nullptr);
  j["cut_height"] = cut_height ? Json(*cut_height) : Json(nullptr);
  j["samples"] = samples;
  j["seed"] = seed;
  j["allow_dim3"] = allow_dim3;
  j["paper_generator_swap"] = literal_swap;
  j["tolerances"] = {{"pinch_tol", pinch_tol},
                     {"pinch_grid_step", pinch_grid_step},
                     {"quad_step", quad_step},
                     {"glue_tol", glue_tol},
                     {"r_ceiling", r_ceiling}};
  return j;
}

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{
      "dimension", "eps",        "mode",       "core_volume",          "lattices",
      "volume_bound", "cut_height", "samples", "seed", "allow_dim3", "paper_generator_swap",
      "tolerances", "sweep_eps", "output_dir"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");

  RunConfig c;
  try {
    c.n = j.value("dimension", c.n);
    c.eps = j.value("eps", c.eps);
    c.mode = parse_mode(j.value("mode", std::string("close")));
    c.core_volume = j.value("core_volume", c.core_volume);
    for (const auto& p : j.value("lattices", std::vector<std::string>{})) {
      fs::path path(p);
      c.lattice_files.push_back(path.is_absolute() ? path : base_dir / path);
    }
    if (j.contains("volume_bound") && !j["volume_bound"].is_null())
      c.volume_bound = j["volume_bound"].get<double>();
    if (j.contains("cut_height") && !j["cut_height"].is_null())
      c.cut_height = j["cut_height"].get<double>();
    c.samples = j.value("samples", c.samples);
    c.seed = j.value("seed", c.seed);
    c.allow_dim3 = j.value("allow_dim3", c.allow_dim3);
    c.literal_swap = j.value("paper_generator_swap", c.literal_swap);
    if (j.contains("tolerances")) {
      const Json& t = j["tolerances"];
      c.pinch_tol = t.value("pinch_tol", c.pinch_tol);
      c.pinch_grid_step = t.value("pinch_grid_step", c.pinch_grid_step);
      c.quad_step = t.value("quad_step", c.quad_step);
      c.glue_tol = t.value("glue_tol", c.glue_tol);
      c.r_ceiling = t.value("r_ceiling", c.r_ceiling);
    }
    c.sweep_eps = j.value("sweep_eps", c.sweep_eps);
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  }
  validate(c);
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

CutoffRun cmd_cutoff(double eps, int n, const fs::path& out_dir, std::ostream& log) {
  if (!(eps > 0.0) || eps > 1.0) throw ConfigError("eps must lie in (0, 1]");
  if (n < 3) throw ConfigError("dimension must be at least 3");
  const CutoffProfile cut = make_cutoff(eps);
  const WarpProfile tube = tube_profile(cut);
  const double end = cut.r_eps() + 2.0;
  const std::vector<ProfileRow> rows = profile_grid(tube, n, 0.0, end, 0.01);

  CutoffRun run;
  run.r_eps = cut.r_eps();

  std::ostringstream phi_csv;
  phi_csv.precision(17);
  phi_csv << "t,phi,phi',phi''\n";
  std::vector<double> x, phi, s_norm, c_norm;
  std::vector<double> k1, k2, k3, k4;
  for (const ProfileRow& r : rows) {
    const double t = r.warp.t;
    phi_csv << t << ',' << cut.eval(t) << ',' << cut.deriv1(t) << ',' << cut.deriv2(t) << '\n';
    x.push_back(t);
    phi.push_back(cut.eval(t));
    s_norm.push_back(2.0 * r.warp.s * std::exp(-t));
    c_norm.push_back(2.0 * r.warp.c * std::exp(-t));
    k1.push_back(r.K.K_t_phi.value_or(NAN));
    k2.push_back(r.K.K_t_U.value_or(NAN));
    k3.push_back(r.K.K_phi_U.value_or(NAN));
    k4.push_back(r.K.K_U_V.value_or(NAN));
  }
  const std::string csv = profile_csv(rows);
  const std::vector<std::pair<fs::path, std::string>> files{
      {out_dir / "cutoff.csv", phi_csv.str()},
      {out_dir / "profile.csv", csv},
      {out_dir / "profile.svg",
       line_chart_svg("cutoff and normalised warp functions", x,
                      {{"phi", phi, "#1f77b4"}, {"2 s e^-t", s_norm, "#d62728"},
                       {"2 c e^-t", c_norm, "#2ca02c"}})},
      {out_dir / "curvature.svg",
       line_chart_svg("sectional curvatures (n = " + std::to_string(n) + ")", x,
                      {{"K(t,phi)", k1, "#1f77b4"}, {"K(t,U)", k2, "#d62728"},
                       {"K(phi,U)", k3, "#2ca02c"}, {"K(U,V)", k4, "#9467bd"}})}};
  for (const auto& [path, text] : files) {
    write_text_file(path, text);
    run.files.push_back(path);
  }

  // Re-read the written grid and check every curvature column.
  std::ifstream in(out_dir / "profile.csv");
  std::ostringstream back;
  back << in.rdbuf();
  const double tol = 1e-6;
  run.pass = true;
  for (std::size_t col = 7; col <= 10; ++col)
    for (double k : read_column(back.str(), col))
      if (k < -1.0 - eps - tol || k > tol) run.pass = false;
  log << "cutoff eps=" << eps << " r_eps=" << run.r_eps << " curvature in [" << -1.0 - eps
      << ", 0]: " << (run.pass ? "pass" : "FAIL") << "\n";
  return run;
}

AssembleRun run_pipeline(const RunConfig& cfg) {
  std::vector<FlatLattice> lattices;
  for (const fs::path& p : cfg.lattice_files) lattices.push_back(read_lattice_file(p));
  const AssemblyMode mode = cfg.mode == RunMode::doubling ? AssemblyMode::doubling : AssemblyMode::close;

  AssembleRun run{assemble(cfg.core_volume, lattices, cfg.eps, cfg.n, mode, cfg.assembly_options()),
                  {},
                  {},
                  false};
  Json entropy;
  if (run.assembly.conditions.curvature) {
    run.entropy = rescale_bound(bw_bound(run.assembly, cfg.samples, cfg.seed), cfg.eps);
    entropy = to_json(run.entropy);
    entropy["w_contribution_check"] =
        run.entropy.bw_integral >= run.entropy.w_bound - 3.0 * run.entropy.mc_stderr;
  } else {
    run.entropy.n = cfg.n;
    run.entropy.eps = cfg.eps;
    run.entropy.pinching_certified = false;
    entropy = {{"skipped", "pinching failed; Ballmann-Wojtkowski bound not applied"},
               {"chain", entropy_chain_report(run.entropy)}};
  }
  run.pass = run.assembly.conditions.pass();
  run.report["config"] = cfg.to_json();
  run.report["assembly"] = to_json(run.assembly);
  run.report["entropy"] = entropy;
  run.report["verdict"] = run.pass ? "pass" : "fail";
  return run;
}

int cmd_assemble(const RunConfig& cfg, std::ostream& log) {
  const fs::path out = resolve_out(cfg.output_dir);
  if (cfg.mode == RunMode::cutoff_only) {
    return cmd_cutoff(cfg.eps, cfg.n, out, log).pass ? kExitPass : kExitVerdictFail;
  }
  if (cfg.mode == RunMode::entropy_only) {
    const double h = model_volume_entropy(cfg.n, 30.0);
    Json j{{"dimension", cfg.n}, {"radius", 30.0}, {"model_volume_entropy", h}, {"limit", cfg.n - 1}};
    write_text_file(out / "model_entropy.json", j.dump(2) + "\n");
    log << "model volume entropy n=" << cfg.n << " r=30: " << h << "\n";
    return std::fabs(h - (cfg.n - 1)) <= 0.1 ? kExitPass : kExitVerdictFail;
  }
  const AssembleRun run = run_pipeline(cfg);
  write_text_file(out / "report.json", run.report.dump(2) + "\n");

  std::ostringstream csv;
  csv.precision(17);
  csv << "region,kind,cut_height,r_eps,t0,volume,constant_curvature_volume,pinching\n";
  for (std::size_t i = 0; i < run.assembly.tubes.size(); ++i) {
    const TubeRegion& t = run.assembly.tubes[i];
    csv << "tube[" << i << "],tube," << t.cut_height << ',' << t.cutoff.r_eps() << ',' << t.t0 << ','
        << t.volume << ',' << t.constant_curvature_volume << ',' << (t.pinching.pass ? "pass" : "fail")
        << '\n';
  }
  for (std::size_t i = 0; i < run.assembly.channels.size(); ++i) {
    const ChannelRegion& c = run.assembly.channels[i];
    csv << "channel[" << i << "],channel," << c.cut_height << ',' << c.cutoff.r_eps() << ',' << c.t0
        << ',' << c.volume << ',' << c.constant_curvature_volume << ','
        << (c.pinching.pass ? "pass" : "fail") << '\n';
  }
  write_text_file(out / "regions.csv", csv.str());
  write_text_file(out / "entropy_chain.txt", entropy_chain_report(run.entropy));

  log << "assembly (" << to_string(run.assembly.mode) << ", n=" << cfg.n << ", eps=" << cfg.eps
      << "): total volume " << run.assembly.total_volume << ", W fraction " << run.assembly.w_fraction
      << ", verdict " << (run.pass ? "pass" : "FAIL") << "\n";
  log << entropy_chain_report(run.entropy);
  return run.pass ? kExitPass : kExitVerdictFail;
}

std::vector<SweepRow> run_sweep(const RunConfig& cfg, const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw ConfigError("sweep needs at least one eps value");
  std::vector<SweepRow> rows;
  for (double eps : eps_list) {
    RunConfig c = cfg;
    c.eps = eps;
    validate(c);
    const AssembleRun run = run_pipeline(c);
    SweepRow row;
    row.eps = eps;
    for (const TubeRegion& t : run.assembly.tubes) {
      row.r_eps = t.cutoff.r_eps();
      row.t0.push_back(t.t0);
      row.region_volumes.push_back(t.volume);
    }
    for (const ChannelRegion& ch : run.assembly.channels) {
      row.r_eps = ch.cutoff.r_eps();
      row.t0.push_back(ch.t0);
      row.region_volumes.push_back(ch.volume);
    }
    row.w_fraction = run.assembly.w_fraction;
    row.bound_after = run.entropy.bound_after;
    row.eps_bar = run.entropy.eps_bar;
    row.pass = run.pass;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "eps,r_eps,t0,region_volumes,W_fraction,bound_after,eps_bar,verdict\n";
  auto join = [](const std::vector<double>& v) {
    std::ostringstream s;
    s.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ";" : "") << v[i];
    return s.str();
  };
  for (const SweepRow& r : rows)
    out << r.eps << ',' << r.r_eps << ',' << join(r.t0) << ',' << join(r.region_volumes) << ','
        << r.w_fraction << ',' << r.bound_after << ',' << r.eps_bar << ','
        << (r.pass ? "pass" : "fail") << '\n';
  return out.str();
}

int cmd_sweep(const RunConfig& cfg, const std::vector<double>& eps_list, std::ostream& log) {
  const std::vector<SweepRow> rows = run_sweep(cfg, eps_list);
  const std::string csv = sweep_csv(rows);
  write_text_file(resolve_out(cfg.output_dir) / "sweep.csv", csv);
  log << csv;
  const bool all = std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.pass; });
  return all ? kExitPass : kExitVerdictFail;
}

OracleCheck run_oracle_check(int samples, std::uint64_t seed, double tol) {
  struct Case {
    WarpProfile profile;
    int n;
    double t_lo, t_hi;
  };
  const CutoffProfile cut = make_cutoff(0.1);
  const std::vector<Case> cases{{hyperbolic_profile(), 4, 0.05, 6.0},
                                {exponential_profile(), 5, 0.05, 6.0},
                                {tube_profile(cut), 4, 0.05, cut.r_eps() + 2.0}};
  std::mt19937_64 gen(seed);
  auto uniform = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };

  OracleCheck res;
  res.samples = samples;
  for (int i = 0; i < samples; ++i) {
    const Case& c = cases[static_cast<std::size_t>(i) % cases.size()];
    const CoordinateMetric m = CoordinateMetric::from_profile(c.profile, c.n);
    Eigen::VectorXd x(c.n);
    x(0) = c.t_lo + (c.t_hi - c.t_lo) * uniform();
    for (int k = 1; k < c.n; ++k) x(k) = 2.0 * uniform() - 1.0;
    Eigen::VectorXd X(c.n), Y(c.n);
    for (int k = 0; k < c.n; ++k) {
      X(k) = 2.0 * uniform() - 1.0;
      Y(k) = 2.0 * uniform() - 1.0;
    }
    const Eigen::MatrixXd g = m.metric_at(x);
    const double fd = sectional_from_tensor(riemann_fd(m, x), g, X, Y);

    const Eigen::VectorXd scale = g.diagonal().cwiseSqrt();
    const Eigen::VectorXd Xo = scale.cwiseProduct(X), Yo = scale.cwiseProduct(Y);
    const Eigen::MatrixXd J = jacobi_from_frame_curvatures(frame_curvatures(c.profile, x(0), c.n), Yo);
    const double area2 = Xo.squaredNorm() * Yo.squaredNorm() - std::pow(Xo.dot(Yo), 2);
    const double closed = Xo.dot(J * Xo) / area2;
    res.max_abs_error = std::max(res.max_abs_error, std::fabs(fd - closed));
  }
  res.pass = res.max_abs_error <= tol;
  return res;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"cuspforge: cusp-closing and doubling constructions with curvature, volume and "
               "entropy certificates"};
  app.require_subcommand(1);

  fs::path config_path;
  fs::path out_dir;
  double eps = 0.0;
  int dim = 0;
  long samples = 0;
  std::uint64_t seed = 0;
  bool allow_dim3 = false;
  bool literal_swap_flag = false;
  std::vector<double> eps_list;
  double radius = 30.0;

  auto* cutoff = app.add_subcommand("cutoff", "design the cutoff and write profile CSV/SVG");
  cutoff->add_option("--eps", eps, "pinching budget in (0, 1]")->required();
  cutoff->add_option("--dim", dim, "dimension n (default 4)");
  cutoff->add_option("--out", out_dir, "output directory");

  auto add_pipeline_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "assembly config (JSON)")->required();
    sub->add_option("--eps", eps, "override eps");
    sub->add_option("--dim", dim, "override dimension");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--samples", samples, "Monte Carlo samples");
    sub->add_option("--seed", seed, "Monte Carlo seed");
    sub->add_flag("--allow-dim3", allow_dim3, "permit n = 3 cusp closing");
    sub->add_flag("--paper-generator-swap", literal_swap_flag,
                  "use gamma1 = k*alpha1 + alpha2 (index-k sublattice, warns)");
  };
  auto* assemble_cmd = app.add_subcommand("assemble", "run the full construction and certificates");
  add_pipeline_flags(assemble_cmd);
  auto* sweep = app.add_subcommand("sweep", "run the pipeline over a list of eps values");
  add_pipeline_flags(sweep);
  sweep->add_option("--eps-list", eps_list, "comma-separated eps values")->delimiter(',');

  auto* entropy = app.add_subcommand("entropy", "model-space volume entropy, or a standalone certificate");
  entropy->add_option("--dim", dim, "dimension n (default 4)");
  entropy->add_option("--radius", radius, "ball radius (>= 10)");
  entropy->add_option("--config", config_path, "emit the entropy certificate for this config");
  entropy->add_option("--out", out_dir, "output directory");
  entropy->add_option("--samples", samples, "Monte Carlo samples");
  entropy->add_option("--seed", seed, "Monte Carlo seed");

  int oracle_samples = 100;
  auto* oracle = app.add_subcommand("oracle-check", "closed form vs finite-difference curvature");
  oracle->add_option("--samples", oracle_samples, "random planes");
  oracle->add_option("--seed", seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitPass : kExitError;
  }

  auto configured = [&]() {
    RunConfig cfg = load_config(config_path);
    if (eps != 0.0) cfg.eps = eps;
    if (dim != 0) cfg.n = dim;
    if (samples != 0) cfg.samples = samples;
    if (seed != 0) cfg.seed = seed;
    if (allow_dim3) cfg.allow_dim3 = true;
    if (literal_swap_flag) cfg.literal_swap = true;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    validate(cfg);
    return cfg;
  };

  try {
    if (*cutoff) {
      const fs::path dir = resolve_out(out_dir.empty() ? fs::path("cuspforge_out") : out_dir);
      try {
        return cmd_cutoff(eps, dim == 0 ? 4 : dim, dir, out).pass ? kExitPass : kExitVerdictFail;
      } catch (const InfeasibleError& e) {
        err << "cutoff: " << e.what() << "\n";
        return kExitVerdictFail;
      }
    }
    if (*assemble_cmd) return cmd_assemble(configured(), out);
    if (*sweep) {
      RunConfig cfg = configured();
      if (eps_list.empty()) eps_list = cfg.sweep_eps;
      if (eps_list.empty()) {
        err << "sweep: usage error, --eps-list is empty\n";
        return kExitError;
      }
      return cmd_sweep(cfg, eps_list, out);
    }
    if (*entropy) {
      if (config_path.empty()) {
        const int n = dim == 0 ? 4 : dim;
        const double h = model_volume_entropy(n, radius);
        out << "model volume entropy n=" << n << " r=" << radius << ": " << h << " (limit " << n - 1
            << ")\n";
        return kExitPass;
      }
      const RunConfig cfg = configured();
      const AssembleRun run = run_pipeline(cfg);
      write_text_file(resolve_out(cfg.output_dir) / "entropy.json",
                      run.report["entropy"].dump(2) + "\n");
      out << entropy_chain_report(run.entropy);
      return run.entropy.pinching_certified ? kExitPass : kExitVerdictFail;
    }
    if (*oracle) {
      const OracleCheck r = run_oracle_check(oracle_samples, seed == 0 ? 7 : seed);
      out << "oracle-check: " << r.samples << " random planes, max |closed - fd| = " << r.max_abs_error
          << (r.pass ? " (pass)" : " (FAIL)") << "\n";
      return r.pass ? kExitPass : kExitVerdictFail;
    }
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitVerdictFail;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace cuspforge
