#include "cuspforge/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cuspforge/error.hpp"

namespace cuspforge {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json matrix_rows(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Json witness_json(const AbelianWitness& w) {
  return Json{{"description", w.description}, {"rank", w.rank}, {"generators", w.generators}};
}

// Fixed-width formatting keeps CSV/SVG output independent of stream state.
std::string num(double v, int digits = 17) {
  if (!std::isfinite(v)) return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

Json to_json(const PinchingCertificate& c) {
  Json j;
  j["interval"] = {c.a, c.b};
  j["grid_step"] = c.grid_step;
  j["samples"] = c.samples;
  j["K_min"] = c.K_min;
  j["K_max"] = c.K_max;
  j["margin"] = c.margin;
  j["margined_range"] = {c.bound_lo, c.bound_hi};
  j["target"] = {c.target.lo, c.target.hi};
  j["tolerance"] = c.tolerance;
  j["verdict"] = c.pass ? "pass" : "fail";
  j["first_violation_t"] = optional_number(c.first_violation_t);
  return j;
}

Json to_json(const InterfaceCertificate& c) {
  Json samples = Json::array();
  for (const CollarSample& s : c.samples)
    samples.push_back({{"depth", s.depth},
                       {"direction", s.direction},
                       {"cusp_side", s.cusp_side},
                       {"region_side", s.region_side},
                       {"rel_error", s.rel_error}});
  return Json{{"name", c.name},
              {"max_rel_error", c.max_rel_error},
              {"tolerance", c.tolerance},
              {"verdict", c.pass ? "pass" : "fail"},
              {"samples", samples}};
}

Json to_json(const FlatLattice& L) {
  return Json{{"rank", L.rank()},
              {"ambient_dim", L.ambient_dim()},
              {"basis", matrix_rows(L.basis())},
              {"covolume", L.covolume()}};
}

Json to_json(const TubeRegion& t) {
  Json gens = Json::array();
  for (const LatticeVector& a : t.generators.alphas)
    gens.push_back({{"coeffs", a.coeffs}, {"norm", a.norm}});
  Json j;
  j["kind"] = "tube";
  j["cut_height"] = t.cut_height;
  j["r_eps"] = t.cutoff.r_eps();
  j["boundary_torus"] = to_json(t.boundary);
  j["generators"] = {{"alphas", gens},
                     {"canonical", matrix_rows(t.generators.canonical)},
                     {"swap_form", to_string(t.generators.form)},
                     {"k", t.generators.k},
                     {"gamma1_coeffs", t.generators.gamma1.coeffs},
                     {"gamma1_length", t.gamma1_length},
                     {"change_of_basis_det", t.generators.unimodular_check}};
  j["l_min"] = t.l_min;
  j["t0"] = t.t0;
  j["t0_closed_form"] = t.t0_closed_form;
  j["gluing_residual"] = std::fabs(2.0 * std::numbers::pi * t.profile.at(t.t0).s - t.gamma1_length);
  j["delta"] = to_json(t.delta);
  j["volume"] = t.volume;
  j["volume_half_step"] = t.volume_refined;
  j["constant_curvature_volume"] = t.constant_curvature_volume;
  j["boundary_volume"] = t.boundary_volume;
  j["volume_constant_C"] = t.C_n;
  j["volume_ratio"] = t.volume / t.boundary_volume;
  j["pinching"] = to_json(t.pinching);
  j["interface"] = to_json(t.interface);
  j["abelian_witness"] = witness_json(t.witness);
  return j;
}

Json to_json(const ChannelRegion& c) {
  Json j;
  j["kind"] = "channel";
  j["cut_height"] = c.cut_height;
  j["r_eps"] = c.cutoff.r_eps();
  j["lattice"] = to_json(c.lattice);
  j["beta"] = c.beta;
  j["t0"] = c.t0;
  j["volume"] = c.volume;
  j["half_volume"] = c.half_volume;
  j["volume_half_step"] = c.volume_refined;
  j["constant_curvature_volume"] = c.constant_curvature_volume;
  j["pinching"] = to_json(c.pinching);
  j["interface"] = to_json(c.interface);
  j["abelian_witness"] = witness_json(c.witness);
  return j;
}

Json to_json(const ManifoldAssembly& a) {
  Json regions = Json::array();
  for (const TubeRegion& t : a.tubes) regions.push_back(to_json(t));
  for (const ChannelRegion& c : a.channels) regions.push_back(to_json(c));
  const TheoremConditions& c = a.conditions;
  Json j;
  j["dimension"] = a.n;
  j["eps"] = a.eps;
  j["mode"] = to_string(a.mode);
  j["core_volume"] = a.core_volume;
  j["core_copies"] = a.core_copies;
  j["regions"] = regions;
  j["ledger"] = {{"total_volume", a.total_volume},
                 {"region_volume_sum", a.region_volume_sum},
                 {"w_volume", a.w_volume},
                 {"w_fraction", a.w_fraction},
                 {"core_fraction", a.core_fraction},
                 {"volume_bound", optional_number(a.volume_bound)}};
  j["conditions"] = {
      {"i_curvature", c.curvature},
      {"ii_volume", c.volume_checked ? Json(c.volume) : Json("unchecked")},
      {"iii_w_fraction", c.w_fraction},
      {"iv_abelian_rank", c.abelian_rank},
      {"interfaces", c.interfaces},
  };
  j["verdict"] = c.pass() ? "pass" : "fail";
  j["warnings"] = a.warnings;
  return j;
}

Json to_json(const EntropyCertificate& c) {
  Json regions = Json::array();
  for (const RegionEstimate& r : c.regions)
    regions.push_back({{"name", r.name},
                       {"weight", r.weight},
                       {"samples", r.samples},
                       {"mean", r.mean},
                       {"variance", r.variance},
                       {"integrand_min", r.integrand_min},
                       {"integrand_max", r.integrand_max}});
  Json j;
  j["dimension"] = c.n;
  j["eps"] = c.eps;
  j["bw_integral"] = c.bw_integral;
  j["mc_stderr"] = c.mc_stderr;
  j["mc_samples"] = c.mc_samples;
  j["mc_seed"] = c.mc_seed;
  j["w_fraction"] = c.w_fraction;
  j["w_bound"] = c.w_bound;
  j["lambda"] = c.lambda;
  j["bound_before"] = c.bound_before;
  j["bound_after"] = c.bound_after;
  j["eps_bar"] = c.eps_bar;
  j["target"] = c.n - 1 - c.eps_bar;
  j["integrand_max"] = c.integrand_max;
  j["hypothesis"] = c.pinching_certified ? "K <= 0 certified on every region"
                                         : "K <= 0 NOT certified";
  j["regions"] = regions;
  j["chain"] = entropy_chain_report(c);
  return j;
}

std::string profile_csv(const std::vector<ProfileRow>& rows) {
  std::ostringstream out;
  out << "t,s,s',s'',c,c',c'',K_t_phi,K_t_U,K_phi_U,K_U_V\n";
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  for (const ProfileRow& r : rows) {
    const WarpSample& w = r.warp;
    out << num(w.t) << ',' << num(w.s) << ',' << num(w.ds) << ',' << num(w.d2s) << ','
        << num(w.c) << ',' << num(w.dc) << ',' << num(w.d2c) << ',' << opt(r.K.K_t_phi) << ','
        << opt(r.K.K_t_U) << ',' << opt(r.K.K_phi_U) << ',' << opt(r.K.K_U_V) << '\n';
  }
  return out.str();
}

std::string line_chart_svg(const std::string& title, const std::vector<double>& x,
                           const std::vector<ChartSeries>& series) {
  constexpr double W = 720, H = 420, L = 60, R = 160, T = 40, B = 40;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (double v : x) {
    xmin = std::min(xmin, v);
    xmax = std::max(xmax, v);
  }
  for (const ChartSeries& s : series)
    for (double v : s.y)
      if (std::isfinite(v)) {
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
      }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto px = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"15\">" << title << "</text>\n";
  out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
      << H - T - B << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    const double xv = xmin + (xmax - xmin) * i / 4.0;
    out << "<text x=\"" << L - 6 << "\" y=\"" << num(py(yv) + 4, 6)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(yv, 4)
        << "</text>\n";
    out << "<text x=\"" << num(px(xv), 6) << "\" y=\"" << H - B + 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(xv, 4)
        << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const ChartSeries& cs = series[s];
    out << "<polyline fill=\"none\" stroke=\"" << cs.colour << "\" stroke-width=\"1.5\" points=\"";
    const std::size_t stride = std::max<std::size_t>(1, x.size() / 1500);
    for (std::size_t i = 0; i < x.size() && i < cs.y.size(); i += stride) {
      if (!std::isfinite(cs.y[i])) continue;
      out << num(px(x[i]), 7) << ',' << num(py(cs.y[i]), 7) << ' ';
    }
    out << "\"/>\n";
    const double ly = T + 16.0 + 18.0 * static_cast<double>(s);
    out << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30
        << "\" y2=\"" << ly << "\" stroke=\"" << cs.colour << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << W - R + 36 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << cs.name << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace cuspforge
