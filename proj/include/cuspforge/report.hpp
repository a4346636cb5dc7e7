#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cuspforge/assembly.hpp"
#include "cuspforge/entropy.hpp"

namespace cuspforge {

using Json = nlohmann::ordered_json;

Json to_json(const PinchingCertificate& c);
Json to_json(const InterfaceCertificate& c);
Json to_json(const FlatLattice& L);
Json to_json(const TubeRegion& t);
Json to_json(const ChannelRegion& c);
Json to_json(const ManifoldAssembly& a);
Json to_json(const EntropyCertificate& c);

/// Columns: t, s, s', s'', c, c', c'', K_t_phi, K_t_U, K_phi_U, K_U_V.
/// Absent curvatures are written as empty fields.
std::string profile_csv(const std::vector<ProfileRow>& rows);

struct ChartSeries {
  std::string name;
  std::vector<double> y;
  std::string colour;
};

/// Static line chart; same inputs give byte-identical output.
std::string line_chart_svg(const std::string& title, const std::vector<double>& x,
                           const std::vector<ChartSeries>& series);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace cuspforge
