#pragma once

#include <string>
#include <vector>

#include "anisocap/flow.hpp"
#include "anisocap/norms.hpp"
#include "anisocap/surface.hpp"

namespace anisocap {

// Output routing.  An empty path disables the matching writer; `formats`
// additionally gates each product: "json" (bounds report), "csv" (flow
// trace), "obj" (meshes), "table" (human-readable stdout).
struct OutputSpec {
  std::string report_path;
  std::string trace_path;
  std::string mesh_dir;
  std::vector<std::string> formats{"json", "table", "csv", "obj"};

  bool operator==(const OutputSpec&) const = default;
};

// One full run description: the norm, the body, the grid it is sampled on,
// the capacity exponents, the flow controls, and where results go.
struct RunConfig {
  NormSpec norm;
  RadialSpec body;
  int n_theta = 48;
  int n_phi = 96;
  std::vector<double> p_list{2.0};
  double q = 2.0;  // companion exponent of the interpolated curvature bound
  FlowControls flow;
  OutputSpec outputs;
};

bool operator==(const RunConfig& a, const RunConfig& b);
inline bool operator!=(const RunConfig& a, const RunConfig& b) {
  return !(a == b);
}

// Line-oriented `key = value` text with dotted key sections and `#` comments.
// Unknown keys, malformed lines, unparsable numbers, and wrong-length vector
// values all throw ConfigError.  serialize_config writes every field once in
// a fixed order with %.17g numbers, so parse(serialize(c)) == c exactly and
// serialize(parse(text)) is a canonical form of `text`.
RunConfig parse_config(const std::string& text);
std::string serialize_config(const RunConfig& config);
RunConfig load_config_file(const std::string& path);

// Semantic checks shared by every subcommand: p_list non-empty with entries
// in (1, 3), q in (1, 3), positive grid sizes.  Throws ConfigError.
void validate_config(const RunConfig& config);

// Wavefront mesh of a radial surface: one vertex per grid node plus two
// synthetic pole vertices, quads split into outward-wound triangles; `v` and
// `f` records only.
std::string surface_obj(const RadialSurface& surface);

// Flow trace as CSV: header t,area_F,Tp_<p>...,hawking,shape_dev followed by
// one %.17g row per snapshot.
std::string trace_csv(const FlowTrace& trace);

// Entry point shared by the anisocap binary and the tests; argv follows
// main() conventions (argv[0] is the program name).  Exit codes:
//   0  success
//   1  configuration error (parse failure, invalid values, unwritable paths)
//   2  norm validation failure (ellipticity or duality residuals)
//   3  flow failure (mean convexity lost, step limit exceeded)
//   4  bound-consistency failure: some report's sandwich flag is false
int run_cli(int argc, const char* const* argv);

}  // namespace anisocap
